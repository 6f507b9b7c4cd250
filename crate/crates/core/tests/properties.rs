use proptest::prelude::*;

use rde_core::numerics::c;
use rde_core::oracle::{
    invariant_drift, iterate_orbit, riccati_orbit, second_order_min_denominator, second_order_orbit,
    second_order_pole_resolvable, Outcome,
};
use rde_core::riccati::{classify_riccati, riccati_closed_form, riccati_step, RiccatiCase, RiccatiParams};
use rde_core::second_order::{
    reduced_riccati, so_classify, so_closed_form, so_forbidden_sample, so_invariant, Eq4Case, Eq5Case, EquationId,
    InitialPair, SamplingPlan, SecondOrderClassification, SecondOrderInstance, Subcase,
};
use rde_core::{approx_eq, csqrt_principal, format_complex, parse_complex, Complex, Tolerances};

fn unit_box() -> impl Strategy<Value = Complex> {
    (-2.0..=2.0f64, -2.0..=2.0f64).prop_map(|(re, im)| c(re, im))
}

/// Finite values spanning many binades, including exact zeros and negatives.
fn wide() -> impl Strategy<Value = Complex> {
    let part = prop_oneof![
        1 => Just(0.0),
        4 => (-1.0..1.0f64, -300..300i32).prop_map(|(m, e)| m * 10f64.powi(e)),
        2 => -1e3..1e3f64,
    ];
    (part.clone(), part).prop_map(|(re, im)| c(re, im))
}

fn equation() -> impl Strategy<Value = EquationId> {
    prop::sample::select(EquationId::ALL.to_vec())
}

fn close(a: Complex, b: Complex, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(1.0)
}

/// Re-test the hypotheses of a Riccati case directly from the parameters.
fn hypotheses_hold(p: &RiccatiParams, case: &RiccatiCase, tol: &Tolerances) -> bool {
    let zero = Complex::new(0.0, 0.0);
    let det = p.alpha * p.b - p.beta * p.a;
    let b_zero = tol.negligible(p.b, p.a.norm());
    let det_zero = tol.negligible(det, (p.alpha.norm() + p.beta.norm()) * (p.a.norm() + p.b.norm()));
    let trace_zero = approx_eq(p.beta, -p.a, tol);
    match case {
        RiccatiCase::WholePlane => tol.negligible(p.a, 0.0) && tol.negligible(p.b, 0.0),
        RiccatiCase::Affine => b_zero,
        RiccatiCase::Constant => !b_zero && det_zero,
        RiccatiCase::PeriodTwo => !b_zero && !det_zero && trace_zero,
        RiccatiCase::Distinct { r, .. } => {
            let real_band = r.im.abs() <= tol.abs + tol.rel * r.norm();
            !trace_zero && (!real_band || r.re < 0.25) && !approx_eq(*r, Complex::new(0.25, 0.0), tol)
        }
        RiccatiCase::DoubleRoot => !trace_zero && approx_eq(p.r(), Complex::new(0.25, 0.0), tol),
        RiccatiCase::Rotation { r, phi } => {
            !trace_zero && *r > 0.25 && *phi > 0.0 && *phi < std::f64::consts::FRAC_PI_2 && p.r() != zero
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn square_root_squares_back(z in wide()) {
        let w = csqrt_principal(z);
        prop_assert!((w * w - z).norm() <= 4.0 * f64::EPSILON * z.norm(), "{z} -> {w}");
        prop_assert!(w.re >= 0.0);
        if w.re == 0.0 {
            prop_assert!(w.im >= 0.0);
        }
    }

    #[test]
    fn parse_inverts_format(z in wide()) {
        let text = format_complex(z);
        let back = parse_complex(&text).unwrap();
        prop_assert_eq!(back.re.to_bits(), z.re.to_bits(), "{}", text);
        prop_assert_eq!(back.im.to_bits(), z.im.to_bits(), "{}", text);
    }

    #[test]
    fn classification_is_exhaustive(
        alpha in unit_box(), beta in unit_box(), a in unit_box(), b in unit_box(),
        // Force boundary cases often enough to exercise them.
        mode in 0..5u8,
    ) {
        let p = match mode {
            0 => RiccatiParams::new(alpha, beta, a, Complex::new(0.0, 0.0)),
            1 => RiccatiParams::new(beta * a / b, beta, a, b),
            2 => RiccatiParams::new(alpha, -a, a, b),
            3 => RiccatiParams::new((beta * a - (beta + a) * (beta + a) / 4.0) / b, beta, a, b),
            _ => RiccatiParams::new(alpha, beta, a, b),
        };
        let tol = Tolerances::default();
        let class = classify_riccati(p, &tol);
        prop_assert!(hypotheses_hold(&p, &class.case, &tol), "{:?} -> {:?}", p, class.case);
    }

    #[test]
    fn distinct_root_payload(alpha in unit_box(), beta in unit_box(), a in unit_box(), b in unit_box()) {
        let class = classify_riccati(RiccatiParams::new(alpha, beta, a, b), &Tolerances::default());
        if let RiccatiCase::Distinct { r, w_minus, w_plus } = class.case {
            prop_assert!((w_plus + w_minus - 1.0).norm() <= 1e-12);
            prop_assert!((w_plus * w_minus - r).norm() <= 1e-12 * r.norm().max(1.0));
        }
    }

    #[test]
    fn period_two_is_exact(alpha in unit_box(), a in unit_box(), b in unit_box(), x0 in unit_box()) {
        let class = classify_riccati(RiccatiParams::new(alpha, -a, a, b), &Tolerances::default());
        prop_assume!(class.case == RiccatiCase::PeriodTwo);
        let x1 = riccati_closed_form(&class, x0, 1);
        prop_assume!(x1.is_ok());
        for n in 0..=20 {
            prop_assert_eq!(riccati_closed_form(&class, x0, 2 * n), Ok(x0));
            prop_assert_eq!(riccati_closed_form(&class, x0, 2 * n + 1), x1);
        }
    }

    #[test]
    fn riccati_steps_match_orbit(alpha in unit_box(), beta in unit_box(), a in unit_box(), b in unit_box(), x0 in unit_box()) {
        let p = RiccatiParams::new(alpha, beta, a, b);
        let tol = Tolerances::default();
        let t = riccati_orbit(&p, x0, 20, &tol);
        prop_assert_eq!(t.values.len(), t.order + t.steps());
        for w in t.values.windows(2) {
            prop_assert_eq!(riccati_step(&p, w[0], &tol), Ok(w[1]));
        }
        if let Outcome::SingularAt { step } = t.outcome {
            prop_assert_eq!(t.steps(), step - 1);
        }
    }

    #[test]
    fn invariant_is_conserved(eq in equation(), b in unit_box(), z0 in unit_box(), zm1 in unit_box()) {
        let inst = SecondOrderInstance { eq, b };
        let init = InitialPair::new(z0, zm1);
        prop_assume!(SecondOrderInstance::new(eq, b).is_ok());
        prop_assume!(so_invariant(&inst, z0, zm1).is_some());
        prop_assume!(second_order_min_denominator(&inst, init, 40) >= 1e-6);
        let c0 = so_invariant(&inst, z0, zm1).unwrap();
        let drift = invariant_drift(&inst, init, 40, &Tolerances::default()).unwrap();
        prop_assert!(drift <= 1e-9 * c0.norm().max(1.0), "drift {drift} for C={c0}");
    }

    #[test]
    fn reduced_map_reproduces_orbit(eq in equation(), b in unit_box(), z0 in unit_box(), zm1 in unit_box()) {
        let inst = SecondOrderInstance { eq, b };
        let init = InitialPair::new(z0, zm1);
        prop_assume!(SecondOrderInstance::new(eq, b).is_ok());
        prop_assume!(second_order_min_denominator(&inst, init, 25) >= 1e-6);
        let cval = so_invariant(&inst, z0, zm1);
        prop_assume!(cval.is_some());
        let reduced = reduced_riccati(&inst, cval.unwrap());
        let tol = Tolerances::default();
        let full = second_order_orbit(&inst, init, 25, &tol);
        let first = iterate_orbit(|w: &[Complex]| riccati_step(&reduced, w[0], &tol), &[z0], 25);
        prop_assume!(first.outcome == Outcome::Completed);
        for n in 1..=25i64 {
            let (x, y) = (full.at(n).unwrap(), first.at(n).unwrap());
            // Reduced and direct orbits share the conditioning of the map.
            prop_assert!(close(y, x, 1e-6), "n={n}: {x} vs {y}");
        }
    }

    #[test]
    fn sampled_forbidden_points_die_on_schedule(
        eq in equation(), b in unit_box(), cs in prop::collection::vec(unit_box(), 1..3), zs in prop::collection::vec(unit_box(), 1..3),
    ) {
        let inst = SecondOrderInstance { eq, b };
        prop_assume!(SecondOrderInstance::new(eq, b).is_ok() && b.norm() > 0.1);
        let plan = SamplingPlan { c_values: cs, line_samples: zs };
        let sample = so_forbidden_sample(&inst, 6, &plan).unwrap();
        let tol = Tolerances::default();
        for p in &sample.points {
            let t = second_order_orbit(&inst, InitialPair::new(p.z0, p.zm1), p.step + 2, &tol);
            // Only poles that double precision can land on are held to the
            // exact schedule.
            let init = InitialPair::new(p.z0, p.zm1);
            if second_order_min_denominator(&inst, init, p.step - 1) < 1e-6
                || !second_order_pole_resolvable(&inst, init, p.step, &tol)
            {
                continue;
            }
            prop_assert_eq!(t.outcome, Outcome::SingularAt { step: p.step }, "{:?}", p);
        }
        for l in &sample.lines {
            for z in &plan.line_samples {
                let init = match l.fixed {
                    rde_core::second_order::Coordinate::Z0 => InitialPair::new(l.value, *z),
                    rde_core::second_order::Coordinate::Zm1 => InitialPair::new(*z, l.value),
                };
                if second_order_min_denominator(&inst, init, l.step - 1) < 1e-6
                    || !second_order_pole_resolvable(&inst, init, l.step, &tol)
                {
                    continue;
                }
                let t = second_order_orbit(&inst, init, l.step + 2, &tol);
                prop_assert_eq!(t.outcome, Outcome::SingularAt { step: l.step }, "{:?} at {}", l, z);
            }
        }
    }

    #[test]
    fn degenerate_branches_close(b in unit_box(), z in unit_box()) {
        prop_assume!(b.norm() > 0.1 && z.norm() > 0.1);
        let tol = Tolerances::default();
        let pole = -b.inv();

        let eq4 = SecondOrderInstance { eq: EquationId::Eq4, b };
        let init = InitialPair::new(z, pole);
        prop_assume!(second_order_min_denominator(&eq4, init, 20) >= 1e-6);
        let t = second_order_orbit(&eq4, init, 20, &tol);
        for n in (1..=19).step_by(2) {
            prop_assert!(close(t.at(n).unwrap(), pole, 1e-12));
        }

        let eq5 = SecondOrderInstance { eq: EquationId::Eq5, b };
        let init = InitialPair::new(pole, z);
        let t = second_order_orbit(&eq5, init, 20, &tol);
        prop_assert!((0..=20).all(|n| close(t.at(n).unwrap(), pole, 1e-12)));

        let eq9 = SecondOrderInstance { eq: EquationId::Eq9, b };
        let t = second_order_orbit(&eq9, InitialPair::new(-b, z), 20, &tol);
        prop_assert!((0..=20).all(|n| close(t.at(n).unwrap(), -b, 1e-12)));

        let eq8 = SecondOrderInstance { eq: EquationId::Eq8, b };
        let t = second_order_orbit(&eq8, InitialPair::new(Complex::new(0.0, 0.0), z), 20, &tol);
        prop_assert!((0..=20).all(|n| t.at(n) == Some(Complex::new(0.0, 0.0))));
    }

    #[test]
    fn overlapping_eq4_hypotheses_agree(b in unit_box()) {
        prop_assume!(b.norm() > 0.1);
        let pole = -b.inv();
        let inst = SecondOrderInstance { eq: EquationId::Eq4, b };
        let init = InitialPair::new(pole, pole);
        let tol = Tolerances::default();
        let even = so_classify(&inst, init, &tol).unwrap();
        prop_assert_eq!(even.subcase, Subcase::Eq4(Eq4Case::EvenPole));
        let odd = SecondOrderClassification { subcase: Subcase::Eq4(Eq4Case::OddPole), ..even };
        let t = second_order_orbit(&inst, init, 12, &tol);
        prop_assert_eq!(t.outcome, Outcome::Completed);
        for n in 0..=12i64 {
            let z = t.at(n).unwrap();
            prop_assert!(close(z, pole, 1e-12));
            prop_assert!(close(so_closed_form(&even, n).unwrap(), z, 1e-12));
            prop_assert!(close(so_closed_form(&odd, n).unwrap(), z, 1e-12));
        }
    }

    #[test]
    fn eq5_pole_dispatch(b in unit_box(), z in unit_box()) {
        prop_assume!(b.norm() > 0.1);
        let inst = SecondOrderInstance { eq: EquationId::Eq5, b };
        let class = so_classify(&inst, InitialPair::new(-b.inv(), z), &Tolerances::default()).unwrap();
        prop_assert_eq!(class.subcase, Subcase::Eq5(Eq5Case::Pole));
    }
}
