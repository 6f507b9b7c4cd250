//! The first-order linear fractional recurrence
//! `x_{n+1} = (alpha + beta x_n) / (A + B x_n)` over the complex numbers.
//!
//! Away from the degenerate parameter sets the substitution
//! `y = (B x + A) / (beta + A)` turns the map into `y_{n+1} = 1 - R / y_n` with
//! `R = (beta A - alpha B) / (beta + A)^2`. Everything below is driven by the
//! two roots `w_pm` of `w^2 - w + R = 0`.

use std::f64::consts::PI;

use crate::numerics::{approx_eq, csqrt_principal, real, Complex, Tolerances};
use crate::{checked_div, pown, SingularStep, Undefined};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiParams {
    pub alpha: Complex,
    pub beta: Complex,
    pub a: Complex,
    pub b: Complex,
}

impl RiccatiParams {
    pub fn new(alpha: Complex, beta: Complex, a: Complex, b: Complex) -> Self {
        Self { alpha, beta, a, b }
    }

    /// `(beta A - alpha B) / (beta + A)^2`, infinite when `beta + A = 0`.
    pub fn r(&self) -> Complex {
        let s = self.beta + self.a;
        (self.beta * self.a - self.alpha * self.b) / (s * s)
    }

    /// The pole `-A/B` of the map.
    pub fn pole(&self) -> Complex {
        -self.a / self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiCase {
    /// `A = B = 0`: no step is ever defined.
    WholePlane,
    /// `B = 0`: the affine map `x -> (alpha + beta x) / A`.
    Affine,
    /// `alpha B = beta A`: constant `beta / B` after one step.
    Constant,
    /// `beta + A = 0`: every orbit has period two.
    PeriodTwo,
    Distinct {
        r: Complex,
        w_minus: Complex,
        w_plus: Complex,
    },
    /// `R = 1/4`.
    DoubleRoot,
    /// Real `R > 1/4`; `phi = arccos(sqrt(1/R) / 2)`.
    Rotation {
        r: f64,
        phi: f64,
    },
}

impl RiccatiCase {
    pub fn number(&self) -> u8 {
        match self {
            RiccatiCase::WholePlane => 1,
            RiccatiCase::Affine => 2,
            RiccatiCase::Constant => 3,
            RiccatiCase::PeriodTwo => 4,
            RiccatiCase::Distinct { .. } => 5,
            RiccatiCase::DoubleRoot => 6,
            RiccatiCase::Rotation { .. } => 7,
        }
    }

    pub fn tag(&self) -> String {
        format!("case{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiClassification {
    pub params: RiccatiParams,
    pub case: RiccatiCase,
    /// Tolerances the classification was made with; reused by the closed form.
    pub tol: Tolerances,
}

impl RiccatiClassification {
    /// Scale factor `(beta + A) / B` of the `y` substitution.
    fn scale(&self) -> Complex {
        (self.params.beta + self.params.a) / self.params.b
    }

    fn y_of(&self, x: Complex) -> Complex {
        let p = &self.params;
        (p.b * x + p.a) / (p.beta + p.a)
    }

    fn x_of(&self, y: Complex) -> Complex {
        self.scale() * y - self.params.a / self.params.b
    }

    /// Case 3 with `beta + A = 0` as well: the constant `beta/B` is the pole,
    /// so every orbit dies at step 2.
    fn constant_hits_pole(&self) -> bool {
        let p = &self.params;
        matches!(self.case, RiccatiCase::Constant) && approx_eq(p.beta, -p.a, &self.tol)
    }
}

/// Pick the unique case, testing the hypotheses in order 1 through 7.
///
/// Zero tests are scale-aware: a quantity counts as zero when it is within
/// `tol.abs + tol.rel * scale` of zero, where `scale` is the size of the
/// terms it was formed from. `Tolerances::exact()` makes every test an exact
/// floating-point comparison.
pub fn classify_riccati(p: RiccatiParams, tol: &Tolerances) -> RiccatiClassification {
    let case = classify_case(&p, tol);
    RiccatiClassification { params: p, case, tol: *tol }
}

fn classify_case(p: &RiccatiParams, tol: &Tolerances) -> RiccatiCase {
    let (na, nb) = (p.a.norm(), p.b.norm());
    if na <= tol.abs && nb <= tol.abs {
        return RiccatiCase::WholePlane;
    }
    if tol.negligible(p.b, na) {
        return RiccatiCase::Affine;
    }
    let det = p.alpha * p.b - p.beta * p.a;
    if tol.negligible(det, (p.alpha.norm() + p.beta.norm()) * (na + nb)) {
        return RiccatiCase::Constant;
    }
    if approx_eq(p.beta, -p.a, tol) {
        return RiccatiCase::PeriodTwo;
    }
    case_from_r(p.r(), tol)
}

/// Cases 5 through 7, decided by `R` alone.
///
/// `R` counts as real when `|Im R| <= tol.abs + tol.rel * |R|`.
pub fn case_from_r(r: Complex, tol: &Tolerances) -> RiccatiCase {
    if r.im.abs() <= tol.abs + tol.rel * r.norm() {
        if approx_eq(real(r.re), real(0.25), tol) {
            return RiccatiCase::DoubleRoot;
        }
        if r.re > 0.25 {
            let phi = (0.5 * (1.0 / r.re).sqrt()).acos();
            return RiccatiCase::Rotation { r: r.re, phi };
        }
    }
    let s = csqrt_principal(1.0 - 4.0 * r);
    RiccatiCase::Distinct { r, w_minus: (1.0 - s) / 2.0, w_plus: (1.0 + s) / 2.0 }
}

/// One application of the map, or [`SingularStep`] at the pole.
pub fn riccati_step(p: &RiccatiParams, x: Complex, tol: &Tolerances) -> Result<Complex, SingularStep> {
    checked_div(p.alpha + p.beta * x, p.a + p.b * x, tol)
}

/// `sum_{i<n} q^i`, summed directly when `q` is close to 1 to avoid cancellation.
pub(crate) fn geometric_sum(q: Complex, n: usize) -> Complex {
    if (q - 1.0).norm() >= 1e-3 || n > 1_000_000 {
        return (pown(q, n) - 1.0) / (q - 1.0);
    }
    let mut acc = Complex::new(0.0, 0.0);
    let mut term = Complex::new(1.0, 0.0);
    for _ in 0..n {
        acc += term;
        term *= q;
    }
    acc
}

/// `x_n` from the closed form of the classified case.
///
/// Fails with the singular step when `x0` lies on the forbidden sequence at an
/// index not exceeding `n`.
pub fn riccati_closed_form(c: &RiccatiClassification, x0: Complex, n: usize) -> Result<Complex, Undefined> {
    if n == 0 {
        return Ok(x0);
    }
    if let Some(step) = riccati_forbidden_contains(c, x0, n, &c.tol) {
        return Err(Undefined { step });
    }
    let p = &c.params;
    let value = match c.case {
        RiccatiCase::WholePlane => return Err(Undefined { step: 1 }),
        RiccatiCase::Affine => {
            let q = p.beta / p.a;
            pown(q, n) * x0 + p.alpha / p.a * geometric_sum(q, n)
        }
        RiccatiCase::Constant => p.beta / p.b,
        RiccatiCase::PeriodTwo => {
            if n.is_multiple_of(2) {
                x0
            } else {
                (p.alpha + p.beta * x0) / (p.a + p.b * x0)
            }
        }
        RiccatiCase::Distinct { w_minus, w_plus, .. } => {
            let y0 = c.y_of(x0);
            let (a, b) = (y0 - w_minus, w_plus - y0);
            // y_n = p_{n+1} / p_n with p_k = a w+^k + b w-^k; divide through by
            // the dominant root so large n cannot overflow.
            let y = if w_plus.norm() >= w_minus.norm() {
                let r = w_minus / w_plus;
                w_plus * (a + b * pown(r, n + 1)) / (a + b * pown(r, n))
            } else {
                let r = w_plus / w_minus;
                w_minus * (a * pown(r, n + 1) + b) / (a * pown(r, n) + b)
            };
            c.x_of(y)
        }
        RiccatiCase::DoubleRoot => {
            let u = 2.0 * c.y_of(x0) - 1.0;
            let m = n as f64;
            c.x_of((1.0 + u * (m + 1.0)) / (2.0 + 2.0 * u * m))
        }
        RiccatiCase::Rotation { r, phi } => {
            let u = 2.0 * c.y_of(x0) - 1.0;
            let q = (4.0 * r - 1.0).sqrt();
            let m = n as f64;
            let num = q * ((m + 1.0) * phi).cos() + u * ((m + 1.0) * phi).sin();
            let den = q * (m * phi).cos() + u * (m * phi).sin();
            c.x_of(r.sqrt() * num / den)
        }
    };
    Ok(value)
}

/// One element of a forbidden sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForbiddenPoint {
    Point(Complex),
    /// Every initial value is forbidden at this index.
    WholePlane,
    /// The forbidden set is empty.
    Empty,
    /// The formula's denominator vanishes: no finite initial value dies at this index.
    AtInfinity,
}

/// The `n`-th forbidden point, `n >= 1`. Starting from it, computing `x_n`
/// hits the pole; the `n = 1` point is the pole `-A/B` itself.
///
/// # Panics
/// If `n == 0`.
pub fn riccati_forbidden_point(c: &RiccatiClassification, n: usize) -> ForbiddenPoint {
    assert!(n >= 1, "forbidden indices start at 1");
    let p = &c.params;
    match c.case {
        RiccatiCase::WholePlane => ForbiddenPoint::WholePlane,
        RiccatiCase::Affine => ForbiddenPoint::Empty,
        RiccatiCase::Constant if n >= 2 && c.constant_hits_pole() => ForbiddenPoint::WholePlane,
        RiccatiCase::Constant | RiccatiCase::PeriodTwo => ForbiddenPoint::Point(p.pole()),
        RiccatiCase::Distinct { w_minus, w_plus, .. } => {
            let (big, small) = if w_plus.norm() >= w_minus.norm() { (w_plus, w_minus) } else { (w_minus, w_plus) };
            // w+ w- (w+^{n-1} - w-^{n-1}) / (w+^n - w-^n), rescaled by the dominant root.
            let r = small / big;
            let y = small * (1.0 - pown(r, n - 1)) / (1.0 - pown(r, n));
            finite_point(c.x_of(y))
        }
        RiccatiCase::DoubleRoot => {
            let m = n as f64;
            ForbiddenPoint::Point(c.x_of(real((m - 1.0) / (2.0 * m))))
        }
        RiccatiCase::Rotation { r, phi } => {
            let angle = n as f64 * phi;
            let s = angle.sin();
            if s.abs() <= 4.0 * n as f64 * f64::EPSILON * angle.max(PI) {
                return ForbiddenPoint::AtInfinity;
            }
            let q = (4.0 * r - 1.0).sqrt();
            let y = 0.5 * (1.0 - q * angle.cos() / s);
            finite_point(c.x_of(real(y)))
        }
    }
}

fn finite_point(x: Complex) -> ForbiddenPoint {
    if x.re.is_finite() && x.im.is_finite() {
        ForbiddenPoint::Point(x)
    } else {
        ForbiddenPoint::AtInfinity
    }
}

/// Smallest `n <= max_n` whose forbidden point matches `x0`.
pub fn riccati_forbidden_contains(
    c: &RiccatiClassification,
    x0: Complex,
    max_n: usize,
    tol: &Tolerances,
) -> Option<usize> {
    match c.case {
        RiccatiCase::WholePlane => return (max_n >= 1).then_some(1),
        RiccatiCase::Affine => return None,
        _ => {}
    }
    (1..=max_n).find(|&n| match riccati_forbidden_point(c, n) {
        ForbiddenPoint::Point(f) => approx_eq(x0, f, tol),
        ForbiddenPoint::WholePlane => true,
        ForbiddenPoint::Empty | ForbiddenPoint::AtInfinity => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    fn params(alpha: f64, beta: f64, a: f64, b: f64) -> RiccatiParams {
        RiccatiParams::new(real(alpha), real(beta), real(a), real(b))
    }

    fn classify(alpha: f64, beta: f64, a: f64, b: f64) -> RiccatiClassification {
        classify_riccati(params(alpha, beta, a, b), &Tolerances::default())
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(0.0, 1.0, 0.0, 0.0).case, RiccatiCase::WholePlane);
        assert_eq!(classify(1.0, 1.0, -1.0, 1.0).case, RiccatiCase::PeriodTwo);
        match classify(-1.0, 1.0, 1.0, 1.0).case {
            RiccatiCase::Rotation { r, phi } => {
                assert_eq!(r, 0.5);
                assert!((phi - PI / 4.0).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(classify(1.0, 2.0, 3.0, 0.0).case, RiccatiCase::Affine);
        assert_eq!(classify(2.0, 1.0, 2.0, 1.0).case, RiccatiCase::Constant);
        assert_eq!(classify(0.0, 1.0, 1.0, 1.0).case, RiccatiCase::DoubleRoot);
        assert_eq!(classify(1.0, 1.0, 1.0, 2.0).case.number(), 5);
    }

    #[test]
    fn distinct_roots_payload() {
        let cl = classify_riccati(
            RiccatiParams::new(c(0.3, -1.2), c(1.0, 0.5), c(-0.7, 0.2), c(1.1, 1.9)),
            &Tolerances::default(),
        );
        let RiccatiCase::Distinct { r, w_minus, w_plus } = cl.case else {
            panic!("expected case 5, got {:?}", cl.case);
        };
        assert!((w_plus + w_minus - 1.0).norm() < 1e-12);
        assert!((w_plus * w_minus - r).norm() < 1e-12);
    }

    #[test]
    fn step_examples() {
        let tol = Tolerances::default();
        assert_eq!(riccati_step(&params(1.0, 1.0, -1.0, 1.0), real(2.0), &tol), Ok(real(3.0)));
        assert_eq!(riccati_step(&params(1.0, 1.0, -1.0, 1.0), real(1.0), &tol), Err(SingularStep));
        assert_eq!(riccati_step(&params(2.0, 1.0, 2.0, 1.0), real(0.0), &tol), Ok(real(1.0)));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(riccati_closed_form(&classify(1.0, 1.0, -1.0, 1.0), real(2.0), 2), Ok(real(2.0)));
        assert_eq!(riccati_closed_form(&classify(2.0, 1.0, 2.0, 1.0), real(0.0), 7), Ok(real(1.0)));
        let v = riccati_closed_form(&classify(0.0, 1.0, 1.0, 1.0), real(1.0), 3).unwrap();
        assert!((v - 0.25).norm() < 1e-15);
        assert_eq!(riccati_closed_form(&classify(0.0, 1.0, 0.0, 0.0), real(1.0), 1), Err(Undefined { step: 1 }));
        assert_eq!(riccati_closed_form(&classify(0.0, 1.0, 0.0, 0.0), real(1.0), 0), Ok(real(1.0)));
    }

    #[test]
    fn affine_closed_form_matches_iteration() {
        let tol = Tolerances::default();
        for p in [params(1.0, 2.0, 3.0, 0.0), params(0.5, 1.0, 1.0, 0.0)] {
            let cl = classify_riccati(p, &tol);
            let mut x = real(0.7);
            for n in 1..=20 {
                x = riccati_step(&p, x, &tol).unwrap();
                let v = riccati_closed_form(&cl, real(0.7), n).unwrap();
                assert!((v - x).norm() <= 1e-12 * x.norm().max(1.0), "n={n}: {v} vs {x}");
            }
        }
    }

    #[test]
    fn forbidden_point_examples() {
        let double = classify(0.0, 1.0, 1.0, 1.0);
        let ForbiddenPoint::Point(f) = riccati_forbidden_point(&double, 3) else { panic!() };
        assert!((f + 1.0 / 3.0).norm() < 1e-15);
        let constant = classify(2.0, 1.0, 2.0, 1.0);
        for n in [1, 4, 9] {
            assert_eq!(riccati_forbidden_point(&constant, n), ForbiddenPoint::Point(real(-2.0)));
        }
        // n = 1 is the pole itself.
        let rot = classify(-1.0, 1.0, 1.0, 1.0);
        let ForbiddenPoint::Point(f) = riccati_forbidden_point(&rot, 1) else { panic!() };
        assert!((f + 1.0).norm() < 1e-15);
        assert_eq!(riccati_forbidden_point(&classify(0.0, 1.0, 0.0, 0.0), 2), ForbiddenPoint::WholePlane);
        assert_eq!(riccati_forbidden_point(&classify(1.0, 2.0, 3.0, 0.0), 2), ForbiddenPoint::Empty);
    }

    #[test]
    fn rotation_with_rational_angle_has_points_at_infinity() {
        // phi = pi/4 so the fourth index has sin(4 phi) = 0.
        let rot = classify(-1.0, 1.0, 1.0, 1.0);
        assert_eq!(riccati_forbidden_point(&rot, 4), ForbiddenPoint::AtInfinity);
    }

    #[test]
    fn contains_examples() {
        let tol = Tolerances::default();
        assert_eq!(riccati_forbidden_contains(&classify(0.0, 1.0, 1.0, 1.0), real(-0.5), 10, &tol), Some(2));
        assert_eq!(riccati_forbidden_contains(&classify(1.0, 2.0, 3.0, 0.0), real(4.0), 10, &tol), None);
        assert_eq!(riccati_forbidden_contains(&classify(1.0, 1.0, -1.0, 1.0), real(5.0), 50, &tol), None);
        assert_eq!(riccati_forbidden_contains(&classify(0.0, 1.0, 0.0, 0.0), real(5.0), 3, &tol), Some(1));
    }

    #[test]
    fn constant_case_landing_on_pole_dies_at_step_two() {
        // alpha B = beta A and beta = -A: x -> -A/B for every x.
        let tol = Tolerances::default();
        let p = params(-1.0, -1.0, 1.0, 1.0);
        let cl = classify_riccati(p, &tol);
        assert_eq!(cl.case, RiccatiCase::Constant);
        assert_eq!(riccati_forbidden_contains(&cl, real(3.0), 5, &tol), Some(2));
        let x1 = riccati_step(&p, real(3.0), &tol).unwrap();
        assert_eq!(riccati_step(&p, x1, &tol), Err(SingularStep));
        assert_eq!(riccati_closed_form(&cl, real(3.0), 2), Err(Undefined { step: 2 }));
    }

    #[test]
    fn exact_tolerances_separate_near_boundary_params() {
        let p = params(1e-13, 1.0, 1.0, 1.0);
        assert_eq!(classify_riccati(p, &Tolerances::default()).case, RiccatiCase::DoubleRoot);
        assert_eq!(classify_riccati(p, &Tolerances::exact()).case.number(), 5);
    }
}
