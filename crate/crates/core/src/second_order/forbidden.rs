//! Forbidden initial pairs: membership by reduction of order, and sampling of
//! the forbidden sets for plotting and testing.
//!
//! A branch's set-builder index `n` and the step at which the orbit actually
//! dies differ on the interleaved and linear branches, so both are reported.

use std::fmt;

use thiserror::Error;

use super::classify::{is_minus_one, is_zero, reduced_classification};
use super::{so_invariant, EquationId, InitialPair, SecondOrderError, SecondOrderInstance};
use crate::numerics::{approx_eq, real, Complex, Tolerances};
use crate::riccati::{
    geometric_sum, riccati_forbidden_contains, riccati_forbidden_point, ForbiddenPoint, RiccatiCase,
    RiccatiClassification, RiccatiParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// The first step is singular.
    Seed,
    /// eq4 with `z_{-1} = -1/B`.
    OddPole,
    /// eq4 with `z0 = -1/B`.
    EvenPole,
    /// eq5 with `z0 = 0`.
    ZeroStart,
    /// eq5 with `z_{-1} = 0`.
    ZeroPrev,
    /// Forbidden sequence of the reduced map at a generic invariant value.
    Reduced,
    /// Forbidden sequence of the reduced map at the double-root invariant value.
    DoubleRoot,
    /// A coordinate line on which every pair is forbidden.
    Axis,
    Geometric,
    Arithmetic,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Seed => "seed",
            Branch::OddPole => "odd-pole",
            Branch::EvenPole => "even-pole",
            Branch::ZeroStart => "zero-start",
            Branch::ZeroPrev => "zero-prev",
            Branch::Reduced => "reduced",
            Branch::DoubleRoot => "double-root",
            Branch::Axis => "axis",
            Branch::Geometric => "geometric",
            Branch::Arithmetic => "arithmetic",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of a successful membership query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForbiddenHit {
    pub branch: Branch,
    /// Set-builder index within the branch.
    pub n: usize,
    /// Step whose denominator vanishes (computing `z_step`).
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForbiddenPoint2D {
    pub z0: Complex,
    pub zm1: Complex,
    pub branch: Branch,
    pub n: usize,
    pub step: usize,
    /// Invariant value of the continuum member this point was drawn from.
    pub c: Option<Complex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Z0,
    Zm1,
}

/// A full coordinate line `{coordinate = value}` inside the forbidden set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineDescriptor {
    pub branch: Branch,
    pub fixed: Coordinate,
    pub value: Complex,
    pub step: usize,
}

/// Parameter values at which continuum branches are sampled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SamplingPlan {
    /// Invariant values `C` for the one-parameter families.
    pub c_values: Vec<Complex>,
    /// Values of the free coordinate along forbidden lines.
    pub line_samples: Vec<Complex>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForbiddenSample {
    pub points: Vec<ForbiddenPoint2D>,
    pub lines: Vec<LineDescriptor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SampleError {
    #[error("sampling plan has no parameter values")]
    EmptyGrid,
    #[error(transparent)]
    Instance(#[from] SecondOrderError),
}

/// Map followed by every other term on the interleaved branches: eq4 even
/// terms when `z_{-1} = -1/B`, eq5 odd terms when `z0 = 0`. Both have a double
/// root, so their forbidden sequences are rational in the index.
fn half_map(inst: &SecondOrderInstance, tol: &Tolerances) -> RiccatiClassification {
    let b = inst.b;
    let params = match inst.eq {
        // x -> -1 / (2B + B^2 x)
        EquationId::Eq4 => RiccatiParams::new(real(-1.0), real(0.0), 2.0 * b, b * b),
        // x -> x / (1 - B x)
        EquationId::Eq5 => RiccatiParams::new(real(0.0), real(1.0), real(1.0), -b),
        _ => unreachable!("only eq4 and eq5 interleave"),
    };
    RiccatiClassification { params, case: RiccatiCase::DoubleRoot, tol: *tol }
}

fn hit(branch: Branch, n: usize, step: usize, max_n: usize) -> Option<ForbiddenHit> {
    (step <= max_n).then_some(ForbiddenHit { branch, n, step })
}

fn reduced_hit(
    inst: &SecondOrderInstance,
    c: Complex,
    z0: Complex,
    max_n: usize,
    tol: &Tolerances,
) -> Option<ForbiddenHit> {
    let rc = reduced_classification(inst, c, tol);
    let n = riccati_forbidden_contains(&rc, z0, max_n, tol)?;
    let branch = match rc.case {
        RiccatiCase::Constant => Branch::Seed,
        RiccatiCase::DoubleRoot => Branch::DoubleRoot,
        _ => Branch::Reduced,
    };
    Some(ForbiddenHit { branch, n, step: n })
}

/// `B sum_{j=1..k} C^{-j}`: the eq6 initial value with `z_k = 0`.
fn eq6_point(b: Complex, c: Complex, k: usize) -> Complex {
    let q = c.inv();
    b * q * geometric_sum(q, k)
}

/// `-B sum_{j=0..k} C^j`: the eq7 initial value with `z_k = -B`.
fn eq7_point(b: Complex, c: Complex, k: usize) -> Complex {
    -b * geometric_sum(c, k + 1)
}

/// Whether `init` is forbidden with its singular step at most `max_n`.
///
/// Degenerate branches are dispatched first; otherwise the pair's own
/// invariant value selects the reduced first-order map, whose forbidden
/// sequence (or the linear pole condition for eq6/eq7) decides membership.
pub fn so_forbidden_contains(
    inst: &SecondOrderInstance,
    init: InitialPair,
    max_n: usize,
    tol: &Tolerances,
) -> Option<ForbiddenHit> {
    let b = inst.b;
    let InitialPair { z0, zm1 } = init;
    match inst.eq {
        EquationId::Eq4 => {
            if is_zero(b * z0, tol) {
                return if is_minus_one(b * zm1, tol) { hit(Branch::Seed, 1, 1, max_n) } else { None };
            }
            if is_minus_one(b * z0, tol) {
                let m = riccati_forbidden_contains(&half_map(inst, tol), zm1, max_n.div_ceil(2), tol)?;
                return hit(Branch::EvenPole, m, 2 * m - 1, max_n);
            }
            if is_minus_one(b * zm1, tol) {
                let m = riccati_forbidden_contains(&half_map(inst, tol), z0, max_n / 2, tol)?;
                return hit(Branch::OddPole, m, 2 * m, max_n);
            }
            reduced_hit(inst, so_invariant(inst, z0, zm1)?, z0, max_n, tol)
        }
        EquationId::Eq5 => {
            if is_minus_one(b * z0, tol) {
                return if is_zero(b * zm1, tol) { hit(Branch::Seed, 1, 1, max_n) } else { None };
            }
            if is_zero(b * z0, tol) {
                let m = riccati_forbidden_contains(&half_map(inst, tol), zm1, max_n.div_ceil(2), tol)?;
                return hit(Branch::ZeroStart, m, 2 * m - 1, max_n);
            }
            if is_zero(b * zm1, tol) {
                let m = riccati_forbidden_contains(&half_map(inst, tol), z0, max_n / 2, tol)?;
                return hit(Branch::ZeroPrev, m, 2 * m, max_n);
            }
            reduced_hit(inst, so_invariant(inst, z0, zm1)?, z0, max_n, tol)
        }
        EquationId::Eq6 => {
            if tol.negligible(zm1, z0.norm() + b.norm()) {
                return hit(Branch::Axis, 1, 1, max_n);
            }
            if tol.negligible(z0, zm1.norm() + b.norm()) {
                return hit(Branch::Axis, 2, 2, max_n);
            }
            let c = (z0 + b) / zm1;
            if is_zero(c, tol) {
                return None;
            }
            let branch = if approx_eq(c, real(1.0), tol) { Branch::Arithmetic } else { Branch::Geometric };
            let k = (1..=max_n.saturating_sub(2)).find(|&k| approx_eq(z0, eq6_point(b, c, k), tol))?;
            hit(branch, k, k + 2, max_n)
        }
        EquationId::Eq7 => {
            if approx_eq(zm1, -b, tol) {
                return hit(Branch::Axis, 1, 1, max_n);
            }
            if approx_eq(z0, -b, tol) {
                return hit(Branch::Axis, 2, 2, max_n);
            }
            if tol.negligible(z0, zm1.norm() + b.norm()) {
                return None;
            }
            let c = (zm1 + b) / z0;
            let branch = if approx_eq(c, real(1.0), tol) { Branch::Arithmetic } else { Branch::Geometric };
            let k = (1..=max_n.saturating_sub(2)).find(|&k| approx_eq(z0, eq7_point(b, c, k), tol))?;
            hit(branch, k, k + 2, max_n)
        }
        EquationId::Eq8 | EquationId::Eq9 => reduced_hit(inst, so_invariant(inst, z0, zm1)?, z0, max_n, tol),
    }
}

/// Invariant value of the double-root member of the continuum family.
fn double_root_c(inst: &SecondOrderInstance) -> Option<Complex> {
    let b = inst.b;
    match inst.eq {
        EquationId::Eq4 => Some(4.0 * b),
        EquationId::Eq5 | EquationId::Eq8 | EquationId::Eq9 => Some(-b * b / 4.0),
        EquationId::Eq6 | EquationId::Eq7 => None,
    }
}

/// `z_{-1}` completing `z0 = a` on the level set `C`, or `None` where the
/// family excludes `a`.
fn partner(inst: &SecondOrderInstance, c: Complex, a: Complex, tol: &Tolerances) -> Option<Complex> {
    let b = inst.b;
    let excluded = match inst.eq {
        EquationId::Eq4 | EquationId::Eq5 => is_zero(b * a, tol) || is_minus_one(b * a, tol),
        EquationId::Eq8 => is_zero(a / b, tol),
        EquationId::Eq9 => is_minus_one(a / b, tol),
        EquationId::Eq6 | EquationId::Eq7 => unreachable!("linear families have explicit partners"),
    };
    if excluded {
        return None;
    }
    Some(match inst.eq {
        EquationId::Eq4 => (c * a - b * a - 1.0) / (b * b * a + b),
        EquationId::Eq5 => (b * a + 1.0) / (c * a),
        EquationId::Eq8 => c / a - b,
        _ => c / (a + b),
    })
}

fn push_reduced_family(
    out: &mut Vec<ForbiddenPoint2D>,
    inst: &SecondOrderInstance,
    c: Complex,
    branch: Branch,
    n_max: usize,
    tol: &Tolerances,
) {
    let rc = reduced_classification(inst, c, tol);
    for n in 1..=n_max {
        let ForbiddenPoint::Point(a) = riccati_forbidden_point(&rc, n) else {
            continue;
        };
        if let Some(zm1) = partner(inst, c, a, tol) {
            out.push(ForbiddenPoint2D { z0: a, zm1, branch, n, step: n, c: Some(c) });
        }
    }
}

/// Points of the forbidden set with set-builder index `n <= n_max`.
///
/// Countable branches are enumerated exactly. One-parameter families are
/// sampled at `plan.c_values`, skipping values that coincide with a countable
/// branch or admit no family. Forbidden coordinate lines are reported as
/// [`LineDescriptor`]s plus one point per `plan.line_samples` value.
pub fn so_forbidden_sample(
    inst: &SecondOrderInstance,
    n_max: usize,
    plan: &SamplingPlan,
) -> Result<ForbiddenSample, SampleError> {
    inst.validate()?;
    if plan.c_values.is_empty() && plan.line_samples.is_empty() {
        return Err(SampleError::EmptyGrid);
    }
    let tol = Tolerances::default();
    let b = inst.b;
    let mut points = Vec::new();
    let mut lines = Vec::new();
    let point = |z0, zm1, branch, n, step| ForbiddenPoint2D { z0, zm1, branch, n, step, c: None };

    match inst.eq {
        EquationId::Eq4 | EquationId::Eq5 => {
            let half = half_map(inst, &tol);
            let pole = -b.inv();
            let (first, second) = if inst.eq == EquationId::Eq4 {
                points.push(point(real(0.0), pole, Branch::Seed, 1, 1));
                ((Branch::OddPole, pole), (Branch::EvenPole, pole))
            } else {
                points.push(point(pole, real(0.0), Branch::Seed, 1, 1));
                ((Branch::ZeroPrev, real(0.0)), (Branch::ZeroStart, real(0.0)))
            };
            for n in 1..=n_max {
                let ForbiddenPoint::Point(f) = riccati_forbidden_point(&half, n) else {
                    unreachable!("double-root sequences are finite");
                };
                // Fixed z_{-1}: the free z0 dies at step 2n. Fixed z0: z_{-1} dies at 2n - 1.
                points.push(point(f, first.1, first.0, n, 2 * n));
                points.push(point(second.1, f, second.0, n, 2 * n - 1));
            }
        }
        EquationId::Eq6 | EquationId::Eq7 => {
            type Pair = fn(Complex, usize) -> (Complex, Complex);
            let (value, arithmetic): (Complex, Pair) = if inst.eq == EquationId::Eq6 {
                (real(0.0), |b, n| (n as f64 * b, (n + 1) as f64 * b))
            } else {
                (-b, |b, n| (-((n + 1) as f64) * b, -((n + 2) as f64) * b))
            };
            lines.push(LineDescriptor { branch: Branch::Axis, fixed: Coordinate::Zm1, value, step: 1 });
            lines.push(LineDescriptor { branch: Branch::Axis, fixed: Coordinate::Z0, value, step: 2 });
            for &s in &plan.line_samples {
                points.push(point(s, value, Branch::Axis, 1, 1));
                if !approx_eq(s, value, &tol) {
                    points.push(point(value, s, Branch::Axis, 2, 2));
                }
            }
            if !is_zero(b, &tol) {
                for n in 1..=n_max {
                    let (z0, zm1) = arithmetic(b, n);
                    points.push(point(z0, zm1, Branch::Arithmetic, n, n + 2));
                }
            }
        }
        EquationId::Eq8 | EquationId::Eq9 => {
            let seed = if inst.eq == EquationId::Eq8 { -b } else { real(0.0) };
            points.push(point(seed, seed, Branch::Seed, 1, 1));
        }
    }

    if let Some(c) = double_root_c(inst) {
        push_reduced_family(&mut points, inst, c, Branch::DoubleRoot, n_max, &tol);
    }
    for &c in &plan.c_values {
        let skip = is_zero(c, &tol) || double_root_c(inst).is_some_and(|d| approx_eq(c, d, &tol));
        match inst.eq {
            _ if skip => {}
            EquationId::Eq6 | EquationId::Eq7 => {
                if approx_eq(c, real(1.0), &tol) || is_zero(b, &tol) {
                    continue;
                }
                for n in 1..=n_max {
                    let (z0, zm1) = if inst.eq == EquationId::Eq6 {
                        (eq6_point(b, c, n), eq6_point(b, c, n + 1))
                    } else {
                        (eq7_point(b, c, n), eq7_point(b, c, n + 1))
                    };
                    points.push(ForbiddenPoint2D { z0, zm1, branch: Branch::Geometric, n, step: n + 2, c: Some(c) });
                }
            }
            _ => push_reduced_family(&mut points, inst, c, Branch::Reduced, n_max, &tol),
        }
    }
    Ok(ForbiddenSample { points, lines })
}
