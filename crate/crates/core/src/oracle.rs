//! Brute-force orbit iteration and cross-checks against the closed forms.
//!
//! Nothing here uses the classification machinery except to call the closed
//! form being checked; orbits come from the raw step functions.

use thiserror::Error;

use crate::numerics::{Complex, Tolerances};
use crate::riccati::{riccati_closed_form, riccati_step, RiccatiClassification, RiccatiParams};
use crate::second_order::{
    so_closed_form, so_invariant, so_step, so_step_parts, InitialPair, SecondOrderClassification, SecondOrderInstance,
};
use crate::{checked_div, SingularStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    /// Computing the value at this step hit a pole.
    SingularAt {
        step: usize,
    },
}

/// A finite orbit: the initial window followed by every computed value.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub values: Vec<Complex>,
    /// Length of the initial window.
    pub order: usize,
    pub outcome: Outcome,
}

impl Trajectory {
    /// Number of steps actually computed.
    pub fn steps(&self) -> usize {
        self.values.len() - self.order
    }

    /// Value at index `n`, where index 0 is the last initial value.
    pub fn at(&self, n: i64) -> Option<Complex> {
        let i = n + self.order as i64 - 1;
        usize::try_from(i).ok().and_then(|i| self.values.get(i)).copied()
    }
}

/// Apply `stepper` to the trailing window (oldest first) up to `n_max` times.
pub fn iterate_orbit<F>(mut stepper: F, init: &[Complex], n_max: usize) -> Trajectory
where
    F: FnMut(&[Complex]) -> Result<Complex, SingularStep>,
{
    let order = init.len();
    let mut values = Vec::with_capacity(order + n_max);
    values.extend_from_slice(init);
    for step in 1..=n_max {
        match stepper(&values[values.len() - order..]) {
            Ok(next) => values.push(next),
            Err(SingularStep) => {
                return Trajectory { values, order, outcome: Outcome::SingularAt { step } };
            }
        }
    }
    Trajectory { values, order, outcome: Outcome::Completed }
}

pub fn riccati_orbit(p: &RiccatiParams, x0: Complex, n_max: usize, tol: &Tolerances) -> Trajectory {
    iterate_orbit(|w| riccati_step(p, w[0], tol), &[x0], n_max)
}

/// Orbit from `(z0, z_{-1})`; `values` starts with `z_{-1}`.
pub fn second_order_orbit(inst: &SecondOrderInstance, init: InitialPair, n_max: usize, tol: &Tolerances) -> Trajectory {
    iterate_orbit(|w| so_step(inst, w[1], w[0], tol), &[init.zm1, init.z0], n_max)
}

/// `x_{n+1} = (alpha + x_n + ... + x_{n-k+1}) / x_{n-k}` on a window of `k + 1` values.
pub fn lyness_step(alpha: Complex, window: &[Complex], tol: &Tolerances) -> Result<Complex, SingularStep> {
    let (oldest, rest) = window.split_first().expect("window holds k + 1 >= 2 values");
    checked_div(alpha + rest.iter().sum::<Complex>(), *oldest, tol)
}

pub fn lyness_orbit(alpha: Complex, window: &[Complex], n_max: usize, tol: &Tolerances) -> Trajectory {
    iterate_orbit(|w| lyness_step(alpha, w, tol), window, n_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LynessError {
    #[error("window entry {index} is zero")]
    ZeroEntry { index: usize },
    #[error("order {k} needs a window of {} values, got {len}", k + 1)]
    WindowLength { k: usize, len: usize },
}

/// `(alpha + sum x_i) * prod (1 + 1/x_i)` over a window of `k + 1` values.
pub fn lyness_invariant(k: usize, alpha: Complex, window: &[Complex]) -> Result<Complex, LynessError> {
    if k == 0 || window.len() != k + 1 {
        return Err(LynessError::WindowLength { k, len: window.len() });
    }
    if let Some(index) = window.iter().position(|x| *x == Complex::new(0.0, 0.0)) {
        return Err(LynessError::ZeroEntry { index });
    }
    let sum: Complex = window.iter().sum();
    let product: Complex = window.iter().map(|x| 1.0 + x.inv()).product();
    Ok((alpha + sum) * product)
}

/// Largest `|I(z_{n+1}, z_n) - I(z0, z_{-1})|` along the orbit, stopping at
/// the first singular step. `None` when the invariant is undefined at `init`.
pub fn invariant_drift(inst: &SecondOrderInstance, init: InitialPair, n_max: usize, tol: &Tolerances) -> Option<f64> {
    let i0 = so_invariant(inst, init.z0, init.zm1)?;
    let orbit = second_order_orbit(inst, init, n_max, tol);
    let drift = orbit
        .values
        .windows(2)
        .skip(1)
        .filter_map(|w| so_invariant(inst, w[1], w[0]))
        .map(|i| (i - i0).norm())
        .fold(0.0, f64::max);
    Some(drift)
}

/// Smallest `|den| / max(1, |num|)` over the first `n_max` steps; zero once a
/// step is singular.
pub fn min_denominator_ratio<F>(mut parts: F, init: &[Complex], n_max: usize) -> f64
where
    F: FnMut(&[Complex]) -> (Complex, Complex),
{
    let order = init.len();
    let mut window = init.to_vec();
    let mut worst = f64::INFINITY;
    for _ in 0..n_max {
        let (num, den) = parts(&window[window.len() - order..]);
        let ratio = den.norm() / num.norm().max(1.0);
        worst = worst.min(ratio);
        if ratio.is_nan() || ratio <= 0.0 {
            return 0.0;
        }
        window.push(num / den);
    }
    worst
}

/// Whether a pole predicted at `step` can be observed in double precision.
///
/// The denominator ratio at `step` is differentiated numerically with
/// respect to each initial value. A start value carries a few ulps of error,
/// and when that error, amplified by the orbit, would exceed the singular
/// threshold, no floating-point iteration can land on the pole.
pub fn pole_resolvable<F>(mut parts: F, init: &[Complex], step: usize, tol: &Tolerances) -> bool
where
    F: FnMut(&[Complex]) -> (Complex, Complex),
{
    assert!(step >= 1, "steps are numbered from 1");
    let order = init.len();
    let mut ratio_at = |start: &[Complex]| {
        let mut window = start.to_vec();
        for _ in 1..step {
            let (num, den) = parts(&window[window.len() - order..]);
            window.push(num / den);
        }
        let (num, den) = parts(&window[window.len() - order..]);
        den / num.norm().max(1.0)
    };
    let base = ratio_at(init);
    let mut predicted = 0.0;
    for i in 0..order {
        let scale = init[i].norm().max(1.0);
        // An expanding orbit saturates large differences, so take the
        // steepest slope over several step sizes.
        let mut slope = 0.0f64;
        for h in [1e-6, 1e-9, 1e-12].map(|r| r * scale) {
            for dir in [Complex::new(h, 0.0), Complex::new(0.0, h)] {
                let mut shifted = init.to_vec();
                shifted[i] += dir;
                let s = (ratio_at(&shifted) - base).norm() / h;
                slope = if s.is_nan() { f64::INFINITY } else { slope.max(s) };
            }
        }
        predicted += slope * 8.0 * f64::EPSILON * scale;
    }
    predicted.is_finite() && predicted <= tol.singular
}

pub fn riccati_pole_resolvable(p: &RiccatiParams, x0: Complex, step: usize, tol: &Tolerances) -> bool {
    pole_resolvable(|w| (p.alpha + p.beta * w[0], p.a + p.b * w[0]), &[x0], step, tol)
}

pub fn second_order_pole_resolvable(
    inst: &SecondOrderInstance,
    init: InitialPair,
    step: usize,
    tol: &Tolerances,
) -> bool {
    pole_resolvable(|w| so_step_parts(inst, w[1], w[0]), &[init.zm1, init.z0], step, tol)
}

pub fn riccati_min_denominator(p: &RiccatiParams, x0: Complex, n_max: usize) -> f64 {
    min_denominator_ratio(|w| (p.alpha + p.beta * w[0], p.a + p.b * w[0]), &[x0], n_max)
}

pub fn second_order_min_denominator(inst: &SecondOrderInstance, init: InitialPair, n_max: usize) -> f64 {
    min_denominator_ratio(|w| so_step_parts(inst, w[1], w[0]), &[init.zm1, init.z0], n_max)
}

/// What to cross-check: a classified Riccati map with its start value, or a
/// classified second-order initial pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerifyTarget {
    Riccati { class: RiccatiClassification, x0: Complex },
    SecondOrder(SecondOrderClassification),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    /// Largest `|closed - orbit| / max(1, |orbit|)`; infinite on outcome mismatch.
    pub max_rel_error: f64,
    /// First index whose error exceeds `tol.rel`, or where outcomes diverge.
    pub first_disagreement: Option<usize>,
    pub oracle_outcome: Outcome,
    pub closed_form_outcome: Outcome,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.first_disagreement.is_none()
    }
}

/// Compare the closed form with direct iteration for indices `1..=n_max`.
///
/// `tol.rel` is the acceptance threshold and `tol.singular` the pole test of
/// the orbit.
pub fn verify_closed_form(target: &VerifyTarget, n_max: usize, tol: &Tolerances) -> VerificationReport {
    type ClosedForm = Box<dyn Fn(usize) -> Result<Complex, crate::Undefined>>;
    let (orbit, closed): (Trajectory, ClosedForm) = match *target {
        VerifyTarget::Riccati { class, x0 } => {
            (riccati_orbit(&class.params, x0, n_max, tol), Box::new(move |n| riccati_closed_form(&class, x0, n)))
        }
        VerifyTarget::SecondOrder(class) => (
            second_order_orbit(&class.instance, class.init, n_max, tol),
            Box::new(move |n| so_closed_form(&class, n as i64)),
        ),
    };

    let mut max_rel_error: f64 = 0.0;
    let mut first_disagreement = None;
    let mut closed_form_outcome = Outcome::Completed;
    for n in 1..=n_max {
        let value = match closed(n) {
            Ok(v) => v,
            Err(e) => {
                closed_form_outcome = Outcome::SingularAt { step: e.step };
                break;
            }
        };
        let Some(expected) = orbit.at(n as i64) else { break };
        let err = (value - expected).norm() / expected.norm().max(1.0);
        let err = if err.is_nan() { f64::INFINITY } else { err };
        max_rel_error = max_rel_error.max(err);
        if err > tol.rel && first_disagreement.is_none() {
            first_disagreement = Some(n);
        }
    }

    if closed_form_outcome != orbit.outcome {
        max_rel_error = f64::INFINITY;
        let step = |o: Outcome| match o {
            Outcome::SingularAt { step } => step,
            Outcome::Completed => n_max,
        };
        let at = step(closed_form_outcome).min(step(orbit.outcome));
        first_disagreement = Some(first_disagreement.map_or(at, |d: usize| d.min(at)));
    }
    VerificationReport { max_rel_error, first_disagreement, oracle_outcome: orbit.outcome, closed_form_outcome }
}
