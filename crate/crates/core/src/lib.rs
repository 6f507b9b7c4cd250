//! Classification, closed-form solutions and forbidden sets for the complex
//! Riccati difference equation and six second-order rational difference
//! equations that carry an algebraic invariant, plus a brute-force orbit
//! oracle used to cross-check every formula.

pub mod numerics;
pub mod oracle;
pub mod riccati;
pub mod sampling;
pub mod second_order;

pub use numerics::{approx_eq, csqrt_principal, format_complex, parse_complex, Complex, ParseComplexError, Tolerances};

use thiserror::Error;

/// A step whose denominator is numerically zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("singular step: denominator vanishes")]
pub struct SingularStep;

/// A closed form evaluated past the step at which the orbit hits a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("undefined: orbit is singular at step {step}")]
pub struct Undefined {
    pub step: usize,
}

/// `num / den` under the shared pole test.
#[inline]
pub(crate) fn checked_div(num: Complex, den: Complex, tol: &Tolerances) -> Result<Complex, SingularStep> {
    if tol.is_singular(num, den) {
        Err(SingularStep)
    } else {
        Ok(num / den)
    }
}

/// `z^n` for a non-negative integer exponent.
#[inline]
pub(crate) fn pown(z: Complex, n: usize) -> Complex {
    match u32::try_from(n) {
        Ok(k) => z.powu(k),
        Err(_) => z.powf(n as f64),
    }
}
