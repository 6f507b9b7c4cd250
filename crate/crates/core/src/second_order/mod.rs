//! Six second-order rational recurrences, each carrying an algebraic
//! invariant that reduces it to a first-order linear fractional map.
//!
//! | eq  | `z_{n+1}`                         | invariant `C`              |
//! |-----|-----------------------------------|----------------------------|
//! | eq4 | `z/(1 + B w - B z)`               | `(1/z + B)(1 + B w)`       |
//! | eq5 | `w/(1 + B z - B w)`               | `(1/z + B)/w`              |
//! | eq6 | `(z^2 + B z - B w)/w`             | `(z + B)/w`                |
//! | eq7 | `(z^2 + B z)/(w + B)`             | `(w + B)/z`                |
//! | eq8 | `(z w + B z)/(B + z)`             | `z (w + B)`                |
//! | eq9 | `(z w + B w - B z)/z`             | `w (z + B)`                |
//!
//! with `z = z_n` and `w = z_{n-1}`.

mod classify;
mod closed_form;
mod forbidden;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::numerics::{Complex, Tolerances};
use crate::riccati::RiccatiParams;
use crate::{checked_div, SingularStep};

pub use classify::{so_classify, Eq4Case, Eq5Case, Eq7Case, ProductCase, SecondOrderClassification, Subcase};
pub use closed_form::so_closed_form;
pub use forbidden::{
    so_forbidden_contains, so_forbidden_sample, Branch, Coordinate, ForbiddenHit, ForbiddenPoint2D, ForbiddenSample,
    LineDescriptor, SamplingPlan,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EquationId {
    Eq4,
    Eq5,
    Eq6,
    Eq7,
    Eq8,
    Eq9,
}

impl EquationId {
    pub const ALL: [EquationId; 6] =
        [EquationId::Eq4, EquationId::Eq5, EquationId::Eq6, EquationId::Eq7, EquationId::Eq8, EquationId::Eq9];

    pub fn name(self) -> &'static str {
        match self {
            EquationId::Eq4 => "eq4",
            EquationId::Eq5 => "eq5",
            EquationId::Eq6 => "eq6",
            EquationId::Eq7 => "eq7",
            EquationId::Eq8 => "eq8",
            EquationId::Eq9 => "eq9",
        }
    }

    /// Only eq6 stays meaningful at `B = 0`.
    pub fn allows_zero_b(self) -> bool {
        self == EquationId::Eq6
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown equation `{0}` (expected eq4..eq9)")]
pub struct UnknownEquation(pub String);

impl FromStr for EquationId {
    type Err = UnknownEquation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EquationId::ALL
            .into_iter()
            .find(|eq| eq.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownEquation(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SecondOrderError {
    #[error("{eq} requires B != 0")]
    InvalidInstance { eq: EquationId },
    #[error("initial pair is singular at step {step}; the invariant cannot be formed")]
    SingularInitial { step: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderInstance {
    pub eq: EquationId,
    pub b: Complex,
}

impl SecondOrderInstance {
    pub fn new(eq: EquationId, b: Complex) -> Result<Self, SecondOrderError> {
        let inst = Self { eq, b };
        inst.validate()?;
        Ok(inst)
    }

    pub(crate) fn validate(&self) -> Result<(), SecondOrderError> {
        if self.b == Complex::new(0.0, 0.0) && !self.eq.allows_zero_b() {
            Err(SecondOrderError::InvalidInstance { eq: self.eq })
        } else {
            Ok(())
        }
    }
}

/// Initial values `(z_0, z_{-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialPair {
    pub z0: Complex,
    pub zm1: Complex,
}

impl InitialPair {
    pub fn new(z0: Complex, zm1: Complex) -> Self {
        Self { z0, zm1 }
    }
}

/// Numerator and denominator of one step from `(z_n, z_{n-1})`.
pub fn so_step_parts(inst: &SecondOrderInstance, zn: Complex, znm1: Complex) -> (Complex, Complex) {
    let b = inst.b;
    let one = Complex::new(1.0, 0.0);
    match inst.eq {
        EquationId::Eq4 => (zn, one + b * znm1 - b * zn),
        EquationId::Eq5 => (znm1, one + b * zn - b * znm1),
        EquationId::Eq6 => (zn * zn + b * zn - b * znm1, znm1),
        EquationId::Eq7 => (zn * zn + b * zn, znm1 + b),
        EquationId::Eq8 => (zn * znm1 + b * zn, b + zn),
        EquationId::Eq9 => (zn * znm1 + b * znm1 - b * zn, zn),
    }
}

/// `z_{n+1}` from `(z_n, z_{n-1})`.
pub fn so_step(
    inst: &SecondOrderInstance,
    zn: Complex,
    znm1: Complex,
    tol: &Tolerances,
) -> Result<Complex, SingularStep> {
    let (num, den) = so_step_parts(inst, zn, znm1);
    checked_div(num, den, tol)
}

/// The conserved quantity at `(z_n, z_{n-1})`, or `None` where its own
/// denominator is zero.
pub fn so_invariant(inst: &SecondOrderInstance, zn: Complex, znm1: Complex) -> Option<Complex> {
    let b = inst.b;
    let zero = Complex::new(0.0, 0.0);
    let value = match inst.eq {
        EquationId::Eq4 if zn != zero => (zn.inv() + b) * (1.0 + b * znm1),
        EquationId::Eq5 if zn != zero && znm1 != zero => (zn.inv() + b) / znm1,
        EquationId::Eq6 if znm1 != zero => (zn + b) / znm1,
        EquationId::Eq7 if zn != zero => (znm1 + b) / zn,
        EquationId::Eq8 => zn * (znm1 + b),
        EquationId::Eq9 => znm1 * (zn + b),
        _ => return None,
    };
    Some(value)
}

/// First-order map `z_{n+1} = f(z_n)` obtained by fixing the invariant at `c`,
/// written as linear fractional parameters.
pub fn reduced_riccati(inst: &SecondOrderInstance, c: Complex) -> RiccatiParams {
    let b = inst.b;
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    match inst.eq {
        // (1 + B z) / (C - B - B^2 z)
        EquationId::Eq4 => RiccatiParams::new(one, b, c - b, -b * b),
        // 1 / (C z - B)
        EquationId::Eq5 => RiccatiParams::new(one, zero, -b, c),
        // C z - B
        EquationId::Eq6 => RiccatiParams::new(-b, c, one, zero),
        // (z + B) / C
        EquationId::Eq7 => RiccatiParams::new(b, one, c, zero),
        // C / (z + B)
        EquationId::Eq8 => RiccatiParams::new(c, zero, b, one),
        // (C - B z) / z
        EquationId::Eq9 => RiccatiParams::new(c, -b, zero, one),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, real};

    fn inst(eq: EquationId, b: f64) -> SecondOrderInstance {
        SecondOrderInstance::new(eq, real(b)).unwrap()
    }

    #[test]
    fn step_examples() {
        let tol = Tolerances::default();
        assert_eq!(so_step(&inst(EquationId::Eq4, 1.0), real(1.0), real(1.0), &tol), Ok(real(1.0)));
        assert_eq!(so_step(&inst(EquationId::Eq4, 1.0), real(0.0), real(-1.0), &tol), Err(SingularStep));
        assert_eq!(so_step(&inst(EquationId::Eq9, 1.0), real(-1.0), real(5.0), &tol), Ok(real(-1.0)));
    }

    #[test]
    fn invariant_examples() {
        assert_eq!(so_invariant(&inst(EquationId::Eq4, 1.0), real(1.0), real(1.0)), Some(real(4.0)));
        assert_eq!(so_invariant(&inst(EquationId::Eq8, 1.0), real(0.0), real(7.0)), Some(real(0.0)));
        assert_eq!(so_invariant(&inst(EquationId::Eq4, 1.0), real(0.0), real(5.0)), None);
        assert_eq!(so_invariant(&inst(EquationId::Eq5, 1.0), real(2.0), real(0.0)), None);
        assert_eq!(so_invariant(&inst(EquationId::Eq6, 1.0), real(2.0), real(0.0)), None);
        assert_eq!(so_invariant(&inst(EquationId::Eq7, 1.0), real(0.0), real(3.0)), None);
    }

    #[test]
    fn zero_b_only_for_eq6() {
        for eq in EquationId::ALL {
            assert_eq!(SecondOrderInstance::new(eq, real(0.0)).is_ok(), eq == EquationId::Eq6);
        }
    }

    #[test]
    fn names_round_trip() {
        for eq in EquationId::ALL {
            assert_eq!(eq.name().parse::<EquationId>().unwrap(), eq);
        }
        assert!("eq3".parse::<EquationId>().is_err());
    }

    #[test]
    fn reduced_map_reproduces_one_step() {
        let tol = Tolerances::default();
        let (z0, zm1) = (c(0.4, -0.9), c(-1.3, 0.6));
        for eq in EquationId::ALL {
            let s = SecondOrderInstance::new(eq, c(0.7, 0.2)).unwrap();
            let cc = so_invariant(&s, z0, zm1).unwrap();
            let p = reduced_riccati(&s, cc);
            let direct = so_step(&s, z0, zm1, &tol).unwrap();
            let reduced = crate::riccati::riccati_step(&p, z0, &tol).unwrap();
            assert!((direct - reduced).norm() < 1e-12, "{eq}: {direct} vs {reduced}");
        }
    }
}
