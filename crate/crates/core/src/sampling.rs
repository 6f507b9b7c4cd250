//! Seeded random instances for every case and subcase, shared by the test
//! suites and the command-line `verify` command.
//!
//! Generic draws take complex components uniform in `[-2, 2]`. Degenerate
//! cases are built directly by solving their defining condition for one of
//! the drawn quantities. A draw is admissible when it classifies the same way
//! under a loose and the default tolerance (so it is not near a case
//! boundary) and its orbit stays clear of poles for [`HORIZON`] steps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{Complex, Tolerances};
use crate::oracle::{riccati_min_denominator, second_order_min_denominator};
use crate::riccati::{classify_riccati, riccati_forbidden_point, ForbiddenPoint, RiccatiParams};
use crate::second_order::{so_classify, EquationId, InitialPair, SecondOrderInstance};

/// Distance from case boundaries, poles and forbidden points required of a draw.
pub const MARGIN: f64 = 1e-6;
/// Steps over which admissibility is checked.
pub const HORIZON: usize = 30;
/// Attempts allowed per requested draw before giving up.
pub const ATTEMPTS_PER_DRAW: usize = 200;

/// Riccati cases that have a closed form.
pub const RICCATI_CASES: [u8; 6] = [2, 3, 4, 5, 6, 7];

/// A second-order subcase named by equation and label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubcaseKind {
    pub eq: EquationId,
    pub label: &'static str,
}

const fn kind(eq: EquationId, label: &'static str) -> SubcaseKind {
    SubcaseKind { eq, label }
}

pub const SUBCASES: [SubcaseKind; 23] = [
    kind(EquationId::Eq4, "i"),
    kind(EquationId::Eq4, "ii"),
    kind(EquationId::Eq4, "iii"),
    kind(EquationId::Eq4, "iv-a"),
    kind(EquationId::Eq4, "iv-b"),
    kind(EquationId::Eq4, "iv-c"),
    kind(EquationId::Eq5, "i"),
    kind(EquationId::Eq5, "ii"),
    kind(EquationId::Eq5, "iii"),
    kind(EquationId::Eq5, "iv-a"),
    kind(EquationId::Eq5, "iv-b"),
    kind(EquationId::Eq5, "iv-c"),
    kind(EquationId::Eq6, "linear"),
    kind(EquationId::Eq7, "i"),
    kind(EquationId::Eq7, "ii"),
    kind(EquationId::Eq8, "a"),
    kind(EquationId::Eq8, "b"),
    kind(EquationId::Eq8, "c"),
    kind(EquationId::Eq8, "d"),
    kind(EquationId::Eq9, "a"),
    kind(EquationId::Eq9, "b"),
    kind(EquationId::Eq9, "c"),
    kind(EquationId::Eq9, "d"),
];

fn loose() -> Tolerances {
    Tolerances { rel: MARGIN, abs: MARGIN, ..Tolerances::default() }
}

/// Deterministic stream of draws.
pub struct Draws {
    rng: ChaCha8Rng,
}

impl Draws {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// Components uniform in `[-2, 2]`.
    pub fn complex(&mut self) -> Complex {
        Complex::new(self.rng.gen_range(-2.0..=2.0), self.rng.gen_range(-2.0..=2.0))
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    /// Parameters and start value for a Riccati case, not yet screened.
    ///
    /// # Panics
    /// If `case` is not in [`RICCATI_CASES`].
    pub fn riccati_raw(&mut self, case: u8) -> (RiccatiParams, Complex) {
        let [alpha, beta, a, b, x0] = [(); 5].map(|_| self.complex());
        let p = match case {
            2 => RiccatiParams::new(alpha, beta, a, Complex::new(0.0, 0.0)),
            3 => RiccatiParams::new(beta * a / b, beta, a, b),
            4 => RiccatiParams::new(alpha, -a, a, b),
            5 => RiccatiParams::new(alpha, beta, a, b),
            6 => {
                let s = beta + a;
                RiccatiParams::new((beta * a - s * s / 4.0) / b, beta, a, b)
            }
            7 => {
                let r = self.uniform(0.25, 2.25);
                let s = beta + a;
                RiccatiParams::new((beta * a - r * s * s) / b, beta, a, b)
            }
            _ => panic!("no closed form for case {case}"),
        };
        (p, x0)
    }

    /// Instance and initial pair for a subcase, not yet screened.
    pub fn second_order_raw(&mut self, kind: SubcaseKind) -> (SecondOrderInstance, InitialPair) {
        let b = self.complex();
        let (z, w) = (self.complex(), self.complex());
        let zero = Complex::new(0.0, 0.0);
        let (z0, zm1) = match (kind.eq, kind.label) {
            (EquationId::Eq4, "i") => (zero, w),
            (EquationId::Eq4, "ii") => (z, -b.inv()),
            (EquationId::Eq4, "iii") => (-b.inv(), w),
            (EquationId::Eq4, "iv-b" | "iv-c") => {
                let c = if kind.label == "iv-b" { 4.0 * b } else { b * self.uniform(0.0, 4.0) };
                // Solve (1/z0 + B)(1 + B w) = C for z0.
                ((c / (1.0 + b * w) - b).inv(), w)
            }
            (EquationId::Eq5, "i") => (zero, w),
            (EquationId::Eq5, "ii") => (z, zero),
            (EquationId::Eq5, "iii") => (-b.inv(), w),
            (EquationId::Eq5, "iv-b" | "iv-c") => {
                let c = -b * b * self.r_for(kind.label);
                // Solve (1/z0 + B)/w = C for z0.
                ((c * w - b).inv(), w)
            }
            (EquationId::Eq7, "i") => (zero, w),
            (EquationId::Eq8, "a") => {
                if self.coin() {
                    (zero, w)
                } else {
                    (z, -b)
                }
            }
            (EquationId::Eq9, "a") => {
                if self.coin() {
                    (z, zero)
                } else {
                    (-b, w)
                }
            }
            (EquationId::Eq8 | EquationId::Eq9, "c" | "d") => {
                let c = -b * b * self.r_for(if kind.label == "c" { "iv-b" } else { "iv-c" });
                if kind.eq == EquationId::Eq8 {
                    (z, c / z - b)
                } else {
                    (z, c / (z + b))
                }
            }
            _ => (z, w),
        };
        (SecondOrderInstance { eq: kind.eq, b }, InitialPair::new(z0, zm1))
    }

    /// `r = 1/4` for the double root, uniform in `(1/4, 9/4)` for rotations.
    fn r_for(&mut self, label: &str) -> f64 {
        if label == "iv-b" {
            0.25
        } else {
            self.uniform(0.25, 2.25)
        }
    }

    /// Next admissible Riccati draw for `case`, or `None` after too many rejections.
    pub fn riccati(&mut self, case: u8) -> Option<(RiccatiParams, Complex)> {
        (0..ATTEMPTS_PER_DRAW).map(|_| self.riccati_raw(case)).find(|(p, x0)| riccati_admissible(p, *x0, case))
    }

    /// Next admissible draw for `kind`, or `None` after too many rejections.
    pub fn second_order(&mut self, kind: SubcaseKind) -> Option<(SecondOrderInstance, InitialPair)> {
        (0..ATTEMPTS_PER_DRAW)
            .map(|_| self.second_order_raw(kind))
            .find(|(inst, init)| second_order_admissible(inst, *init, kind))
    }
}

/// Classified as `case` under both the loose and default tolerances, clear of
/// poles and of forbidden points up to [`HORIZON`].
pub fn riccati_admissible(p: &RiccatiParams, x0: Complex, case: u8) -> bool {
    let default = classify_riccati(*p, &Tolerances::default());
    if classify_riccati(*p, &loose()).case.number() != case || default.case.number() != case {
        return false;
    }
    if riccati_min_denominator(p, x0, HORIZON) < MARGIN {
        return false;
    }
    (1..=HORIZON).all(|n| match riccati_forbidden_point(&default, n) {
        ForbiddenPoint::Point(f) => (x0 - f).norm() > MARGIN * f.norm().max(1.0),
        _ => true,
    })
}

/// Classified as `kind` under both tolerances and clear of poles up to [`HORIZON`].
pub fn second_order_admissible(inst: &SecondOrderInstance, init: InitialPair, kind: SubcaseKind) -> bool {
    if inst.eq != kind.eq || inst.validate().is_err() {
        return false;
    }
    let same = |tol: &Tolerances| so_classify(inst, init, tol).is_ok_and(|c| c.subcase.label() == kind.label);
    same(&loose()) && same(&Tolerances::default()) && second_order_min_denominator(inst, init, HORIZON) >= MARGIN
}
