use super::{reduced_riccati, so_invariant, EquationId, InitialPair, SecondOrderError, SecondOrderInstance};
use crate::numerics::{approx_eq, real, Complex, Tolerances};
use crate::riccati::{case_from_r, RiccatiCase, RiccatiClassification};

/// Subcases of eq4. `lambda1, lambda2` are the roots of `l^2 - l + B/C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eq4Case {
    /// `z0 = 0`: the orbit stays at 0.
    Zero,
    /// `z_{-1} = -1/B`: odd terms are `-1/B`.
    OddPole,
    /// `z0 = -1/B`: even terms are `-1/B`.
    EvenPole,
    Distinct {
        c: Complex,
        lambda1: Complex,
        lambda2: Complex,
        m1: Complex,
        m2: Complex,
    },
    /// `C = 4B`.
    DoubleRoot {
        c: Complex,
    },
    /// `C/B` real in `(0, 4)`.
    Rotation {
        c: Complex,
        r: f64,
        rho: f64,
        w0: Complex,
    },
}

/// Subcases of eq5. `lambda1, lambda2` are the roots of `l^2 - l - C/B^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eq5Case {
    /// `z0 = 0`: even terms vanish.
    ZeroStart,
    /// `z_{-1} = 0`: odd terms vanish.
    ZeroPrev,
    /// `z0 = -1/B`: the orbit stays at `-1/B`.
    Pole,
    Distinct {
        c: Complex,
        lambda1: Complex,
        lambda2: Complex,
    },
    /// `C = -B^2/4`.
    DoubleRoot {
        c: Complex,
    },
    /// `-C/B^2 = r` real above `1/4`; `d = B sqrt(4r - 1)`.
    Rotation {
        c: Complex,
        r: f64,
        d: Complex,
        rho: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eq7Case {
    /// `z0 = 0`: the orbit stays at 0.
    Zero,
    Linear {
        c: Complex,
    },
}

/// Subcases shared by eq8 and eq9, whose invariant is a product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductCase {
    /// `C = 0`: constant after one step (0 for eq8, `-B` for eq9).
    Vanishing,
    Distinct {
        c: Complex,
        lambda1: Complex,
        lambda2: Complex,
    },
    DoubleRoot {
        c: Complex,
    },
    Rotation {
        c: Complex,
        r: f64,
        d: Complex,
        rho: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Subcase {
    Eq4(Eq4Case),
    Eq5(Eq5Case),
    Eq6 { c: Complex },
    Eq7(Eq7Case),
    Eq8(ProductCase),
    Eq9(ProductCase),
}

impl Subcase {
    pub fn label(&self) -> &'static str {
        match self {
            Subcase::Eq4(Eq4Case::Zero) | Subcase::Eq5(Eq5Case::ZeroStart) | Subcase::Eq7(Eq7Case::Zero) => "i",
            Subcase::Eq4(Eq4Case::OddPole) | Subcase::Eq5(Eq5Case::ZeroPrev) | Subcase::Eq7(Eq7Case::Linear { .. }) => {
                "ii"
            }
            Subcase::Eq4(Eq4Case::EvenPole) | Subcase::Eq5(Eq5Case::Pole) => "iii",
            Subcase::Eq4(Eq4Case::Distinct { .. }) | Subcase::Eq5(Eq5Case::Distinct { .. }) => "iv-a",
            Subcase::Eq4(Eq4Case::DoubleRoot { .. }) | Subcase::Eq5(Eq5Case::DoubleRoot { .. }) => "iv-b",
            Subcase::Eq4(Eq4Case::Rotation { .. }) | Subcase::Eq5(Eq5Case::Rotation { .. }) => "iv-c",
            Subcase::Eq6 { .. } => "linear",
            Subcase::Eq8(p) | Subcase::Eq9(p) => match p {
                ProductCase::Vanishing => "a",
                ProductCase::Distinct { .. } => "b",
                ProductCase::DoubleRoot { .. } => "c",
                ProductCase::Rotation { .. } => "d",
            },
        }
    }

    /// The invariant constant, when the subcase carries one.
    pub fn invariant(&self) -> Option<Complex> {
        match *self {
            Subcase::Eq4(Eq4Case::Distinct { c, .. } | Eq4Case::DoubleRoot { c } | Eq4Case::Rotation { c, .. })
            | Subcase::Eq5(Eq5Case::Distinct { c, .. } | Eq5Case::DoubleRoot { c } | Eq5Case::Rotation { c, .. })
            | Subcase::Eq6 { c }
            | Subcase::Eq7(Eq7Case::Linear { c })
            | Subcase::Eq8(
                ProductCase::Distinct { c, .. } | ProductCase::DoubleRoot { c } | ProductCase::Rotation { c, .. },
            )
            | Subcase::Eq9(
                ProductCase::Distinct { c, .. } | ProductCase::DoubleRoot { c } | ProductCase::Rotation { c, .. },
            ) => Some(c),
            Subcase::Eq8(ProductCase::Vanishing) | Subcase::Eq9(ProductCase::Vanishing) => Some(real(0.0)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderClassification {
    pub instance: SecondOrderInstance,
    pub init: InitialPair,
    pub subcase: Subcase,
    pub tol: Tolerances,
}

impl SecondOrderClassification {
    /// `eq4-iv-b`, `eq8-a`, ...
    pub fn tag(&self) -> String {
        format!("{}-{}", self.instance.eq, self.subcase.label())
    }

    /// The reduced first-order map with its case, for subcases that carry an invariant.
    pub fn reduced(&self) -> Option<RiccatiClassification> {
        let c = self.subcase.invariant()?;
        Some(reduced_classification(&self.instance, c, &self.tol))
    }
}

/// Classify the reduced map at invariant value `c` with dimensionless tests.
pub(crate) fn reduced_classification(
    inst: &SecondOrderInstance,
    c: Complex,
    tol: &Tolerances,
) -> RiccatiClassification {
    let b = inst.b;
    let case = match inst.eq {
        EquationId::Eq4 => case_from_r(b / c, tol),
        EquationId::Eq5 => case_from_r(-c / (b * b), tol),
        EquationId::Eq6 | EquationId::Eq7 => RiccatiCase::Affine,
        EquationId::Eq8 | EquationId::Eq9 => {
            if is_zero(c / (b * b), tol) {
                RiccatiCase::Constant
            } else {
                case_from_r(-c / (b * b), tol)
            }
        }
    };
    RiccatiClassification { params: reduced_riccati(inst, c), case, tol: *tol }
}

#[inline]
pub(crate) fn is_zero(x: Complex, tol: &Tolerances) -> bool {
    approx_eq(x, real(0.0), tol)
}

#[inline]
pub(crate) fn is_minus_one(x: Complex, tol: &Tolerances) -> bool {
    approx_eq(x, real(-1.0), tol)
}

/// Determine the subcase of `init` under `inst`.
///
/// Degenerate hypotheses are tested on dimensionless products such as `B z0`.
/// Overlaps are resolved in a fixed order: eq4 tests `z0 = 0`, then
/// `z0 = -1/B`, then `z_{-1} = -1/B`; eq5 tests `z0 = -1/B`, then `z0 = 0`,
/// then `z_{-1} = 0`.
pub fn so_classify(
    inst: &SecondOrderInstance,
    init: InitialPair,
    tol: &Tolerances,
) -> Result<SecondOrderClassification, SecondOrderError> {
    inst.validate()?;
    let b = inst.b;
    let InitialPair { z0, zm1 } = init;
    let invariant = || so_invariant(inst, z0, zm1).expect("degenerate pairs are dispatched first");
    let subcase = match inst.eq {
        EquationId::Eq4 => {
            if is_zero(b * z0, tol) {
                Subcase::Eq4(Eq4Case::Zero)
            } else if is_minus_one(b * z0, tol) {
                Subcase::Eq4(Eq4Case::EvenPole)
            } else if is_minus_one(b * zm1, tol) {
                Subcase::Eq4(Eq4Case::OddPole)
            } else {
                let c = invariant();
                Subcase::Eq4(match reduced_classification(inst, c, tol).case {
                    RiccatiCase::DoubleRoot => Eq4Case::DoubleRoot { c },
                    RiccatiCase::Rotation { r, phi } => {
                        Eq4Case::Rotation { c, r, rho: phi, w0: (c - b - b * b * z0) / c }
                    }
                    case => {
                        let (lambda1, lambda2) = roots(case, b / c);
                        Eq4Case::Distinct {
                            c,
                            lambda1,
                            lambda2,
                            m1: c - b - b * b * z0 - c * lambda1,
                            m2: c * lambda2 + b + b * b * z0 - c,
                        }
                    }
                })
            }
        }
        EquationId::Eq5 => {
            if is_minus_one(b * z0, tol) {
                Subcase::Eq5(Eq5Case::Pole)
            } else if is_zero(b * z0, tol) {
                Subcase::Eq5(Eq5Case::ZeroStart)
            } else if is_zero(b * zm1, tol) {
                Subcase::Eq5(Eq5Case::ZeroPrev)
            } else {
                let c = invariant();
                Subcase::Eq5(match reduced_classification(inst, c, tol).case {
                    RiccatiCase::DoubleRoot => Eq5Case::DoubleRoot { c },
                    RiccatiCase::Rotation { r, phi } => {
                        Eq5Case::Rotation { c, r, d: b * (4.0 * r - 1.0).sqrt(), rho: phi }
                    }
                    case => {
                        let (lambda1, lambda2) = roots(case, -c / (b * b));
                        Eq5Case::Distinct { c, lambda1, lambda2 }
                    }
                })
            }
        }
        EquationId::Eq6 => {
            if tol.negligible(zm1, z0.norm() + b.norm()) {
                return Err(SecondOrderError::SingularInitial { step: 1 });
            }
            Subcase::Eq6 { c: (z0 + b) / zm1 }
        }
        EquationId::Eq7 => {
            if tol.negligible(z0, zm1.norm() + b.norm()) {
                Subcase::Eq7(Eq7Case::Zero)
            } else {
                Subcase::Eq7(Eq7Case::Linear { c: (zm1 + b) / z0 })
            }
        }
        EquationId::Eq8 | EquationId::Eq9 => {
            let c = invariant();
            let case = match reduced_classification(inst, c, tol).case {
                RiccatiCase::Constant => ProductCase::Vanishing,
                RiccatiCase::DoubleRoot => ProductCase::DoubleRoot { c },
                RiccatiCase::Rotation { r, phi } => {
                    ProductCase::Rotation { c, r, d: b * (4.0 * r - 1.0).sqrt(), rho: phi }
                }
                case => {
                    let (lambda1, lambda2) = roots(case, -c / (b * b));
                    ProductCase::Distinct { c, lambda1, lambda2 }
                }
            };
            if inst.eq == EquationId::Eq8 {
                Subcase::Eq8(case)
            } else {
                Subcase::Eq9(case)
            }
        }
    };
    Ok(SecondOrderClassification { instance: *inst, init, subcase, tol: *tol })
}

/// `(lambda1, lambda2) = (w-, w+)` of the reduced map; recomputed from `r` if
/// the case carries no roots.
fn roots(case: RiccatiCase, r: Complex) -> (Complex, Complex) {
    match case {
        RiccatiCase::Distinct { w_minus, w_plus, .. } => (w_minus, w_plus),
        _ => match case_from_r(r, &Tolerances::exact()) {
            RiccatiCase::Distinct { w_minus, w_plus, .. } => (w_minus, w_plus),
            _ => (real(0.5), real(0.5)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    fn classify(eq: EquationId, b: f64, z0: f64, zm1: f64) -> SecondOrderClassification {
        let inst = SecondOrderInstance::new(eq, real(b)).unwrap();
        so_classify(&inst, InitialPair::new(real(z0), real(zm1)), &Tolerances::default()).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(EquationId::Eq4, 1.0, 1.0, 1.0).tag(), "eq4-iv-b");
        assert_eq!(classify(EquationId::Eq5, 1.0, -1.0, 3.0).tag(), "eq5-iii");
        let cl = classify(EquationId::Eq9, 1.0, 1.0, 1.0);
        let Subcase::Eq9(ProductCase::Distinct { c, lambda1, lambda2 }) = cl.subcase else {
            panic!("unexpected {:?}", cl.subcase);
        };
        assert_eq!(c, real(2.0));
        assert!((lambda1 + 1.0).norm() < 1e-15);
        assert!((lambda2 - 2.0).norm() < 1e-15);
    }

    #[test]
    fn degenerate_dispatch_order() {
        // z0 = -1/B and z_{-1} = -1/B: the even-pole branch wins.
        assert_eq!(classify(EquationId::Eq4, 2.0, -0.5, -0.5).subcase, Subcase::Eq4(Eq4Case::EvenPole));
        assert_eq!(classify(EquationId::Eq4, 2.0, 0.0, -0.5).subcase, Subcase::Eq4(Eq4Case::Zero));
        assert_eq!(classify(EquationId::Eq4, 2.0, 3.0, -0.5).subcase, Subcase::Eq4(Eq4Case::OddPole));
        // z0 = -1/B wins over z_{-1} = 0 for eq5.
        assert_eq!(classify(EquationId::Eq5, 2.0, -0.5, 0.0).subcase, Subcase::Eq5(Eq5Case::Pole));
        assert_eq!(classify(EquationId::Eq5, 2.0, 0.0, 0.0).subcase, Subcase::Eq5(Eq5Case::ZeroStart));
        assert_eq!(classify(EquationId::Eq5, 2.0, 1.0, 0.0).subcase, Subcase::Eq5(Eq5Case::ZeroPrev));
    }

    #[test]
    fn product_subcases() {
        assert_eq!(classify(EquationId::Eq8, 1.0, 0.0, 7.0).tag(), "eq8-a");
        assert_eq!(classify(EquationId::Eq9, 1.0, -1.0, 5.0).tag(), "eq9-a");
        // C = -B^2/4
        assert_eq!(classify(EquationId::Eq8, 2.0, 1.0, -3.0).tag(), "eq8-c");
        // C = -2 B^2 gives r = 2
        let cl = classify(EquationId::Eq9, 1.0, 1.0, -1.0);
        assert_eq!(cl.tag(), "eq9-d");
        let Subcase::Eq9(ProductCase::Rotation { r, d, rho, .. }) = cl.subcase else { panic!() };
        assert_eq!(r, 2.0);
        assert!((d - 7f64.sqrt()).norm() < 1e-15);
        assert!((rho - (0.5 * 0.5f64.sqrt()).acos()).abs() < 1e-15);
    }

    #[test]
    fn lambda_payload_identities() {
        let inst = SecondOrderInstance::new(EquationId::Eq4, c(0.3, 1.1)).unwrap();
        let cl = so_classify(&inst, InitialPair::new(c(-0.4, 0.9), c(1.2, 0.1)), &Tolerances::default()).unwrap();
        let Subcase::Eq4(Eq4Case::Distinct { c, lambda1, lambda2, .. }) = cl.subcase else { panic!() };
        assert_eq!(Some(c), so_invariant(&inst, cl.init.z0, cl.init.zm1));
        assert!((lambda1 + lambda2 - 1.0).norm() < 1e-12);
        assert!((lambda1 * lambda2 - inst.b / c).norm() < 1e-12);
    }

    #[test]
    fn linear_subcases() {
        assert_eq!(classify(EquationId::Eq6, 1.0, 2.0, 1.0).subcase, Subcase::Eq6 { c: real(3.0) });
        assert_eq!(classify(EquationId::Eq7, 1.0, 1.0, 1.0).subcase, Subcase::Eq7(Eq7Case::Linear { c: real(2.0) }));
        assert_eq!(classify(EquationId::Eq7, 1.0, 0.0, 1.0).subcase, Subcase::Eq7(Eq7Case::Zero));
        let inst = SecondOrderInstance::new(EquationId::Eq6, real(1.0)).unwrap();
        assert_eq!(
            so_classify(&inst, InitialPair::new(real(1.0), real(0.0)), &Tolerances::default()),
            Err(SecondOrderError::SingularInitial { step: 1 })
        );
    }

    #[test]
    fn zero_b_rejected() {
        let inst = SecondOrderInstance { eq: EquationId::Eq4, b: real(0.0) };
        assert!(matches!(
            so_classify(&inst, InitialPair::new(real(1.0), real(1.0)), &Tolerances::default()),
            Err(SecondOrderError::InvalidInstance { .. })
        ));
    }
}
