use super::classify::{Eq4Case, Eq5Case, Eq7Case, ProductCase, SecondOrderClassification, Subcase};
use super::forbidden::so_forbidden_contains;
use crate::numerics::{real, Complex};
use crate::riccati::geometric_sum;
use crate::{pown, Undefined};

/// `(p l1^{n+1} + q l2^{n+1}) / (p l1^n + q l2^n)`, scaled by the dominant root.
fn power_ratio(p: Complex, l1: Complex, q: Complex, l2: Complex, n: usize) -> Complex {
    if l2.norm() >= l1.norm() {
        let t = l1 / l2;
        l2 * (p * pown(t, n + 1) + q) / (p * pown(t, n) + q)
    } else {
        let t = l2 / l1;
        l1 * (p + q * pown(t, n + 1)) / (p + q * pown(t, n))
    }
}

/// `(x cos((n+1) rho) + y sin((n+1) rho)) / (x cos(n rho) + y sin(n rho))`.
fn trig_ratio(x: Complex, y: Complex, rho: f64, n: usize) -> Complex {
    let (a, b) = (n as f64 * rho, (n + 1) as f64 * rho);
    (x * b.cos() + y * b.sin()) / (x * a.cos() + y * a.sin())
}

/// `z_n` for `n >= -1` from the subcase's closed form.
///
/// Interleaved subcases route even and odd indices to separate formulas.
/// Fails with the singular step when the initial pair is forbidden at a step
/// not exceeding `n`.
///
/// # Panics
/// If `n < -1`.
pub fn so_closed_form(c: &SecondOrderClassification, n: i64) -> Result<Complex, Undefined> {
    assert!(n >= -1, "closed forms start at index -1");
    let (z0, zm1) = (c.init.z0, c.init.zm1);
    if n == -1 {
        return Ok(zm1);
    }
    if n == 0 {
        return Ok(z0);
    }
    let n = n as usize;
    if let Some(hit) = so_forbidden_contains(&c.instance, c.init, n, &c.tol) {
        return Err(Undefined { step: hit.step });
    }
    let b = c.instance.b;
    let b2 = b * b;
    let nf = n as f64;
    let even = n.is_multiple_of(2);
    let value = match c.subcase {
        Subcase::Eq4(case) => match case {
            Eq4Case::Zero => real(0.0),
            Eq4Case::OddPole if !even => -b.inv(),
            Eq4Case::OddPole => {
                let m = (n / 2) as f64;
                (m + 2.0 + m * b * z0 + b * z0) / (m * b + b + m * b2 * z0) - 2.0 / b
            }
            Eq4Case::EvenPole if even => -b.inv(),
            Eq4Case::EvenPole => {
                let m = ((n - 1) / 2) as f64;
                (m + 3.0 + m * b * zm1 + 2.0 * b * zm1) / (m * b + 2.0 * b + m * b2 * zm1 + b2 * zm1) - 2.0 / b
            }
            Eq4Case::Distinct { c, lambda1, lambda2, m1, m2 } => {
                -c / b2 * power_ratio(m2, lambda1, m1, lambda2, n) + c / b2 - b.inv()
            }
            Eq4Case::DoubleRoot { .. } => {
                (4.0 + (nf + 1.0) * (2.0 - 2.0 * b * z0)) / (nf * b2 * z0 - 2.0 * b - nf * b) + 3.0 / b
            }
            Eq4Case::Rotation { c, r, rho, w0 } => {
                let q = real((4.0 * r - 1.0).sqrt());
                let cb = 1.0 / r;
                -cb.sqrt() / b * trig_ratio(q, 2.0 * w0 - 1.0, rho, n) + (c - b) / b2
            }
        },
        Subcase::Eq5(case) => match case {
            Eq5Case::ZeroStart if even => real(0.0),
            Eq5Case::ZeroStart => {
                let m = ((n - 1) / 2) as f64;
                -b.inv() * (1.0 - (m + 2.0) * b * zm1) / (1.0 - (m + 1.0) * b * zm1) + b.inv()
            }
            Eq5Case::ZeroPrev if !even => real(0.0),
            Eq5Case::ZeroPrev => {
                let m = (n / 2) as f64;
                -b.inv() * (1.0 - (m + 1.0) * b * z0) / (1.0 - m * b * z0) + b.inv()
            }
            Eq5Case::Pole => -b.inv(),
            Eq5Case::Distinct { c, lambda1, lambda2 } => {
                let p = b * lambda2 + c * z0 - b;
                let q = b - c * z0 - b * lambda1;
                -b / c * power_ratio(p, lambda1, q, lambda2, n) + b / c
            }
            Eq5Case::DoubleRoot { c } => {
                -b / c * (-b + (nf + 1.0) * (2.0 * c * z0 - b)) / (-2.0 * b + 4.0 * nf * c * z0 - 2.0 * nf * b) + b / c
            }
            Eq5Case::Rotation { c, r, d, rho } => {
                let (a0, a1) = ((nf * rho).cos(), (nf * rho).sin());
                let (b0, b1) = (((nf + 1.0) * rho).cos(), ((nf + 1.0) * rho).sin());
                let k = b2 - 2.0 * c * b * z0;
                (1.0 / r).sqrt() * (d * b0 + (b - 2.0 * c * z0) * b1) / (b * d * a0 + k * a1) + b / c
            }
        },
        Subcase::Eq6 { c } => pown(c, n) * z0 - b * geometric_sum(c, n),
        Subcase::Eq7(case) => match case {
            Eq7Case::Zero => real(0.0),
            Eq7Case::Linear { c } => {
                let q = c.inv();
                pown(q, n) * z0 + b * q * geometric_sum(q, n)
            }
        },
        Subcase::Eq8(case) => match case {
            ProductCase::Vanishing => real(0.0),
            ProductCase::Distinct { lambda1, lambda2, .. } => {
                let p = b * lambda2 - z0 - b;
                let q = z0 + b - b * lambda1;
                b * power_ratio(p, lambda1, q, lambda2, n) - b
            }
            ProductCase::DoubleRoot { .. } => {
                b * (b + (nf + 1.0) * (2.0 * z0 + b)) / (2.0 * b + 4.0 * nf * z0 + 2.0 * nf * b) - b
            }
            ProductCase::Rotation { r, d, rho, .. } => b * r.sqrt() * trig_ratio(d, b + 2.0 * z0, rho, n) - b,
        },
        Subcase::Eq9(case) => match case {
            ProductCase::Vanishing => -b,
            ProductCase::Distinct { lambda1, lambda2, .. } => {
                let p = b * lambda2 + z0;
                let q = z0 + b * lambda1;
                -b * power_ratio(p, lambda1, -q, lambda2, n)
            }
            ProductCase::DoubleRoot { .. } => {
                -b * (-b + (nf + 1.0) * (2.0 * z0 + b)) / (-2.0 * b + 4.0 * nf * z0 + 2.0 * nf * b)
            }
            ProductCase::Rotation { r, d, rho, .. } => -b * r.sqrt() * trig_ratio(d, -2.0 * z0 - b, rho, n),
        },
    };
    Ok(value)
}
