//! Complex scalar conventions shared by every solver in the crate.
//!
//! All arithmetic is plain `f64` complex arithmetic from `num-complex`. This
//! module adds the pieces the solvers agree on: the principal square root
//! with the cut along the negative real axis, the comparison/singularity
//! tolerance policy, and the text grammar used on the command line and in
//! emitted records.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Shorthand constructor.
#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Real number as a complex scalar.
#[inline]
pub fn real(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

#[inline]
pub fn is_finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("tolerance `{name}` must lie in (0, 1), got {value}")]
    ToleranceOutOfRange { name: &'static str, value: f64 },
}

/// Comparison and singularity thresholds.
///
/// `rel` and `abs` define the closeness band used by [`approx_eq`] (and so by
/// every zero test in the classifiers). `singular` is the relative threshold
/// below which a step denominator counts as a pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub singular: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-12, singular: 1e-12 }
    }
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64, singular: f64) -> Result<Self, NumericsError> {
        for (name, value) in [("rel", rel), ("abs", abs), ("singular", singular)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(NumericsError::ToleranceOutOfRange { name, value });
            }
        }
        Ok(Self { rel, abs, singular })
    }

    /// Exact floating-point comparisons (`rel = abs = 0`), default pole threshold.
    pub fn exact() -> Self {
        Self { rel: 0.0, abs: 0.0, ..Self::default() }
    }

    /// True when `x` is negligible against `scale`: `|x| <= abs + rel * scale`.
    #[inline]
    pub fn negligible(&self, x: Complex, scale: f64) -> bool {
        x.norm() <= self.abs + self.rel * scale
    }

    /// Pole test shared by every stepper and by the oracle.
    #[inline]
    pub fn is_singular(&self, numerator: Complex, denominator: Complex) -> bool {
        let den = denominator.norm();
        den.is_nan() || den <= self.singular * numerator.norm().max(1.0)
    }
}

/// `|a - b| <= abs + rel * max(|a|, |b|)`.
#[inline]
pub fn approx_eq(a: Complex, b: Complex, tol: &Tolerances) -> bool {
    (a - b).norm() <= tol.abs + tol.rel * a.norm().max(b.norm())
}

/// Principal square root, cut along the negative real axis.
///
/// The result always has `re >= 0`; on the cut itself the value is the limit
/// from the upper half-plane, so `-4` maps to `2i` regardless of the sign of
/// the zero imaginary part.
pub fn csqrt_principal(z: Complex) -> Complex {
    if z.im == 0.0 {
        return if z.re >= 0.0 { Complex::new(z.re.sqrt(), 0.0) } else { Complex::new(0.0, (-z.re).sqrt()) };
    }
    if z.re == 0.0 {
        // Halving is exact unless the input is already subnormal.
        let h = z.im.abs();
        let t = if h >= f64::MIN_POSITIVE { (0.5 * h).sqrt() } else { h.sqrt() * std::f64::consts::FRAC_1_SQRT_2 };
        return Complex::new(t, t.copysign(z.im));
    }
    // Rescale by an even power of two so hypot and the half-sum stay in range.
    let m = z.re.abs().max(z.im.abs());
    let (scale, unscale) = if m > 1e300 {
        (0.25, 2.0)
    } else if m < 1e-300 {
        (2f64.powi(600), 2f64.powi(-300))
    } else {
        (1.0, 1.0)
    };
    let (x, y) = (z.re * scale, z.im * scale);
    let t = ((x.abs() + x.hypot(y)) * 0.5).sqrt();
    let (re, im) = if x > 0.0 { (t, y / (2.0 * t)) } else { (y.abs() / (2.0 * t), t.copysign(y)) };
    // Off the real axis the true real part is positive even when it
    // underflows; keep the sign so the branch stays identifiable.
    Complex::new((re * unscale).max(f64::from_bits(1)), im * unscale)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse complex number `{text}`: offending token `{token}`")]
pub struct ParseComplexError {
    pub text: String,
    pub token: String,
}

fn parse_real(token: &str, text: &str) -> Result<f64, ParseComplexError> {
    let err = || ParseComplexError { text: text.to_string(), token: token.to_string() };
    // f64::from_str also accepts "inf"/"nan"; the grammar does not.
    let well_formed = token.bytes().any(|b| b.is_ascii_digit())
        && token.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'));
    if !well_formed {
        return Err(err());
    }
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(err()),
    }
}

/// Parse `<real>`, `<real>i` or `<real>(+|-)<real>i`.
///
/// Reals are decimal or scientific. U+2212 (minus sign) is accepted as `-`.
pub fn parse_complex(text: &str) -> Result<Complex, ParseComplexError> {
    let cleaned: String =
        text.chars().filter(|ch| !ch.is_whitespace()).map(|ch| if ch == '\u{2212}' { '-' } else { ch }).collect();
    let Some(body) = cleaned.strip_suffix('i') else {
        return Ok(Complex::new(parse_real(&cleaned, text)?, 0.0));
    };
    // Split at the last sign that is neither leading nor an exponent sign.
    let bytes = body.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = parse_real(&body[..k], text)?;
            let im = parse_real(&body[k..], text)?;
            Ok(Complex::new(re, im))
        }
        None => Ok(Complex::new(0.0, parse_real(body, text)?)),
    }
}

/// Shortest round-trip text for one real component.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-5..1e17).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Shortest round-trip text in the grammar accepted by [`parse_complex`].
pub fn format_complex(z: Complex) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => format_real(z.re),
        (true, false) => format!("{}i", format_real(z.im)),
        (false, false) => {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            format!("{}{}{}i", format_real(z.re), sign, format_real(z.im.abs()))
        }
    }
}

/// Display adapter for a complex value in the crate's text grammar.
pub struct Fmt(pub Complex);

impl fmt::Display for Fmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_complex(self.0))
    }
}

/// Newtype that parses via [`parse_complex`], handy for argument parsers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexArg(pub Complex);

impl FromStr for ComplexArg {
    type Err = ParseComplexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_complex(s).map(ComplexArg)
    }
}
