//! Scalar field abstraction: exact rationals and IEEE doubles.
//!
//! Every kernel operation in this crate is generic over [`Scalar`] and is
//! defined identically for both realizations. [`Rational`] arithmetic is
//! exact, which is what lets the enumeration oracle certify identities by
//! literal equality; `f64` exists for long-horizon and Monte Carlo runs.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational scalar (reduced `p/q`).
pub type Rational = num_rational::BigRational;

/// Tolerance used when validating stochastic constraints over `f64`.
pub const FLOAT_STOCH_TOL: f64 = 1e-12;

/// The scalar field the matrix kernel and all downstream modules run over.
///
/// Implemented for [`Rational`] (exact) and `f64` (approximate). The
/// likelihood hooks differ on purpose: in exact mode the raw probability
/// increment is carried (so products stay rational), in float mode its
/// natural log is carried (so sums stay finite).
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;

    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;

    /// Whether this realization carries exact arithmetic. Exact scalars
    /// ignore tolerances and compare by equality.
    fn is_exact() -> bool;

    /// Equality up to `tol` for floats, literal equality for rationals.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// Parse from the model-file grammar. Rationals accept `"p/q"` and
    /// integer strings; floats additionally accept decimal notation.
    fn parse_text(text: &str) -> Result<Self, String>;

    /// Render for serialization: `"p/q"` (or `"p"` when q = 1) for
    /// rationals, shortest round-trip decimal for floats.
    fn render(&self) -> String {
        format!("{self}")
    }

    /// Neutral element of likelihood accumulation (probability 1 / log 0).
    fn lik_identity() -> Self;
    /// Likelihood increment carried for an observation of probability `p`.
    fn lik_of_prob(p: &Self) -> Self;
    /// Combine two accumulated likelihood values.
    fn lik_combine(a: &Self, b: &Self) -> Self;
    /// Increment carried for an impossible observation (probability 0).
    fn lik_zero_prob() -> Self;
}

impl Scalar for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }

    fn one() -> Self {
        <Rational as One>::one()
    }

    fn from_int(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self)
            .unwrap_or_else(|| self.numer().to_f64().unwrap() / self.denom().to_f64().unwrap())
    }

    fn is_exact() -> bool {
        true
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn parse_text(text: &str) -> Result<Self, String> {
        text.trim().parse::<Rational>().map_err(|_| {
            format!("`{text}` is not a rational; exact mode needs `p/q` or integer strings")
        })
    }

    fn lik_identity() -> Self {
        <Rational as One>::one()
    }

    fn lik_of_prob(p: &Self) -> Self {
        p.clone()
    }

    fn lik_combine(a: &Self, b: &Self) -> Self {
        a * b
    }

    fn lik_zero_prob() -> Self {
        <Rational as Zero>::zero()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_exact() -> bool {
        false
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn parse_text(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in `{text}`"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in `{text}`"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in `{text}`"));
            }
            Ok(num / den)
        } else {
            text.parse::<f64>()
                .map_err(|_| format!("`{text}` is not a number"))
        }
    }

    fn lik_identity() -> Self {
        0.0
    }

    fn lik_of_prob(p: &Self) -> Self {
        p.ln()
    }

    fn lik_combine(a: &Self, b: &Self) -> Self {
        a + b
    }

    fn lik_zero_prob() -> Self {
        f64::NEG_INFINITY
    }
}

/// Sum of a scalar iterator (the trait does not require `std::iter::Sum`).
pub fn sum<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    values
        .into_iter()
        .fold(S::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_is_textbook() {
        // 1/2 + 1/3 = 5/6, reduced form
        let a = Rational::from_ratio(1, 2);
        let b = Rational::from_ratio(1, 3);
        let c = a + b;
        assert_eq!(c, Rational::from_ratio(5, 6));
        assert_eq!(c.render(), "5/6");
        // reduction: 2/4 == 1/2
        assert_eq!(Rational::from_ratio(2, 4), Rational::from_ratio(1, 2));
    }

    #[test]
    fn rational_render_drops_unit_denominator() {
        assert_eq!(Rational::from_int(1).render(), "1");
        assert_eq!(Rational::from_ratio(-3, 4).render(), "-3/4");
    }

    #[test]
    fn rational_parse_rejects_decimals() {
        assert!(Rational::parse_text("3/4").is_ok());
        assert!(Rational::parse_text("-7").is_ok());
        assert!(Rational::parse_text("0.5").is_err());
    }

    #[test]
    fn float_parse_accepts_all_forms() {
        assert_eq!(f64::parse_text("3/4").unwrap(), 0.75);
        assert_eq!(f64::parse_text("0.25").unwrap(), 0.25);
        assert_eq!(f64::parse_text("2").unwrap(), 2.0);
        assert!(f64::parse_text("1/0").is_err());
    }

    #[test]
    fn likelihood_hooks_match_realization() {
        let p = Rational::from_ratio(1, 4);
        assert_eq!(Rational::lik_of_prob(&p), p);
        let q = Rational::lik_combine(&p, &Rational::from_ratio(1, 2));
        assert_eq!(q, Rational::from_ratio(1, 8));

        let lp = f64::lik_of_prob(&0.25);
        assert!((lp - 0.25f64.ln()).abs() < 1e-15);
        assert_eq!(f64::lik_combine(&lp, &0.0), lp);
    }
}
