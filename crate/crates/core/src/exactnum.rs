//! Exact rational arithmetic helpers, binomial coefficients and the
//! rational enclosure of pi used by every certified comparison.
//!
//! Irrational bounds of the form `c / sqrt(pi * n)` are never evaluated.
//! A claim `r < c / sqrt(pi * n)` is decided by squaring both sides, so the
//! only inputs are rationals and the two endpoints of [`PiEnclosure`].

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical form (positive denominator,
/// reduced). All certified values in the crate use this type.
pub type Rational = BigRational;

/// `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Row `m` of Pascal's triangle, `C(m, 0..=m)`, in O(m) big-integer steps.
pub fn binomial_row(m: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(m as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..m {
        c = c * (m - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// `1 / 2^e` as an exact rational.
pub fn pow2_recip(e: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << e)
}

/// Closed interval `[lower, upper]` with rational endpoints strictly
/// containing pi.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiEnclosure {
    lower: Rational,
    upper: Rational,
}

impl PiEnclosure {
    /// 3.141592653589793 < pi < 3.141592653589794 (pi = 3.14159265358979323846...).
    pub fn published() -> Self {
        let den = BigInt::from(10u64.pow(15));
        Self {
            lower: Rational::new(BigInt::from(3_141_592_653_589_793u64), den.clone()),
            upper: Rational::new(BigInt::from(3_141_592_653_589_794u64), den),
        }
    }

    /// Builds a custom enclosure. The caller vouches that pi lies strictly
    /// inside; only ordering and width are checked here.
    pub fn new(lower: Rational, upper: Rational) -> Result<Self> {
        if lower >= upper || !lower.is_positive() {
            return Err(Error::InvalidArgument(
                "pi enclosure needs 0 < lower < upper".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &Rational {
        &self.lower
    }

    pub fn upper(&self) -> &Rational {
        &self.upper
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }
}

impl Default for PiEnclosure {
    fn default() -> Self {
        Self::published()
    }
}

/// Outcome of a certified comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certified {
    CertLt,
    CertGt,
    Undecided,
}

/// Outcome of a certified bound check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// Compares `r` against `c / sqrt(pi * n)`.
///
/// `CertLt` when `r^2 * pi.upper * n < c^2`, `CertGt` when
/// `r^2 * pi.lower * n > c^2`, otherwise `Undecided`. Requires `r >= 0`,
/// `c >= 0` and `n >= 1`.
pub fn cmp_sq_below(r: &Rational, c: &Rational, pi: &PiEnclosure, n: u64) -> Result<Certified> {
    if n == 0 {
        return Err(Error::InvalidArgument("cmp_sq_below needs n >= 1".into()));
    }
    if r.is_negative() || c.is_negative() {
        return Err(Error::InvalidArgument(
            "cmp_sq_below needs nonnegative operands".into(),
        ));
    }
    let r2n = r * r * rat_int(n);
    let c2 = c * c;
    if &r2n * pi.upper() < c2 {
        Ok(Certified::CertLt)
    } else if &r2n * pi.lower() > c2 {
        Ok(Certified::CertGt)
    } else {
        Ok(Certified::Undecided)
    }
}

/// Rational enclosure `lo <= sqrt(x) <= hi` with `hi - lo <= 10^-digits / den(x)`.
pub fn sqrt_enclosure(x: &Rational, digits: u32) -> (Rational, Rational) {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    // sqrt(p/q) = sqrt(p*q) / q
    let p = x.numer().to_biguint().expect("nonnegative");
    let q = x.denom().to_biguint().expect("positive");
    let scale = BigUint::from(10u32).pow(digits);
    let radicand = &p * &q * &scale * &scale;
    let root = radicand.sqrt();
    let den = BigInt::from(&q * &scale);
    let lo = Rational::new(BigInt::from(root.clone()), den.clone());
    let hi = if &root * &root == radicand {
        lo.clone()
    } else {
        Rational::new(BigInt::from(root + 1u32), den)
    };
    (lo, hi)
}

/// Rational upper bound on `1 / sqrt(s)`: `1/floor(sqrt(s))` refined by one
/// Heron step. With `y = floor(sqrt(s))`, `(y + s/y)/2 >= sqrt(s)`, hence
/// `(y^2 + s) / (2 s y) >= 1/sqrt(s)`; the bound is exact on perfect squares.
pub fn inv_sqrt_upper(s: &BigUint) -> Rational {
    assert!(!s.is_zero(), "1/sqrt(0)");
    let y = s.sqrt();
    if &y * &y == *s {
        return Rational::new(BigInt::one(), BigInt::from(y));
    }
    let num = &y * &y + s;
    let den = BigUint::from(2u32) * s * &y;
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Decimal expansion with `places` fractional digits, truncated toward zero.
pub fn to_decimal(r: &Rational, places: usize) -> String {
    let neg = r.is_negative();
    let a = r.abs();
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = (a.numer() * &scale) / a.denom();
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    let mut out = String::new();
    if neg && !scaled.is_zero() {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if places > 0 {
        out.push('.');
        let frac = frac_part.to_string();
        for _ in frac.len()..places {
            out.push('0');
        }
        out.push_str(&frac);
    }
    out
}

/// Like [`to_decimal`] but rounded up for nonnegative `r`, so the printed
/// value is never below `r`.
pub fn to_decimal_up(r: &Rational, places: usize) -> String {
    let scale = Rational::from_integer(BigInt::from(10u32).pow(places as u32));
    let ceil = (r * &scale).ceil() / scale;
    to_decimal(&ceil, places)
}

/// Thirty fractional digits; the fixed width used in every report.
pub fn decimal30(r: &Rational) -> String {
    to_decimal(r, 30)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Canonical string form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    Rational::from_str(t).map_err(|_| Error::Parse(format!("not a rational: {s:?}")))
}

/// `#[serde(with = "serde_rational")]` for a single rational as `"p/q"`.
pub mod serde_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "serde_rational_vec")]` for a list of rationals.
pub mod serde_rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
