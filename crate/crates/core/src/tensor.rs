//! Bilinear supremum of `|mu_n(f (x) g)|` over `||f||, ||g|| <= 1` and the
//! decay of `mu_n(h)` on the tensor algebra.
//!
//! For fixed `g` the best `f` is `f(s) = sign(sum_j g(j) sign(s,j))`, leaving
//! `scale * sum_s |sum_j g(j) sign(s,j)|`, a convex function of `g`. Its
//! maximum over the cube sits at a vertex `g in {-1,1}^n`, so enumerating the
//! `2^n` vertices against the `2^n` rows is exact. Rows whose inner sum
//! vanishes contribute 0 whatever `f` is there; `f` is taken to be 0.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combo::TensorCombo;
use crate::error::{Error, Result};
use crate::exactnum::{
    cmp_sq_below, decimal30, format_rational, rat_int, sqrt_enclosure, to_decimal_up, Certified,
    PiEnclosure, Rational, Verdict,
};
use crate::measure::{tensor_sum_f64, Bijection, KsMeasure};
use crate::rect::positive_part_sums;

/// Vertex enumeration guard, `O(4^n)` inner products.
pub const TENSOR_MAX_N: usize = 12;

/// Digits carried by the rational enclosure of `8 / sqrt(pi n)`.
const BOUND_DIGITS: u32 = 40;

/// `max |mu_n(f (x) g)|` over the unit cubes, exactly. `n <= 12`.
pub fn tensor_sup_exact(m: &KsMeasure) -> Result<Rational> {
    let n = m.n();
    if n > TENSOR_MAX_N {
        return Err(Error::GuardExceeded {
            op: "tensor_sup_exact",
            n,
            limit: TENSOR_MAX_N,
        });
    }
    let patterns = m.patterns()?;
    let ni = n as i64;
    let best = (0..1u64 << n)
        .into_par_iter()
        .map(|g| {
            // g bit j set <=> g(j) = -1; sum_j g(j) sign(s,j) = n - 2 |g xor p_s|
            patterns
                .iter()
                .map(|&p| (ni - 2 * i64::from((g ^ p).count_ones())).abs())
                .sum::<i64>()
        })
        .max()
        .unwrap_or(0);
    Ok(rat_int(best) * m.scale())
}

/// Rectangle supremum at `n` from the closed form, for cross-checks.
fn rect_sup_value(n: usize) -> Rational {
    positive_part_sums(n)
        .into_iter()
        .enumerate()
        .map(|(i, t)| Rational::new(BigInt::from(t), BigInt::from(n) << (i + 1)))
        .max()
        .expect("n >= 1")
}

/// `sup < 8 / sqrt(pi n)`, certified. A value below the rectangle supremum
/// is inconsistent (indicators lie in the unit cube) and fails.
pub fn certify_bound3(n: usize, sup: &Rational, pi: &PiEnclosure) -> Verdict {
    if n == 0 || sup.is_negative() || *sup < rect_sup_value(n) {
        return Verdict::Fail;
    }
    match cmp_sq_below(sup, &rat_int(8), pi, n as u64).expect("n >= 1") {
        Certified::CertLt => Verdict::Pass,
        Certified::CertGt => Verdict::Fail,
        Certified::Undecided => Verdict::Undecided,
    }
}

/// Largest `|mu_n(f (x) g)|` over `trials` uniform samples of the cubes.
///
/// Trial `t` draws from a ChaCha8 stream `(seed, t)`, so the result does not
/// depend on how trials are scheduled.
pub fn random_tensor_probe(m: &KsMeasure, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if !m.is_explicit() {
        return Err(Error::NotExplicit);
    }
    let rows = m.patterns()?;
    let n = m.n();
    let scale = 1.0 / (n as f64 * rows.len() as f64);
    let best = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let f: Vec<f64> = (0..rows.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            (tensor_sum_f64(&rows, &f, &g) * scale).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecayRow {
    pub n: usize,
    /// `|mu_n(h)|`.
    #[serde(with = "crate::exactnum::serde_rational")]
    pub value: Rational,
    /// Enclosure of `(8 / sqrt(pi n)) * norm_bound`.
    #[serde(with = "crate::exactnum::serde_rational")]
    pub bound_lower: Rational,
    #[serde(with = "crate::exactnum::serde_rational")]
    pub bound_upper: Rational,
    pub pass: bool,
}

/// Rational enclosure of `c / sqrt(pi n)`.
pub fn bound_enclosure(c: &Rational, pi: &PiEnclosure, n: u64) -> (Rational, Rational) {
    if c.is_zero() {
        return (Rational::zero(), Rational::zero());
    }
    let nn = rat_int(n);
    let (_, hi) = sqrt_enclosure(&(pi.upper() * &nn), BOUND_DIGITS);
    let (lo, _) = sqrt_enclosure(&(pi.lower() * &nn), BOUND_DIGITS);
    (c / hi, c / lo)
}

/// `value <= c / sqrt(pi n)`, certified by squaring (or `value = 0`).
pub fn dominated(value: &Rational, c: &Rational, pi: &PiEnclosure, n: u64) -> bool {
    value.is_zero() || cmp_sq_below(&value.abs(), c, pi, n) == Ok(Certified::CertLt)
}

/// `|mu_n(h)|` against `(8/sqrt(pi n)) * norm_bound(h)` for each `n`.
pub fn decay_profile(h: &TensorCombo, n_list: &[usize], pi: &PiEnclosure) -> Result<Vec<DecayRow>> {
    let c = rat_int(8) * h.norm_bound();
    n_list
        .iter()
        .map(|&n| {
            let m = KsMeasure::auto(n, Bijection::Canonical)?;
            let value = h.eval(&m)?.abs();
            let (bound_lower, bound_upper) = bound_enclosure(&c, pi, n as u64);
            let pass = dominated(&value, &c, pi, n as u64);
            Ok(DecayRow {
                n,
                value,
                bound_lower,
                bound_upper,
                pass,
            })
        })
        .collect()
}

/// `n,value,bound_lower,bound_upper,pass`; bounds as 30-digit decimals
/// rounded outward.
pub fn decay_csv(rows: &[DecayRow]) -> String {
    let mut out = String::from("n,value,bound_lower,bound_upper,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            format_rational(&r.value),
            decimal30(&r.bound_lower),
            to_decimal_up(&r.bound_upper, 30),
            r.pass
        ));
    }
    out
}
