//! Subsequences `(s_n)` with `sum 1/sqrt(s_n) < inf` and certificates of
//! summability of `sum_n |mu_{s_n}(h)|` on the tensor algebra.
//!
//! Selection rule: `s_n` is the first unconsumed stream element with
//! `s_n >= max(s_{n-1} + 1, n^4)`. Then `1/sqrt(s_n) <= 1/n^2`, and the tail
//! after position `N` is at most `sum_{n>N} 1/n^2 <= 1/N`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::combo::TensorCombo;
use crate::error::{Error, Result};
use crate::exactnum::{
    decimal30, format_rational, inv_sqrt_upper, rat_int, serde_rational, to_decimal_up,
    PiEnclosure, Rational, Verdict,
};
use crate::measure::{Bijection, KsMeasure};
use crate::tensor::{bound_enclosure, dominated};

pub const GREEDY_RULE: &str = "greedy_n4: s_n = first unconsumed k with k >= max(s_(n-1) + 1, n^4)";

pub const SUMMABILITY_DISCLAIMER: &str = "Only finite prefixes of sum_n |mu_(s_n)(h)| are checked, for the listed combinations h. \
Density of the set of summable continuous functions is a consequence of the density of the tensor algebra in C(X x Y) \
and cannot be verified by finite computation.";

/// A selected index sequence with a rational bound on `sum 1/sqrt(s_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubseqCertificate {
    rule: String,
    indices: Vec<u64>,
    /// Rational upper bound on each `1/sqrt(s_n)`.
    term_upper: Vec<Rational>,
    /// `sum_{n <= N}` of `term_upper`.
    partial_sum_upper: Rational,
    /// `1/N`, dominating `sum_{n > N} 1/n^2`.
    tail_bound: Rational,
}

fn fourth_power(n: usize) -> Result<u64> {
    (n as u64)
        .checked_pow(4)
        .ok_or_else(|| Error::InvalidArgument(format!("position {n} overflows n^4")))
}

/// Greedy selection of `len` indices from a strictly increasing stream.
pub fn extract(stream: impl IntoIterator<Item = u64>, len: usize) -> Result<SubseqCertificate> {
    if len == 0 {
        return Err(Error::InvalidArgument("subsequence length must be >= 1".into()));
    }
    let mut stream = stream.into_iter();
    let mut indices = Vec::with_capacity(len);
    let mut last_seen: Option<u64> = None;
    for pos in 1..=len {
        let floor = fourth_power(pos)?.max(indices.last().map_or(1, |&s: &u64| s + 1));
        let next = loop {
            let Some(k) = stream.next() else {
                return Err(Error::StreamExhausted {
                    selected: indices.len(),
                    wanted: len,
                });
            };
            if last_seen.is_some_and(|prev| k <= prev) {
                return Err(Error::InvalidArgument(format!(
                    "stream not strictly increasing at {k}"
                )));
            }
            last_seen = Some(k);
            if k >= floor {
                break k;
            }
        };
        indices.push(next);
    }
    Ok(SubseqCertificate::from_indices(GREEDY_RULE.into(), indices))
}

impl SubseqCertificate {
    fn from_indices(rule: String, indices: Vec<u64>) -> Self {
        let term_upper: Vec<Rational> = indices
            .iter()
            .map(|&s| inv_sqrt_upper(&BigUint::from(s)))
            .collect();
        let partial_sum_upper = term_upper.iter().sum();
        let tail_bound = Rational::new(BigInt::one(), BigInt::from(indices.len()));
        Self {
            rule,
            indices,
            term_upper,
            partial_sum_upper,
            tail_bound,
        }
    }

    pub fn rule(&self) -> &str {
        &self.rule
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn partial_sum_upper(&self) -> &Rational {
        &self.partial_sum_upper
    }

    pub fn tail_bound(&self) -> &Rational {
        &self.tail_bound
    }

    /// `P_N + 1/N`, a bound on the whole series.
    pub fn total_bound(&self) -> Rational {
        &self.partial_sum_upper + &self.tail_bound
    }

    /// The same bound computed from the first `m` selections only.
    pub fn prefix_total_bound(&self, m: usize) -> Result<Rational> {
        if m == 0 || m > self.len() {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.len(),
            });
        }
        let p: Rational = self.term_upper[..m].iter().sum();
        Ok(p + Rational::new(BigInt::one(), BigInt::from(m)))
    }

    /// Re-checks every claim of the certificate from the indices alone.
    pub fn verify(&self) -> bool {
        let increasing = self.indices.windows(2).all(|w| w[0] < w[1]);
        let floors = self
            .indices
            .iter()
            .enumerate()
            .all(|(i, &s)| fourth_power(i + 1).is_ok_and(|f| s >= f));
        let terms = self.indices.iter().zip(&self.term_upper).enumerate().all(|(i, (&s, u))| {
            // u >= 1/sqrt(s) and u <= 1/n^2
            let s = rat_int(s);
            let n2 = rat_int((i as i64 + 1) * (i as i64 + 1));
            u * u * s >= Rational::one() && u * n2 <= Rational::one()
        });
        let sum_ok = self.term_upper.iter().sum::<Rational>() == self.partial_sum_upper;
        let tail_ok =
            self.tail_bound == Rational::new(BigInt::one(), BigInt::from(self.indices.len()));
        !self.indices.is_empty() && increasing && floors && terms && sum_ok && tail_ok
    }

    /// `P_N <= pi_lower^2 / 6`, hence `P_N + tail <= pi^2/6 + 1/N`.
    pub fn within_basel(&self, pi: &PiEnclosure) -> bool {
        self.partial_sum_upper <= pi.lower() * pi.lower() / rat_int(6)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rule": self.rule,
            "indices": self.indices,
            "partial_sum_upper": format_rational(&self.partial_sum_upper),
            "tail_bound": format_rational(&self.tail_bound),
        })
    }
}

/// Partial sums of `sum_{n <= M'} |mu_{s_n}(h)|` against the uniform bound
/// `(8/sqrt(pi)) * norm_bound(h) * (P_M + 1/M)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSums {
    pub partial_sums: Vec<Rational>,
    /// `8 * norm_bound * (P_M + 1/M)`; the bound is this over `sqrt(pi)`.
    pub bound_numerator: Rational,
    pub bound_lower: Rational,
    pub bound_upper: Rational,
    pub all_dominated: bool,
    pub unit_norms: bool,
}

pub fn strongly_normal_partial_sums(
    cert: &SubseqCertificate,
    h: &TensorCombo,
    m: usize,
    pi: &PiEnclosure,
) -> Result<PartialSums> {
    let total = cert.prefix_total_bound(m)?;
    let c = rat_int(8) * h.norm_bound() * total;
    let mut partial_sums = Vec::with_capacity(m);
    let mut acc = Rational::zero();
    let mut unit_norms = true;
    for &s in &cert.indices()[..m] {
        let measure = KsMeasure::auto(s as usize, Bijection::Canonical)?;
        unit_norms &= measure.total_variation() == Rational::one();
        let v = h.eval(&measure)?;
        acc += num_traits::Signed::abs(&v);
        partial_sums.push(acc.clone());
    }
    let all_dominated = partial_sums.iter().all(|p| dominated(p, &c, pi, 1));
    let (bound_lower, bound_upper) = bound_enclosure(&c, pi, 1);
    Ok(PartialSums {
        partial_sums,
        bound_numerator: c,
        bound_lower,
        bound_upper,
        all_dominated,
        unit_norms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyVerdict {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub combo: usize,
    pub verdict: Verdict,
    #[serde(with = "serde_rational")]
    pub norm_bound: Rational,
    pub partial_sums: Vec<String>,
    pub partial_sums_decimal: Vec<String>,
    pub bound_lower: String,
    pub bound_upper: String,
    pub unit_norms: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StronglyNormalReport {
    pub rule: String,
    pub prefix_length: usize,
    pub rows: Vec<ReportRow>,
    pub verdict: FamilyVerdict,
    pub disclaimer: &'static str,
}

pub fn strongly_normal_report(
    cert: &SubseqCertificate,
    family: &[TensorCombo],
    m: usize,
    pi: &PiEnclosure,
) -> Result<StronglyNormalReport> {
    let mut rows = Vec::with_capacity(family.len());
    for (i, h) in family.iter().enumerate() {
        let ps = strongly_normal_partial_sums(cert, h, m, pi)?;
        let verdict = if ps.all_dominated && ps.unit_norms {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        rows.push(ReportRow {
            combo: i,
            verdict,
            norm_bound: h.norm_bound(),
            partial_sums: ps.partial_sums.iter().map(format_rational).collect(),
            partial_sums_decimal: ps.partial_sums.iter().map(decimal30).collect(),
            bound_lower: decimal30(&ps.bound_lower),
            bound_upper: to_decimal_up(&ps.bound_upper, 30),
            unit_norms: ps.unit_norms,
        });
    }
    let verdict = if rows.is_empty() {
        FamilyVerdict::Vacuous
    } else if rows.iter().all(|r| r.verdict == Verdict::Pass) {
        FamilyVerdict::Pass
    } else {
        FamilyVerdict::Fail
    };
    Ok(StronglyNormalReport {
        rule: cert.rule().to_string(),
        prefix_length: m,
        rows,
        verdict,
        disclaimer: SUMMABILITY_DISCLAIMER,
    })
}
