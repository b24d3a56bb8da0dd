//! Finite-section diagnostics for candidate basic sequences of functionals.
//!
//! A section is an `N x T` table: row `i` is functional `v_i` evaluated on
//! test function `t`. The span gets the norm `||sum c_i v_i|| = max_t
//! |sum_i c_i v_i[t]|`, and `P_m(sum c_i v_i) = sum_{i<=m} c_i v_i`.
//!
//! `||P_m||` is exact: for each test function `t`, maximize
//! `sum_{i<=m} c_i v_i[t]` over `{c : |sum_i c_i v_i[t']| <= 1 for all t'}`
//! as a rational LP. The region is symmetric, so the maximum of the signed
//! objective equals the maximum of its absolute value.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::combo::TensorCombo;
use crate::error::{Error, Result};
use crate::exactnum::{decimal30, format_rational, Rational};
use crate::linalg::rank;
use crate::lp::{maximize, LpOutcome};
use crate::measure::{Bijection, KsMeasure};

pub const SECTION_CAVEAT: &str = "Finite-section evidence only: projection norms are computed on the span of the listed \
functionals, normed by the supplied test family. Nothing is claimed about the infinite sequence or the weak* topology.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormModel {
    SupOnFamily,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSection {
    functionals: Vec<Vec<Rational>>,
    norm_model: NormModel,
}

impl FiniteSection {
    /// Rows must share one length. Degeneracy is reported by
    /// [`FiniteSection::degeneracy`], not rejected here.
    pub fn new(functionals: Vec<Vec<Rational>>) -> Result<Self> {
        if let Some(first) = functionals.first() {
            let t = first.len();
            if let Some(bad) = functionals.iter().find(|r| r.len() != t) {
                return Err(Error::SizeMismatch {
                    what: "section row",
                    expected: t,
                    got: bad.len(),
                });
            }
        }
        Ok(Self {
            functionals,
            norm_model: NormModel::SupOnFamily,
        })
    }

    pub fn functionals(&self) -> &[Vec<Rational>] {
        &self.functionals
    }

    pub fn norm_model(&self) -> NormModel {
        self.norm_model
    }

    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    pub fn test_count(&self) -> usize {
        self.functionals.first().map_or(0, Vec::len)
    }

    /// Why the section is unusable, if it is.
    pub fn degeneracy(&self) -> Option<String> {
        if self.functionals.is_empty() {
            return Some("empty section".into());
        }
        if let Some(i) = self.functionals.iter().position(|r| r.iter().all(Zero::is_zero)) {
            return Some(format!("row {} is zero on the test family", i + 1));
        }
        let r = rank(&self.functionals);
        if r < self.functionals.len() {
            return Some(format!("rows are dependent (rank {r} < {})", self.functionals.len()));
        }
        None
    }

    pub fn to_json(&self) -> Value {
        json!({
            "norm_model": self.norm_model,
            "functionals": self
                .functionals
                .iter()
                .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "degenerate": self.degeneracy(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisConstantReport {
    pub k: Rational,
    /// `||P_m||` for `m = 1..N-1`.
    pub projection_norms: Vec<Rational>,
    pub caveat: &'static str,
}

impl BasisConstantReport {
    pub fn to_json(&self) -> Value {
        let norms: Vec<Value> = self
            .projection_norms
            .iter()
            .enumerate()
            .map(|(i, v)| json!({"m": i + 1, "norm": format_rational(v), "norm_decimal": decimal30(v)}))
            .collect();
        json!({
            "k": format_rational(&self.k),
            "k_decimal": decimal30(&self.k),
            "projection_norms": norms,
            "caveat": self.caveat,
        })
    }
}

/// `||P_m||` on a non-degenerate section, `1 <= m <= N`.
pub fn projection_norm(section: &FiniteSection, m: usize) -> Result<Rational> {
    if let Some(why) = section.degeneracy() {
        return Err(Error::Degenerate(why));
    }
    let n = section.len();
    if m == 0 || m > n {
        return Err(Error::IndexOutOfRange { index: m, len: n });
    }
    Ok(projection_norm_unchecked(&section.functionals, m))
}

fn projection_norm_unchecked(v: &[Vec<Rational>], m: usize) -> Rational {
    let n = v.len();
    let t_count = v[0].len();
    // c = c_plus - c_minus; rows encode +V^T c <= 1 and -V^T c <= 1
    let mut a = Vec::with_capacity(2 * t_count);
    for sign in [1i64, -1] {
        let s = Rational::from_integer(sign.into());
        for t in 0..t_count {
            let mut row = Vec::with_capacity(2 * n);
            row.extend(v.iter().map(|r| &s * &r[t]));
            row.extend(v.iter().map(|r| -(&s * &r[t])));
            a.push(row);
        }
    }
    let b = vec![Rational::one(); 2 * t_count];
    (0..t_count)
        .map(|t| {
            let mut c = Vec::with_capacity(2 * n);
            c.extend((0..n).map(|i| if i < m { v[i][t].clone() } else { Rational::zero() }));
            c.extend((0..n).map(|i| if i < m { -v[i][t].clone() } else { Rational::zero() }));
            match maximize(&a, &b, &c) {
                LpOutcome::Optimal { value, .. } => value,
                LpOutcome::Unbounded => unreachable!("independent rows bound the region"),
            }
        })
        .max()
        .expect("at least one test function")
}

/// `K = max_{1<=m<N} ||P_m||`, with `K = 1` when `N = 1`.
pub fn basis_constant(section: &FiniteSection) -> Result<BasisConstantReport> {
    if let Some(why) = section.degeneracy() {
        return Err(Error::Degenerate(why));
    }
    let n = section.len();
    let projection_norms: Vec<Rational> = (1..n)
        .into_par_iter()
        .map(|m| projection_norm_unchecked(&section.functionals, m))
        .collect();
    let k = projection_norms.iter().max().cloned().unwrap_or_else(Rational::one);
    Ok(BasisConstantReport {
        k,
        projection_norms,
        caveat: SECTION_CAVEAT,
    })
}

/// Rows `(mu_{s}(h))_h` for `s` in `indices`, canonical bijection.
pub fn section_of_ks(indices: &[u64], family: &[TensorCombo]) -> Result<FiniteSection> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument("index list is empty".into()));
    }
    let rows = indices
        .iter()
        .map(|&s| {
            let m = KsMeasure::auto(s as usize, Bijection::Canonical)?;
            family.iter().map(|h| h.eval(&m)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteSection::new(rows)
}
