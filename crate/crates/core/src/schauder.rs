//! Dense subspaces of the sequence space and their triangular bases.
//!
//! Sequences are indexed from 1 and handled on a finite horizon. A subspace
//! `Y = span(G)` is dense iff every coordinate projection `pi_F: Y -> R^F`,
//! `F` finite, is onto. Onto-ness on `{1..m}` implies it on every
//! `F ⊆ {1..m}` (compose with the coordinate restriction), so only initial
//! segments are tested.
//!
//! The basis satisfies `pi_k(b_n) = delta_kn` for `k <= n`. Coefficients of
//! `y` follow `a_1 = y_1`, `a_n = y_n - sum_{k<n} a_k pi_n(b_k)`, and the
//! partial sums `S_N = sum_{n<=N} a_n b_n` agree with `y` in coordinate `m`
//! for every `N >= m`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, Rational};
use crate::linalg::{rank, rref, solve};

/// Finitely supported rational sequence, coordinates from 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseSeq {
    coords: BTreeMap<usize, Rational>,
}

impl SparseSeq {
    pub fn new(entries: impl IntoIterator<Item = (usize, Rational)>) -> Result<Self> {
        let mut coords = BTreeMap::new();
        for (k, v) in entries {
            if k == 0 {
                return Err(Error::InvalidArgument("coordinates start at 1".into()));
            }
            if !v.is_zero() {
                coords.insert(k, v);
            }
        }
        Ok(Self { coords })
    }

    pub fn unit(k: usize) -> Self {
        Self::new([(k, Rational::one())]).expect("k >= 1")
    }

    /// `values[i]` at coordinate `i + 1`.
    pub fn from_dense(values: &[Rational]) -> Self {
        Self::new(values.iter().cloned().enumerate().map(|(i, v)| (i + 1, v))).expect("1-based")
    }

    pub fn get(&self, k: usize) -> Rational {
        self.coords.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn to_dense(&self, horizon: usize) -> Vec<Rational> {
        (1..=horizon).map(|k| self.get(k)).collect()
    }

    pub fn max_coordinate(&self) -> usize {
        self.coords.keys().next_back().copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&usize, &Rational)> {
        self.coords.iter()
    }
}

#[derive(Deserialize, Serialize)]
struct SeqLine {
    coords: BTreeMap<String, String>,
}

/// Parses one sequence per line as `{"coords": {"1": "p/q", ...}}`; blank
/// lines are skipped.
pub fn parse_jsonl(text: &str) -> Result<Vec<SparseSeq>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
        let parsed: SeqLine = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let mut entries = Vec::with_capacity(parsed.coords.len());
        for (k, v) in parsed.coords {
            let k: usize = k.parse().map_err(|_| err(format!("bad coordinate {k:?}")))?;
            entries.push((k, parse_rational(&v).map_err(|e| err(e.to_string()))?));
        }
        out.push(SparseSeq::new(entries).map_err(|e| err(e.to_string()))?);
    }
    Ok(out)
}

pub fn seq_to_json(s: &SparseSeq) -> Value {
    let coords: serde_json::Map<String, Value> = s
        .entries()
        .map(|(k, v)| (k.to_string(), Value::String(format_rational(v))))
        .collect();
    json!({ "coords": coords })
}

/// Whether the supplied generators are the whole family or a prefix of a
/// longer (possibly infinite) stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorCount {
    Finite,
    Stream,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    pub generators: Vec<SparseSeq>,
    pub count: GeneratorCount,
}

impl GeneratorSet {
    pub fn finite(generators: Vec<SparseSeq>) -> Self {
        Self {
            generators,
            count: GeneratorCount::Finite,
        }
    }

    pub fn stream_prefix(generators: Vec<SparseSeq>) -> Self {
        Self {
            generators,
            count: GeneratorCount::Stream,
        }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Rows `coords[..]`, columns generators.
    fn coordinate_matrix(&self, coords: &[usize]) -> Vec<Vec<Rational>> {
        coords
            .iter()
            .map(|&k| self.generators.iter().map(|g| g.get(k)).collect())
            .collect()
    }

    /// `pi_F` restricted to the span is onto `R^F`.
    pub fn surjective_on(&self, coords: &[usize]) -> bool {
        rank(&self.coordinate_matrix(coords)) == coords.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Density {
    /// `pi_{1..m}` is onto; `rank_witness` lists `m` generators (0-based)
    /// whose projections are independent.
    DenseUpTo { m: usize, rank_witness: Vec<usize> },
    /// `pi_F` is not onto for `F = failing`. `first_deficient` is the least
    /// `m'` with `pi_{1..m'}` not onto.
    NotDense {
        failing: Vec<usize>,
        rank: usize,
        first_deficient: usize,
    },
    /// Rank deficient so far, but further stream elements could raise it.
    Inconclusive { m: usize, rank: usize },
}

impl Density {
    pub fn is_dense(&self) -> bool {
        matches!(self, Density::DenseUpTo { .. })
    }
}

/// Onto-ness of `pi_{1..m}` on `span(G)` by exact rank.
pub fn density_check(g: &GeneratorSet, m: usize) -> Result<Density> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let coords: Vec<usize> = (1..=m).collect();
    // columns are coordinates here so that pivots name generators
    let by_generator: Vec<Vec<Rational>> = g
        .generators
        .iter()
        .map(|s| coords.iter().map(|&k| s.get(k)).collect())
        .collect();
    let transposed: Vec<Vec<Rational>> = (0..m)
        .map(|k| by_generator.iter().map(|row| row[k].clone()).collect())
        .collect();
    let red = rref(transposed);
    let r = red.pivots.len();
    if r == m {
        return Ok(Density::DenseUpTo {
            m,
            rank_witness: red.pivots,
        });
    }
    if g.count == GeneratorCount::Stream {
        return Ok(Density::Inconclusive { m, rank: r });
    }
    let first_deficient = (1..=m)
        .find(|&k| !g.surjective_on(&coords[..k]))
        .expect("rank < m");
    Ok(Density::NotDense {
        failing: coords,
        rank: r,
        first_deficient,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisVector {
    /// Generator index (0-based) to coefficient.
    pub combination: BTreeMap<usize, Rational>,
    /// `pi_1 .. pi_H`.
    pub coords: Vec<Rational>,
}

impl BasisVector {
    pub fn support_size(&self) -> usize {
        self.coords.iter().filter(|v| !v.is_zero()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangularBasis {
    vectors: Vec<BasisVector>,
    horizon: usize,
}

impl TriangularBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn vectors(&self) -> &[BasisVector] {
        &self.vectors
    }

    /// `pi_k(b_n)`, both 1-based.
    pub fn coord(&self, n: usize, k: usize) -> &Rational {
        &self.vectors[n - 1].coords[k - 1]
    }

    /// Rebuilds `b_n` from its stored generator combination.
    pub fn recombine(&self, g: &GeneratorSet, n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.horizon];
        for (&i, c) in &self.vectors[n - 1].combination {
            for (k, v) in out.iter_mut().enumerate() {
                *v += c * g.generators[i].get(k + 1);
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let vectors: Vec<Value> = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let combination: serde_json::Map<String, Value> = b
                    .combination
                    .iter()
                    .map(|(k, v)| (k.to_string(), Value::String(format_rational(v))))
                    .collect();
                json!({
                    "n": i + 1,
                    "combination": combination,
                    "coords": b.coords.iter().map(format_rational).collect::<Vec<_>>(),
                    "support_size": b.support_size(),
                })
            })
            .collect();
        json!({ "horizon": self.horizon, "vectors": vectors })
    }
}

/// Builds `b_1..b_N`, each a combination of generators.
///
/// Every `b_n` solves `pi_k(b_n) = delta_kn` on the whole segment
/// `k = 1..N`, which is stronger than the triangular condition and makes
/// the basis biorthogonal to `pi_1..pi_N`. Among solutions the one from
/// first-nonzero pivoting with free generators at zero is taken. The error
/// names the least `m` for which `pi_{1..m}` is not onto.
pub fn build_triangular_basis(g: &GeneratorSet, n_max: usize, horizon: usize) -> Result<TriangularBasis> {
    if horizon < n_max {
        return Err(Error::HorizonMismatch {
            needed: n_max,
            got: horizon,
        });
    }
    let coords: Vec<usize> = (1..=n_max).collect();
    if let Some(m) = (1..=n_max).find(|&m| !g.surjective_on(&coords[..m])) {
        return Err(Error::RankDeficient { coordinate: m });
    }
    let a = g.coordinate_matrix(&coords);
    let mut vectors = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut rhs = vec![Rational::zero(); n_max];
        rhs[n - 1] = Rational::one();
        let x = solve(&a, &rhs).expect("rank n_max on 1..n_max");
        let combination: BTreeMap<usize, Rational> = x
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let mut coords_h = vec![Rational::zero(); horizon];
        for (&i, c) in &combination {
            for (&k, v) in g.generators[i].entries() {
                if k <= horizon {
                    coords_h[k - 1] += c * v;
                }
            }
        }
        vectors.push(BasisVector {
            combination,
            coords: coords_h,
        });
    }
    Ok(TriangularBasis { vectors, horizon })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffExpansion {
    pub coefficients: Vec<Rational>,
    /// For coordinate `m`, the least `N'` with `pi_m(S_N'') = y_m` for all
    /// `N' <= N'' <= N`, or `None` if `pi_m(S_N) != y_m`.
    pub stabilization_log: Vec<Option<usize>>,
}

impl CoeffExpansion {
    pub fn to_json(&self) -> Value {
        json!({
            "coefficients": self.coefficients.iter().map(format_rational).collect::<Vec<_>>(),
            "stabilization_log": self.stabilization_log,
        })
    }
}

/// Coefficients of `y` (dense, `y[0] = y_1`) in the triangular basis.
pub fn expand(y: &[Rational], basis: &TriangularBasis) -> Result<CoeffExpansion> {
    if y.len() < basis.horizon() {
        return Err(Error::HorizonMismatch {
            needed: basis.horizon(),
            got: y.len(),
        });
    }
    let n_max = basis.len();
    let mut a: Vec<Rational> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut an = y[n - 1].clone();
        for (k, ak) in a.iter().enumerate() {
            an -= ak * basis.coord(k + 1, n);
        }
        a.push(an);
    }
    // column N' of the partial-sum table, updated in place
    let mut partial = vec![Rational::zero(); n_max];
    let mut since: Vec<Option<usize>> = vec![None; n_max];
    for (np, an) in a.iter().enumerate() {
        for (m, pm) in partial.iter_mut().enumerate() {
            *pm += an * basis.coord(np + 1, m + 1);
            if *pm == y[m] {
                since[m].get_or_insert(np + 1);
            } else {
                since[m] = None;
            }
        }
    }
    Ok(CoeffExpansion {
        coefficients: a,
        stabilization_log: since,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilizationReport {
    /// `grid[m-1][N'-m]` is `pi_m(S_N') == y_m` for `m <= N' <= N`.
    pub grid: Vec<Vec<bool>>,
    pub all_true: bool,
}

/// Checks `pi_m(S_N') = y_m` cell by cell from the coefficients, independent
/// of the stabilization log. Cells beyond the available coefficients fail.
pub fn verify_stabilization(
    exp: &CoeffExpansion,
    basis: &TriangularBasis,
    y: &[Rational],
    n: usize,
) -> StabilizationReport {
    let avail = exp.coefficients.len().min(basis.len());
    let horizon = basis.horizon().min(y.len());
    let grid: Vec<Vec<bool>> = (1..=n)
        .map(|m| {
            (m..=n)
                .map(|np| {
                    if np > avail || m > horizon {
                        return false;
                    }
                    let s: Rational = (1..=np)
                        .map(|i| &exp.coefficients[i - 1] * basis.coord(i, m))
                        .sum();
                    s == y[m - 1]
                })
                .collect()
        })
        .collect();
    let all_true = grid.iter().flatten().all(|&b| b);
    StabilizationReport { grid, all_true }
}

/// Weights `c_1..c_n` with `b_n^*(y) = sum_k c_k pi_k(y)`, unrolled from
/// `b_n^*(y) = pi_n(y) - sum_{k<n} b_k^*(y) pi_n(b_k)`.
pub fn coefficient_functional(basis: &TriangularBasis, n: usize) -> Result<Vec<Rational>> {
    if n == 0 || n > basis.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: basis.len(),
        });
    }
    Ok(coefficient_functionals(basis).swap_remove(n - 1))
}

/// All of `b_1^*, .., b_N^*`; entry `n-1` has length `n`.
pub fn coefficient_functionals(basis: &TriangularBasis) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::with_capacity(basis.len());
    for n in 1..=basis.len() {
        let mut w = vec![Rational::zero(); n];
        w[n - 1] = Rational::one();
        for (k, wk) in out.iter().enumerate() {
            let c = basis.coord(k + 1, n);
            if c.is_zero() {
                continue;
            }
            for (i, v) in wk.iter().enumerate() {
                w[i] -= c * v;
            }
        }
        out.push(w);
    }
    out
}

/// `sum_k weights[k-1] * y_k`.
pub fn apply_functional(weights: &[Rational], y: &[Rational]) -> Rational {
    weights.iter().zip(y).map(|(w, v)| w * v).sum()
}
