//! The measures `mu_n = (1/(n 2^n)) * sum_{(s,j)} phi(s)(j) delta_(s,j)` on
//! `K_n x L_n`, with `|K_n| = 2^n` rows and `|L_n| = n` columns.
//!
//! A row `s` carries a sign pattern: an `n`-bit word whose bit `j` is set
//! exactly when `phi(s)(j) = -1`. The canonical bijection uses the row index
//! itself as its pattern. Because `phi` is onto `{-1,1}^n`, every column is
//! balanced and every quantity here is invariant under relabeling rows.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactnum::{binomial_row, format_rational, rat_int, Rational};

/// Largest `n` for which atoms may be materialized.
pub const EXPLICIT_MAX_N: usize = 20;
/// Largest `n` whose row indices fit in a `u64`.
pub const ROW_ADDRESS_MAX_N: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bijection {
    Canonical,
    RowPermutation { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    Explicit,
    Implicit,
}

/// Seeded bijection of `{0, .., 2^n - 1}` built from steps that are each
/// invertible modulo `2^n`: odd multiplication, addition, and `x ^= x >> r`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RowMixer {
    mask: u64,
    shift: u32,
    rounds: [(u64, u64); 3],
}

impl RowMixer {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rounds = [(0u64, 0u64); 3];
        for r in rounds.iter_mut() {
            *r = (rng.gen::<u64>() | 1, rng.gen::<u64>());
        }
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self {
            mask,
            shift: (n as u32).div_ceil(2).max(1),
            rounds,
        }
    }

    fn apply(&self, mut x: u64) -> u64 {
        for &(mul, add) in &self.rounds {
            x = x.wrapping_mul(mul) & self.mask;
            x = x.wrapping_add(add) & self.mask;
            x ^= x >> self.shift;
        }
        x
    }
}

#[derive(Debug, Clone)]
pub struct KsMeasure {
    n: usize,
    bijection: Bijection,
    representation: Representation,
    scale: Rational,
    mixer: Option<RowMixer>,
    rows: Option<Vec<u64>>,
}

impl KsMeasure {
    pub fn build(n: usize, bijection: Bijection, representation: Representation) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if representation == Representation::Explicit && n > EXPLICIT_MAX_N {
            return Err(Error::ExplicitTooLarge {
                n,
                limit: EXPLICIT_MAX_N,
            });
        }
        let scale = Rational::new(BigInt::one(), BigInt::from(n) << n);
        let mixer = match bijection {
            Bijection::Canonical => None,
            Bijection::RowPermutation { seed } => Some(RowMixer::new(n, seed)),
        };
        let mut m = Self {
            n,
            bijection,
            representation,
            scale,
            mixer,
            rows: None,
        };
        if representation == Representation::Explicit {
            let rows = (0..1u64 << n).map(|s| m.pattern_unchecked(s)).collect();
            m.rows = Some(rows);
        }
        Ok(m)
    }

    /// Explicit for `n <= 20`, implicit above.
    pub fn auto(n: usize, bijection: Bijection) -> Result<Self> {
        let repr = if n <= EXPLICIT_MAX_N {
            Representation::Explicit
        } else {
            Representation::Implicit
        };
        Self::build(n, bijection, repr)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn bijection(&self) -> Bijection {
        self.bijection
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn is_explicit(&self) -> bool {
        self.rows.is_some()
    }

    /// `2^n` when it fits in a `u64`.
    pub fn row_count(&self) -> Option<u64> {
        (self.n <= ROW_ADDRESS_MAX_N).then(|| 1u64 << self.n)
    }

    fn pattern_unchecked(&self, s: u64) -> u64 {
        match &self.mixer {
            None => s,
            Some(mixer) => mixer.apply(s),
        }
    }

    fn check_addressable(&self) -> Result<()> {
        if self.n > ROW_ADDRESS_MAX_N {
            return Err(Error::RowsNotAddressable {
                n: self.n,
                limit: ROW_ADDRESS_MAX_N,
            });
        }
        Ok(())
    }

    /// Sign pattern of row `s`: bit `j` set iff `sign(s, j) = -1`.
    pub fn row_pattern(&self, s: u64) -> Result<u64> {
        self.check_addressable()?;
        if s >= 1u64 << self.n {
            return Err(Error::IndexOutOfRange {
                index: s as usize,
                len: (1usize << self.n) - 1,
            });
        }
        Ok(match &self.rows {
            Some(rows) => rows[s as usize],
            None => self.pattern_unchecked(s),
        })
    }

    pub fn sign(&self, s: u64, j: usize) -> Result<i8> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.n - 1,
            });
        }
        let p = self.row_pattern(s)?;
        Ok(if p >> j & 1 == 0 { 1 } else { -1 })
    }

    /// All `2^n` row patterns in row order. Guarded to `n <= 20`.
    pub fn patterns(&self) -> Result<Vec<u64>> {
        if let Some(rows) = &self.rows {
            return Ok(rows.clone());
        }
        if self.n > EXPLICIT_MAX_N {
            return Err(Error::ExplicitTooLarge {
                n: self.n,
                limit: EXPLICIT_MAX_N,
            });
        }
        Ok((0..1u64 << self.n).map(|s| self.pattern_unchecked(s)).collect())
    }

    /// Number of `+1` entries in a pattern.
    pub fn plus_count(&self, pattern: u64) -> usize {
        self.n - pattern.count_ones() as usize
    }

    /// `||mu_n||`. Explicit measures sum `|sign| * scale` over the stored
    /// atoms, implicit ones use the atom count `n 2^n`.
    pub fn total_variation(&self) -> Rational {
        let count = match &self.rows {
            Some(rows) => {
                let mut c = 0u64;
                for &p in rows {
                    for j in 0..self.n {
                        let sign: i64 = if p >> j & 1 == 0 { 1 } else { -1 };
                        c += sign.unsigned_abs();
                    }
                }
                BigUint::from(c)
            }
            None => BigUint::from(self.n) << self.n,
        };
        rat_int(BigInt::from(count)) * &self.scale
    }

    /// `|supp(mu_n)| = n 2^n`; in explicit mode, the count of nonzero atoms.
    pub fn support_size(&self) -> BigUint {
        match &self.rows {
            Some(rows) => BigUint::from(rows.len() * self.n),
            None => BigUint::from(self.n) << self.n,
        }
    }

    /// `mu_n(f (x) g) = scale * sum_s f(s) sum_j sign(s,j) g(j)`.
    pub fn eval_tensor(&self, f: &[Rational], g: &[Rational]) -> Result<Rational> {
        let rows = self.rows.as_ref().ok_or(Error::NotExplicit)?;
        self.check_tensor_sizes(f.len(), g.len())?;
        let mut total = Rational::zero();
        for (&p, fs) in rows.iter().zip(f) {
            if fs.is_zero() {
                continue;
            }
            let mut inner = Rational::zero();
            for (j, gj) in g.iter().enumerate() {
                if p >> j & 1 == 0 {
                    inner += gj;
                } else {
                    inner -= gj;
                }
            }
            total += fs * inner;
        }
        Ok(total * &self.scale)
    }

    /// Floating-point counterpart of [`eval_tensor`](Self::eval_tensor).
    pub fn eval_tensor_f64(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        let rows = self.rows.as_ref().ok_or(Error::NotExplicit)?;
        self.check_tensor_sizes(f.len(), g.len())?;
        Ok(tensor_sum_f64(rows, f, g) / ((self.n as f64) * (1u64 << self.n) as f64))
    }

    fn check_tensor_sizes(&self, f_len: usize, g_len: usize) -> Result<()> {
        let rows = 1usize << self.n;
        if f_len != rows {
            return Err(Error::SizeMismatch {
                what: "row function",
                expected: rows,
                got: f_len,
            });
        }
        if g_len != self.n {
            return Err(Error::SizeMismatch {
                what: "column function",
                expected: self.n,
                got: g_len,
            });
        }
        Ok(())
    }

    /// `mu_n(f (x) g)` for `f(s) = table[#plus(s)]` and any `g` with
    /// `sum_j g(j) = gsum`.
    ///
    /// For a fixed column, the rows with `k` plus signs split into
    /// `C(n-1, k-1)` with `+1` there and `C(n-1, k)` with `-1`, so the value is
    /// `scale * gsum * sum_k table[k] (C(n-1,k-1) - C(n-1,k))`.
    pub fn eval_symmetric(&self, table: &[Rational], gsum: &Rational) -> Result<Rational> {
        if table.len() != self.n + 1 {
            return Err(Error::SizeMismatch {
                what: "symmetric table",
                expected: self.n + 1,
                got: table.len(),
            });
        }
        if gsum.is_zero() {
            return Ok(Rational::zero());
        }
        let row: Vec<BigInt> = binomial_row(self.n as u64 - 1)
            .into_iter()
            .map(BigInt::from)
            .collect();
        let zero = BigInt::zero();
        let mut acc = Rational::zero();
        for (k, fk) in table.iter().enumerate() {
            if fk.is_zero() {
                continue;
            }
            let up = if k == 0 { &zero } else { &row[k - 1] };
            let down = row.get(k).unwrap_or(&zero);
            let weight = up - down;
            if weight.is_zero() {
                continue;
            }
            acc += fk * BigRational::from_integer(weight);
        }
        Ok(acc * gsum * &self.scale)
    }

    /// Atom list of an explicit measure.
    pub fn to_atomic(&self) -> Result<FiniteSignedMeasure> {
        let rows = self.rows.as_ref().ok_or(Error::NotExplicit)?;
        let neg = -self.scale.clone();
        let mut atoms = BTreeMap::new();
        for (s, &p) in rows.iter().enumerate() {
            for j in 0..self.n {
                let w = if p >> j & 1 == 0 {
                    self.scale.clone()
                } else {
                    neg.clone()
                };
                atoms.insert((s as u64, j), w);
            }
        }
        Ok(FiniteSignedMeasure { atoms })
    }

    /// `{n, scale, atoms: [[s, j, "+1"|"-1"], ..]}` for explicit measures,
    /// `{n, scale, bijection}` otherwise.
    pub fn to_json(&self) -> Value {
        let scale = format_rational(&self.scale);
        match &self.rows {
            Some(rows) => {
                let mut atoms = Vec::with_capacity(rows.len() * self.n);
                for (s, &p) in rows.iter().enumerate() {
                    for j in 0..self.n {
                        let sign = if p >> j & 1 == 0 { "+1" } else { "-1" };
                        atoms.push(json!([s, j, sign]));
                    }
                }
                json!({ "n": self.n, "scale": scale, "atoms": atoms })
            }
            None => {
                let bijection = match self.bijection {
                    Bijection::Canonical => json!("canonical"),
                    Bijection::RowPermutation { seed } => json!({ "perm_seed": seed }),
                };
                json!({ "n": self.n, "scale": scale, "bijection": bijection })
            }
        }
    }
}

/// `sum_s f(s) sum_j sign(s,j) g(j)` in floating point (unscaled).
pub(crate) fn tensor_sum_f64(rows: &[u64], f: &[f64], g: &[f64]) -> f64 {
    let gsum: f64 = g.iter().sum();
    rows.iter()
        .zip(f)
        .map(|(&p, fs)| {
            // sum_j sign g_j = sum g - 2 * sum_{j in p} g_j
            let mut neg = 0.0;
            let mut bits = p;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                neg += g[j];
                bits &= bits - 1;
            }
            fs * (gsum - 2.0 * neg)
        })
        .sum()
}

/// Purely atomic signed measure on a finite grid of `(row, column)` keys.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteSignedMeasure {
    atoms: BTreeMap<(u64, usize), Rational>,
}

impl FiniteSignedMeasure {
    /// Zero weights are dropped and repeated keys accumulate.
    pub fn from_atoms(atoms: impl IntoIterator<Item = ((u64, usize), Rational)>) -> Self {
        let mut map: BTreeMap<(u64, usize), Rational> = BTreeMap::new();
        for (key, w) in atoms {
            *map.entry(key).or_insert_with(Rational::zero) += w;
        }
        map.retain(|_, w| !w.is_zero());
        Self { atoms: map }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&(u64, usize), &Rational)> {
        self.atoms.iter()
    }

    pub fn total_variation(&self) -> Rational {
        self.atoms.values().map(|w| w.abs()).sum()
    }

    pub fn support(&self) -> Vec<(u64, usize)> {
        self.atoms.keys().copied().collect()
    }

    pub fn mass(&self, mut inside: impl FnMut(u64, usize) -> bool) -> Rational {
        self.atoms
            .iter()
            .filter(|((s, j), _)| inside(*s, *j))
            .map(|(_, w)| w.clone())
            .sum()
    }

    pub fn integrate(&self, mut h: impl FnMut(u64, usize) -> Rational) -> Rational {
        self.atoms.iter().map(|(&(s, j), w)| w * h(s, j)).sum()
    }
}

/// A tensor function `f (x) g` restricted to the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridFunction {
    pub f: Vec<Rational>,
    pub g: Vec<Rational>,
}

impl GridFunction {
    pub fn value(&self, s: usize, j: usize) -> Rational {
        &self.f[s] * &self.g[j]
    }

    fn max_abs(v: &[Rational]) -> Rational {
        v.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// `||f (x) g||_inf = max|f| * max|g|`.
    pub fn sup_norm(&self) -> Rational {
        Self::max_abs(&self.f) * Self::max_abs(&self.g)
    }
}
