//! Supremum of `|mu_n(A x B)|` over rectangles.
//!
//! Since `mu_n` is atomic with support `K_n x L_n`, any `A x B` in `X x Y`
//! has the same mass as `(A n K_n) x (B n L_n)`, so it is enough to range
//! over subsets of rows and columns.
//!
//! For a fixed column set `B` of size `b`, the mass is linear in the row
//! indicator, so the best `A` takes exactly the rows whose partial sum over
//! `B` is positive (or, by the sign symmetry of the cube, negative). Each
//! pattern in `{-1,1}^b` occurs in `2^(n-b)` rows, giving
//!
//! ```text
//! sup_{|B| = b} = (1 / (n 2^b)) * sum_{e in {-1,1}^b} max(0, sum e)
//!               = (1 / (n 2^b)) * b * C(b-1, floor((b-1)/2)).
//! ```

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactnum::{
    cmp_sq_below, decimal30, format_rational, rat, rat_int, Certified, PiEnclosure, Rational,
    Verdict,
};
use crate::measure::{KsMeasure, EXPLICIT_MAX_N, ROW_ADDRESS_MAX_N};

/// Largest `n` for exhaustive rectangle enumeration (`2^16 * 2^4` rectangles).
pub const BRUTE_MAX_N: usize = 4;

/// Fixed-width set of indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Self::new(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    /// Low `len` bits of `mask`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        let mut b = Self::new(len);
        for i in 0..len.min(64) {
            if mask >> i & 1 == 1 {
                b.insert(i);
            }
        }
        b
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::new(len);
        for i in indices {
            b.insert(i);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} outside width {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }

    /// Hex digits, digit `k` holding indices `4k..4k+3` (index `4k+i` has
    /// value `1 << i`).
    pub fn to_hex(&self) -> String {
        (0..self.len.div_ceil(4))
            .map(|k| {
                let nib = (0..4).fold(0u32, |acc, i| {
                    acc | (u32::from(self.contains(4 * k + i)) << i)
                });
                char::from_digit(nib, 16).expect("nibble")
            })
            .collect()
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        if hex.len() != len.div_ceil(4) {
            return Err(Error::Parse(format!("bitset of width {len} needs {} hex digits", len.div_ceil(4))));
        }
        let mut b = Self::new(len);
        for (k, ch) in hex.chars().enumerate() {
            let nib = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("bad hex digit {ch:?}")))?;
            for i in 0..4 {
                if nib >> i & 1 == 1 {
                    if 4 * k + i >= len {
                        return Err(Error::Parse("bit set beyond bitset width".into()));
                    }
                    b.insert(4 * k + i);
                }
            }
        }
        Ok(b)
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// `A x B` with `A` a set of rows of `K_n` and `B` a set of columns of `L_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rectangle {
    pub rows: BitSet,
    pub cols: BitSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    BruteForce,
    FastPath,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectangleSupReport {
    pub n: usize,
    pub sup: Rational,
    pub witness: Option<Rectangle>,
    pub lower_ok: Certified,
    pub upper_ok: Certified,
    pub method: Method,
}

impl RectangleSupReport {
    fn new(n: usize, sup: Rational, witness: Option<Rectangle>, method: Method) -> Self {
        let pi = PiEnclosure::published();
        let (lower_ok, upper_ok) = bound2_checks(n, &sup, &pi);
        Self {
            n,
            sup,
            witness,
            lower_ok,
            upper_ok,
            method,
        }
    }

    pub fn to_json(&self) -> Value {
        let witness = match &self.witness {
            Some(w) => json!({ "A_bits": w.rows.to_hex(), "B_bits": w.cols.to_hex() }),
            None => Value::Null,
        };
        json!({
            "n": self.n,
            "sup": format_rational(&self.sup),
            "sup_decimal": decimal30(&self.sup),
            "witness": witness,
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
            "method": self.method,
        })
    }
}

fn check_width(m: &KsMeasure, r: &Rectangle) -> Result<()> {
    let rows = m.row_count().ok_or(Error::RowsNotAddressable {
        n: m.n(),
        limit: ROW_ADDRESS_MAX_N,
    })? as usize;
    if r.rows.len() != rows {
        return Err(Error::SizeMismatch {
            what: "row bitset",
            expected: rows,
            got: r.rows.len(),
        });
    }
    if r.cols.len() != m.n() {
        return Err(Error::SizeMismatch {
            what: "column bitset",
            expected: m.n(),
            got: r.cols.len(),
        });
    }
    Ok(())
}

/// `mu_n(A x B) = scale * sum_{s in A} sum_{j in B} sign(s, j)`.
pub fn rect_mass(m: &KsMeasure, r: &Rectangle) -> Result<Rational> {
    check_width(m, r)?;
    if r.rows.is_empty() || r.cols.is_empty() {
        return Ok(Rational::zero());
    }
    let cols: Vec<usize> = r.cols.iter().collect();
    let mut total: i64 = 0;
    for s in r.rows.iter() {
        let p = m.row_pattern(s as u64)?;
        for &j in &cols {
            total += if p >> j & 1 == 0 { 1 } else { -1 };
        }
    }
    Ok(rat_int(total) * m.scale())
}

/// Exhaustive maximum over all `2^(2^n) * 2^n` rectangles, `n <= 4`.
///
/// The witness is the lexicographically smallest `(B, A)` attaining the
/// maximum, bitsets read as integers.
pub fn sup_rect_bruteforce(m: &KsMeasure) -> Result<RectangleSupReport> {
    let n = m.n();
    if n > BRUTE_MAX_N {
        return Err(Error::GuardExceeded {
            op: "sup_rect_bruteforce",
            n,
            limit: BRUTE_MAX_N,
        });
    }
    let patterns = m.patterns()?;
    let rows = patterns.len();
    let per_b: Vec<(i64, u64)> = (0..1u64 << n)
        .into_par_iter()
        .map(|b_mask| {
            let b = i64::from(b_mask.count_ones());
            let r: Vec<i64> = patterns
                .iter()
                .map(|&p| b - 2 * i64::from((p & b_mask).count_ones()))
                .collect();
            let mut sums = vec![0i64; 1 << rows];
            let mut best = (0i64, 0u64);
            for a in 1usize..1 << rows {
                sums[a] = sums[a & (a - 1)] + r[a.trailing_zeros() as usize];
                if sums[a].abs() > best.0 {
                    best = (sums[a].abs(), a as u64);
                }
            }
            best
        })
        .collect();
    let (b_best, &(best, a_best)) = per_b
        .iter()
        .enumerate()
        .fold((0usize, &(0i64, 0u64)), |acc, (b, v)| {
            if v.0 > acc.1 .0 {
                (b, v)
            } else {
                acc
            }
        });
    let witness = Rectangle {
        rows: BitSet::from_mask(rows, a_best),
        cols: BitSet::from_mask(n, b_best as u64),
    };
    let sup = rat_int(best) * m.scale();
    Ok(RectangleSupReport::new(n, sup, Some(witness), Method::BruteForce))
}

/// `sum_{e in {-1,1}^b} max(0, sum e)` for `b = 1..=n`, via
/// `b * C(b-1, floor((b-1)/2))`.
pub fn positive_part_sums(n: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(n);
    // central = C(b-1, floor((b-1)/2))
    let mut central = BigUint::one();
    for b in 1..=n {
        if b > 1 {
            let m = b as u64 - 2;
            central = if m.is_multiple_of(2) {
                let q = m / 2;
                central * (2 * q + 1) / (q + 1)
            } else {
                central * 2u32
            };
        }
        out.push(&central * BigUint::from(b));
    }
    out
}

/// Exact `sup_{|B| = b} |mu_n(A x B)|` for `b = 1..=n` (index `b - 1`).
pub fn sup_rect_per_b(m: &KsMeasure) -> Vec<Rational> {
    let n = m.n();
    positive_part_sums(n)
        .into_iter()
        .enumerate()
        .map(|(i, t)| Rational::new(BigInt::from(t), BigInt::from(n) << (i + 1)))
        .collect()
}

/// Closed-form supremum, valid for any `n` in either representation.
///
/// The witness (first `b*` columns, rows with positive partial sum there,
/// `b*` the smallest maximizing size) is materialized for `n <= 20`.
pub fn sup_rect_fast(m: &KsMeasure) -> Result<RectangleSupReport> {
    let n = m.n();
    let per_b = sup_rect_per_b(m);
    let (b_idx, sup) = per_b
        .iter()
        .enumerate()
        .fold((0usize, &per_b[0]), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let sup = sup.clone();
    let b_star = b_idx + 1;
    let witness = if n <= EXPLICIT_MAX_N {
        let cols_mask = (1u64 << b_star) - 1;
        let rows = 1usize << n;
        let mut a = BitSet::new(rows);
        for s in 0..rows {
            let p = m.row_pattern(s as u64)?;
            let partial = b_star as i64 - 2 * i64::from((p & cols_mask).count_ones());
            if partial > 0 {
                a.insert(s);
            }
        }
        Some(Rectangle {
            rows: a,
            cols: BitSet::from_mask(n, cols_mask),
        })
    } else {
        None
    };
    Ok(RectangleSupReport::new(n, sup, witness, Method::FastPath))
}

fn bound2_checks(n: usize, sup: &Rational, pi: &PiEnclosure) -> (Certified, Certified) {
    if sup.is_negative() {
        return (Certified::CertLt, Certified::CertLt);
    }
    let lower = cmp_sq_below(sup, &rat(1, 2), pi, n as u64).expect("n >= 1");
    let upper = cmp_sq_below(sup, &rat_int(2), pi, n as u64).expect("n >= 1");
    (lower, upper)
}

/// `1/(2 sqrt(pi n)) < sup < 2/sqrt(pi n)`, both strict and certified.
pub fn certify_bound2(report: &RectangleSupReport, pi: &PiEnclosure) -> Verdict {
    let (lower, upper) = bound2_checks(report.n, &report.sup, pi);
    match (lower, upper) {
        (Certified::CertGt, Certified::CertLt) => Verdict::Pass,
        (Certified::CertLt, _) | (_, Certified::CertGt) => Verdict::Fail,
        _ => Verdict::Undecided,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::binomial;
    use crate::measure::{Bijection, Representation};
    use proptest::prelude::*;

    fn canon(n: usize) -> KsMeasure {
        KsMeasure::build(n, Bijection::Canonical, Representation::Explicit).unwrap()
    }

    fn report(n: usize, sup: Rational) -> RectangleSupReport {
        RectangleSupReport::new(n, sup, None, Method::FastPath)
    }

    #[test]
    fn rect_mass_examples() {
        for n in 1..=4 {
            let m = canon(n);
            let rows = 1 << n;
            let empty_a = Rectangle {
                rows: BitSet::new(rows),
                cols: BitSet::full(n),
            };
            assert!(rect_mass(&m, &empty_a).unwrap().is_zero());
            let empty_b = Rectangle {
                rows: BitSet::full(rows),
                cols: BitSet::new(n),
            };
            assert!(rect_mass(&m, &empty_b).unwrap().is_zero());
            for b_mask in 0..1u64 << n {
                let full_a = Rectangle {
                    rows: BitSet::full(rows),
                    cols: BitSet::from_mask(n, b_mask),
                };
                assert!(rect_mass(&m, &full_a).unwrap().is_zero());
            }
        }
        let single = Rectangle {
            rows: BitSet::from_indices(2, [0]),
            cols: BitSet::from_indices(1, [0]),
        };
        assert_eq!(rect_mass(&canon(1), &single).unwrap(), rat(1, 2));
        let bad = Rectangle {
            rows: BitSet::new(3),
            cols: BitSet::new(1),
        };
        assert!(matches!(rect_mass(&canon(1), &bad), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn positive_part_sums_match_binomial_sum() {
        let closed = positive_part_sums(150);
        for b in 1..=150u64 {
            let direct: BigUint = (0..=b)
                .filter(|&k| 2 * k > b)
                .map(|k| binomial(b, k as i64) * BigUint::from(2 * k - b))
                .sum();
            assert_eq!(closed[b as usize - 1], direct, "b = {b}");
        }
    }

    #[test]
    fn bruteforce_small_values() {
        assert_eq!(sup_rect_bruteforce(&canon(1)).unwrap().sup, rat(1, 2));
        assert_eq!(sup_rect_bruteforce(&canon(2)).unwrap().sup, rat(1, 4));
        assert_eq!(sup_rect_bruteforce(&canon(4)).unwrap().sup, rat(3, 16));
        assert!(matches!(
            sup_rect_bruteforce(&canon(5)),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn bruteforce_witness_is_lexicographic_first() {
        // n = 1: B = {0}; A = {row 0} is the first subset with |mass| = 1/2
        let r = sup_rect_bruteforce(&canon(1)).unwrap();
        let w = r.witness.unwrap();
        assert_eq!(w.cols, BitSet::from_mask(1, 1));
        assert_eq!(w.rows, BitSet::from_mask(2, 1));
    }

    #[test]
    fn fast_matches_bruteforce() {
        for n in 1..=4 {
            for bij in [Bijection::Canonical, Bijection::RowPermutation { seed: n as u64 * 31 }] {
                let m = KsMeasure::build(n, bij, Representation::Explicit).unwrap();
                assert_eq!(
                    sup_rect_fast(&m).unwrap().sup,
                    sup_rect_bruteforce(&m).unwrap().sup,
                    "n = {n}"
                );
            }
        }
        assert_eq!(sup_rect_fast(&canon(3)).unwrap().sup, rat(1, 4));
    }

    #[test]
    fn fast_witnesses_attain_sup() {
        for n in 1..=14 {
            let m = KsMeasure::build(n, Bijection::RowPermutation { seed: 5 }, Representation::Implicit)
                .unwrap();
            let r = sup_rect_fast(&m).unwrap();
            let mass = rect_mass(&m, r.witness.as_ref().unwrap()).unwrap();
            assert_eq!(mass.abs(), r.sup, "n = {n}");
        }
        let big = KsMeasure::build(21, Bijection::Canonical, Representation::Implicit).unwrap();
        assert!(sup_rect_fast(&big).unwrap().witness.is_none());
    }

    #[test]
    fn per_b_nondecreasing() {
        let m = KsMeasure::build(300, Bijection::Canonical, Representation::Implicit).unwrap();
        let per_b = sup_rect_per_b(&m);
        assert!(per_b.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(per_b.last(), Some(&sup_rect_fast(&m).unwrap().sup));
    }

    #[test]
    fn fast_large_n_certified() {
        let pi = PiEnclosure::published();
        let m = KsMeasure::build(64, Bijection::Canonical, Representation::Implicit).unwrap();
        let r = sup_rect_fast(&m).unwrap();
        assert_eq!(r.lower_ok, Certified::CertGt);
        assert_eq!(r.upper_ok, Certified::CertLt);
        assert_eq!(certify_bound2(&r, &pi), Verdict::Pass);
    }

    #[test]
    fn certify_bound2_examples() {
        let pi = PiEnclosure::published();
        assert_eq!(certify_bound2(&report(1, rat(1, 2)), &pi), Verdict::Pass);
        assert_eq!(certify_bound2(&report(2, rat(1, 4)), &pi), Verdict::Pass);
        assert_eq!(certify_bound2(&report(1, rat(2, 1)), &pi), Verdict::Fail);
        assert_eq!(certify_bound2(&report(1, rat(0, 1)), &pi), Verdict::Fail);
        let coarse = PiEnclosure::new(rat(1, 1), rat(10, 1)).unwrap();
        assert_eq!(certify_bound2(&report(1, rat(1, 2)), &coarse), Verdict::Undecided);
    }

    #[test]
    fn report_json_shape() {
        let r = sup_rect_bruteforce(&canon(2)).unwrap();
        let v = r.to_json();
        assert_eq!(v["sup"], "1/4");
        assert_eq!(v["sup_decimal"], "0.250000000000000000000000000000");
        assert_eq!(v["method"], "BruteForce");
        assert_eq!(v["lower_ok"], "CERT_GT");
        assert_eq!(v["upper_ok"], "CERT_LT");
        assert!(v["witness"]["A_bits"].is_string());
    }

    proptest! {
        #[test]
        fn hex_roundtrip(len in 1usize..300, seed in any::<u64>()) {
            let idx: Vec<usize> = (0..len).filter(|i| (seed.rotate_left(*i as u32 % 64) ^ *i as u64) & 1 == 1).collect();
            let b = BitSet::from_indices(len, idx);
            prop_assert_eq!(BitSet::from_hex(len, &b.to_hex()).unwrap(), b);
        }

        #[test]
        fn permuted_sup_invariant(n in 1usize..=4, seed in any::<u64>()) {
            let c = sup_rect_bruteforce(&canon(n)).unwrap();
            let p = sup_rect_bruteforce(
                &KsMeasure::build(n, Bijection::RowPermutation { seed }, Representation::Explicit).unwrap(),
            ).unwrap();
            prop_assert_eq!(c.sup, p.sup);
        }
    }
}
