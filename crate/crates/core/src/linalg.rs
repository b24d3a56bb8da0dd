//! Exact Gauss-Jordan elimination over the rationals.
//!
//! Pivots are chosen column by column, left to right, taking the first row
//! (top to bottom) with a nonzero entry. Solutions set free variables to 0.

use num_traits::{One, Zero};

use crate::exactnum::Rational;

/// Reduced row echelon form with its pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub rows: Vec<Vec<Rational>>,
    pub pivots: Vec<usize>,
}

/// Reduces the first `cols_to_pivot` columns of `m`; later columns (an
/// augmented right-hand side) are carried along but never pivoted.
pub fn rref_partial(mut m: Vec<Vec<Rational>>, cols_to_pivot: usize) -> Rref {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols_to_pivot {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for v in m[r].iter_mut().skip(c) {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { rows: m, pivots }
}

pub fn rref(m: Vec<Vec<Rational>>) -> Rref {
    let cols = m.first().map_or(0, Vec::len);
    rref_partial(m, cols)
}

pub fn rank(m: &[Vec<Rational>]) -> usize {
    rref(m.to_vec()).pivots.len()
}

/// A solution of `a x = b` with free variables set to 0, if consistent.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    let cols = a.first().map_or(0, Vec::len);
    let aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let red = rref_partial(aug, cols);
    let rank = red.pivots.len();
    if red.rows[rank..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in red.pivots.iter().enumerate() {
        x[c] = red.rows[i][cols].clone();
    }
    Some(x)
}

pub fn mat_vec(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}
