//! Exact simplex for `max c.x` subject to `A x <= b`, `x >= 0`, `b >= 0`.
//!
//! With `b >= 0` the slack basis is feasible, so no phase one is needed.
//! Bland's rule (smallest entering index, smallest leaving basis index on
//! ratio ties) rules out cycling.

use num_traits::{Signed, Zero};

use crate::exactnum::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Unbounded,
}

/// Panics on shape mismatch or a negative entry of `b`.
pub fn maximize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let rows = a.len();
    let vars = c.len();
    assert_eq!(b.len(), rows, "rhs length");
    assert!(a.iter().all(|r| r.len() == vars), "row length");
    assert!(b.iter().all(|v| !v.is_negative()), "rhs must be nonnegative");

    let width = vars + rows + 1;
    let rhs = width - 1;
    let mut tab: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, bi))| {
            let mut t = vec![Rational::zero(); width];
            t[..vars].clone_from_slice(row);
            t[vars + i] = num_traits::One::one();
            t[rhs] = bi.clone();
            t
        })
        .collect();
    let mut basis: Vec<usize> = (vars..vars + rows).collect();
    // reduced costs; z[rhs] holds minus the objective value
    let mut z = vec![Rational::zero(); width];
    z[..vars].clone_from_slice(c);

    while let Some(enter) = (0..rhs).find(|&j| z[j].is_positive()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in tab.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[rhs] / &row[enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((p, _)) = leave else {
            return LpOutcome::Unbounded;
        };
        let inv = Rational::from_integer(1.into()) / &tab[p][enter];
        for v in tab[p].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = tab[p].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == p || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        let f = z[enter].clone();
        for (v, pv) in z.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
        basis[p] = enter;
    }

    let mut x = vec![Rational::zero(); vars];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < vars {
            x[bv] = tab[i][rhs].clone();
        }
    }
    LpOutcome::Optimal { value: -z[rhs].clone(), x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::linalg::solve;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x, 1)).collect()
    }

    /// Best feasible vertex over all choices of `vars` tight constraints
    /// (including `x_j = 0`). Only valid for bounded feasible regions.
    fn vertex_oracle(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> Rational {
        let vars = c.len();
        let mut all_rows: Vec<Vec<Rational>> = a.to_vec();
        let mut all_rhs: Vec<Rational> = b.to_vec();
        for j in 0..vars {
            let mut r = vec![Rational::zero(); vars];
            r[j] = rat(-1, 1);
            all_rows.push(r);
            all_rhs.push(Rational::zero());
        }
        let total = all_rows.len();
        let mut best: Option<Rational> = None;
        for mask in 0u32..(1 << total) {
            if mask.count_ones() as usize != vars {
                continue;
            }
            let idx: Vec<usize> = (0..total).filter(|i| mask >> i & 1 == 1).collect();
            let sub: Vec<Vec<Rational>> = idx.iter().map(|&i| all_rows[i].clone()).collect();
            if crate::linalg::rank(&sub) < vars {
                continue;
            }
            let rhs: Vec<Rational> = idx.iter().map(|&i| all_rhs[i].clone()).collect();
            let x = solve(&sub, &rhs).expect("full rank");
            let feasible = all_rows.iter().zip(&all_rhs).all(|(r, bi)| {
                r.iter().zip(&x).map(|(p, q)| p * q).sum::<Rational>() <= *bi
            });
            if feasible {
                let v: Rational = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                if best.as_ref().is_none_or(|bv| v > *bv) {
                    best = Some(v);
                }
            }
        }
        best.expect("origin is a feasible vertex")
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let a = vec![ints(&[1, 0]), ints(&[0, 2]), ints(&[3, 2])];
        match maximize(&a, &ints(&[4, 12, 18]), &ints(&[3, 5])) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, rat(36, 1));
                assert_eq!(x, ints(&[2, 6]));
            }
            LpOutcome::Unbounded => panic!("bounded"),
        }
    }

    #[test]
    fn detects_unbounded() {
        let a = vec![ints(&[1, -1])];
        assert_eq!(maximize(&a, &ints(&[1]), &ints(&[0, 1])), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // several constraints tight at the origin
        let a = vec![ints(&[1, 1]), ints(&[1, -1]), ints(&[-1, 1]), ints(&[2, 1])];
        let b = ints(&[0, 0, 0, 4]);
        match maximize(&a, &b, &ints(&[1, 1])) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(0, 1)),
            LpOutcome::Unbounded => panic!("bounded"),
        }
    }

    proptest! {
        #[test]
        fn matches_vertex_oracle(
            entries in proptest::collection::vec(-4i64..=4, 6),
            rhs in proptest::collection::vec(0i64..=6, 3),
            obj in proptest::collection::vec(-3i64..=3, 2),
        ) {
            // a box keeps the region bounded
            let mut a: Vec<Vec<Rational>> = entries.chunks(2).map(ints).collect();
            let mut b = ints(&rhs);
            a.push(ints(&[1, 0]));
            a.push(ints(&[0, 1]));
            b.push(rat(5, 1));
            b.push(rat(5, 1));
            let c = ints(&obj);
            let want = vertex_oracle(&a, &b, &c);
            match maximize(&a, &b, &c) {
                LpOutcome::Optimal { value, x } => {
                    prop_assert_eq!(&value, &want);
                    prop_assert!(x.iter().all(|v| !v.is_negative()));
                    let cx: Rational = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                    prop_assert_eq!(cx, value);
                }
                LpOutcome::Unbounded => prop_assert!(false, "box is bounded"),
            }
        }
    }
}
