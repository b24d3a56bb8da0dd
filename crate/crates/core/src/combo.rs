//! Elements `h = sum_i c_i f_i (x) g_i` of the tensor algebra on `K_n x L_n`.
//!
//! Row factors are either rules depending only on the row's plus-count, which
//! can be evaluated for any `n` in O(n) big-integer steps, or explicit value
//! tables tied to one `n`. Column factors are rules or tables over `L_n`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{rat, rat_int, serde_rational, serde_rational_vec, Rational};
use crate::measure::KsMeasure;

fn one() -> Rational {
    Rational::one()
}

fn max_abs(values: &[Rational]) -> Rational {
    values
        .iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// `f` on `K_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowFactor {
    Constant {
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    /// `sign(2k - n)`.
    MajoritySign,
    /// `k / n`.
    PlusFraction,
    /// `(-1)^k`.
    Parity,
    /// `((2k - n) / n)^power`.
    CenteredPower { power: u32 },
    /// `values[k]`, valid only at `n = values.len() - 1`.
    SymmetricTable {
        #[serde(with = "serde_rational_vec")]
        values: Vec<Rational>,
    },
    /// `values[s]` for each row, valid only at `2^n = values.len()`.
    Rows {
        #[serde(with = "serde_rational_vec")]
        values: Vec<Rational>,
    },
}

impl RowFactor {
    /// Plus-count table `F(0..=n)`, or `None` for row tables.
    pub fn symmetric_table(&self, n: usize) -> Result<Option<Vec<Rational>>> {
        let ni = n as i64;
        let table = match self {
            RowFactor::Constant { value } => vec![value.clone(); n + 1],
            RowFactor::MajoritySign => (0..=ni).map(|k| rat_int((2 * k - ni).signum())).collect(),
            RowFactor::PlusFraction => (0..=ni).map(|k| rat(k, ni)).collect(),
            RowFactor::Parity => (0..=ni)
                .map(|k| rat_int(if k % 2 == 0 { 1 } else { -1 }))
                .collect(),
            RowFactor::CenteredPower { power } => (0..=ni)
                .map(|k| {
                    let base = rat(2 * k - ni, ni);
                    num_traits::pow(base, *power as usize)
                })
                .collect(),
            RowFactor::SymmetricTable { values } => {
                if values.len() != n + 1 {
                    return Err(Error::NotEvaluable {
                        n,
                        reason: format!("symmetric table has {} entries", values.len()),
                    });
                }
                values.clone()
            }
            RowFactor::Rows { .. } => return Ok(None),
        };
        Ok(Some(table))
    }

    /// Values on every row of `m`, in row order.
    pub fn row_values(&self, m: &KsMeasure) -> Result<Vec<Rational>> {
        let n = m.n();
        if let RowFactor::Rows { values } = self {
            let rows = m.row_count().unwrap_or(u64::MAX);
            if values.len() as u64 != rows {
                return Err(Error::NotEvaluable {
                    n,
                    reason: format!("row table has {} entries, measure has 2^{n} rows", values.len()),
                });
            }
            return Ok(values.clone());
        }
        let table = self.symmetric_table(n)?.expect("symmetric rule");
        let patterns = m.patterns().map_err(|e| Error::NotEvaluable {
            n,
            reason: e.to_string(),
        })?;
        Ok(patterns
            .iter()
            .map(|&p| table[m.plus_count(p)].clone())
            .collect())
    }

    /// Upper bound on `max_s |f(s)|`, uniform in `n`.
    pub fn sup_norm_bound(&self) -> Rational {
        match self {
            RowFactor::Constant { value } => value.abs(),
            RowFactor::MajoritySign
            | RowFactor::PlusFraction
            | RowFactor::Parity
            | RowFactor::CenteredPower { .. } => Rational::one(),
            RowFactor::SymmetricTable { values } | RowFactor::Rows { values } => max_abs(values),
        }
    }
}

/// `g` on `L_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColFactor {
    Constant {
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    /// `(-1)^j`.
    Alternating,
    /// Indicator of column 0.
    FirstColumn,
    Table {
        #[serde(with = "serde_rational_vec")]
        values: Vec<Rational>,
    },
}

impl ColFactor {
    pub fn values(&self, n: usize) -> Result<Vec<Rational>> {
        Ok(match self {
            ColFactor::Constant { value } => vec![value.clone(); n],
            ColFactor::Alternating => (0..n)
                .map(|j| rat_int(if j % 2 == 0 { 1 } else { -1 }))
                .collect(),
            ColFactor::FirstColumn => (0..n)
                .map(|j| if j == 0 { Rational::one() } else { Rational::zero() })
                .collect(),
            ColFactor::Table { values } => {
                self.check_table(n)?;
                values.clone()
            }
        })
    }

    /// `sum_j g(j)` without materializing the column values.
    pub fn sum(&self, n: usize) -> Result<Rational> {
        Ok(match self {
            ColFactor::Constant { value } => value * rat_int(n as i64),
            ColFactor::Alternating => rat_int(i64::from(n % 2 == 1)),
            ColFactor::FirstColumn => Rational::one(),
            ColFactor::Table { values } => {
                self.check_table(n)?;
                values.iter().sum()
            }
        })
    }

    fn check_table(&self, n: usize) -> Result<()> {
        if let ColFactor::Table { values } = self {
            if values.len() != n {
                return Err(Error::NotEvaluable {
                    n,
                    reason: format!("column table has {} entries", values.len()),
                });
            }
        }
        Ok(())
    }

    pub fn sup_norm_bound(&self) -> Rational {
        match self {
            ColFactor::Constant { value } => value.abs(),
            ColFactor::Alternating | ColFactor::FirstColumn => Rational::one(),
            ColFactor::Table { values } => max_abs(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorTerm {
    #[serde(with = "serde_rational", default = "one")]
    pub coeff: Rational,
    pub f: RowFactor,
    pub g: ColFactor,
}

impl TensorTerm {
    pub fn new(f: RowFactor, g: ColFactor) -> Self {
        Self {
            coeff: Rational::one(),
            f,
            g,
        }
    }

    pub fn scaled(mut self, coeff: Rational) -> Self {
        self.coeff = coeff;
        self
    }

    /// `c * mu_n(f (x) g)`, through the plus-count formula for symmetric
    /// rules and the atom sum for row tables.
    pub fn eval(&self, m: &KsMeasure) -> Result<Rational> {
        if self.coeff.is_zero() {
            return Ok(Rational::zero());
        }
        let n = m.n();
        let not_evaluable = |e: Error| match e {
            e @ Error::NotEvaluable { .. } => e,
            other => Error::NotEvaluable {
                n,
                reason: other.to_string(),
            },
        };
        let value = match self.f.symmetric_table(n)? {
            Some(table) => {
                let gsum = self.g.sum(n)?;
                m.eval_symmetric(&table, &gsum).map_err(not_evaluable)?
            }
            None => {
                let f = self.f.row_values(m)?;
                let g = self.g.values(n)?;
                m.eval_tensor(&f, &g).map_err(not_evaluable)?
            }
        };
        Ok(value * &self.coeff)
    }

    /// Atom-sum route for every factor kind; explicit measures only.
    pub fn eval_via_atoms(&self, m: &KsMeasure) -> Result<Rational> {
        let f = self.f.row_values(m)?;
        let g = self.g.values(m.n())?;
        Ok(m.eval_tensor(&f, &g)? * &self.coeff)
    }

    pub fn norm_bound(&self) -> Rational {
        self.coeff.abs() * self.f.sup_norm_bound() * self.g.sup_norm_bound()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TensorCombo {
    pub terms: Vec<TensorTerm>,
}

impl TensorCombo {
    pub fn new(terms: Vec<TensorTerm>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(f: RowFactor, g: ColFactor) -> Self {
        Self::new(vec![TensorTerm::new(f, g)])
    }

    /// `sum_i |c_i| ||f_i|| ||g_i||`, which dominates `||h||_inf` on every grid.
    pub fn norm_bound(&self) -> Rational {
        self.terms.iter().map(TensorTerm::norm_bound).sum()
    }

    pub fn eval(&self, m: &KsMeasure) -> Result<Rational> {
        let mut acc = Rational::zero();
        for t in &self.terms {
            acc += t.eval(m)?;
        }
        Ok(acc)
    }

    pub fn eval_via_atoms(&self, m: &KsMeasure) -> Result<Rational> {
        let mut acc = Rational::zero();
        for t in &self.terms {
            acc += t.eval_via_atoms(m)?;
        }
        Ok(acc)
    }

    /// `max_{(s,j)} |h(s,j)|` by enumerating the grid; explicit measures only.
    pub fn grid_sup_norm(&self, m: &KsMeasure) -> Result<Rational> {
        let n = m.n();
        let tables: Vec<(Vec<Rational>, Vec<Rational>)> = self
            .terms
            .iter()
            .map(|t| Ok((t.f.row_values(m)?, t.g.values(n)?)))
            .collect::<Result<_>>()?;
        let mut best = Rational::zero();
        let rows = m.row_count().unwrap_or(0) as usize;
        for s in 0..rows {
            for j in 0..n {
                let v: Rational = self
                    .terms
                    .iter()
                    .zip(&tables)
                    .map(|(t, (f, g))| &t.coeff * &f[s] * &g[j])
                    .sum();
                if v.abs() > best {
                    best = v.abs();
                }
            }
        }
        Ok(best)
    }
}

/// Five fixed symmetric combinations with `norm_bound = 1`, used by the
/// decay and summability checks.
pub fn reference_family() -> Vec<TensorCombo> {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    vec![
        TensorCombo::single(RowFactor::MajoritySign, ColFactor::Constant { value: Rational::one() }),
        TensorCombo::single(RowFactor::PlusFraction, ColFactor::Alternating),
        TensorCombo::single(RowFactor::CenteredPower { power: 3 }, ColFactor::FirstColumn),
        TensorCombo::single(
            RowFactor::CenteredPower { power: 1 },
            ColFactor::Constant { value: Rational::one() },
        ),
        TensorCombo::new(vec![
            TensorTerm::new(RowFactor::MajoritySign, ColFactor::FirstColumn).scaled(half.clone()),
            TensorTerm::new(RowFactor::Parity, ColFactor::Alternating).scaled(half),
        ]),
    ]
}
