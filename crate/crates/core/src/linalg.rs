//! Sparse exact linear algebra over the rationals.
//!
//! Ranks are computed by clearing denominators column by column and running a
//! fraction-free elimination on integer rows. Each updated row is divided by
//! the gcd of its entries, which keeps coefficients from growing across
//! steps. Pivots are chosen with a Markowitz-style rule: the sparsest active
//! column, then the shortest row within it.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A matrix with exact rational entries stored as sorted `(row, col, value)`
/// triplets with no zeros and no duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseExactMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, Rational)>,
}

type IntRow = Vec<(usize, BigInt)>;

impl SparseExactMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            entries: (0..n).map(|i| (i, i, Rational::one())).collect(),
        }
    }

    /// Builds a matrix from triplets, summing repeated positions and dropping zeros.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let mut acc: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidParameter(format!(
                    "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            *acc.entry((r, c)).or_insert_with(Rational::zero) += v;
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries: acc
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|((r, c), v)| (r, c, v))
                .collect(),
        })
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let triplets = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, v)| (r, c, v.clone())));
        Self::from_triplets(n_rows, n_cols, triplets).expect("dense shape is consistent")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, Rational)] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.entries
            .binary_search_by(|(r, c, _)| (*r, *c).cmp(&(row, col)))
            .map(|i| self.entries[i].2.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .map(|(r, c, v)| (*c, *r, v.clone()))
            .collect();
        entries.sort_by_key(|a| (a.0, a.1));
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            entries,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.n_cols]; self.n_rows];
        for (r, c, v) in &self.entries {
            out[*r][*c] = v.clone();
        }
        out
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.n_cols != rhs.n_rows {
            return Err(Error::InvalidParameter(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, rhs.n_rows, rhs.n_cols
            )));
        }
        let mut rhs_rows: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); rhs.n_rows];
        for (r, c, v) in &rhs.entries {
            rhs_rows[*r].push((*c, v));
        }
        let triplets = self
            .entries
            .iter()
            .flat_map(|(r, k, a)| rhs_rows[*k].iter().map(move |(c, b)| (*r, *c, a * *b)));
        Self::from_triplets(self.n_rows, rhs.n_cols, triplets)
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.n_rows];
        for (r, c, a) in &self.entries {
            out[*r] += a * &v[*c];
        }
        out
    }

    /// Exact rank over the rationals.
    pub fn rank(&self) -> usize {
        eliminate(self.integer_rows(), self.n_cols)
    }

    pub fn kernel_dim(&self) -> usize {
        self.n_cols - self.rank()
    }

    /// A basis of the null space (diagnostic path, dense reduced row echelon form).
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let mut m = self.to_dense();
        let pivots = rref(&mut m, self.n_cols);
        let pivot_cols: BTreeSet<usize> = pivots.iter().copied().collect();
        (0..self.n_cols)
            .filter(|c| !pivot_cols.contains(c))
            .map(|free| {
                let mut v = vec![Rational::zero(); self.n_cols];
                v[free] = Rational::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m[row][free].clone();
                }
                v
            })
            .collect()
    }

    /// Rows scaled to integers: each column is multiplied by the lcm of its denominators.
    fn integer_rows(&self) -> Vec<IntRow> {
        let mut lcm = vec![BigInt::one(); self.n_cols];
        for (_, c, v) in &self.entries {
            lcm[*c] = lcm[*c].lcm(v.denom());
        }
        let mut rows = vec![Vec::new(); self.n_rows];
        for (r, c, v) in &self.entries {
            rows[*r].push((*c, v.numer() * (&lcm[*c] / v.denom())));
        }
        rows
    }
}

fn make_primitive(row: &mut IntRow) {
    let g = row.iter().fold(BigInt::zero(), |g, (_, v)| g.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// `alpha * row - beta * pivot`, merged over sorted column indices.
fn combine(row: &IntRow, alpha: &BigInt, pivot: &IntRow, beta: &BigInt) -> IntRow {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = pivot.get(j).map_or(usize::MAX, |e| e.0);
        let (col, v) = if ci < cj {
            i += 1;
            (ci, alpha * &row[i - 1].1)
        } else if cj < ci {
            j += 1;
            (cj, -(beta * &pivot[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ci, alpha * &row[i - 1].1 - beta * &pivot[j - 1].1)
        };
        if !v.is_zero() {
            out.push((col, v));
        }
    }
    out
}

fn entry_in(row: &IntRow, col: usize) -> Option<&BigInt> {
    row.binary_search_by_key(&col, |e| e.0)
        .ok()
        .map(|i| &row[i].1)
}

fn eliminate(mut rows: Vec<IntRow>, n_cols: usize) -> usize {
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_cols];
    for (r, row) in rows.iter_mut().enumerate() {
        make_primitive(row);
        for (c, _) in row.iter() {
            col_rows[*c].insert(r);
        }
    }
    let mut rank = 0;
    while let Some(col) = (0..n_cols)
        .filter(|&c| !col_rows[c].is_empty())
        .min_by_key(|&c| (col_rows[c].len(), c))
    {
        let pivot_row = *col_rows[col]
            .iter()
            .min_by_key(|&&r| {
                let bits = entry_in(&rows[r], col).map_or(0, |v| v.bits());
                (rows[r].len(), bits, r)
            })
            .expect("column is nonempty");
        let pivot = std::mem::take(&mut rows[pivot_row]);
        for (c, _) in &pivot {
            col_rows[*c].remove(&pivot_row);
        }
        rank += 1;

        let p = entry_in(&pivot, col).expect("pivot entry").clone();
        let targets: Vec<usize> = col_rows[col].iter().copied().collect();
        for r in targets {
            let old = std::mem::take(&mut rows[r]);
            let a = entry_in(&old, col)
                .expect("row is in the column set")
                .clone();
            let g = p.gcd(&a);
            let mut new = combine(&old, &(&p / &g), &pivot, &(&a / &g));
            make_primitive(&mut new);
            if let Some((_, lead)) = new.first() {
                if lead.is_negative() {
                    for (_, v) in new.iter_mut() {
                        *v = -&*v;
                    }
                }
            }
            for (c, _) in &old {
                col_rows[*c].remove(&r);
            }
            for (c, _) in &new {
                col_rows[*c].insert(r);
            }
            rows[r] = new;
        }
    }
    rank
}

/// In-place reduced row echelon form; returns the pivot column of each leading row.
fn rref(m: &mut [Vec<Rational>], n_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n_cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        let pivot = m[row].clone();
        for (r, target) in m.iter_mut().enumerate() {
            if r != row && !target[col].is_zero() {
                let f = target[col].clone();
                for (t, p) in target.iter_mut().zip(&pivot) {
                    *t -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}
