//! Row-major dense matrices over a [`Field`].

use std::fmt;

use super::field::{Field, Symbol};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Symbol>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Symbol>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Symbol] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Symbol] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Symbol> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// `self × other`.
    pub fn mul(&self, other: &Matrix, f: &Field) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                f.mul_acc(dst, other.row(k), self.get(r, k));
            }
        }
        Ok(out)
    }

    /// Row vector times matrix, written into `out`.
    pub fn vec_mul_into(&self, v: &[Symbol], out: &mut [Symbol], f: &Field) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0);
        for (k, &c) in v.iter().enumerate() {
            f.mul_acc(out, self.row(k), c);
        }
    }

    pub fn vec_mul(&self, v: &[Symbol], f: &Field) -> Vec<Symbol> {
        let mut out = vec![0; self.cols];
        self.vec_mul_into(v, &mut out, f);
        out
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self, f: &Field) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "inverse of non-square {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col) != 0).ok_or(Error::Singular)?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let scale = f.inv(a.get(col, col))?;
            scale_row(a.row_mut(col), scale, f);
            scale_row(inv.row_mut(col), scale, f);
            for r in 0..n {
                let factor = a.get(r, col);
                if r != col && factor != 0 {
                    let (src_a, dst_a) = a.two_rows(col, r);
                    f.mul_acc(dst_a, src_a, factor);
                    let (src_i, dst_i) = inv.two_rows(col, r);
                    f.mul_acc(dst_i, src_i, factor);
                }
            }
        }
        Ok(inv)
    }

    pub fn rank(&self, f: &Field) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..a.cols {
            if rank == a.rows {
                break;
            }
            let Some(pivot) = (rank..a.rows).find(|&r| a.get(r, col) != 0) else {
                continue;
            };
            a.swap_rows(pivot, rank);
            let inv = f.inv(a.get(rank, col)).expect("pivot is nonzero");
            scale_row(a.row_mut(rank), inv, f);
            for r in rank + 1..a.rows {
                let factor = a.get(r, col);
                if factor != 0 {
                    let (src, dst) = a.two_rows(rank, r);
                    f.mul_acc(dst, src, factor);
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Borrow row `src` immutably and row `dst` mutably.
    fn two_rows(&mut self, src: usize, dst: usize) -> (&[Symbol], &mut [Symbol]) {
        assert_ne!(src, dst);
        let c = self.cols;
        if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * c);
            (&lo[src * c..(src + 1) * c], &mut hi[..c])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * c);
            (&hi[..c], &mut lo[dst * c..(dst + 1) * c])
        }
    }
}

fn scale_row(row: &mut [Symbol], s: Symbol, f: &Field) {
    for x in row.iter_mut() {
        *x = f.mul(*x, s);
    }
}

/// Cauchy matrix with entry (i, j) = 1 / (x_i + y_j).
pub fn cauchy(xs: &[Symbol], ys: &[Symbol], f: &Field) -> Result<Matrix> {
    let mut seen = vec![false; f.order()];
    for &v in xs.iter().chain(ys) {
        if !f.contains(v) {
            return Err(Error::BadSupport(format!("{v} is not a field element")));
        }
        if std::mem::replace(&mut seen[v as usize], true) {
            return Err(Error::BadSupport(format!("element {v} repeats")));
        }
    }
    let mut m = Matrix::zeros(xs.len(), ys.len());
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            m.set(i, j, f.inv(f.add(x, y))?);
        }
    }
    Ok(m)
}

/// Vandermonde matrix with row i = (1, x_i, x_i^2, ..., x_i^(cols-1)).
pub fn vandermonde(xs: &[Symbol], cols: usize, f: &Field) -> Matrix {
    let mut m = Matrix::zeros(xs.len(), cols);
    for (i, &x) in xs.iter().enumerate() {
        let mut p = 1;
        for c in 0..cols {
            m.set(i, c, p);
            p = f.mul(p, x);
        }
    }
    m
}

/// Recovers a message `x` from `x × G` when only some columns of the product
/// survive.
///
/// Construction picks a maximal independent subset of the available columns
/// and inverts it once, so repeated solves against the same erasure pattern
/// (one per stripe) cost a single vector-matrix product each.
#[derive(Clone, Debug)]
pub struct ErasureSolver {
    basis: Vec<usize>,
    inverse: Matrix,
    checks: Vec<usize>,
    check_matrix: Matrix,
}

impl ErasureSolver {
    /// `available` lists column indices of `generator` whose values are known.
    pub fn new(generator: &Matrix, available: &[usize], f: &Field) -> Result<Self> {
        let k = generator.rows();
        let mut echelon: Vec<(usize, Vec<Symbol>)> = Vec::with_capacity(k);
        let mut basis = Vec::with_capacity(k);
        let mut checks = Vec::new();
        for &col in available {
            if basis.len() == k {
                checks.push(col);
                continue;
            }
            let mut v = generator.column(col);
            for (pivot, row) in &echelon {
                let c = v[*pivot];
                if c != 0 {
                    f.mul_acc(&mut v, row, c);
                }
            }
            match v.iter().position(|&x| x != 0) {
                Some(p) => {
                    let s = f.inv(v[p])?;
                    scale_row(&mut v, s, f);
                    // keep rows reduced at each other's pivots
                    for (_, row) in echelon.iter_mut() {
                        let c = row[p];
                        if c != 0 {
                            f.mul_acc(row, &v, c);
                        }
                    }
                    echelon.push((p, v));
                    basis.push(col);
                }
                None => checks.push(col),
            }
        }
        if basis.len() < k {
            return Err(Error::Unrecoverable);
        }
        let inverse = generator.select_columns(&basis).inverse(f)?;
        let check_matrix = generator.select_columns(&checks);
        Ok(ErasureSolver {
            basis,
            inverse,
            checks,
            check_matrix,
        })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Columns actually read to reconstruct the message.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    /// `value(col)` yields the symbol at generator column `col`. Fails with
    /// `InconsistentBlocks` when the redundant columns disagree.
    pub fn solve<V>(&self, f: &Field, value: V) -> Result<Vec<Symbol>>
    where
        V: Fn(usize) -> Symbol,
    {
        let rhs: Vec<Symbol> = self.basis.iter().map(|&c| value(c)).collect();
        let msg = self.inverse.vec_mul(&rhs, f);
        if !self.checks.is_empty() {
            let expect = self.check_matrix.vec_mul(&msg, f);
            if self.checks.iter().zip(&expect).any(|(&c, &e)| value(c) != e) {
                return Err(Error::InconsistentBlocks);
            }
        }
        Ok(msg)
    }
}
