//! Product-matrix MSR construction at d = 2k − 2.
//!
//! The message is arranged as `M = [S1; S2]` with `S1`, `S2` symmetric
//! α×α matrices (α = k − 1, d = 2α). Node `i` stores `ψ_i^T M` where
//! `ψ_i = (1, x_i, …, x_i^(d−1))`; its first α coordinates are `φ_i` and
//! `λ_i = x_i^α`, so `ψ_i = [φ_i, λ_i φ_i]`.
//!
//! To repair node `f`, helper `j` sends the single symbol `ψ_j^T M φ_f`.
//! Any `d` of these give `M φ_f = [S1 φ_f; S2 φ_f]`, and by symmetry the
//! lost content is `(S1 φ_f)^T + λ_f (S2 φ_f)^T`.

use crate::error::{Error, Result};
use crate::galois::{vandermonde, Field, Matrix, Symbol};

#[derive(Clone, Debug)]
pub(crate) struct ProductMatrix {
    pub alpha: usize,
    pub d: usize,
    psi: Matrix,
    lambdas: Vec<Symbol>,
}

impl ProductMatrix {
    /// `n` nodes, reconstruction degree `k`.
    pub fn new(n: usize, k: usize, f: &Field) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParams(
                "product-matrix backend needs r >= 2".into(),
            ));
        }
        let alpha = k - 1;
        let d = 2 * alpha;
        // Distinct evaluation points whose α-th powers are also distinct.
        let mut xs = Vec::with_capacity(n);
        let mut seen = vec![false; f.order()];
        for x in f.elements() {
            let l = f.pow(x, alpha);
            if !seen[l as usize] {
                seen[l as usize] = true;
                xs.push(x);
                if xs.len() == n {
                    break;
                }
            }
        }
        if xs.len() < n {
            return Err(Error::InvalidParams(format!(
                "{} has only {} points with distinct {alpha}-th powers, need {n}",
                f.spec(),
                xs.len()
            )));
        }
        let lambdas = xs.iter().map(|&x| f.pow(x, alpha)).collect();
        Ok(ProductMatrix {
            alpha,
            d,
            psi: vandermonde(&xs, d, f),
            lambdas,
        })
    }

    pub fn message_len(&self) -> usize {
        self.alpha * (self.alpha + 1)
    }

    /// Lay the raw message out as the d×α matrix `[S1; S2]`.
    fn message_matrix(&self, z: &[Symbol]) -> Matrix {
        let a = self.alpha;
        let half = a * (a + 1) / 2;
        let mut m = Matrix::zeros(self.d, a);
        for (block, offset) in [(0usize, 0usize), (1, half)] {
            let mut idx = offset;
            for i in 0..a {
                for j in i..a {
                    m.set(block * a + i, j, z[idx]);
                    m.set(block * a + j, i, z[idx]);
                    idx += 1;
                }
            }
        }
        m
    }

    /// Generator of the non-systematic code: `message_len × (n·α)`.
    pub fn raw_generator(&self, f: &Field) -> Matrix {
        let n = self.psi.rows();
        let b = self.message_len();
        let mut g = Matrix::zeros(b, n * self.alpha);
        let mut z = vec![0; b];
        for row in 0..b {
            z.fill(0);
            z[row] = 1;
            let m = self.message_matrix(&z);
            let contents = self.psi.mul(&m, f).expect("d columns");
            g.row_mut(row).copy_from_slice(contents.data());
        }
        g
    }

    fn phi(&self, node: usize) -> &[Symbol] {
        &self.psi.row(node)[..self.alpha]
    }

    /// The single symbol helper `_helper` sends toward repairing `failed`.
    pub fn helper_symbol(&self, failed: usize, block: &[Symbol], f: &Field) -> Symbol {
        f.dot(block, self.phi(failed))
    }

    pub fn repair(
        &self,
        failed: usize,
        helpers: &[usize],
        symbols: &[Symbol],
        f: &Field,
    ) -> Result<Vec<Symbol>> {
        debug_assert_eq!(helpers.len(), self.d);
        let mut rows = Matrix::zeros(self.d, self.d);
        for (i, &h) in helpers.iter().enumerate() {
            rows.row_mut(i).copy_from_slice(self.psi.row(h));
        }
        // w = Ψ_J^{-1} y, computed as y^T (Ψ_J^{-1})^T
        let inv_t = rows.inverse(f)?.transpose();
        let w = inv_t.vec_mul(symbols, f);
        let lambda = self.lambdas[failed];
        Ok((0..self.alpha)
            .map(|s| f.add(w[s], f.mul(lambda, w[self.alpha + s])))
            .collect())
    }
}
