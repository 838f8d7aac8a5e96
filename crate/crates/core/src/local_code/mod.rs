//! The constituent local code: a systematic vector code with generator
//! `[I | P]` over `n_L = r + u − 1` nodes of `Γ` symbols each.
//!
//! Two backends share one interface:
//!
//! - **scalar**: Γ = 1 and `P` is a Cauchy matrix. Any `r` nodes determine
//!   the message and repair is decode-then-re-encode from `r` helpers.
//! - **product-matrix**: an MSR code at d = 2r − 2 with Γ = r − 1, made
//!   systematic by precoding. Each of the `d` helpers sends one symbol.

mod product_matrix;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{cauchy, ErasureSolver, Field, Matrix, Symbol};
use product_matrix::ProductMatrix;

/// Which local-code construction backs each group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Scalar,
    ProductMatrix,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Scalar => "scalar",
            Backend::ProductMatrix => "product-matrix",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Backend::Scalar),
            "product-matrix" => Ok(Backend::ProductMatrix),
            other => Err(Error::InvalidParams(format!("unknown backend {other:?}"))),
        }
    }
}

/// One node's share.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Block(pub Vec<Symbol>);

impl Block {
    pub fn zeros(len: usize) -> Self {
        Block(vec![0; len])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Symbol-wise sum; characteristic 2 so this is also subtraction.
    pub fn xor_assign(&mut self, other: &Block) {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a ^= b);
    }
}

impl Deref for Block {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl DerefMut for Block {
    fn deref_mut(&mut self) -> &mut [Symbol] {
        &mut self.0
    }
}

impl From<Vec<Symbol>> for Block {
    fn from(v: Vec<Symbol>) -> Self {
        Block(v)
    }
}

/// The `r` systematic blocks of one group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMessage {
    pub blocks: Vec<Block>,
}

impl LocalMessage {
    pub fn from_symbols(symbols: &[Symbol], gamma: usize) -> Self {
        LocalMessage {
            blocks: symbols.chunks(gamma).map(|c| Block(c.to_vec())).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<Symbol> {
        self.blocks.iter().flat_map(|b| b.iter().copied()).collect()
    }

    pub fn zeros(r: usize, gamma: usize) -> Self {
        LocalMessage {
            blocks: vec![Block::zeros(gamma); r],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCodeParams {
    pub r: usize,
    pub u: usize,
    pub n_l: usize,
    pub gamma: usize,
    pub d_helpers: usize,
    pub beta: usize,
    pub backend: Backend,
}

impl LocalCodeParams {
    pub fn new(r: usize, u: usize, backend: Backend) -> Result<Self> {
        if r < 1 || u < 2 {
            return Err(Error::InvalidParams(format!(
                "local code needs r >= 1 and u >= 2 (got r={r}, u={u})"
            )));
        }
        let n_l = r + u - 1;
        let p = match backend {
            Backend::Scalar => LocalCodeParams {
                r,
                u,
                n_l,
                gamma: 1,
                d_helpers: r,
                beta: 1,
                backend,
            },
            Backend::ProductMatrix => {
                if r < 2 || u < r {
                    return Err(Error::InvalidParams(format!(
                        "product-matrix backend needs r >= 2 and u >= r (got r={r}, u={u})"
                    )));
                }
                LocalCodeParams {
                    r,
                    u,
                    n_l,
                    gamma: r - 1,
                    d_helpers: 2 * r - 2,
                    beta: 1,
                    backend,
                }
            }
        };
        debug_assert!(p.d_helpers >= p.r && p.d_helpers < p.n_l);
        Ok(p)
    }

    /// Symbols per message, `K_L = rΓ`.
    pub fn message_symbols(&self) -> usize {
        self.r * self.gamma
    }

    pub fn parity_blocks(&self) -> usize {
        self.u - 1
    }

    /// Minimum field order able to host this code with one shared support.
    pub fn min_field_order(&self) -> usize {
        match self.backend {
            Backend::Scalar => self.n_l,
            // needs n_L points with distinct α-th powers; at least n_L
            Backend::ProductMatrix => self.n_l,
        }
    }
}

/// A concrete local code over a field.
#[derive(Clone, Debug)]
pub struct LocalCode {
    params: LocalCodeParams,
    field: Field,
    generator: Matrix,
    parity: Matrix,
    pm: Option<ProductMatrix>,
}

impl LocalCode {
    /// Scalar backend with `P = cauchy(xs, ys)`; `xs` has `r` entries and
    /// `ys` has `u − 1`.
    pub fn scalar(field: &Field, r: usize, u: usize, xs: &[Symbol], ys: &[Symbol]) -> Result<Self> {
        let params = LocalCodeParams::new(r, u, Backend::Scalar)?;
        if xs.len() != r || ys.len() != u - 1 {
            return Err(Error::BadSupport(format!(
                "need {r} row and {} column support elements",
                u - 1
            )));
        }
        let parity = cauchy(xs, ys, field)?;
        Ok(Self::from_parity_unchecked(params, field, parity))
    }

    /// Scalar backend with the canonical support `xs = 0..r`, `ys = r..n_L`.
    pub fn scalar_default(field: &Field, r: usize, u: usize) -> Result<Self> {
        let n_l = r + u - 1;
        if n_l > field.order() {
            return Err(Error::InvalidParams(format!(
                "{} too small for a scalar local code of length {n_l}",
                field.spec()
            )));
        }
        let xs: Vec<Symbol> = (0..r).map(|x| x as Symbol).collect();
        let ys: Vec<Symbol> = (r..n_l).map(|y| y as Symbol).collect();
        Self::scalar(field, r, u, &xs, &ys)
    }

    /// Scalar backend with an explicit parity matrix (`r × (u−1)`). The MDS
    /// property is verified exhaustively when the number of `r`-subsets is
    /// small enough to enumerate.
    pub fn scalar_with_parity(field: &Field, r: usize, u: usize, parity: Matrix) -> Result<Self> {
        let params = LocalCodeParams::new(r, u, Backend::Scalar)?;
        if parity.rows() != r || parity.cols() != u - 1 {
            return Err(Error::DimensionMismatch(format!(
                "parity must be {r}x{}, got {}x{}",
                u - 1,
                parity.rows(),
                parity.cols()
            )));
        }
        let code = Self::from_parity_unchecked(params, field, parity);
        if binomial(params.n_l, r) <= 20_000 {
            for subset in k_subsets(params.n_l, r) {
                if code.generator.select_columns(&subset).rank(field) < r {
                    return Err(Error::InvalidParams(format!(
                        "parity matrix is not MDS: nodes {subset:?} are dependent"
                    )));
                }
            }
        }
        Ok(code)
    }

    pub fn product_matrix(field: &Field, r: usize, u: usize) -> Result<Self> {
        let params = LocalCodeParams::new(r, u, Backend::ProductMatrix)?;
        let pm = ProductMatrix::new(params.n_l, r, field)?;
        let raw = pm.raw_generator(field);
        let k = params.message_symbols();
        let systematic_cols: Vec<usize> = (0..k).collect();
        let precode = raw.select_columns(&systematic_cols).inverse(field)?;
        let generator = precode.mul(&raw, field)?;
        let parity_cols: Vec<usize> = (k..params.n_l * params.gamma).collect();
        let parity = generator.select_columns(&parity_cols);
        Ok(LocalCode {
            params,
            field: field.clone(),
            generator,
            parity,
            pm: Some(pm),
        })
    }

    fn from_parity_unchecked(params: LocalCodeParams, field: &Field, parity: Matrix) -> Self {
        let r = params.r;
        let mut generator = Matrix::zeros(r, params.n_l);
        for i in 0..r {
            generator.set(i, i, 1);
            for j in 0..parity.cols() {
                generator.set(i, r + j, parity.get(i, j));
            }
        }
        LocalCode {
            params,
            field: field.clone(),
            generator,
            parity,
            pm: None,
        }
    }

    pub fn params(&self) -> &LocalCodeParams {
        &self.params
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Full systematic generator, `rΓ × n_LΓ`.
    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    /// Scalar expansion of the parity map, `rΓ × (u−1)Γ`.
    pub fn parity_generator(&self) -> &Matrix {
        &self.parity
    }

    /// Parity symbols of a flattened message.
    pub fn parity_into(&self, msg: &[Symbol], out: &mut [Symbol]) {
        self.parity.vec_mul_into(msg, out, &self.field);
    }

    pub fn encode(&self, msg: &LocalMessage) -> Result<Vec<Block>> {
        self.check_message(msg)?;
        let flat = msg.flatten();
        let mut parity = vec![0; self.parity.cols()];
        self.parity_into(&flat, &mut parity);
        let mut out = msg.blocks.clone();
        out.extend(parity.chunks(self.params.gamma).map(|c| Block(c.to_vec())));
        Ok(out)
    }

    fn check_message(&self, msg: &LocalMessage) -> Result<()> {
        let p = &self.params;
        if msg.blocks.len() != p.r || msg.blocks.iter().any(|b| b.len() != p.gamma) {
            return Err(Error::DimensionMismatch(format!(
                "local message must be {} blocks of {} symbols",
                p.r, p.gamma
            )));
        }
        Ok(())
    }

    fn node_columns(&self, nodes: impl Iterator<Item = usize>) -> Vec<usize> {
        let g = self.params.gamma;
        nodes.flat_map(|n| n * g..(n + 1) * g).collect()
    }

    /// Recover the message from any `r` or more node blocks.
    pub fn decode(&self, available: &BTreeMap<usize, Block>) -> Result<LocalMessage> {
        let p = &self.params;
        if available.len() < p.r {
            return Err(Error::InsufficientBlocks {
                needed: p.r,
                available: available.len(),
            });
        }
        for (&node, block) in available {
            if node >= p.n_l || block.len() != p.gamma {
                return Err(Error::DimensionMismatch(format!(
                    "node {node} block of {} symbols",
                    block.len()
                )));
            }
        }
        let cols = self.node_columns(available.keys().copied());
        let solver = ErasureSolver::new(&self.generator, &cols, &self.field)?;
        let g = p.gamma;
        let msg = solver.solve(&self.field, |c| available[&(c / g)][c % g])?;
        Ok(LocalMessage::from_symbols(&msg, g))
    }

    /// Recover the message from the `u − 1` parity blocks alone.
    pub fn decode_from_parity(&self, parity_blocks: &[Block]) -> Result<LocalMessage> {
        let p = &self.params;
        if p.u - 1 < p.r {
            return Err(Error::CapabilityMissing(format!(
                "decoding from parity needs u - 1 >= r (u={}, r={})",
                p.u, p.r
            )));
        }
        if parity_blocks.len() != p.u - 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parity blocks, got {}",
                p.u - 1,
                parity_blocks.len()
            )));
        }
        let available = parity_blocks
            .iter()
            .enumerate()
            .map(|(t, b)| (p.r + t, b.clone()))
            .collect();
        self.decode(&available)
    }

    /// The `β` symbols `helper` contributes toward repairing `failed`.
    pub fn helper_payload(&self, failed: usize, block: &Block) -> Vec<Symbol> {
        match &self.pm {
            Some(pm) => vec![pm.helper_symbol(failed, block, &self.field)],
            None => block.0.clone(),
        }
    }

    /// Deterministic helper choice: lowest-index nodes other than `failed`
    /// for which `alive` holds.
    pub fn choose_helpers(&self, failed: usize, alive: impl Fn(usize) -> bool) -> Vec<usize> {
        (0..self.params.n_l)
            .filter(|&i| i != failed && alive(i))
            .take(self.params.d_helpers)
            .collect()
    }

    /// Exact repair of `failed` from `d_helpers` payloads of `beta` symbols.
    pub fn repair_node(&self, failed: usize, helpers: &BTreeMap<usize, Vec<Symbol>>) -> Result<Block> {
        let p = &self.params;
        if failed >= p.n_l {
            return Err(Error::InvalidParams(format!("node {failed} out of range")));
        }
        if helpers.len() != p.d_helpers {
            return Err(Error::WrongHelperCount {
                expected: p.d_helpers,
                got: helpers.len(),
            });
        }
        if helpers.contains_key(&failed) {
            return Err(Error::InvalidParams(format!(
                "failed node {failed} listed as its own helper"
            )));
        }
        for (&node, payload) in helpers {
            if payload.len() != p.beta {
                return Err(Error::BadPayloadLength {
                    node,
                    expected: p.beta,
                    got: payload.len(),
                });
            }
        }
        match &self.pm {
            Some(pm) => {
                let ids: Vec<usize> = helpers.keys().copied().collect();
                let ys: Vec<Symbol> = helpers.values().map(|v| v[0]).collect();
                Ok(Block(pm.repair(failed, &ids, &ys, &self.field)?))
            }
            None => {
                let blocks = helpers
                    .iter()
                    .map(|(&n, v)| (n, Block(v.clone())))
                    .collect();
                let msg = self.decode(&blocks)?;
                Ok(self.encode(&msg)?.swap_remove(failed))
            }
        }
    }
}

/// Shared handle; local codes are immutable once built.
pub type SharedLocalCode = Arc<LocalCode>;

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}
