//! Assembling LCCR codewords.
//!
//! Group `g` (0-indexed) holds `group_width = n_L + Δ` nodes:
//!
//! ```text
//!   [0, r)          systematic blocks m_g
//!   [r, n_L)        local parity blocks m_g P_g
//!   [n_L, n_L + Δ)  distributed parity: block t = parity t of g−1 + parity t of g+1
//! ```
//!
//! Neighbours wrap around, so group 0 borrows from groups m−1 and 1. When
//! Δ < u − 1 only the first Δ parity blocks of each neighbour are folded in.
//!
//! Scalar layout used by [`global_generator`] and the flat encoders: message
//! symbols are group-major (`g·rΓ + b·Γ + s`), codeword symbols node-major
//! (`(g·group_width + i)·Γ + s`).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{ErasureSolver, Field, FieldSpec, Matrix, Symbol};
use crate::local_code::{Backend, Block, LocalCode, LocalCodeParams, LocalMessage, SharedLocalCode};
use crate::par;

/// Validated LCCR parameters together with the per-group local codes.
#[derive(Clone, Debug)]
pub struct CodeParams {
    pub m: usize,
    pub r: usize,
    pub u: usize,
    pub delta: usize,
    pub local: LocalCodeParams,
    field: Field,
    locals: Vec<SharedLocalCode>,
}

impl CodeParams {
    /// Builds local codes for every group. With the scalar backend each group
    /// gets its own Cauchy column support when the field has room for
    /// `r + m(u−1)` distinct elements; otherwise all groups share one.
    pub fn new(m: usize, r: usize, u: usize, delta: usize, backend: Backend, spec: FieldSpec) -> Result<Self> {
        let field = Field::new(spec)?;
        let local = LocalCodeParams::new(r, u, backend)?;
        Self::check_shape(m, u, delta)?;
        let locals = match backend {
            Backend::Scalar => {
                let q = field.order();
                if local.n_l > q {
                    return Err(Error::InvalidParams(format!(
                        "{spec} has {q} elements; a scalar local code of length {} needs at least that many",
                        local.n_l
                    )));
                }
                let xs: Vec<Symbol> = (0..r).map(|x| x as Symbol).collect();
                let distinct = r + m * (u - 1) <= q;
                (0..m)
                    .map(|g| {
                        let base = if distinct { r + g * (u - 1) } else { r };
                        let ys: Vec<Symbol> = (base..base + u - 1).map(|y| y as Symbol).collect();
                        LocalCode::scalar(&field, r, u, &xs, &ys).map(Arc::new)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            Backend::ProductMatrix => {
                let code = Arc::new(LocalCode::product_matrix(&field, r, u)?);
                vec![code; m]
            }
        };
        Ok(CodeParams {
            m,
            r,
            u,
            delta,
            local,
            field,
            locals,
        })
    }

    /// Uses caller-supplied local codes, one per group.
    pub fn with_local_codes(delta: usize, locals: Vec<LocalCode>) -> Result<Self> {
        let first = locals
            .first()
            .ok_or_else(|| Error::InvalidParams("no local codes".into()))?;
        let local = *first.params();
        let field = first.field().clone();
        if locals.iter().any(|c| *c.params() != local || *c.field() != field) {
            return Err(Error::InvalidParams("local codes disagree on parameters".into()));
        }
        Self::check_shape(locals.len(), local.u, delta)?;
        Ok(CodeParams {
            m: locals.len(),
            r: local.r,
            u: local.u,
            delta,
            local,
            field,
            locals: locals.into_iter().map(Arc::new).collect(),
        })
    }

    fn check_shape(m: usize, u: usize, delta: usize) -> Result<()> {
        if m < 3 {
            return Err(Error::InvalidParams(format!("need at least 3 groups, got {m}")));
        }
        // Δ ≤ u − 1: a distributed parity block needs a matching local parity block.
        if delta + 1 > u {
            return Err(Error::InvalidParams(format!(
                "delta={delta} exceeds the u-1={} parity blocks available to interleave",
                u - 1
            )));
        }
        Ok(())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn local_code(&self, g: usize) -> &LocalCode {
        &self.locals[g]
    }

    pub fn backend(&self) -> Backend {
        self.local.backend
    }

    pub fn gamma(&self) -> usize {
        self.local.gamma
    }

    pub fn n_l(&self) -> usize {
        self.local.n_l
    }

    pub fn group_width(&self) -> usize {
        self.local.n_l + self.delta
    }

    /// Total node count.
    pub fn n(&self) -> usize {
        self.m * self.group_width()
    }

    pub fn k_blocks(&self) -> usize {
        self.m * self.r
    }

    pub fn k_symbols(&self) -> usize {
        self.k_blocks() * self.gamma()
    }

    /// Δ = u − 1, the regime in which the distance formula is claimed.
    pub fn full_interleave(&self) -> bool {
        self.delta + 1 == self.u
    }

    /// Whether a whole group can be rebuilt from recovered parity: needs
    /// at least `r` recoverable parity blocks, i.e. Δ ≥ r (u − 1 ≥ r when
    /// Δ = u − 1).
    pub fn group_repair_capable(&self) -> bool {
        self.delta >= self.r
    }

    /// `(g − 1 mod m, g + 1 mod m)`.
    pub fn adjacent_groups(&self, g: usize) -> (usize, usize) {
        adjacent_groups(self.m, g)
    }

    pub fn node(&self, group: usize, index: usize) -> NodeId {
        NodeId::new(self, group, index)
    }

    /// Flat node position.
    pub fn node_pos(&self, group: usize, index: usize) -> usize {
        group * self.group_width() + index
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.m).flat_map(move |g| (0..self.group_width()).map(move |i| self.node(g, i)))
    }

    /// Encode one stripe. `msg` is `k_symbols` long (group-major); `out`
    /// receives `n · Γ` symbols (node-major).
    pub fn encode_symbols(&self, msg: &[Symbol], out: &mut [Symbol]) {
        let gamma = self.gamma();
        let kl = self.r * gamma;
        let width = self.group_width() * gamma;
        let plen = (self.u - 1) * gamma;
        let dlen = self.delta * gamma;
        debug_assert_eq!(msg.len(), self.k_symbols());
        debug_assert_eq!(out.len(), self.n() * gamma);
        for g in 0..self.m {
            let dst = &mut out[g * width..(g + 1) * width];
            dst[..kl].copy_from_slice(&msg[g * kl..(g + 1) * kl]);
            self.locals[g].parity_into(&msg[g * kl..(g + 1) * kl], &mut dst[kl..kl + plen]);
        }
        for g in 0..self.m {
            let (left, right) = self.adjacent_groups(g);
            let dp = g * width + kl + plen;
            for s in 0..dlen {
                out[dp + s] = out[left * width + kl + s] ^ out[right * width + kl + s];
            }
        }
    }

    /// Split a flat stripe message into per-group messages.
    pub fn split_message(&self, msg: &[Symbol]) -> Vec<LocalMessage> {
        let kl = self.r * self.gamma();
        msg.chunks(kl)
            .map(|c| LocalMessage::from_symbols(c, self.gamma()))
            .collect()
    }

    pub fn flatten_message(message: &[LocalMessage]) -> Vec<Symbol> {
        message.iter().flat_map(LocalMessage::flatten).collect()
    }

    /// Columns of [`global_generator`] belonging to the given node positions.
    pub fn node_columns(&self, positions: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let g = self.gamma();
        positions.into_iter().flat_map(|p| p * g..(p + 1) * g).collect()
    }

    /// Solver for the erasure pattern leaving exactly `alive` node positions.
    pub fn erasure_solver(&self, alive: impl IntoIterator<Item = usize>) -> Result<ErasureSolver> {
        let cols = self.node_columns(alive);
        ErasureSolver::new(&global_generator(self), &cols, &self.field)
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LCCR(m={}, r={}, u={}, delta={}, gamma={}, {}) over {}",
            self.m,
            self.r,
            self.u,
            self.delta,
            self.gamma(),
            self.backend(),
            self.field.spec()
        )
    }
}

pub fn adjacent_groups(m: usize, g: usize) -> (usize, usize) {
    ((g + m - 1) % m, (g + 1) % m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Systematic,
    MsrParity,
    DistributedParity,
}

impl NodeKind {
    pub fn code(self) -> u8 {
        match self {
            NodeKind::Systematic => 0,
            NodeKind::MsrParity => 1,
            NodeKind::DistributedParity => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(NodeKind::Systematic),
            1 => Some(NodeKind::MsrParity),
            2 => Some(NodeKind::DistributedParity),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub group: usize,
    pub index: usize,
    pub kind: NodeKind,
}

impl NodeId {
    pub fn new(params: &CodeParams, group: usize, index: usize) -> Self {
        let kind = if index < params.r {
            NodeKind::Systematic
        } else if index < params.n_l() {
            NodeKind::MsrParity
        } else {
            NodeKind::DistributedParity
        };
        NodeId { group, index, kind }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.group, self.index)
    }
}

/// A materialized codeword with per-node erasure flags.
#[derive(Clone, Debug)]
pub struct ClusterState {
    params: Arc<CodeParams>,
    blocks: Vec<Block>,
    alive: Vec<bool>,
}

impl ClusterState {
    /// Wrap node-major symbols produced by [`CodeParams::encode_symbols`].
    pub fn from_symbols(params: Arc<CodeParams>, symbols: &[Symbol]) -> Self {
        let g = params.gamma();
        let blocks: Vec<Block> = symbols.chunks(g).map(|c| Block(c.to_vec())).collect();
        let alive = vec![true; blocks.len()];
        ClusterState { params, blocks, alive }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn shared_params(&self) -> &Arc<CodeParams> {
        &self.params
    }

    pub fn block(&self, group: usize, index: usize) -> &Block {
        &self.blocks[self.params.node_pos(group, index)]
    }

    pub fn is_alive(&self, group: usize, index: usize) -> bool {
        self.alive[self.params.node_pos(group, index)]
    }

    pub fn all_alive(&self) -> bool {
        self.alive.iter().all(|&a| a)
    }

    /// Install a block and mark the node alive.
    pub fn restore(&mut self, group: usize, index: usize, block: Block) {
        let pos = self.params.node_pos(group, index);
        self.blocks[pos] = block;
        self.alive[pos] = true;
    }

    /// Mark a node lost and wipe its contents.
    pub fn erase(&mut self, group: usize, index: usize) {
        let pos = self.params.node_pos(group, index);
        self.blocks[pos].fill(0);
        self.alive[pos] = false;
    }

    pub fn erase_group(&mut self, g: usize) {
        for i in 0..self.params.group_width() {
            self.erase(g, i);
        }
    }

    pub fn failed_nodes(&self) -> Vec<NodeId> {
        self.params
            .nodes()
            .filter(|n| !self.is_alive(n.group, n.index))
            .collect()
    }

    pub fn alive_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.alive.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i)
    }

    /// Node-major symbols of every node (erased nodes read as zero).
    pub fn symbols(&self) -> Vec<Symbol> {
        self.blocks.iter().flat_map(|b| b.iter().copied()).collect()
    }

    pub fn systematic_message(&self) -> Vec<LocalMessage> {
        (0..self.params.m)
            .map(|g| LocalMessage {
                blocks: (0..self.params.r).map(|i| self.block(g, i).clone()).collect(),
            })
            .collect()
    }

    /// Number of nonzero node blocks.
    pub fn block_weight(&self) -> usize {
        self.blocks.iter().filter(|b| !b.is_zero()).count()
    }
}

pub fn lccr_encode(params: &Arc<CodeParams>, message: &[LocalMessage]) -> Result<ClusterState> {
    let p = params.as_ref();
    if message.len() != p.m
        || message
            .iter()
            .any(|lm| lm.blocks.len() != p.r || lm.blocks.iter().any(|b| b.len() != p.gamma()))
    {
        return Err(Error::DimensionMismatch(format!(
            "message must be {} groups of {} blocks of {} symbols",
            p.m,
            p.r,
            p.gamma()
        )));
    }
    let flat = CodeParams::flatten_message(message);
    let mut out = vec![0; p.n() * p.gamma()];
    p.encode_symbols(&flat, &mut out);
    Ok(ClusterState::from_symbols(params.clone(), &out))
}

/// Re-encode from the systematic blocks and compare.
pub fn verify_codeword(state: &ClusterState) -> bool {
    if !state.all_alive() {
        return false;
    }
    let p = state.params();
    let flat = CodeParams::flatten_message(&state.systematic_message());
    let mut out = vec![0; p.n() * p.gamma()];
    p.encode_symbols(&flat, &mut out);
    out == state.symbols()
}

/// The `K_symbols × nΓ` scalar generator.
pub fn global_generator(params: &CodeParams) -> Matrix {
    let gamma = params.gamma();
    let kl = params.r * gamma;
    let plen = (params.u - 1) * gamma;
    let dlen = params.delta * gamma;
    let width = params.group_width() * gamma;
    let mut g = Matrix::zeros(params.k_symbols(), params.n() * gamma);
    for grp in 0..params.m {
        let parity = params.local_code(grp).parity_generator();
        let (left, right) = params.adjacent_groups(grp);
        for row in 0..kl {
            let gr = grp * kl + row;
            g.set(gr, grp * width + row, 1);
            for c in 0..plen {
                g.set(gr, grp * width + kl + c, parity.get(row, c));
            }
            // this group's parity feeds both neighbours' distributed parity
            for nb in [left, right] {
                for c in 0..dlen {
                    g.set(gr, nb * width + kl + plen + c, parity.get(row, c));
                }
            }
        }
    }
    g
}

/// Ground-truth decoder over the surviving nodes of `state`.
pub fn erasure_decode_full(state: &ClusterState) -> Result<Vec<LocalMessage>> {
    let p = state.params();
    let solver = p.erasure_solver(state.alive_positions())?;
    let symbols = state.symbols();
    let msg = solver.solve(p.field(), |c| symbols[c])?;
    Ok(p.split_message(&msg))
}

/// Upper bound on the messages [`min_distance_bruteforce`] will enumerate.
pub const MIN_DISTANCE_ENUMERATION_LIMIT: u64 = 1 << 24;

/// Minimum node-level weight over all nonzero codewords, by enumeration.
pub fn min_distance_bruteforce(params: &CodeParams) -> Result<usize> {
    let w = params.field().spec().width as u32;
    let k = params.k_symbols() as u32;
    if (k * w) as u64 > 63 || 1u64 << (k * w) > MIN_DISTANCE_ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!(
            "{}^{} messages exceeds the 2^24 enumeration limit",
            params.field().order(),
            k
        )));
    }
    let total = 1u64 << (k * w);
    let mask = (1u64 << w) - 1;
    let gamma = params.gamma();
    let generator = global_generator(params);
    let field = params.field();
    let weight = |range: std::ops::Range<u64>| {
        let mut msg = vec![0 as Symbol; k as usize];
        let mut cw = vec![0 as Symbol; generator.cols()];
        range
            .map(|idx| {
                for (j, s) in msg.iter_mut().enumerate() {
                    *s = ((idx >> (j as u32 * w)) & mask) as Symbol;
                }
                generator.vec_mul_into(&msg, &mut cw, field);
                cw.chunks(gamma).filter(|b| b.iter().any(|&x| x != 0)).count()
            })
            .min()
    };
    par::min_over_blocks(1..total, 4096, weight)
        .ok_or_else(|| Error::InvalidParams("code has dimension zero".into()))
}
