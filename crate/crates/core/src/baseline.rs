//! The MSR-local comparison code.
//!
//! A systematic parent code `[I | P1 | P2]` of length `n_L + Δ` and
//! dimension `r` is punctured to its first `n_L` coordinates to give each of
//! the `m` local codes; the `Δ` global parities are `(Σ m_i) P2`.
//!
//! ```text
//!   group 0 .. group m−1      global
//!   [m_i | m_i P1] × m        [(Σ m_i) P2]
//! ```
//!
//! The parent is scalar (`Γ = 1`). Repairing a whole group needs every
//! other group plus the global parities, and at most one group can be
//! rebuilt at a time.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::galois::{cauchy, ErasureSolver, Field, Matrix, Symbol};
use crate::local_code::{Block, LocalCode, LocalMessage};
use crate::repair::TransferLedger;

#[derive(Clone, Debug)]
pub struct MsrLocalParams {
    pub m: usize,
    pub r: usize,
    pub u: usize,
    pub delta: usize,
    field: Field,
    /// `r × (u − 1 + Δ)`: local parity columns then global ones.
    parent_parity: Matrix,
    local: LocalCode,
    global: Matrix,
}

impl MsrLocalParams {
    /// Cauchy parent over `field`; needs `r + u − 1 + Δ` distinct elements.
    pub fn new(m: usize, r: usize, u: usize, delta: usize, field: &Field) -> Result<Self> {
        let width = u.checked_sub(1).map(|p| p + delta).unwrap_or(0);
        if r + width > field.order() {
            return Err(Error::InvalidParams(format!(
                "{} is too small for a parent code of length {}",
                field.spec(),
                r + width
            )));
        }
        let xs: Vec<Symbol> = (0..r).map(|x| x as Symbol).collect();
        let ys: Vec<Symbol> = (r..r + width).map(|y| y as Symbol).collect();
        let parity = cauchy(&xs, &ys, field)?;
        Self::with_parent(m, r, u, delta, field, parity)
    }

    /// Explicit parent parity `[P1 | P2]`.
    pub fn with_parent(m: usize, r: usize, u: usize, delta: usize, field: &Field, parity: Matrix) -> Result<Self> {
        if m < 1 || r < 1 || u < 2 {
            return Err(Error::InvalidParams(format!(
                "need m >= 1, r >= 1, u >= 2 (m={m}, r={r}, u={u})"
            )));
        }
        if parity.rows() != r || parity.cols() != u - 1 + delta {
            return Err(Error::DimensionMismatch(format!(
                "parent parity must be {r}x{}, got {}x{}",
                u - 1 + delta,
                parity.rows(),
                parity.cols()
            )));
        }
        let p1 = parity.select_columns(&(0..u - 1).collect::<Vec<_>>());
        let global = parity.select_columns(&(u - 1..u - 1 + delta).collect::<Vec<_>>());
        let local = LocalCode::scalar_with_parity(field, r, u, p1)?;
        Ok(MsrLocalParams {
            m,
            r,
            u,
            delta,
            field: field.clone(),
            parent_parity: parity,
            local,
            global,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n_l(&self) -> usize {
        self.r + self.u - 1
    }

    pub fn n(&self) -> usize {
        self.m * self.n_l() + self.delta
    }

    pub fn k(&self) -> usize {
        self.m * self.r
    }

    pub fn local_code(&self) -> &LocalCode {
        &self.local
    }

    pub fn parent_parity(&self) -> &Matrix {
        &self.parent_parity
    }

    /// Flat position of node `index` in group `g`; global parities follow the groups.
    pub fn local_pos(&self, g: usize, index: usize) -> usize {
        g * self.n_l() + index
    }

    pub fn global_pos(&self, t: usize) -> usize {
        self.m * self.n_l() + t
    }

    /// The `mr × n` generator.
    pub fn generator(&self) -> Matrix {
        let (r, nl) = (self.r, self.n_l());
        let lp = self.local.parity_generator();
        let mut g = Matrix::zeros(self.k(), self.n());
        for grp in 0..self.m {
            for row in 0..r {
                let gr = grp * r + row;
                g.set(gr, grp * nl + row, 1);
                for c in 0..self.u - 1 {
                    g.set(gr, grp * nl + r + c, lp.get(row, c));
                }
                for t in 0..self.delta {
                    g.set(gr, self.global_pos(t), self.global.get(row, t));
                }
            }
        }
        g
    }
}

/// Node of the baseline code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MsrLocalNode {
    Local { group: usize, index: usize },
    Global(usize),
}

#[derive(Clone, Debug)]
pub struct MsrLocalState {
    params: Arc<MsrLocalParams>,
    blocks: Vec<Block>,
    alive: Vec<bool>,
}

impl MsrLocalState {
    pub fn params(&self) -> &MsrLocalParams {
        &self.params
    }

    fn pos(&self, node: MsrLocalNode) -> usize {
        match node {
            MsrLocalNode::Local { group, index } => self.params.local_pos(group, index),
            MsrLocalNode::Global(t) => self.params.global_pos(t),
        }
    }

    pub fn block(&self, node: MsrLocalNode) -> &Block {
        &self.blocks[self.pos(node)]
    }

    pub fn is_alive(&self, node: MsrLocalNode) -> bool {
        self.alive[self.pos(node)]
    }

    pub fn erase(&mut self, node: MsrLocalNode) {
        let p = self.pos(node);
        self.blocks[p].fill(0);
        self.alive[p] = false;
    }

    pub fn erase_group(&mut self, g: usize) {
        for index in 0..self.params.n_l() {
            self.erase(MsrLocalNode::Local { group: g, index });
        }
    }

    pub fn restore(&mut self, node: MsrLocalNode, block: Block) {
        let p = self.pos(node);
        self.blocks[p] = block;
        self.alive[p] = true;
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.blocks.iter().flat_map(|b| b.iter().copied()).collect()
    }

    /// Groups with more than `u − 1` lost nodes.
    pub fn failed_groups(&self) -> Vec<usize> {
        let p = &self.params;
        (0..p.m)
            .filter(|&g| {
                let lost = (0..p.n_l())
                    .filter(|&i| !self.is_alive(MsrLocalNode::Local { group: g, index: i }))
                    .count();
                lost + 1 > p.u
            })
            .collect()
    }

    fn group_message(&self, g: usize) -> Result<LocalMessage> {
        let p = &self.params;
        let available: BTreeMap<usize, Block> = (0..p.n_l())
            .filter(|&i| self.is_alive(MsrLocalNode::Local { group: g, index: i }))
            .take(p.r)
            .map(|i| (i, self.block(MsrLocalNode::Local { group: g, index: i }).clone()))
            .collect();
        p.local.decode(&available)
    }
}

pub fn msr_local_encode(params: &Arc<MsrLocalParams>, message: &[LocalMessage]) -> Result<MsrLocalState> {
    let p = params.as_ref();
    if message.len() != p.m {
        return Err(Error::DimensionMismatch(format!(
            "expected {} local messages, got {}",
            p.m,
            message.len()
        )));
    }
    let mut blocks = Vec::with_capacity(p.n());
    let mut sum = vec![0 as Symbol; p.r];
    for msg in message {
        blocks.extend(p.local.encode(msg)?);
        for (s, v) in sum.iter_mut().zip(msg.flatten()) {
            *s ^= v;
        }
    }
    let global = p.global.vec_mul(&sum, &p.field);
    blocks.extend(global.into_iter().map(|v| Block(vec![v])));
    Ok(MsrLocalState {
        params: params.clone(),
        alive: vec![true; blocks.len()],
        blocks,
    })
}

/// Ground-truth decoder over the surviving nodes.
pub fn msr_local_decode_full(state: &MsrLocalState) -> Result<Vec<LocalMessage>> {
    let p = state.params();
    let cols: Vec<usize> = (0..p.n()).filter(|&c| state.alive[c]).collect();
    let solver = ErasureSolver::new(&p.generator(), &cols, p.field())?;
    let msg = solver.solve(p.field(), |c| state.blocks[c][0])?;
    Ok(msg.chunks(p.r).map(|c| LocalMessage::from_symbols(c, 1)).collect())
}

/// Repair one node. Local nodes regenerate inside their group; a global
/// parity is rebuilt, with all its siblings, from every group's message.
pub fn msr_local_repair_node(state: &MsrLocalState, node: MsrLocalNode) -> Result<(Vec<(MsrLocalNode, Block)>, TransferLedger)> {
    let p = state.params();
    let mut ledger = TransferLedger::default();
    match node {
        MsrLocalNode::Local { group, index } => {
            let helpers = p
                .local
                .choose_helpers(index, |i| state.is_alive(MsrLocalNode::Local { group, index: i }));
            if helpers.len() < p.local.params().d_helpers {
                return Err(Error::InsufficientHelpers(format!(
                    "group {group} has {} helpers left",
                    helpers.len()
                )));
            }
            let payloads = helpers
                .iter()
                .map(|&h| {
                    ledger.transfer(group, 1, true);
                    ledger.touch(group, h);
                    let b = state.block(MsrLocalNode::Local { group, index: h });
                    (h, p.local.helper_payload(index, b))
                })
                .collect();
            let block = p.local.repair_node(index, &payloads)?;
            Ok((vec![(node, block)], ledger))
        }
        MsrLocalNode::Global(_) => {
            let mut sum = vec![0 as Symbol; p.r];
            for g in 0..p.m {
                let msg = state.group_message(g).map_err(|_| {
                    Error::InsufficientHelpers(format!("group {g} cannot supply its message"))
                })?;
                ledger.transfer(g, p.r, true);
                for i in 0..p.r {
                    ledger.touch(g, i);
                }
                for (s, v) in sum.iter_mut().zip(msg.flatten()) {
                    *s ^= v;
                }
            }
            let global = p.global.vec_mul(&sum, p.field());
            let blocks = global
                .into_iter()
                .enumerate()
                .map(|(t, v)| (MsrLocalNode::Global(t), Block(vec![v])))
                .collect();
            Ok((blocks, ledger))
        }
    }
}

/// Rebuild the single failed group from all other groups plus the global
/// parities. The global part counts as one helper unit, reported as group
/// index `m` in the ledger.
pub fn msr_local_repair_group(state: &mut MsrLocalState, g: usize) -> Result<TransferLedger> {
    let params = state.params.clone();
    let p = params.as_ref();
    let failed = state.failed_groups();
    if failed.len() > 1 || (failed.len() == 1 && failed[0] != g) {
        let extra = failed.iter().filter(|&&f| f != g).count() + 1;
        return Err(Error::MultipleGroupFailures(extra));
    }
    if p.delta < p.r {
        return Err(Error::CapabilityMissing(format!(
            "baseline group repair needs delta >= r (delta={}, r={})",
            p.delta, p.r
        )));
    }
    let mut ledger = TransferLedger::default();
    let mut sum = vec![0 as Symbol; p.r];
    for h in (0..p.m).filter(|&h| h != g) {
        let msg = state.group_message(h)?;
        ledger.transfer(h, p.r, true);
        for i in 0..p.r {
            ledger.touch(h, i);
        }
        for (s, v) in sum.iter_mut().zip(msg.flatten()) {
            *s ^= v;
        }
    }
    let alive_global: Vec<usize> = (0..p.delta)
        .filter(|&t| state.is_alive(MsrLocalNode::Global(t)))
        .collect();
    ledger.transfer(p.m, alive_global.len(), true);
    for &t in &alive_global {
        ledger.touch(p.m, t);
    }
    // m_g P2 = global − (Σ_{h≠g} m_h) P2
    let others = p.global.vec_mul(&sum, p.field());
    let target: Vec<Symbol> = (0..p.delta)
        .map(|t| state.block(MsrLocalNode::Global(t))[0] ^ others[t])
        .collect();
    let solver = ErasureSolver::new(&p.global, &alive_global, p.field())?;
    let msg = solver.solve(p.field(), |c| target[c])?;
    let blocks = p.local.encode(&LocalMessage::from_symbols(&msg, 1))?;
    for (index, b) in blocks.into_iter().enumerate() {
        state.restore(MsrLocalNode::Local { group: g, index }, b);
    }
    Ok(ledger)
}
