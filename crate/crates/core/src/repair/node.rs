//! Node-level repairs.

use std::collections::BTreeMap;

use super::{Action, Payload, RepairReport, Step, TransferLedger};
use crate::codec::{ClusterState, NodeId, NodeKind};
use crate::error::{Error, Result};
use crate::local_code::{Block, LocalMessage};

/// Rebuilt blocks plus the accounting of how they were obtained.
#[derive(Clone, Debug)]
pub struct NodeRepair {
    pub blocks: Vec<(NodeId, Block)>,
    pub ledger: TransferLedger,
    pub steps: Vec<Step>,
}

impl NodeRepair {
    pub(crate) fn apply(self, state: &mut ClusterState, report: &mut RepairReport) {
        for (n, b) in self.blocks {
            state.restore(n.group, n.index, b);
        }
        report.ledger.merge(&self.ledger);
        report.steps.extend(self.steps);
    }

    pub fn install(self, state: &mut ClusterState) -> TransferLedger {
        for (n, b) in self.blocks {
            state.restore(n.group, n.index, b);
        }
        self.ledger
    }
}

fn check_msr_node(node: NodeId) -> Result<()> {
    if node.kind == NodeKind::DistributedParity {
        return Err(Error::InvalidParams(format!("{node} is not in the MSR part")));
    }
    Ok(())
}

/// Regenerate one systematic or local-parity node from `d` helpers of its own
/// group, each sending `β` symbols.
pub fn repair_node_msr_part(state: &ClusterState, node: NodeId) -> Result<NodeRepair> {
    check_msr_node(node)?;
    let p = state.params();
    let code = p.local_code(node.group);
    let lp = code.params();
    let helpers = code.choose_helpers(node.index, |i| state.is_alive(node.group, i));
    if helpers.len() < lp.d_helpers {
        return Err(Error::InsufficientHelpers(format!(
            "{node} needs {} helpers, {} alive",
            lp.d_helpers,
            helpers.len()
        )));
    }
    let mut ledger = TransferLedger::default();
    let mut steps = Vec::new();
    let payloads: BTreeMap<usize, Vec<_>> = helpers
        .iter()
        .map(|&h| {
            ledger.transfer(node.group, lp.beta, true);
            ledger.touch(node.group, h);
            steps.push(Step::Transfer {
                from_group: node.group,
                to_group: node.group,
                from_node: Some(h),
                payload: Payload::HelperSymbols(node.group),
                symbol_count: lp.beta,
                serves: node.group,
            });
            (h, code.helper_payload(node.index, state.block(node.group, h)))
        })
        .collect();
    let block = code.repair_node(node.index, &payloads)?;
    steps.push(Step::Compute {
        at_group: node.group,
        action: Action::RepairNode,
        target: node.group,
        target_node: Some(node.index),
    });
    Ok(NodeRepair {
        blocks: vec![(node, block)],
        ledger,
        steps,
    })
}

/// Fallback when fewer than `d` helpers survive: read any `r` whole blocks,
/// decode and re-encode.
pub fn repair_node_by_decode(state: &ClusterState, node: NodeId) -> Result<NodeRepair> {
    check_msr_node(node)?;
    let p = state.params();
    let code = p.local_code(node.group);
    let alive: Vec<usize> = (0..p.n_l())
        .filter(|&i| i != node.index && state.is_alive(node.group, i))
        .take(p.r)
        .collect();
    if alive.len() < p.r {
        return Err(Error::InsufficientHelpers(format!(
            "{node} needs {} surviving blocks, {} alive",
            p.r,
            alive.len()
        )));
    }
    let mut ledger = TransferLedger::default();
    let mut steps = Vec::new();
    let available = alive
        .iter()
        .map(|&i| {
            ledger.transfer(node.group, p.gamma(), true);
            ledger.touch(node.group, i);
            steps.push(Step::Transfer {
                from_group: node.group,
                to_group: node.group,
                from_node: Some(i),
                payload: Payload::SystematicBlocks(node.group),
                symbol_count: p.gamma(),
                serves: node.group,
            });
            (i, state.block(node.group, i).clone())
        })
        .collect();
    let msg = code.decode(&available)?;
    let block = code.encode(&msg)?.swap_remove(node.index);
    steps.push(Step::Compute {
        at_group: node.group,
        action: Action::DecodeLocal,
        target: node.group,
        target_node: Some(node.index),
    });
    Ok(NodeRepair {
        blocks: vec![(node, block)],
        ledger,
        steps,
    })
}

/// The first `Δ` local parity blocks of group `g`, computed from its own
/// surviving MSR-part nodes. Returns the blocks and the nodes read.
pub(crate) fn group_parity(state: &ClusterState, g: usize) -> Option<(Vec<Block>, Vec<usize>)> {
    let p = state.params();
    let want: Vec<usize> = (p.r..p.r + p.delta).collect();
    if want.iter().all(|&i| state.is_alive(g, i)) {
        return Some((want.iter().map(|&i| state.block(g, i).clone()).collect(), want));
    }
    let alive: Vec<usize> = (0..p.n_l()).filter(|&i| state.is_alive(g, i)).take(p.r).collect();
    if alive.len() < p.r {
        return None;
    }
    let available = alive.iter().map(|&i| (i, state.block(g, i).clone())).collect();
    let msg: LocalMessage = p.local_code(g).decode(&available).ok()?;
    let encoded = p.local_code(g).encode(&msg).ok()?;
    Some((want.iter().map(|&i| encoded[i].clone()).collect(), alive))
}

/// Rebuild all `Δ` distributed-parity blocks of group `g` from the parity
/// blocks of its two neighbours, regardless of how many were lost.
pub fn repair_node_distributed_parity(state: &ClusterState, g: usize) -> Result<NodeRepair> {
    let p = state.params();
    let (left, right) = p.adjacent_groups(g);
    let mut ledger = TransferLedger::default();
    let mut steps = Vec::new();
    let mut sums = vec![Block::zeros(p.gamma()); p.delta];
    for h in [left, right] {
        let (blocks, read) = group_parity(state, h).ok_or(Error::NeighborUnavailable(h))?;
        let symbols = p.delta * p.gamma();
        ledger.transfer(h, symbols, true);
        read.iter().for_each(|&i| ledger.touch(h, i));
        steps.push(Step::Transfer {
            from_group: h,
            to_group: g,
            from_node: None,
            payload: Payload::MsrParityBlocks(h),
            symbol_count: symbols,
            serves: g,
        });
        for (s, b) in sums.iter_mut().zip(&blocks) {
            s.xor_assign(b);
        }
    }
    steps.push(Step::Compute {
        at_group: g,
        action: Action::RebuildDistributedParity,
        target: g,
        target_node: None,
    });
    let blocks = sums
        .into_iter()
        .enumerate()
        .map(|(t, b)| (p.node(g, p.n_l() + t), b))
        .collect();
    Ok(NodeRepair {
        blocks,
        ledger,
        steps,
    })
}
