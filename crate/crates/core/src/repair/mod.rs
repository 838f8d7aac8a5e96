//! Repairing failed nodes and failed groups.
//!
//! A group fails when more than `u − 1` of its MSR-part nodes are lost; the
//! local code cannot rebuild it in place, so it is recovered cooperatively
//! from neighbouring groups through a [`RepairPlan`]. Everything else is a
//! node-level repair inside one group (MSR part) or across the two
//! neighbours (distributed parity).
//!
//! Bandwidth is counted in symbols moved between groups for plans, and in
//! helper symbols for node repairs; intra-group reads in plans are free.

mod exec;
mod node;
mod plan;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::codec::{ClusterState, CodeParams, NodeId, NodeKind};
use crate::error::{Error, Result};

pub use exec::execute_plan;
pub use node::{
    repair_node_by_decode, repair_node_distributed_parity, repair_node_msr_part, NodeRepair,
};
pub use plan::{
    plan_adjacent_pair_repair, plan_group_repair, plan_single_group_repair, Action, Payload,
    PlanOutcome, RepairPlan, Step, Variant,
};

/// Failures split into whole-group and node-level parts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailurePattern {
    pub failed_groups: BTreeSet<usize>,
    pub failed_nodes: BTreeSet<NodeId>,
}

/// A group fails once more than `u − 1` of its MSR-part nodes are lost. Nodes
/// inside failed groups are absorbed into the group failure.
pub fn classify_group_failures(
    params: &CodeParams,
    failed_nodes: impl IntoIterator<Item = NodeId>,
) -> FailurePattern {
    let nodes: BTreeSet<NodeId> = failed_nodes.into_iter().collect();
    let mut msr_losses = vec![0usize; params.m];
    for n in &nodes {
        if n.kind != NodeKind::DistributedParity {
            msr_losses[n.group] += 1;
        }
    }
    let failed_groups: BTreeSet<usize> = (0..params.m)
        .filter(|&g| msr_losses[g] + 1 > params.u)
        .collect();
    let failed_nodes = nodes
        .into_iter()
        .filter(|n| !failed_groups.contains(&n.group))
        .collect();
    FailurePattern {
        failed_groups,
        failed_nodes,
    }
}

/// Counters accumulated while repairing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferLedger {
    pub symbols_moved: usize,
    /// Distinct surviving groups that sent data.
    pub groups_contacted: usize,
    pub nodes_contacted: usize,
    pub helper_groups: BTreeSet<usize>,
    /// Every distinct sending group, including failed groups that were
    /// rebuilt earlier in the same repair and then relayed parity.
    pub participating_groups: BTreeSet<usize>,
    #[serde(skip)]
    nodes: BTreeSet<(usize, usize)>,
}

impl TransferLedger {
    pub(crate) fn transfer(&mut self, from_group: usize, symbols: usize, helper: bool) {
        self.symbols_moved += symbols;
        self.participating_groups.insert(from_group);
        if helper {
            self.helper_groups.insert(from_group);
        }
        self.groups_contacted = self.helper_groups.len();
    }

    pub(crate) fn touch(&mut self, group: usize, index: usize) {
        self.nodes.insert((group, index));
        self.nodes_contacted = self.nodes.len();
    }

    pub fn merge(&mut self, other: &TransferLedger) {
        self.symbols_moved += other.symbols_moved;
        self.helper_groups.extend(&other.helper_groups);
        self.participating_groups.extend(&other.participating_groups);
        self.nodes.extend(&other.nodes);
        self.groups_contacted = self.helper_groups.len();
        self.nodes_contacted = self.nodes.len();
    }
}

/// Upper bound on the number of failed groups that can be repaired
/// cooperatively: `u + 2Δ − 1`.
pub fn max_repairable_failed_groups_bound(params: &CodeParams) -> usize {
    params.u + 2 * params.delta - 1
}

/// Everything done by [`repair_all`].
#[derive(Clone, Debug, Default)]
pub struct RepairReport {
    pub pattern: FailurePattern,
    pub plan: Option<RepairPlan>,
    /// Plan steps followed by node-repair steps, in execution order.
    pub steps: Vec<Step>,
    pub ledger: TransferLedger,
}

/// Repair every erased node of `state`: failed groups first, then MSR-part
/// nodes, then distributed parity.
pub fn repair_all(state: &mut ClusterState) -> Result<RepairReport> {
    let params = state.shared_params().clone();
    let pattern = classify_group_failures(&params, state.failed_nodes());
    let mut report = RepairReport {
        pattern: pattern.clone(),
        ..Default::default()
    };
    if !pattern.failed_groups.is_empty() {
        let plan = match plan_group_repair(state, &pattern.failed_groups)? {
            PlanOutcome::Plan(p) => p,
            PlanOutcome::Unrepairable { .. } => return Err(Error::Unrecoverable),
        };
        let ledger = execute_plan(state, &plan)?;
        report.ledger.merge(&ledger);
        report.steps.extend(plan.steps.iter().cloned());
        report.plan = Some(plan);
    }
    let mut dp_groups = BTreeSet::new();
    for node in &pattern.failed_nodes {
        match node.kind {
            NodeKind::DistributedParity => {
                dp_groups.insert(node.group);
            }
            _ => {
                let fix = match repair_node_msr_part(state, *node) {
                    Err(Error::InsufficientHelpers(_)) => repair_node_by_decode(state, *node)?,
                    other => other?,
                };
                fix.apply(state, &mut report);
            }
        }
    }
    for g in dp_groups {
        repair_node_distributed_parity(state, g)?.apply(state, &mut report);
    }
    Ok(report)
}
