//! Cooperative group-repair plans.
//!
//! A failed group `g` is recovered through one neighbour `x` and the group
//! `s` beyond it: `s` ships its parity to `x`, which cancels it out of its
//! own distributed parity to expose `g`'s parity, and forwards that to `g`.
//!
//! ```text
//!   Left:  s = g−2 ──▶ x = g−1 ──▶ g
//!   Right: s = g+2 ──▶ x = g+1 ──▶ g
//! ```
//!
//! Once every failed group has its MSR part back, each one fetches parity
//! from both neighbours to rebuild its distributed parity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::{ClusterState, NodeKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Left,
    Right,
}

/// What a transfer carries. The group is the one the data belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    /// The first Δ local parity blocks of the group.
    MsrParityBlocks(usize),
    SystematicBlocks(usize),
    /// A failed group's parity, exposed by a neighbour.
    RecoveredParity(usize),
    /// Regeneration symbols for a node of the group.
    HelperSymbols(usize),
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::MsrParityBlocks(g) => write!(f, "msr_parity_blocks({g})"),
            Payload::SystematicBlocks(g) => write!(f, "systematic_blocks({g})"),
            Payload::RecoveredParity(g) => write!(f, "recovered_parity({g})"),
            Payload::HelperSymbols(g) => write!(f, "helper_symbols({g})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    XorParities,
    DecodeFromParity,
    ReEncode,
    RebuildDistributedParity,
    RepairNode,
    DecodeLocal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Transfer {
        from_group: usize,
        to_group: usize,
        from_node: Option<usize>,
        payload: Payload,
        symbol_count: usize,
        /// The failed group (or repaired node's group) this transfer is for.
        serves: usize,
    },
    Compute {
        at_group: usize,
        action: Action,
        target: usize,
        target_node: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairPlan {
    pub steps: Vec<Step>,
    /// Surviving groups that send data.
    pub helper_groups: BTreeSet<usize>,
    pub failed_groups: BTreeSet<usize>,
    /// Recovery chains in scheduling order.
    pub chains: Vec<(usize, Variant)>,
}

impl RepairPlan {
    pub fn symbols_moved(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Transfer { symbol_count, .. } => *symbol_count,
                Step::Compute { .. } => 0,
            })
            .sum()
    }

    /// For each failed group, the other groups that sent data on its behalf.
    pub fn helpers_per_failed_group(&self) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut out: BTreeMap<usize, BTreeSet<usize>> =
            self.failed_groups.iter().map(|&g| (g, BTreeSet::new())).collect();
        for s in &self.steps {
            if let Step::Transfer { from_group, serves, .. } = s {
                if from_group != serves {
                    out.entry(*serves).or_default().insert(*from_group);
                }
            }
        }
        out
    }

    /// Distinct groups that send anything, failed or not.
    pub fn participating_groups(&self) -> BTreeSet<usize> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::Transfer { from_group, .. } => Some(*from_group),
                Step::Compute { .. } => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanOutcome {
    Plan(RepairPlan),
    /// Peeling stalled with these groups still unrecovered.
    Unrepairable { unrecovered: BTreeSet<usize> },
}

impl PlanOutcome {
    pub fn is_repairable(&self) -> bool {
        matches!(self, PlanOutcome::Plan(_))
    }
}

/// What the planner may assume about surviving groups.
struct View<'a> {
    state: &'a ClusterState,
    failed: &'a BTreeSet<usize>,
}

impl View<'_> {
    /// Group `h` can produce its parity blocks from its own survivors.
    fn parity_live(&self, h: usize) -> bool {
        let p = self.state.params();
        !self.failed.contains(&h)
            && (0..p.n_l()).filter(|&i| self.state.is_alive(h, i)).count() >= p.r
    }

    fn dp_intact(&self, h: usize) -> bool {
        let p = self.state.params();
        !self.failed.contains(&h)
            && p
                .nodes()
                .filter(|n| n.group == h && n.kind == NodeKind::DistributedParity)
                .all(|n| self.state.is_alive(h, n.index))
    }

    fn route(&self, g: usize, v: Variant) -> (usize, usize) {
        let m = self.state.params().m;
        match v {
            Variant::Left => ((g + m - 1) % m, (g + m - 2) % m),
            Variant::Right => ((g + 1) % m, (g + 2) % m),
        }
    }

    /// The first group in the chain that blocks it, if any.
    fn chain_blocker(&self, g: usize, v: Variant, recovered: &BTreeSet<usize>) -> Option<usize> {
        let (x, s) = self.route(g, v);
        if !self.dp_intact(x) {
            return Some(x);
        }
        if !(self.parity_live(s) || recovered.contains(&s)) {
            return Some(s);
        }
        None
    }
}

fn check_capability(state: &ClusterState) -> Result<()> {
    let p = state.params();
    if !p.group_repair_capable() {
        return Err(Error::CapabilityMissing(format!(
            "group repair needs delta >= r (delta={}, r={})",
            p.delta, p.r
        )));
    }
    Ok(())
}

fn assemble(state: &ClusterState, failed: BTreeSet<usize>, chains: Vec<(usize, Variant)>) -> RepairPlan {
    let p = state.params();
    let view = View {
        state,
        failed: &failed,
    };
    let block_symbols = p.delta * p.gamma();
    let mut steps = Vec::new();
    for &(g, v) in &chains {
        let (x, s) = view.route(g, v);
        steps.push(Step::Transfer {
            from_group: s,
            to_group: x,
            from_node: None,
            payload: Payload::MsrParityBlocks(s),
            symbol_count: block_symbols,
            serves: g,
        });
        steps.push(Step::Compute {
            at_group: x,
            action: Action::XorParities,
            target: g,
            target_node: None,
        });
        steps.push(Step::Transfer {
            from_group: x,
            to_group: g,
            from_node: None,
            payload: Payload::RecoveredParity(g),
            symbol_count: block_symbols,
            serves: g,
        });
        for action in [Action::DecodeFromParity, Action::ReEncode] {
            steps.push(Step::Compute {
                at_group: g,
                action,
                target: g,
                target_node: None,
            });
        }
    }
    for &g in &failed {
        let (left, right) = p.adjacent_groups(g);
        for h in [left, right] {
            steps.push(Step::Transfer {
                from_group: h,
                to_group: g,
                from_node: None,
                payload: Payload::MsrParityBlocks(h),
                symbol_count: block_symbols,
                serves: g,
            });
        }
        steps.push(Step::Compute {
            at_group: g,
            action: Action::RebuildDistributedParity,
            target: g,
            target_node: None,
        });
    }
    let helper_groups = steps
        .iter()
        .filter_map(|s| match s {
            Step::Transfer { from_group, .. } if !failed.contains(from_group) => Some(*from_group),
            _ => None,
        })
        .collect();
    RepairPlan {
        steps,
        helper_groups,
        failed_groups: failed,
        chains,
    }
}

/// Plan the recovery of the single failed group `g` through one chain.
pub fn plan_single_group_repair(state: &ClusterState, g: usize, variant: Variant) -> Result<RepairPlan> {
    check_capability(state)?;
    let failed = BTreeSet::from([g]);
    let view = View {
        state,
        failed: &failed,
    };
    if let Some(h) = view.chain_blocker(g, variant, &BTreeSet::new()) {
        return Err(Error::HelperGroupDown(h));
    }
    let (left, right) = state.params().adjacent_groups(g);
    if let Some(h) = [left, right].into_iter().find(|&h| !view.parity_live(h)) {
        return Err(Error::HelperGroupDown(h));
    }
    Ok(assemble(state, failed, vec![(g, variant)]))
}

/// Plan the recovery of adjacent failed groups `g` and `g + 1`: a left chain
/// for `g` and a right chain for `g + 1`.
pub fn plan_adjacent_pair_repair(state: &ClusterState, g: usize) -> Result<RepairPlan> {
    check_capability(state)?;
    let m = state.params().m;
    let g2 = (g + 1) % m;
    let failed = BTreeSet::from([g, g2]);
    let view = View {
        state,
        failed: &failed,
    };
    for (target, v) in [(g, Variant::Left), (g2, Variant::Right)] {
        if let Some(h) = view.chain_blocker(target, v, &BTreeSet::new()) {
            return Err(Error::HelperGroupDown(h));
        }
    }
    Ok(assemble(state, failed, vec![(g, Variant::Left), (g2, Variant::Right)]))
}

/// Peel failed groups in `order`, sweeping until nothing changes. Returns
/// the chains chosen and the groups left unrecovered.
pub(crate) fn peel(
    state: &ClusterState,
    failed: &BTreeSet<usize>,
    order: &[usize],
) -> (Vec<(usize, Variant)>, BTreeSet<usize>) {
    let view = View { state, failed };
    let mut recovered = BTreeSet::new();
    let mut chains = Vec::new();
    loop {
        let mut progress = false;
        for &g in order {
            if recovered.contains(&g) {
                continue;
            }
            let pick = [Variant::Left, Variant::Right]
                .into_iter()
                .find(|&v| view.chain_blocker(g, v, &recovered).is_none());
            if let Some(v) = pick {
                chains.push((g, v));
                recovered.insert(g);
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    let unrecovered = failed.difference(&recovered).copied().collect();
    (chains, unrecovered)
}

/// Fixpoint peeling over an arbitrary set of failed groups, ascending order,
/// left chains preferred.
pub fn plan_group_repair(state: &ClusterState, failed: &BTreeSet<usize>) -> Result<PlanOutcome> {
    check_capability(state)?;
    let m = state.params().m;
    if let Some(&g) = failed.iter().find(|&&g| g >= m) {
        return Err(Error::InvalidParams(format!("group {g} out of range (m={m})")));
    }
    let order: Vec<usize> = failed.iter().copied().collect();
    let (chains, unrecovered) = peel(state, failed, &order);
    if !unrecovered.is_empty() {
        return Ok(PlanOutcome::Unrepairable { unrecovered });
    }
    Ok(PlanOutcome::Plan(assemble(state, failed.clone(), chains)))
}
