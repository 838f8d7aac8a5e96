//! In-memory failure simulation.
//!
//! Randomness: a `ChaCha8Rng` seeded with `seed_from_u64(seed)` first draws
//! the `K` message symbols in order (`gen_range(0..q)`), then, for
//! [`ScenarioKind::RandomNodes`], picks the failed node positions with a
//! partial Fisher–Yates shuffle of `0..n` (`SliceRandom::partial_shuffle`).

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trace::{events_from_steps, TraceEvent};
use crate::codec::{erasure_decode_full, lccr_encode, verify_codeword, ClusterState, CodeParams, NodeKind};
use crate::error::{Error, Result};
use crate::metrics::lccr_group_repair_symbols_model;
use crate::repair::{
    execute_plan, plan_adjacent_pair_repair, plan_group_repair, plan_single_group_repair, repair_all,
    repair_node_distributed_parity, repair_node_msr_part, PlanOutcome, RepairPlan, TransferLedger, Variant,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleNode { group: usize, index: usize },
    SingleGroup { group: usize, variant: Variant },
    /// Groups `group` and `group + 1`.
    AdjacentPair { group: usize },
    GroupSet { groups: BTreeSet<usize> },
    RandomNodes { count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub kind: ScenarioKind,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Repaired,
    Unrepairable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimReport {
    pub verdict: Verdict,
    /// Whether the full decoder can recover the message from the survivors.
    pub oracle_decodable: bool,
    /// The repaired codeword re-encodes and matches the original.
    pub verified: bool,
    pub ledger: TransferLedger,
    /// `5(u−1)r`, the closed-form single-group figure, for group scenarios.
    pub model_group_symbols: Option<usize>,
    pub trace: Vec<TraceEvent>,
}

pub fn random_codeword(params: &Arc<CodeParams>, rng: &mut ChaCha8Rng) -> ClusterState {
    let q = params.field().order();
    let msg: Vec<u8> = (0..params.k_symbols()).map(|_| rng.gen_range(0..q) as u8).collect();
    lccr_encode(params, &params.split_message(&msg)).expect("message shape matches params")
}

fn check_group(params: &CodeParams, g: usize) -> Result<()> {
    if g >= params.m {
        return Err(Error::ScenarioInvalid(format!("group {g} out of range (m={})", params.m)));
    }
    Ok(())
}

fn run_plan(state: &mut ClusterState, plan: Result<RepairPlan>) -> Result<(TransferLedger, Vec<TraceEvent>)> {
    let plan = plan?;
    let ledger = execute_plan(state, &plan)?;
    Ok((ledger, events_from_steps(&plan.steps)))
}

pub fn simulate(params: &Arc<CodeParams>, scenario: &Scenario) -> Result<SimReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let original = random_codeword(params, &mut rng);
    let mut state = original.clone();
    let p = params.as_ref();
    let mut model = None;

    match &scenario.kind {
        ScenarioKind::SingleNode { group, index } => {
            check_group(p, *group)?;
            if *index >= p.group_width() {
                return Err(Error::ScenarioInvalid(format!("node {group}:{index} out of range")));
            }
            state.erase(*group, *index);
        }
        ScenarioKind::SingleGroup { group, .. } | ScenarioKind::AdjacentPair { group } => {
            check_group(p, *group)?;
            state.erase_group(*group);
            if matches!(scenario.kind, ScenarioKind::AdjacentPair { .. }) {
                state.erase_group((group + 1) % p.m);
            }
            model = Some(lccr_group_repair_symbols_model(p.u, p.r));
        }
        ScenarioKind::GroupSet { groups } => {
            for &g in groups {
                check_group(p, g)?;
                state.erase_group(g);
            }
            model = Some(lccr_group_repair_symbols_model(p.u, p.r));
        }
        ScenarioKind::RandomNodes { count } => {
            if *count > p.n() {
                return Err(Error::ScenarioInvalid(format!("{count} failures exceed n={}", p.n())));
            }
            let mut positions: Vec<usize> = (0..p.n()).collect();
            let (picked, _) = positions.partial_shuffle(&mut rng, *count);
            for &pos in picked.iter() {
                state.erase(pos / p.group_width(), pos % p.group_width());
            }
        }
    }

    let oracle_decodable = erasure_decode_full(&state).is_ok();
    let outcome = match &scenario.kind {
        ScenarioKind::SingleNode { group, index } => {
            let node = p.node(*group, *index);
            let fix = if node.kind == NodeKind::DistributedParity {
                repair_node_distributed_parity(&state, *group)
            } else {
                repair_node_msr_part(&state, node)
            };
            fix.map(|f| {
                let trace = events_from_steps(&f.steps);
                (f.install(&mut state), trace)
            })
        }
        ScenarioKind::SingleGroup { group, variant } => {
            let plan = plan_single_group_repair(&state, *group, *variant);
            run_plan(&mut state, plan)
        }
        ScenarioKind::AdjacentPair { group } => {
            let plan = plan_adjacent_pair_repair(&state, *group);
            run_plan(&mut state, plan)
        }
        ScenarioKind::GroupSet { groups } => match plan_group_repair(&state, groups)? {
            PlanOutcome::Plan(plan) => run_plan(&mut state, Ok(plan)),
            PlanOutcome::Unrepairable { .. } => Err(Error::Unrecoverable),
        },
        ScenarioKind::RandomNodes { .. } => repair_all(&mut state).map(|r| {
            let trace = events_from_steps(&r.steps);
            (r.ledger, trace)
        }),
    };

    match outcome {
        Ok((ledger, trace)) => Ok(SimReport {
            verdict: Verdict::Repaired,
            oracle_decodable,
            verified: verify_codeword(&state) && state.symbols() == original.symbols(),
            ledger,
            model_group_symbols: model,
            trace,
        }),
        Err(Error::Unrecoverable | Error::HelperGroupDown(_) | Error::InsufficientHelpers(_)) => Ok(SimReport {
            verdict: Verdict::Unrepairable,
            oracle_decodable,
            verified: false,
            ledger: TransferLedger::default(),
            model_group_symbols: model,
            trace: Vec::new(),
        }),
        Err(e) => Err(e),
    }
}
