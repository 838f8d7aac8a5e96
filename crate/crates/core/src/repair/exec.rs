//! Plan interpreter.
//!
//! Each group only sees its own surviving blocks plus payloads delivered to
//! it by earlier transfers, so a plan that relies on data nobody sent fails
//! with [`Error::PlanInvalid`].

use std::collections::{BTreeMap, BTreeSet};

use super::node::group_parity;
use super::{Action, Payload, RepairPlan, Step, TransferLedger};
use crate::codec::ClusterState;
use crate::error::{Error, Result};
use crate::local_code::{Block, LocalMessage};

struct Interp<'a> {
    state: &'a mut ClusterState,
    failed: &'a BTreeSet<usize>,
    held: Vec<BTreeMap<Payload, Vec<Block>>>,
    messages: BTreeMap<usize, LocalMessage>,
    ledger: TransferLedger,
}

fn invalid(step: usize, reason: impl Into<String>) -> Error {
    Error::PlanInvalid {
        step,
        reason: reason.into(),
    }
}

impl Interp<'_> {
    fn take_held(&self, at: usize, payload: Payload, step: usize) -> Result<Vec<Block>> {
        self.held[at]
            .get(&payload)
            .cloned()
            .ok_or_else(|| invalid(step, format!("group {at} does not hold {payload}")))
    }

    fn produce(&mut self, from: usize, payload: Payload, step: usize) -> Result<Vec<Block>> {
        match payload {
            Payload::MsrParityBlocks(h) if h == from => {
                let (blocks, read) = group_parity(self.state, h)
                    .ok_or_else(|| invalid(step, format!("group {h} cannot produce its parity")))?;
                if !self.failed.contains(&h) {
                    read.iter().for_each(|&i| self.ledger.touch(h, i));
                }
                Ok(blocks)
            }
            Payload::RecoveredParity(_) | Payload::MsrParityBlocks(_) => self.take_held(from, payload, step),
            Payload::SystematicBlocks(_) | Payload::HelperSymbols(_) => {
                Err(invalid(step, format!("{payload} is not a group-repair payload")))
            }
        }
    }

    fn compute(&mut self, at: usize, action: Action, target: usize, step: usize) -> Result<()> {
        let p = self.state.shared_params().clone();
        match action {
            Action::XorParities => {
                if self.failed.contains(&at) {
                    return Err(invalid(step, format!("group {at} is itself failed")));
                }
                let (left, right) = p.adjacent_groups(at);
                let other = match (left == target, right == target) {
                    (true, _) => right,
                    (_, true) => left,
                    _ => return Err(invalid(step, format!("{target} is not adjacent to {at}"))),
                };
                let mut parity = self.take_held(at, Payload::MsrParityBlocks(other), step)?;
                for (t, b) in parity.iter_mut().enumerate() {
                    let idx = p.n_l() + t;
                    if !self.state.is_alive(at, idx) {
                        return Err(invalid(step, format!("distributed parity {at}:{idx} is down")));
                    }
                    self.ledger.touch(at, idx);
                    b.xor_assign(self.state.block(at, idx));
                }
                self.held[at].insert(Payload::RecoveredParity(target), parity);
            }
            Action::DecodeFromParity => {
                let parity = self.take_held(at, Payload::RecoveredParity(target), step)?;
                let available = parity
                    .into_iter()
                    .enumerate()
                    .map(|(t, b)| (p.r + t, b))
                    .collect();
                let msg = p
                    .local_code(target)
                    .decode(&available)
                    .map_err(|e| invalid(step, e.to_string()))?;
                self.messages.insert(target, msg);
            }
            Action::ReEncode => {
                let msg = self
                    .messages
                    .get(&target)
                    .ok_or_else(|| invalid(step, format!("group {target} has not been decoded")))?;
                let blocks = p.local_code(target).encode(msg)?;
                for (i, b) in blocks.into_iter().enumerate() {
                    self.state.restore(target, i, b);
                }
            }
            Action::RebuildDistributedParity => {
                let (left, right) = p.adjacent_groups(target);
                let mut sums = self.take_held(at, Payload::MsrParityBlocks(left), step)?;
                let other = self.take_held(at, Payload::MsrParityBlocks(right), step)?;
                for (s, b) in sums.iter_mut().zip(&other) {
                    s.xor_assign(b);
                }
                for (t, b) in sums.into_iter().enumerate() {
                    self.state.restore(target, p.n_l() + t, b);
                }
            }
            Action::RepairNode | Action::DecodeLocal => {
                return Err(invalid(step, "node-level action inside a group plan"));
            }
        }
        Ok(())
    }
}

/// Run `plan` against `state`, restoring every failed group in place.
pub fn execute_plan(state: &mut ClusterState, plan: &RepairPlan) -> Result<TransferLedger> {
    let m = state.params().m;
    for &g in &plan.failed_groups {
        state.erase_group(g);
    }
    let mut it = Interp {
        state,
        failed: &plan.failed_groups,
        held: vec![BTreeMap::new(); m],
        messages: BTreeMap::new(),
        ledger: TransferLedger::default(),
    };
    for (i, step) in plan.steps.iter().enumerate() {
        match *step {
            Step::Transfer {
                from_group,
                to_group,
                payload,
                symbol_count,
                ..
            } => {
                let blocks = it.produce(from_group, payload, i)?;
                let size: usize = blocks.iter().map(|b| b.len()).sum();
                if size != symbol_count {
                    return Err(invalid(i, format!("{payload} is {size} symbols, plan says {symbol_count}")));
                }
                it.ledger
                    .transfer(from_group, symbol_count, !plan.failed_groups.contains(&from_group));
                it.held[to_group].insert(payload, blocks);
            }
            Step::Compute {
                at_group,
                action,
                target,
                ..
            } => it.compute(at_group, action, target, i)?,
        }
    }
    Ok(it.ledger)
}
