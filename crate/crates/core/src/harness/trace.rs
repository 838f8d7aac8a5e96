//! JSONL repair traces, one event per line.
//!
//! ```text
//! {"event":"transfer","from_group":6,"to_group":7,"payload":"msr_parity_blocks(6)","symbols":5}
//! {"event":"compute","at_group":7,"action":"xor_parities","target":0}
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::repair::{Action, Step};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Transfer {
        from_group: usize,
        to_group: usize,
        payload: String,
        symbols: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        from_node: Option<usize>,
    },
    Compute {
        at_group: usize,
        action: Action,
        target: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_node: Option<usize>,
    },
}

impl From<&Step> for TraceEvent {
    fn from(step: &Step) -> Self {
        match *step {
            Step::Transfer {
                from_group,
                to_group,
                from_node,
                payload,
                symbol_count,
                ..
            } => TraceEvent::Transfer {
                from_group,
                to_group,
                payload: payload.to_string(),
                symbols: symbol_count,
                from_node,
            },
            Step::Compute {
                at_group,
                action,
                target,
                target_node,
            } => TraceEvent::Compute {
                at_group,
                action,
                target,
                target_node,
            },
        }
    }
}

pub fn events_from_steps(steps: &[Step]) -> Vec<TraceEvent> {
    steps.iter().map(TraceEvent::from).collect()
}

/// Total symbols over the transfer events.
pub fn transferred_symbols(events: &[TraceEvent]) -> usize {
    events
        .iter()
        .map(|e| match e {
            TraceEvent::Transfer { symbols, .. } => *symbols,
            TraceEvent::Compute { .. } => 0,
        })
        .sum()
}

pub fn write_jsonl(events: &[TraceEvent], mut out: impl Write) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl(input: impl BufRead) -> Result<Vec<TraceEvent>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repair::Payload;

    #[test]
    fn schema() {
        let steps = [
            Step::Transfer {
                from_group: 6,
                to_group: 7,
                from_node: None,
                payload: Payload::MsrParityBlocks(6),
                symbol_count: 5,
                serves: 0,
            },
            Step::Compute {
                at_group: 7,
                action: Action::XorParities,
                target: 0,
                target_node: None,
            },
        ];
        let events = events_from_steps(&steps);
        let mut buf = Vec::new();
        write_jsonl(&events, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "{\"event\":\"transfer\",\"from_group\":6,\"to_group\":7,\"payload\":\"msr_parity_blocks(6)\",\"symbols\":5}\n\
             {\"event\":\"compute\",\"at_group\":7,\"action\":\"xor_parities\",\"target\":0}\n"
        );
        assert_eq!(read_jsonl(&buf[..]).unwrap(), events);
        assert_eq!(transferred_symbols(&events), 5);
    }
}
