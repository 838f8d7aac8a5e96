//! Simulation, on-disk formats and traces.

pub mod files;
pub mod sim;
pub mod trace;

pub use files::{decode_file, encode_file, repair_files, verify_files, ChunkFile, FileRepairReport, Manifest, VerifyReport};
pub use sim::{simulate, Scenario, ScenarioKind, SimReport, Verdict};
pub use trace::{events_from_steps, write_jsonl, TraceEvent};
