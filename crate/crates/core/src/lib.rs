//! Local codes with cooperative repair.
//!
//! An erasure code built from `m` local groups. Each group stores a
//! systematic MDS/MSR local codeword `(m_g, m_g P_g)` plus `Δ` distributed
//! parity blocks, each the sum of the matching parity blocks of the two
//! neighbouring groups. That interleaving lets a whole failed group be
//! rebuilt from three neighbours instead of from every survivor.
//!
//! Modules, bottom-up:
//!
//! - [`galois`]: GF(2^w) arithmetic and dense matrices.
//! - [`local_code`]: the per-group code (scalar Cauchy or product-matrix MSR).
//! - [`codec`]: assembling, verifying and erasure-decoding full codewords.
//! - [`repair`]: node repair, group repair plans and their interpreter.
//! - [`baseline`]: the MSR-local comparison code.
//! - [`metrics`], [`sweep`]: closed-form overhead models and parameter sweeps.
//! - [`harness`]: simulator, chunk/manifest files and traces.

pub mod baseline;
pub mod codec;
pub mod error;
pub mod galois;
pub mod harness;
pub mod local_code;
pub mod metrics;
pub mod par;
pub mod repair;
pub mod sweep;

pub use error::{Error, Result};
