//! Striped file encoding into per-node chunk files plus a JSON manifest.
//!
//! Chunk layout (little-endian):
//!
//! ```text
//!   0   4  magic "LCCR"
//!   4   1  version (1)
//!   5   2  group
//!   7   2  node_index
//!   9   1  kind (0 systematic, 1 local parity, 2 distributed parity)
//!  10   4  payload_symbols
//!  14   …  payload, one byte per symbol, stripes concatenated
//! ```
//!
//! Input bytes become symbols directly for GF(256); narrower fields split
//! each byte into `8/w` symbols, low bits first. The manifest records a
//! CRC-32C of every chunk file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crc::{Crc, CRC_32_ISCSI};
use serde::{Deserialize, Serialize};

use super::sim::Verdict;
use super::trace::{events_from_steps, TraceEvent};
use crate::codec::{erasure_decode_full, verify_codeword, ClusterState, CodeParams, NodeKind};
use crate::error::{Error, Result};
use crate::galois::{FieldSpec, Symbol};
use crate::local_code::Backend;
use crate::par;
use crate::repair::{repair_all, TransferLedger};

pub const FORMAT_VERSION: u32 = 1;
pub const CHUNK_MAGIC: &[u8; 4] = b"LCCR";
pub const CHUNK_VERSION: u8 = 1;
pub const CHUNK_HEADER_LEN: usize = 14;
pub const MANIFEST_NAME: &str = "manifest.json";

const CRC32C: Crc<u32> = Crc::<u32>::new(&CRC_32_ISCSI);

pub fn crc32c(bytes: &[u8]) -> u32 {
    CRC32C.checksum(bytes)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestParams {
    pub m: usize,
    pub r: usize,
    pub u: usize,
    pub delta: usize,
    pub gamma: usize,
    pub backend: Backend,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkEntry {
    pub file: String,
    pub group: usize,
    pub node_index: usize,
    pub kind: NodeKind,
    pub crc32c: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub field: FieldSpec,
    pub family: String,
    pub params: ManifestParams,
    pub stripe_count: usize,
    pub original_length_bytes: usize,
    pub chunks: Vec<ChunkEntry>,
}

impl Manifest {
    pub fn code_params(&self) -> Result<CodeParams> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Domain(format!(
                "unsupported manifest format_version {}",
                self.format_version
            )));
        }
        if self.family != "LCCR" {
            return Err(Error::Domain(format!("unsupported family `{}`", self.family)));
        }
        let p = &self.params;
        let params = CodeParams::new(p.m, p.r, p.u, p.delta, p.backend, self.field)?;
        if params.gamma() != p.gamma {
            return Err(Error::Domain(format!(
                "manifest gamma {} does not match the {} backend (gamma {})",
                p.gamma,
                p.backend,
                params.gamma()
            )));
        }
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

pub fn chunk_file_name(group: usize, index: usize) -> String {
    format!("chunk_g{group:03}_n{index:03}.bin")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChunkFile {
    pub group: u16,
    pub node_index: u16,
    pub kind: NodeKind,
    pub payload: Vec<Symbol>,
}

impl ChunkFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(CHUNK_HEADER_LEN + self.payload.len());
        out.extend_from_slice(CHUNK_MAGIC);
        out.push(CHUNK_VERSION);
        out.extend_from_slice(&self.group.to_le_bytes());
        out.extend_from_slice(&self.node_index.to_le_bytes());
        out.push(self.kind.code());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(name: &str, bytes: &[u8]) -> Result<Self> {
        let bad = |reason: &str| Error::MalformedChunk {
            chunk: name.to_string(),
            reason: reason.to_string(),
        };
        if bytes.len() < CHUNK_HEADER_LEN {
            return Err(bad("shorter than the header"));
        }
        if &bytes[..4] != CHUNK_MAGIC {
            return Err(bad("bad magic"));
        }
        if bytes[4] != CHUNK_VERSION {
            return Err(bad("unsupported version"));
        }
        let group = u16::from_le_bytes([bytes[5], bytes[6]]);
        let node_index = u16::from_le_bytes([bytes[7], bytes[8]]);
        let kind = NodeKind::from_code(bytes[9]).ok_or_else(|| bad("unknown node kind"))?;
        let symbols = u32::from_le_bytes([bytes[10], bytes[11], bytes[12], bytes[13]]) as usize;
        let payload = &bytes[CHUNK_HEADER_LEN..];
        if payload.len() != symbols {
            return Err(bad("payload length does not match header"));
        }
        Ok(ChunkFile {
            group,
            node_index,
            kind,
            payload: payload.to_vec(),
        })
    }
}

/// Split bytes into `w`-bit symbols, low bits first.
pub fn unpack_bytes(bytes: &[u8], width: u8) -> Vec<Symbol> {
    if width == 8 {
        return bytes.to_vec();
    }
    let per = 8 / width as usize;
    let mask = (1u16 << width) as u8 - 1;
    bytes
        .iter()
        .flat_map(|&b| (0..per).map(move |j| (b >> (j * width as usize)) & mask))
        .collect()
}

/// Inverse of [`unpack_bytes`]; a trailing partial byte is zero-filled.
pub fn pack_symbols(symbols: &[Symbol], width: u8) -> Vec<u8> {
    if width == 8 {
        return symbols.to_vec();
    }
    let per = 8 / width as usize;
    symbols
        .chunks(per)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (j, &s)| acc | s << (j * width as usize)))
        .collect()
}

fn manifest_dir(manifest_path: &Path) -> PathBuf {
    manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Encode `input` into `out_dir`, writing one chunk per node and
/// `manifest.json`. An empty input writes only the manifest.
pub fn encode_file(input: &[u8], params: &Arc<CodeParams>, out_dir: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(out_dir)?;
    let p = params.as_ref();
    let width = p.field().spec().width;
    let mut symbols = unpack_bytes(input, width);
    let k = p.k_symbols();
    let stripes = symbols.len().div_ceil(k);
    symbols.resize(stripes * k, 0);
    let stripe_len = p.n() * p.gamma();
    let mut encoded = vec![0 as Symbol; stripes * stripe_len];
    par::for_each_chunk_mut(&mut encoded, stripe_len, |s, out| {
        p.encode_symbols(&symbols[s * k..(s + 1) * k], out)
    });

    let gamma = p.gamma();
    let nodes: Vec<(usize, usize)> = (0..p.m)
        .flat_map(|g| (0..p.group_width()).map(move |i| (g, i)))
        .collect();
    let chunks = if stripes == 0 {
        Vec::new()
    } else {
        par::map(&nodes, |&(g, i)| -> Result<ChunkEntry> {
            let pos = p.node_pos(g, i);
            let payload: Vec<Symbol> = encoded
                .chunks(stripe_len)
                .flat_map(|stripe| stripe[pos * gamma..(pos + 1) * gamma].iter().copied())
                .collect();
            let kind = p.node(g, i).kind;
            let bytes = ChunkFile {
                group: g as u16,
                node_index: i as u16,
                kind,
                payload,
            }
            .to_bytes();
            let file = chunk_file_name(g, i);
            std::fs::write(out_dir.join(&file), &bytes)?;
            Ok(ChunkEntry {
                file,
                group: g,
                node_index: i,
                kind,
                crc32c: crc32c(&bytes),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
    };
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        field: p.field().spec(),
        family: "LCCR".into(),
        params: ManifestParams {
            m: p.m,
            r: p.r,
            u: p.u,
            delta: p.delta,
            gamma,
            backend: p.backend(),
        },
        stripe_count: stripes,
        original_length_bytes: input.len(),
        chunks,
    };
    manifest.save(&out_dir.join(MANIFEST_NAME))?;
    Ok(manifest)
}

/// Payload of every node, `None` where the chunk file is absent.
fn load_payloads(manifest: &Manifest, params: &CodeParams, dir: &Path) -> Result<Vec<Option<Vec<Symbol>>>> {
    let mut nodes = vec![None; params.n()];
    let expected = manifest.stripe_count * params.gamma();
    for entry in &manifest.chunks {
        if entry.group >= params.m || entry.node_index >= params.group_width() {
            return Err(Error::MalformedChunk {
                chunk: entry.file.clone(),
                reason: "node outside the code".into(),
            });
        }
        let path = dir.join(&entry.file);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
            Err(e) => return Err(e.into()),
        };
        if crc32c(&bytes) != entry.crc32c {
            return Err(Error::ChecksumMismatch {
                chunk: entry.file.clone(),
            });
        }
        let chunk = ChunkFile::from_bytes(&entry.file, &bytes)?;
        if chunk.group as usize != entry.group
            || chunk.node_index as usize != entry.node_index
            || chunk.kind != entry.kind
            || chunk.payload.len() != expected
        {
            return Err(Error::MalformedChunk {
                chunk: entry.file.clone(),
                reason: "header disagrees with manifest".into(),
            });
        }
        nodes[params.node_pos(entry.group, entry.node_index)] = Some(chunk.payload);
    }
    Ok(nodes)
}

/// Reassemble the original bytes from whatever chunks are present.
pub fn decode_file(manifest_path: &Path) -> Result<Vec<u8>> {
    let manifest = Manifest::load(manifest_path)?;
    let params = manifest.code_params()?;
    let nodes = load_payloads(&manifest, &params, &manifest_dir(manifest_path))?;
    let (gamma, k, stripes) = (params.gamma(), params.k_symbols(), manifest.stripe_count);
    let mut message = vec![0 as Symbol; stripes * k];
    let systematic: Vec<usize> = (0..params.m)
        .flat_map(|g| (0..params.r).map(move |i| (g, i)))
        .map(|(g, i)| params.node_pos(g, i))
        .collect();
    if systematic.iter().all(|&pos| nodes[pos].is_some()) {
        for (s, out) in message.chunks_mut(k.max(1)).enumerate() {
            for (j, &pos) in systematic.iter().enumerate() {
                let src = nodes[pos].as_ref().expect("checked above");
                out[j * gamma..(j + 1) * gamma].copy_from_slice(&src[s * gamma..(s + 1) * gamma]);
            }
        }
    } else if stripes > 0 {
        let alive = (0..params.n()).filter(|&pos| nodes[pos].is_some());
        let solver = params.erasure_solver(alive)?;
        let field = params.field();
        par::try_for_each_chunk_mut(&mut message, k, |s, out| {
            let msg = solver.solve(field, |c| {
                nodes[c / gamma].as_ref().expect("solver reads surviving columns")[s * gamma + c % gamma]
            })?;
            out.copy_from_slice(&msg);
            Ok::<(), Error>(())
        })?;
    }
    let mut bytes = pack_symbols(&message, params.field().spec().width);
    bytes.truncate(manifest.original_length_bytes);
    Ok(bytes)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub chunks_expected: usize,
    pub chunks_present: usize,
    pub missing: Vec<String>,
    /// Every stripe is a valid codeword; false when any chunk is missing.
    pub codewords_valid: bool,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.missing.is_empty() && self.codewords_valid
    }
}

/// Check chunk checksums and headers, then re-encode every stripe.
pub fn verify_files(manifest_path: &Path) -> Result<VerifyReport> {
    let manifest = Manifest::load(manifest_path)?;
    let params = Arc::new(manifest.code_params()?);
    let p = params.as_ref();
    let nodes = load_payloads(&manifest, p, &manifest_dir(manifest_path))?;
    let expected = if manifest.stripe_count == 0 { 0 } else { p.n() };
    let missing: Vec<String> = if expected == 0 {
        Vec::new()
    } else {
        (0..p.n())
            .filter(|&pos| nodes[pos].is_none())
            .map(|pos| chunk_file_name(pos / p.group_width(), pos % p.group_width()))
            .collect()
    };
    let gamma = p.gamma();
    let codewords_valid = missing.is_empty()
        && par::map_range(0..manifest.stripe_count, |s| {
            let symbols: Vec<Symbol> = nodes
                .iter()
                .flat_map(|n| n.as_ref().expect("no chunk missing")[s * gamma..(s + 1) * gamma].iter().copied())
                .collect();
            verify_codeword(&ClusterState::from_symbols(params.clone(), &symbols))
        })
        .into_iter()
        .all(|ok| ok);
    Ok(VerifyReport {
        chunks_expected: expected,
        chunks_present: expected - missing.len(),
        missing,
        codewords_valid,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileRepairReport {
    pub verdict: Verdict,
    pub oracle_decodable: bool,
    pub failed_groups: BTreeSet<usize>,
    pub repaired_chunks: Vec<String>,
    pub stripe_count: usize,
    /// Ledger of one stripe; every stripe runs the same plan.
    pub ledger_per_stripe: TransferLedger,
    pub symbols_moved_total: usize,
    /// Steps of the per-stripe repair.
    pub trace: Vec<TraceEvent>,
}

/// Rebuild missing chunks (plus any nodes named as failed) in place and
/// rewrite the manifest checksums.
pub fn repair_files(
    manifest_path: &Path,
    failed_groups: &BTreeSet<usize>,
    failed_nodes: &[(usize, usize)],
) -> Result<FileRepairReport> {
    let mut manifest = Manifest::load(manifest_path)?;
    let params = Arc::new(manifest.code_params()?);
    let p = params.as_ref();
    let dir = manifest_dir(manifest_path);
    let mut nodes = load_payloads(&manifest, p, &dir)?;
    for &g in failed_groups {
        if g >= p.m {
            return Err(Error::Domain(format!("group {g} out of range (m={})", p.m)));
        }
        for i in 0..p.group_width() {
            nodes[p.node_pos(g, i)] = None;
        }
    }
    for &(g, i) in failed_nodes {
        if g >= p.m || i >= p.group_width() {
            return Err(Error::Domain(format!("node {g}:{i} out of range")));
        }
        nodes[p.node_pos(g, i)] = None;
    }
    let missing: Vec<usize> = (0..p.n()).filter(|&pos| nodes[pos].is_none()).collect();
    let gamma = p.gamma();
    let stripes = manifest.stripe_count;

    let stripe_state = |s: usize| {
        let mut symbols = vec![0 as Symbol; p.n() * gamma];
        for (pos, node) in nodes.iter().enumerate() {
            if let Some(payload) = node {
                symbols[pos * gamma..(pos + 1) * gamma].copy_from_slice(&payload[s * gamma..(s + 1) * gamma]);
            }
        }
        let mut state = ClusterState::from_symbols(params.clone(), &symbols);
        for &pos in &missing {
            state.erase(pos / p.group_width(), pos % p.group_width());
        }
        state
    };

    let probe = stripe_state(0.min(stripes.saturating_sub(1)));
    let oracle_decodable = stripes == 0 || erasure_decode_full(&probe).is_ok();
    let results = par::map_range(0..stripes, |s| {
        let mut state = stripe_state(s);
        repair_all(&mut state).map(|report| (state, report))
    });
    let mut repaired = Vec::with_capacity(stripes);
    for r in results {
        match r {
            Ok(x) => repaired.push(x),
            Err(Error::Unrecoverable) => {
                let pattern = crate::repair::classify_group_failures(p, probe.failed_nodes());
                return Ok(FileRepairReport {
                    verdict: Verdict::Unrepairable,
                    oracle_decodable,
                    failed_groups: pattern.failed_groups,
                    repaired_chunks: Vec::new(),
                    stripe_count: stripes,
                    ledger_per_stripe: TransferLedger::default(),
                    symbols_moved_total: 0,
                    trace: Vec::new(),
                });
            }
            Err(e) => return Err(e),
        }
    }

    let mut repaired_chunks = Vec::new();
    if stripes > 0 {
        for &pos in &missing {
            let (g, i) = (pos / p.group_width(), pos % p.group_width());
            let payload: Vec<Symbol> = repaired
                .iter()
                .flat_map(|(state, _)| state.block(g, i).iter().copied())
                .collect();
            let kind = p.node(g, i).kind;
            let bytes = ChunkFile {
                group: g as u16,
                node_index: i as u16,
                kind,
                payload,
            }
            .to_bytes();
            let file = chunk_file_name(g, i);
            std::fs::write(dir.join(&file), &bytes)?;
            let crc = crc32c(&bytes);
            match manifest.chunks.iter_mut().find(|c| c.group == g && c.node_index == i) {
                Some(entry) => entry.crc32c = crc,
                None => manifest.chunks.push(ChunkEntry {
                    file: file.clone(),
                    group: g,
                    node_index: i,
                    kind,
                    crc32c: crc,
                }),
            }
            repaired_chunks.push(file);
        }
        manifest.save(manifest_path)?;
    }
    let (ledger, trace, failed) = match repaired.first() {
        Some((_, report)) => (
            report.ledger.clone(),
            events_from_steps(&report.steps),
            report.pattern.failed_groups.clone(),
        ),
        None => (TransferLedger::default(), Vec::new(), failed_groups.clone()),
    };
    Ok(FileRepairReport {
        verdict: Verdict::Repaired,
        oracle_decodable,
        failed_groups: failed,
        repaired_chunks,
        stripe_count: stripes,
        symbols_moved_total: ledger.symbols_moved * stripes,
        ledger_per_stripe: ledger,
        trace,
    })
}
