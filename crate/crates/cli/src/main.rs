//! `lccr` command-line front end.
//!
//! Results go to stdout as JSON (CSV for `sweep`), logs to stderr.
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lccr::codec::{min_distance_bruteforce, CodeParams};
use lccr::galois::FieldSpec;
use lccr::harness::files::MANIFEST_NAME;
use lccr::harness::{self, Scenario, ScenarioKind, Verdict};
use lccr::local_code::Backend;
use lccr::metrics::{d_min_formula, Family, Shape};
use lccr::repair::Variant;
use lccr::sweep::{run_sweep, write_csv, SweepSpec};
use lccr::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "lccr", version, about = "Local codes with cooperative repair")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CodeArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    u: usize,
    #[arg(long)]
    delta: usize,
    #[arg(long, default_value = "scalar", value_parser = parse_backend)]
    backend: Backend,
    /// Reduction polynomial, e.g. 0x11d (GF(256)) or 0x7 (GF(4)).
    #[arg(long, default_value = "0x11d", value_parser = parse_poly)]
    field_poly: FieldSpec,
}

impl CodeArgs {
    fn params(&self) -> lccr::Result<Arc<CodeParams>> {
        let p = CodeParams::new(self.m, self.r, self.u, self.delta, self.backend, self.field_poly)?;
        Ok(Arc::new(p))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    SingleNode,
    SingleGroup,
    AdjacentPair,
    GroupSet,
    RandomNodes,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Left,
    Right,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a file into chunk files plus manifest.json.
    Encode {
        input: PathBuf,
        #[command(flatten)]
        code: CodeArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Reassemble the original file from the surviving chunks.
    Decode {
        #[arg(long)]
        manifest: PathBuf,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild missing or named chunks in place.
    Repair {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_delimiter = ',')]
        failed_groups: Vec<usize>,
        #[arg(long, value_parser = parse_node)]
        failed_node: Vec<(usize, usize)>,
        /// Write the per-stripe repair trace as JSONL.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a failure scenario against a random in-memory codeword.
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum)]
        scenario: Option<ScenarioArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        failed_groups: Vec<usize>,
        #[arg(long, value_parser = parse_node)]
        failed_node: Vec<(usize, usize)>,
        #[arg(long, value_enum, default_value = "left")]
        variant: VariantArg,
        /// Node failures for the random-nodes scenario.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Write the trace as JSONL.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Enumerate parameters at fixed length and distance and emit CSV.
    Sweep {
        #[arg(long, default_value_t = 120)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        dmin: usize,
        #[arg(long, value_delimiter = ',', default_value = "lccr,msr_local,mbr_local")]
        families: Vec<Family>,
        #[arg(long)]
        require_group_repairable: bool,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force minimum distance of a small code.
    Mindist {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Check chunk checksums and that every stripe is a codeword.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_poly(s: &str) -> Result<FieldSpec, String> {
    let t = s.trim();
    let v = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => t.parse(),
    }
    .map_err(|e| format!("bad polynomial `{s}`: {e}"))?;
    FieldSpec::from_poly(v).map_err(|e| e.to_string())
}

fn parse_node(s: &str) -> Result<(usize, usize), String> {
    let (g, i) = s.split_once(':').ok_or_else(|| format!("expected g:i, got `{s}`"))?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad node `{s}`: {e}"));
    Ok((num(g)?, num(i)?))
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::InvalidField(_) | Error::ScenarioInvalid(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Domain(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn print_json(v: &serde_json::Value) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn write_trace(path: &Path, events: &[harness::TraceEvent]) -> Result<(), Failure> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    harness::write_jsonl(events, &mut w)?;
    w.flush()?;
    log::info!("trace written to {}", path.display());
    Ok(())
}

fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(MANIFEST_NAME)
    } else {
        p.to_path_buf()
    }
}

fn scenario_kind(
    scenario: Option<ScenarioArg>,
    failed_groups: &[usize],
    failed_node: &[(usize, usize)],
    variant: VariantArg,
    count: usize,
) -> Result<ScenarioKind, Failure> {
    let variant = match variant {
        VariantArg::Left => Variant::Left,
        VariantArg::Right => Variant::Right,
    };
    let groups: BTreeSet<usize> = failed_groups.iter().copied().collect();
    let first_group = || {
        failed_groups
            .first()
            .copied()
            .ok_or_else(|| Failure::Usage("this scenario needs --failed-groups".into()))
    };
    let scenario = match scenario {
        Some(s) => s,
        None if !failed_node.is_empty() => ScenarioArg::SingleNode,
        None if groups.len() == 1 => ScenarioArg::SingleGroup,
        None if !groups.is_empty() => ScenarioArg::GroupSet,
        None => ScenarioArg::RandomNodes,
    };
    Ok(match scenario {
        ScenarioArg::SingleNode => {
            let &(group, index) = failed_node
                .first()
                .ok_or_else(|| Failure::Usage("single-node needs --failed-node g:i".into()))?;
            ScenarioKind::SingleNode { group, index }
        }
        ScenarioArg::SingleGroup => ScenarioKind::SingleGroup {
            group: first_group()?,
            variant,
        },
        ScenarioArg::AdjacentPair => ScenarioKind::AdjacentPair { group: first_group()? },
        ScenarioArg::GroupSet => ScenarioKind::GroupSet { groups },
        ScenarioArg::RandomNodes => ScenarioKind::RandomNodes { count },
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Encode { input, code, out } => {
            let params = code.params()?;
            let bytes = std::fs::read(&input)?;
            log::info!("encoding {} bytes with {params}", bytes.len());
            let manifest = harness::encode_file(&bytes, &params, &out)?;
            print_json(&json!({
                "manifest": out.join(MANIFEST_NAME),
                "stripe_count": manifest.stripe_count,
                "original_length_bytes": manifest.original_length_bytes,
                "chunks": manifest.chunks.len(),
            }))
        }
        Command::Decode { manifest, out } => {
            let bytes = harness::decode_file(&manifest_path(&manifest))?;
            std::fs::write(&out, &bytes)?;
            print_json(&json!({ "out": out, "bytes": bytes.len() }))
        }
        Command::Repair {
            manifest,
            failed_groups,
            failed_node,
            trace,
        } => {
            let groups: BTreeSet<usize> = failed_groups.into_iter().collect();
            let report = harness::repair_files(&manifest_path(&manifest), &groups, &failed_node)?;
            if let Some(path) = trace {
                write_trace(&path, &report.trace)?;
            }
            print_json(&serde_json::to_value(&report)?)?;
            match report.verdict {
                Verdict::Repaired => Ok(()),
                Verdict::Unrepairable => Err(Failure::Domain("failure pattern is unrepairable".into())),
            }
        }
        Command::Simulate {
            code,
            scenario,
            seed,
            failed_groups,
            failed_node,
            variant,
            count,
            trace,
        } => {
            let params = code.params()?;
            let kind = scenario_kind(scenario, &failed_groups, &failed_node, variant, count)?;
            let scenario = Scenario { kind, seed };
            log::info!("simulating {} on {params}", serde_json::to_string(&scenario)?);
            let report = harness::simulate(&params, &scenario)?;
            if let Some(path) = trace {
                write_trace(&path, &report.trace)?;
            }
            print_json(&json!({ "scenario": scenario, "report": report }))?;
            match report.verdict {
                Verdict::Repaired => Ok(()),
                Verdict::Unrepairable => Err(Failure::Domain("failure pattern is unrepairable".into())),
            }
        }
        Command::Sweep {
            n,
            dmin,
            families,
            require_group_repairable,
            out,
        } => {
            let spec = SweepSpec {
                n,
                d_min: dmin,
                families,
                require_group_repairable,
                ..Default::default()
            };
            let rows = run_sweep(&spec)?;
            log::info!("{} rows", rows.len());
            match out {
                Some(path) => lccr::sweep::emit_csv(&rows, &path)?,
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Mindist { code } => {
            let params = code.params()?;
            log::info!("enumerating codewords of {params}");
            let d = min_distance_bruteforce(&params)?;
            let formula = d_min_formula(Family::Lccr, Shape::new(code.m, code.r, code.u, code.delta));
            print_json(&json!({ "d_min": d, "formula": formula }))
        }
        Command::Verify { manifest } => {
            let report = harness::verify_files(&manifest_path(&manifest))?;
            print_json(&serde_json::to_value(&report)?)?;
            if report.ok() {
                Ok(())
            } else {
                Err(Failure::Domain("verification failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
