//! Acceptance criteria 1 to 11, one PASS/FAIL line each.
//!
//! Runs as a plain binary so every line is printed; exits non-zero when any
//! criterion fails.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lccr::baseline::{msr_local_encode, msr_local_repair_group, MsrLocalParams, MsrLocalState};
use lccr::codec::{
    erasure_decode_full, lccr_encode, min_distance_bruteforce, verify_codeword, ClusterState, CodeParams,
};
use lccr::galois::{Field, FieldSpec};
use lccr::harness::files::{chunk_file_name, MANIFEST_NAME};
use lccr::harness::{decode_file, encode_file, repair_files, write_jsonl, Verdict};
use lccr::local_code::{Backend, LocalMessage};
use lccr::metrics::{
    d_min_formula, gamma_factor, group_bw_overhead, mbr_point, msr_point, node_bw_overhead, Family, Rational,
    Shape,
};
use lccr::repair::{
    execute_plan, max_repairable_failed_groups_bound, plan_adjacent_pair_repair, plan_group_repair,
    plan_single_group_repair, repair_node_distributed_parity, repair_node_msr_part, PlanOutcome, Variant,
};
use lccr::sweep::{run_sweep, SweepSpec};
use lccr::Error;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn params(m: usize, r: usize, u: usize, delta: usize, backend: Backend, spec: FieldSpec) -> Arc<CodeParams> {
    Arc::new(CodeParams::new(m, r, u, delta, backend, spec).expect("valid parameters"))
}

fn random_state(p: &Arc<CodeParams>, seed: u64) -> ClusterState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = p.field().order();
    let flat: Vec<u8> = (0..p.k_symbols()).map(|_| rng.gen_range(0..q) as u8).collect();
    lccr_encode(p, &p.split_message(&flat)).expect("encodes")
}

fn fail_groups(state: &ClusterState, groups: &BTreeSet<usize>) -> ClusterState {
    let mut s = state.clone();
    for &g in groups {
        s.erase_group(g);
    }
    s
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {t:.1?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn c1_minimum_distance() -> Check {
    let mut notes = Vec::new();
    let mut wrong = Vec::new();
    for (m, r, u, delta, spec, want) in [
        (3, 1, 2, 1, FieldSpec::GF2, 4),
        (4, 2, 3, 2, FieldSpec::GF4, 7),
        (3, 2, 3, 2, FieldSpec::GF4, 7),
    ] {
        let p = params(m, r, u, delta, Backend::Scalar, spec);
        let start = Instant::now();
        let got = min_distance_bruteforce(&p).map_err(|e| e.to_string())?;
        within(start, Duration::from_secs(60))?;
        let note = format!("({m},{r},{u},{delta})={got}");
        if got != want {
            wrong.push(format!("{note} expected {want}"));
        }
        notes.push(note);
    }
    if wrong.is_empty() {
        Ok(notes.join(" "))
    } else {
        Err(wrong.join("; "))
    }
}

fn c2_erasure_patterns() -> Check {
    let start = Instant::now();
    let p = params(3, 1, 2, 1, Backend::Scalar, FieldSpec::GF2);
    let n = p.n();
    let width = p.group_width();
    let mut decoded3 = 0;
    for seed in 0..4 {
        let s = random_state(&p, seed);
        let msg = s.systematic_message();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let mut e = s.clone();
                    for pos in [a, b, c] {
                        e.erase(pos / width, pos % width);
                    }
                    let got = erasure_decode_full(&e).map_err(|err| format!("{{{a},{b},{c}}}: {err}"))?;
                    ensure!(got == msg, "pattern {{{a},{b},{c}}} decoded wrongly");
                    decoded3 += 1;
                }
            }
        }
    }
    let mut failing4 = 0;
    for mask in 0u32..1 << n {
        if mask.count_ones() != 4 {
            continue;
        }
        let mut e = random_state(&p, 0);
        for pos in (0..n).filter(|i| mask >> i & 1 == 1) {
            e.erase(pos / width, pos % width);
        }
        failing4 += erasure_decode_full(&e).is_err() as usize;
    }
    ensure!(decoded3 == 4 * 84, "decoded {decoded3} three-node patterns");
    ensure!(failing4 >= 1, "every 4-node pattern decodes");
    within(start, Duration::from_secs(10))?;
    Ok(format!("84/84 three-node patterns decode; {failing4}/126 four-node patterns fail"))
}

fn c3_single_group() -> Check {
    let start = Instant::now();
    let p = params(8, 5, 6, 5, Backend::Scalar, FieldSpec::GF256);
    let want = 4 * (p.u - 1) * p.gamma();
    for seed in 0..3 {
        let s = random_state(&p, seed);
        for g in 0..p.m {
            for variant in [Variant::Left, Variant::Right] {
                let mut e = fail_groups(&s, &BTreeSet::from([g]));
                let plan = plan_single_group_repair(&e, g, variant).map_err(|err| err.to_string())?;
                ensure!(plan.helper_groups.len() == 3, "g={g} {variant:?}: {} helpers", plan.helper_groups.len());
                let ledger = execute_plan(&mut e, &plan).map_err(|err| err.to_string())?;
                ensure!(ledger.symbols_moved == want, "g={g}: moved {}", ledger.symbols_moved);
                ensure!(ledger.groups_contacted == 3, "g={g}: contacted {}", ledger.groups_contacted);
                ensure!(verify_codeword(&e) && e.symbols() == s.symbols(), "g={g} not bit-identical");
            }
        }
    }
    let model = group_bw_overhead(Family::Lccr, Shape::new(8, 5, 6, 5)).map_err(|e| e.to_string())?;
    ensure!(model == q(5, 1), "model group_bw_overhead {model}");
    within(start, Duration::from_secs(1))?;
    Ok(format!("helpers 3, {want} symbols per stripe, model group_bw_overhead {model}"))
}

fn c4_adjacent_pair() -> Check {
    let p = params(8, 5, 6, 5, Backend::Scalar, FieldSpec::GF256);
    let m = p.m;
    let s = random_state(&p, 11);
    for g in 0..m {
        let mut e = fail_groups(&s, &BTreeSet::from([g, (g + 1) % m]));
        let plan = plan_adjacent_pair_repair(&e, g).map_err(|err| err.to_string())?;
        let want: BTreeSet<usize> = [m - 2, m - 1, 2, 3].iter().map(|o| (g + o) % m).collect();
        ensure!(plan.helper_groups == want, "g={g}: helpers {:?}, want {want:?}", plan.helper_groups);
        execute_plan(&mut e, &plan).map_err(|err| err.to_string())?;
        ensure!(e.symbols() == s.symbols(), "g={g}: pair not bit-identical");

        let triple = BTreeSet::from([g, (g + 1) % m, (g + 2) % m]);
        let e = fail_groups(&s, &triple);
        let planner = plan_group_repair(&e, &triple).map_err(|err| err.to_string())?;
        ensure!(!planner.is_repairable(), "planner accepts {triple:?}");
        ensure!(erasure_decode_full(&e).is_err(), "oracle decodes {triple:?}");
    }
    Ok("helpers {g-2,g-1,g+2,g+3} for every g; consecutive triples rejected by planner and oracle".into())
}

/// Returns the largest accepted failure set seen.
fn exhaustive(p: &Arc<CodeParams>, seed: u64) -> Result<(usize, usize), String> {
    let s = random_state(p, seed);
    let mut accepted = 0;
    let mut largest = 0;
    for mask in 0u32..1 << p.m {
        let failed: BTreeSet<usize> = (0..p.m).filter(|g| mask >> g & 1 == 1).collect();
        let mut e = fail_groups(&s, &failed);
        let decodable = erasure_decode_full(&e).is_ok();
        if let PlanOutcome::Plan(plan) = plan_group_repair(&e, &failed).map_err(|err| err.to_string())? {
            accepted += 1;
            largest = largest.max(failed.len());
            ensure!(decodable, "m={} {failed:?} accepted but not oracle-decodable", p.m);
            execute_plan(&mut e, &plan).map_err(|err| format!("m={} {failed:?}: {err}", p.m))?;
            ensure!(e.symbols() == s.symbols(), "m={} {failed:?} not bit-identical", p.m);
        }
    }
    Ok((accepted, largest))
}

fn tiny_codes() -> Vec<Arc<CodeParams>> {
    let mut out = Vec::new();
    for m in 4..=7 {
        out.push(params(m, 1, 2, 1, Backend::Scalar, FieldSpec::GF2));
        out.push(params(m, 2, 3, 2, Backend::Scalar, FieldSpec::GF4));
    }
    out
}

fn c5_peeling_soundness() -> Check {
    let start = Instant::now();
    let mut total = 0;
    for p in tiny_codes() {
        for seed in 0..2 {
            total += exhaustive(&p, seed)?.0;
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{total} accepted subsets over m=4..7 repaired bit-identically and oracle-decodable"))
}

fn c6_bound() -> Check {
    let mut notes = String::new();
    for p in tiny_codes() {
        let bound = max_repairable_failed_groups_bound(&p);
        let shape = Shape::new(p.m, p.r, p.u, p.delta);
        ensure!(p.full_interleave(), "{p} does not have delta = u - 1");
        let d = d_min_formula(Family::Lccr, shape);
        ensure!(bound == d - 1, "{p}: bound {bound}, d_min - 1 = {}", d - 1);
        let (_, largest) = exhaustive(&p, 5)?;
        ensure!(largest <= bound, "{p}: repairable set of {largest} groups exceeds bound {bound}");
        let _ = write!(notes, " m={},r={}:{largest}<={bound}", p.m, p.r);
    }
    Ok(format!("bound = u+2delta-1;{notes}"))
}

fn c7_sweep() -> Check {
    let start = Instant::now();
    let rows = run_sweep(&SweepSpec::default()).map_err(|e| e.to_string())?;
    let lccr: Vec<_> = rows.iter().filter(|r| r.family == Family::Lccr).collect();
    let tuples: Vec<(usize, usize)> = lccr.iter().map(|r| (r.m, r.r)).collect();
    ensure!(
        tuples == [(3, 30), (4, 20), (5, 14), (6, 10), (8, 5), (10, 2)],
        "LCCR tuples {tuples:?}"
    );
    ensure!(lccr.iter().all(|r| r.u == 6 && r.delta == 5), "LCCR u/delta off");
    let max = lccr.iter().map(|r| r.storage_overhead).max().expect("rows");
    ensure!(max == q(6, 1), "max LCCR storage {max}");
    ensure!(lccr.iter().all(|r| r.group_locality == 3), "LCCR group locality != 3");
    for r in rows.iter().filter(|r| r.family != Family::Lccr) {
        ensure!(r.group_locality == r.m && r.m >= 3, "{} m={} group locality {}", r.family, r.m, r.group_locality);
    }
    let msr: Vec<_> = rows.iter().filter(|r| r.family == Family::MsrLocal).collect();
    let mbr: Vec<_> = rows.iter().filter(|r| r.family == Family::MbrLocal).collect();
    ensure!(msr.len() == mbr.len() && !msr.is_empty(), "baseline row counts differ");
    for (a, b) in msr.iter().zip(&mbr) {
        ensure!(a.shape() == b.shape(), "baseline rows misaligned");
        ensure!(b.storage_overhead > a.storage_overhead, "MBR storage not above MSR at {:?}", a.shape());
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!("6 LCCR tuples, max storage 6.000000, {} baseline tuples", msr.len()))
}

fn c8_metrics() -> Check {
    let err = |e: Error| e.to_string();
    let l = Shape::new(8, 5, 6, 5);
    let b = Shape::new(4, 21, 8, 8);
    let msr = msr_point(6, 3, 4).map_err(err)?;
    let mbr = mbr_point(6, 3, 4).map_err(err)?;
    let checks = [
        ("gamma(2,3)", gamma_factor(2, 3).map_err(err)?, q(6, 5)),
        ("B_LCCR(5,6)", node_bw_overhead(Family::Lccr, l).map_err(err)?, q(86, 5)),
        ("B_MSR-local(4,21,8,8)", node_bw_overhead(Family::MsrLocal, b).map_err(err)?, q(56, 1)),
        ("B'_LCCR(5,6)", group_bw_overhead(Family::Lccr, l).map_err(err)?, q(5, 1)),
        ("B'_MSR-local(4,21,8)", group_bw_overhead(Family::MsrLocal, b).map_err(err)?, q(8, 21) + 5),
        ("msr_point.storage", msr.per_node_storage, q(2, 1)),
        ("msr_point.bandwidth", msr.repair_bandwidth, q(4, 1)),
        ("mbr_point.storage", mbr.per_node_storage, q(8, 3)),
        ("mbr_point.bandwidth", mbr.repair_bandwidth, q(8, 3)),
    ];
    let wrong: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| got != want)
        .map(|(name, got, want)| format!("{name} = {got}, expected {want}"))
        .collect();
    if wrong.is_empty() {
        Ok(format!("{} exact rational checks", checks.len()))
    } else {
        Err(wrong.join("; "))
    }
}

fn c9_node_repair() -> Check {
    let p = params(8, 5, 6, 5, Backend::Scalar, FieldSpec::GF256);
    let s = random_state(&p, 21);
    let want = 2 * (p.u - 1) * p.gamma();
    let dp: Vec<usize> = (p.n_l()..p.group_width()).collect();
    for g in [0, 3, 7] {
        for mask in 1u32..1 << dp.len() {
            let mut e = s.clone();
            for (j, &i) in dp.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    e.erase(g, i);
                }
            }
            let fix = repair_node_distributed_parity(&e, g).map_err(|err| err.to_string())?;
            let ledger = fix.install(&mut e);
            ensure!(ledger.symbols_moved == want, "g={g} mask={mask:b}: moved {}", ledger.symbols_moved);
            ensure!(ledger.groups_contacted == 2, "g={g}: contacted {}", ledger.groups_contacted);
            ensure!(e.symbols() == s.symbols(), "g={g}: DP not restored");
        }
    }

    let pm = params(4, 3, 4, 3, Backend::ProductMatrix, FieldSpec::GF256);
    let s = random_state(&pm, 22);
    let per = 2 * pm.gamma();
    for g in 0..pm.m {
        for i in 0..pm.n_l() {
            let mut e = s.clone();
            e.erase(g, i);
            let fix = repair_node_msr_part(&e, pm.node(g, i)).map_err(|err| err.to_string())?;
            let ledger = fix.install(&mut e);
            ensure!(ledger.symbols_moved == per && per == 4, "{g}:{i}: downloaded {}", ledger.symbols_moved);
            ensure!(e.symbols() == s.symbols(), "{g}:{i}: not bit-identical");
        }
    }
    Ok(format!("distributed parity {want} symbols from 2 groups for all loss subsets; product-matrix 4 symbols"))
}

fn baseline_state(p: &Arc<MsrLocalParams>, seed: u64) -> MsrLocalState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let message: Vec<LocalMessage> = (0..p.m)
        .map(|_| {
            let v: Vec<u8> = (0..p.r).map(|_| rng.gen()).collect();
            LocalMessage::from_symbols(&v, 1)
        })
        .collect();
    msr_local_encode(p, &message).expect("encodes")
}

fn c10_baseline() -> Check {
    let f = Field::gf256();
    for (m, r, u, delta) in [(5, 3, 4, 3), (4, 2, 3, 2), (6, 2, 3, 3)] {
        let p = Arc::new(MsrLocalParams::new(m, r, u, delta, &f).map_err(|e| e.to_string())?);
        let s = baseline_state(&p, 31);
        for g in 0..m {
            let mut e = s.clone();
            e.erase_group(g);
            let ledger = msr_local_repair_group(&mut e, g).map_err(|err| err.to_string())?;
            ensure!(ledger.groups_contacted == m, "({m},{r},{u},{delta}) g={g}: contacted {}", ledger.groups_contacted);
            ensure!(e.symbols() == s.symbols(), "({m},{r},{u},{delta}) g={g}: not restored");
        }
        let mut e = s.clone();
        e.erase_group(0);
        e.erase_group(2);
        match msr_local_repair_group(&mut e, 0) {
            Err(Error::MultipleGroupFailures(2)) => {}
            other => return Err(format!("two failed groups gave {other:?}")),
        }
    }
    Ok("single-group repair contacts m units and restores; two failures rejected".into())
}

fn c11_end_to_end() -> Check {
    let start = Instant::now();
    let p = params(8, 5, 6, 5, Backend::Scalar, FieldSpec::GF256);
    let mut data = vec![0u8; 1 << 20];
    ChaCha8Rng::seed_from_u64(2024).fill_bytes(&mut data);
    let mut traces = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let err = |e: Error| e.to_string();
        encode_file(&data, &p, dir.path()).map_err(err)?;
        for i in 0..p.group_width() {
            std::fs::remove_file(dir.path().join(chunk_file_name(5, i))).map_err(|e| e.to_string())?;
        }
        let manifest = dir.path().join(MANIFEST_NAME);
        let report = repair_files(&manifest, &BTreeSet::new(), &[]).map_err(err)?;
        ensure!(report.verdict == Verdict::Repaired, "repair verdict {:?}", report.verdict);
        ensure!(report.ledger_per_stripe.symbols_moved == 20, "per-stripe {}", report.ledger_per_stripe.symbols_moved);
        let back = decode_file(&manifest).map_err(err)?;
        ensure!(back == data, "decoded bytes differ");
        let mut jsonl = Vec::new();
        write_jsonl(&report.trace, &mut jsonl).map_err(err)?;
        traces.push(jsonl);
    }
    ensure!(traces[0] == traces[1], "traces differ between runs");
    within(start, Duration::from_secs(30))?;
    Ok(format!("1 MiB roundtrip after losing group 5 in {:.1?}", start.elapsed()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("minimum distance", c1_minimum_distance),
        ("erasure patterns", c2_erasure_patterns),
        ("single-group repair", c3_single_group),
        ("adjacent-pair repair", c4_adjacent_pair),
        ("peeling soundness", c5_peeling_soundness),
        ("repairable-groups bound", c6_bound),
        ("sweep reproduction", c7_sweep),
        ("metrics spot checks", c8_metrics),
        ("node-repair accounting", c9_node_repair),
        ("baseline behavior", c10_baseline),
        ("end-to-end files", c11_end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
