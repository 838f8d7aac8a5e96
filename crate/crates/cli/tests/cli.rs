use std::path::Path;
use std::process::{Command, Output};

fn lccr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lccr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn encode(dir: &Path, data: &[u8]) -> String {
    let input = dir.join("input.bin");
    std::fs::write(&input, data).unwrap();
    let out = dir.join("chunks");
    let o = lccr(&[
        "encode",
        input.to_str().unwrap(),
        "--m", "8", "--r", "5", "--u", "6", "--delta", "5",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("manifest.json").to_str().unwrap().to_string()
}

fn sample(len: usize) -> Vec<u8> {
    (0..len).map(|i| (i * 131 + i / 7) as u8).collect()
}

#[test]
fn sweep_prints_six_lccr_rows() {
    let o = lccr(&["sweep", "--n", "120", "--dmin", "16", "--families", "lccr"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("family,m,r,u,delta"));
    assert!(lines[1..].iter().all(|l| l.starts_with("LCCR,")));
}

#[test]
fn mindist_of_smallest_code() {
    let o = lccr(&["mindist", "--m", "3", "--r", "1", "--u", "2", "--delta", "1", "--field-poly", "0x3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["d_min"], 4);
}

#[test]
fn consecutive_groups_are_unrepairable() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = encode(dir.path(), &sample(5000));
    let o = lccr(&["repair", "--manifest", &manifest, "--failed-groups", "1,2,3"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["verdict"], "unrepairable");
}

#[test]
fn encode_repair_decode_verify() {
    let dir = tempfile::tempdir().unwrap();
    let data = sample(20_000);
    let manifest = encode(dir.path(), &data);
    let chunks = dir.path().join("chunks");
    for i in 0..15 {
        std::fs::remove_file(chunks.join(format!("chunk_g002_n{i:03}.bin"))).unwrap();
    }
    let verify = lccr(&["verify", "--manifest", &manifest]);
    assert_eq!(verify.status.code(), Some(1));

    let trace = dir.path().join("trace.jsonl");
    let o = lccr(&["repair", "--manifest", &manifest, "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout_json(&o);
    assert_eq!(report["verdict"], "repaired");
    assert_eq!(report["ledger_per_stripe"]["symbols_moved"], 20);
    let events: Vec<serde_json::Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let moved: u64 = events
        .iter()
        .filter(|e| e["event"] == "transfer")
        .map(|e| e["symbols"].as_u64().unwrap())
        .sum();
    assert_eq!(moved, 20);

    assert_eq!(lccr(&["verify", "--manifest", &manifest]).status.code(), Some(0));
    let out = dir.path().join("out.bin");
    let o = lccr(&["decode", "--manifest", &manifest, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(out).unwrap(), data);
}

#[test]
fn corrupted_chunk_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = encode(dir.path(), &sample(1000));
    let chunk = dir.path().join("chunks/chunk_g000_n000.bin");
    let mut bytes = std::fs::read(&chunk).unwrap();
    bytes[20] ^= 0xff;
    std::fs::write(&chunk, bytes).unwrap();
    let out = dir.path().join("out.bin");
    let o = lccr(&["decode", "--manifest", &manifest, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("chunk_g000_n000.bin"));
}

#[test]
fn simulate_single_group_is_deterministic() {
    let args = [
        "simulate", "--m", "8", "--r", "5", "--u", "6", "--delta", "5",
        "--scenario", "single-group", "--failed-groups", "4", "--seed", "9",
    ];
    let a = lccr(&args);
    assert_eq!(a.status.code(), Some(0));
    let b = lccr(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert_eq!(v["report"]["ledger"]["symbols_moved"], 20);
    assert_eq!(v["report"]["ledger"]["groups_contacted"], 3);
    assert_eq!(v["report"]["model_group_symbols"], 125);
    assert_eq!(v["report"]["verified"], true);
}

#[test]
fn simulate_unrepairable_exits_one() {
    let o = lccr(&[
        "simulate", "--m", "8", "--r", "5", "--u", "6", "--delta", "5",
        "--failed-groups", "2,3,4",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["report"]["oracle_decodable"], false);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lccr(&[]).status.code(), Some(2));
    assert_eq!(lccr(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lccr(&["mindist", "--m", "3"]).status.code(), Some(2));
    assert_eq!(lccr(&["repair", "--manifest", "x", "--failed-node", "3"]).status.code(), Some(2));
    assert_eq!(
        lccr(&["mindist", "--m", "3", "--r", "1", "--u", "2", "--delta", "1", "--field-poly", "0x4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lccr(&["simulate", "--m", "8", "--r", "5", "--u", "6", "--delta", "5", "--failed-groups", "9"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn missing_manifest_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nope.json");
    assert_eq!(lccr(&["verify", "--manifest", path.to_str().unwrap()]).status.code(), Some(1));
}
