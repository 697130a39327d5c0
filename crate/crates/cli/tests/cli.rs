use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slab-tbc"))
}

fn scratch(tag: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let n = COUNTER.fetch_add(1, Ordering::SeqCst);
    let dir = std::env::temp_dir().join(format!("slab-tbc-cli-{}-{tag}-{n}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn pec_config(t_end: f64, cfl: f64) -> Value {
    serde_json::json!({
        "scenario": "pec-energy",
        "grid": { "nx": 8, "ny": 8, "nz": 16, "period": [1.0, 1.0], "z": [0.0, 2.0] },
        "medium": { "kind": "homogeneous", "eps": 1.0, "mu": 1.0 },
        "source": { "pulse": {
            "center": [0.5, 0.5, 1.0], "radius": [0.4, 0.4, 0.75],
            "amplitude": 1.0, "direction": 1.0, "eps": 1.0, "mu": 1.0, "lateral": "cosine"
        } },
        "time": { "cfl": cfl, "t_end": t_end },
        "snapshot_every": 10
    })
}

fn run(dir: &Path, config: &Value, extra: &[&str]) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    bin().arg("run").arg(&path).arg("--out").arg(dir.join("out")).args(extra).output().unwrap()
}

fn diagnostic(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(out.stderr.trim_ascii()).expect("stderr is one JSON object")
}

#[test]
fn pec_run_writes_all_outputs() {
    let dir = scratch("pec");
    let out = run(&dir, &pec_config(0.5, 0.5), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.join("out");
    let summary: Value = serde_json::from_str(&fs::read_to_string(o.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario"], "pec-energy");
    assert_eq!(summary["passed"], true);
    let hash = summary["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    let csv = fs::read_to_string(o.join("energy.csv")).unwrap();
    assert!(csv.starts_with(&format!("# config_hash={hash}")));
    let steps = summary["steps"].as_u64().unwrap() as usize;
    assert_eq!(csv.lines().count(), 2 + steps + 1);
    let timing: Value = serde_json::from_str(&fs::read_to_string(o.join("timing.json")).unwrap()).unwrap();
    assert_eq!(timing["config_hash"], hash);
    assert!(o.join("snapshots/step_000000.bin").exists());
    let snap = fs::read(o.join("snapshots/step_000010.bin")).unwrap();
    let (header, _) = without_timestamp(&snap);
    assert_eq!(header["config_hash"], hash);
}

#[test]
fn reruns_are_byte_identical() {
    let a = scratch("rerun-a");
    let b = scratch("rerun-b");
    let cfg = pec_config(0.5, 0.5);
    assert!(run(&a, &cfg, &[]).status.success());
    assert!(run(&b, &cfg, &[]).status.success());
    for f in ["summary.json", "energy.csv"] {
        let x = fs::read(a.join("out").join(f)).unwrap();
        let y = fs::read(b.join("out").join(f)).unwrap();
        assert!(x == y, "{f} differs between reruns");
    }
    for f in ["snapshots/step_000000.bin", "snapshots/step_000010.bin"] {
        let x = without_timestamp(&fs::read(a.join("out").join(f)).unwrap());
        let y = without_timestamp(&fs::read(b.join("out").join(f)).unwrap());
        assert!(x == y, "{f} differs between reruns");
    }
}

/// Snapshot bytes with the header's timestamp field dropped.
fn without_timestamp(bytes: &[u8]) -> (Value, Vec<u8>) {
    let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
    let mut header: Value = serde_json::from_slice(&bytes[..nl]).unwrap();
    assert!(header.as_object_mut().unwrap().remove("timestamp").is_some());
    (header, bytes[nl + 1..].to_vec())
}

#[test]
fn seed_changes_hash() {
    let a = scratch("seed-a");
    let b = scratch("seed-b");
    let cfg = pec_config(0.1, 0.5);
    assert!(run(&a, &cfg, &["--seed", "3"]).status.success());
    assert!(run(&b, &cfg, &["--seed", "4"]).status.success());
    let read = |d: &Path| -> Value {
        serde_json::from_str(&fs::read_to_string(d.join("out/summary.json")).unwrap()).unwrap()
    };
    assert_ne!(read(&a)["config_hash"], read(&b)["config_hash"]);
}

#[test]
fn zero_horizon_gives_header_only_csv() {
    let dir = scratch("zero");
    let out = run(&dir, &pec_config(0.0, 0.5), &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("out/energy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("step,t,e1"));
}

#[test]
fn cfl_violation_is_rejected() {
    let dir = scratch("cfl");
    let d = diagnostic(&run(&dir, &pec_config(1.0, 1.5), &[]));
    assert_eq!(d["error"], "invalid-config");
    assert_eq!(d["field"], "time.cfl");
    assert!(!dir.join("out").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = scratch("unknown");
    let mut cfg = pec_config(1.0, 0.5);
    cfg["time"]["cfll"] = 0.5.into();
    let d = diagnostic(&run(&dir, &cfg, &[]));
    assert_eq!(d["error"], "invalid-config");
    assert!(d["constraint"].as_str().unwrap().contains("cfll"));
}

#[test]
fn unused_section_is_rejected() {
    let dir = scratch("section");
    let mut cfg = pec_config(1.0, 0.5);
    cfg["reference"] = true.into();
    let d = diagnostic(&run(&dir, &cfg, &[]));
    assert_eq!(d["field"], "reference");
}

#[test]
fn current_switched_on_abruptly_violates_h1() {
    let dir = scratch("h1");
    let cfg = serde_json::json!({
        "scenario": "tbc-reflection",
        "grid": { "nx": 8, "ny": 8, "nz": 16, "period": [1.0, 1.0], "z": [0.0, 1.0] },
        "medium": { "kind": "homogeneous", "eps": 1.0, "mu": 1.0 },
        "source": { "current": {
            "center": [0.5, 0.5, 0.5], "radius": [0.3, 0.3, 0.2],
            "polarization": [1.0, 0.0, 0.0], "profile": { "kind": "step" }
        } },
        "time": { "cfl": 0.5, "t_end": 1.0 }
    });
    let d = diagnostic(&run(&dir, &cfg, &[]));
    assert_eq!(d["field"], "source.current.profile");
}

#[test]
fn malformed_json_reports_position() {
    let dir = scratch("syntax");
    let path = dir.join("config.json");
    fs::write(&path, "{ \"scenario\": \"pec-energy\",\n  \"grid\": }").unwrap();
    let out = bin().arg("run").arg(&path).arg("--out").arg(dir.join("out")).output().unwrap();
    let d = diagnostic(&out);
    assert!(d["constraint"].as_str().unwrap().contains("line 2"));
}

#[test]
fn unknown_check_is_rejected() {
    let out = bin().args(["check", "no-such-check"]).output().unwrap();
    assert_eq!(diagnostic(&out)["field"], "target");
}

#[test]
fn symbol_audit_prints_json() {
    let dir = scratch("audit");
    let out = bin()
        .args(["audit-symbols", "--samples", "200", "--eps", "2", "--side", "bottom", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["audit"]["eps"], 2.0);
    let saved: Value = serde_json::from_str(&fs::read_to_string(dir.join("audit.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn single_check_writes_report() {
    let dir = scratch("check");
    let out = bin().args(["check", "capacity-positivity", "--out"]).arg(&dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.join("checks.json")).unwrap()).unwrap();
    assert_eq!(v["results"][0]["check_id"], "capacity-positivity");
}

#[test]
fn failed_check_exits_with_one() {
    let out = bin().args(["check", "trace-inequality", "--preset", "as-printed-weight"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("violated"));
}
