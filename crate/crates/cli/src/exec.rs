//! Scenario execution and output files.

use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use slab_tbc::spectral::{Side, WeightPreset};
use slab_tbc::stepper::io::write_snapshot;
use slab_tbc::stepper::{run, EnergyReport, RunPlan};
use slab_tbc::symbols::{symbol_bound_audit_with, AuditRanges, ExteriorMedium};
use slab_tbc::verify::{
    check_apriori, check_oracle_agreement, compare_with_reference, run_suite_with, Bound, CheckResult,
    SuiteReport, CHECK_IDS,
};

use crate::config::{config_hash, parse, scenario_name, Diagnostic, RunConfig, Scenario};

pub const DEFAULT_SEED: u64 = 1;

/// Thresholds of the symbol audit.
const POSITIVITY_TOL: f64 = 1e-12;
const CONTINUITY_SLACK: f64 = 1e-9;
const F_SLACK: f64 = 1e-12;
const PASSIVITY_TOL: f64 = 1e-8;
const SCHEME_DRIFT_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(#[from] Diagnostic),
    #[error("{context}: {error}")]
    Run { context: String, error: slab_tbc::error::Error },
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Config(d) => json!({ "error": "invalid-config", "field": d.field, "constraint": d.constraint }),
            CliError::Run { context, error } => json!({ "error": "run-failed", "context": context, "message": error.to_string() }),
            CliError::Io(m) => json!({ "error": "io", "message": m }),
        }
    }
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn run_err(context: &str) -> impl FnOnce(slab_tbc::error::Error) -> CliError + '_ {
    move |error| CliError::Run { context: context.into(), error }
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).map_err(io)?;
    text.push('\n');
    fs::write(dir.join(name), text).map_err(io)
}

fn write_timing(dir: &Path, hash: &str, start: Instant) -> Result<(), CliError> {
    write_json(dir, "timing.json", &json!({ "config_hash": hash, "wall_clock_s": start.elapsed().as_secs_f64() }))
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io)
}

/// Runs a config file. `Ok(false)` when a check failed.
pub fn run_config(path: &Path, out: Option<&Path>, seed: Option<u64>, preset: WeightPreset) -> Result<bool, CliError> {
    let start = Instant::now();
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let (cfg, value) = parse(&text)?;
    let seed = seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let hash = config_hash(&json!({ "config": value, "seed": seed, "preset": preset }));
    let base = path.parent().unwrap_or(Path::new("."));
    let dir = out.unwrap_or(Path::new("out"));
    // validate before touching the output directory
    let job = match cfg.scenario {
        Scenario::PecEnergy | Scenario::TbcReflection => Some(cfg.stepper_job(base)?),
        _ => None,
    };
    prepare(dir)?;
    let mut summary = json!({
        "config_hash": hash,
        "scenario": scenario_name(cfg.scenario),
        "seed": seed,
    });
    let results = match job {
        Some(job) => stepper_scenario(&cfg, job, dir, &hash, &mut summary)?,
        None => other_scenario(&cfg, seed, preset, &mut summary)?,
    };
    let passed = results.iter().all(CheckResult::passed);
    summary["results"] = serde_json::to_value(&results).map_err(io)?;
    summary["passed"] = json!(passed);
    write_json(dir, "summary.json", &summary)?;
    write_timing(dir, &hash, start)?;
    for r in &results {
        println!("{}", one_line(r));
    }
    Ok(passed)
}

fn one_line(r: &CheckResult) -> String {
    let status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let worst = r.measured.iter().find(|m| !m.holds());
    match worst {
        Some(m) => format!("{}: {status} ({} = {:e})", r.check_id, m.name, m.value),
        None => format!("{}: {status}", r.check_id),
    }
}

fn stepper_scenario(
    cfg: &RunConfig,
    job: crate::config::StepperJob,
    dir: &Path,
    hash: &str,
    summary: &mut Value,
) -> Result<Vec<CheckResult>, CliError> {
    let context = scenario_name(cfg.scenario);
    let mut plan = RunPlan::new(job.closure, job.steps);
    plan.generator = job.generator;
    plan.exterior = job.exterior;
    plan.snapshot_every = job.snapshot_every;
    let output = run(&job.medium, &job.source, job.dt, &plan).map_err(run_err(&context))?;

    let csv = fs::File::create(dir.join("energy.csv")).map_err(io)?;
    let report = if job.steps == 0 { EnergyReport::default() } else { output.report.clone() };
    report.write_csv(BufWriter::new(csv), hash).map_err(run_err("energy.csv"))?;
    if !output.snapshots.is_empty() {
        let sd = dir.join("snapshots");
        prepare(&sd)?;
        for s in &output.snapshots {
            let f = fs::File::create(sd.join(format!("step_{:06}.bin", s.step))).map_err(io)?;
            write_snapshot(BufWriter::new(f), &job.medium, hash, s.step, job.dt, &s.e, &s.h)
                .map_err(run_err("snapshot"))?;
        }
    }

    let rows = &output.report.rows;
    let max_e1 = output.report.max_e1();
    summary["dt"] = json!(job.dt);
    summary["steps"] = json!(job.steps);
    summary["final"] = serde_json::to_value(rows.last()).map_err(io)?;
    let mut r = CheckResult::new(&context, None, json!({ "dt": job.dt, "steps": job.steps }));
    if job.steps == 0 || max_e1 == 0.0 && !job.source.has_current() {
        return Ok(vec![r.degenerate("zero horizon or zero data")]);
    }
    match cfg.scenario {
        Scenario::PecEnergy => {
            let bound = if job.source.has_current() { Bound::Report } else { Bound::AtMost { limit: SCHEME_DRIFT_TOL } };
            r.measure("scheme energy drift", output.report.scheme_drift(), bound)
                .measure("e1 drift", output.report.e1_drift(), Bound::Report);
        }
        _ => {
            let min_step = rows.windows(2).map(|w| w[1].boundary_work - w[0].boundary_work).fold(f64::INFINITY, f64::min);
            r.measure("min per-step boundary work / max e1", min_step / max_e1, Bound::AtLeast { limit: -PASSIVITY_TOL })
                .measure("boundary work / max e1", output.state.boundary_work / max_e1, Bound::Report);
            if cfg.reference == Some(true) {
                let (eps, mu) = job.homogeneous.ok_or_else(|| Diagnostic::new("reference", "needs a homogeneous medium"))?;
                let pulse = job.pulse.ok_or_else(|| Diagnostic::new("reference", "needs a pulse"))?;
                let c = compare_with_reference(
                    &job.medium.layout.grid,
                    eps,
                    mu,
                    &pulse,
                    job.dt,
                    job.steps,
                    job.exterior,
                    job.generator,
                )
                .map_err(run_err("reference"))?;
                r.measure("relative L2 mismatch to reference", c.mismatch, Bound::Report)
                    .measure("final residual / incident", c.residual, Bound::Report);
            }
        }
    }
    Ok(vec![r.finish()])
}

fn other_scenario(cfg: &RunConfig, seed: u64, preset: WeightPreset, summary: &mut Value) -> Result<Vec<CheckResult>, CliError> {
    let context = scenario_name(cfg.scenario);
    Ok(match cfg.scenario {
        Scenario::OracleCompare => {
            vec![check_oracle_agreement(&cfg.oracle.clone().unwrap_or_default()).map_err(run_err(&context))?]
        }
        Scenario::AprioriSweep => vec![check_apriori(&cfg.apriori.clone().unwrap_or_default()).map_err(run_err(&context))?],
        Scenario::LemmaSuite => {
            let ids: Vec<&str> = cfg.checks.iter().flatten().map(String::as_str).collect();
            for id in &ids {
                if !CHECK_IDS.contains(id) && !slab_tbc::verify::OUT_OF_SCOPE.iter().any(|(i, _)| i == id) {
                    return Err(Diagnostic::new("checks", format!("unknown check `{id}`")).into());
                }
            }
            run_suite_with(&ids, seed, preset).map_err(run_err(&context))?.results
        }
        Scenario::SymbolAudit => {
            let a = cfg.audit.as_ref().ok_or_else(|| Diagnostic::new("audit", "required by scenario symbol-audit"))?;
            let (r, audit) = audit_result(a.samples, a.eps, a.mu, a.side, a.thickness, seed)?;
            summary["audit"] = audit;
            vec![r]
        }
        Scenario::PecEnergy | Scenario::TbcReflection => unreachable!("stepper scenarios are handled separately"),
    })
}

fn audit_result(samples: usize, eps: f64, mu: f64, side: Side, thickness: f64, seed: u64) -> Result<(CheckResult, Value), CliError> {
    let m = ExteriorMedium::new(eps, mu, side).map_err(|e| Diagnostic::new("audit", e.to_string()))?;
    let a = symbol_bound_audit_with(samples, seed, &m, &AuditRanges::default(), thickness).map_err(run_err("symbol-audit"))?;
    let mut r = CheckResult::new("symbol-audit", Some(seed), json!({ "samples": samples, "eps": eps, "mu": mu, "side": side, "thickness": thickness }));
    r.measure("min positivity margin", a.min_positivity_margin, Bound::AtLeast { limit: -POSITIVITY_TOL })
        .measure("max operator ratio", a.max_operator_ratio, Bound::AtMost { limit: 1.0 + CONTINUITY_SLACK })
        .measure("max pairing ratio", a.max_pairing_ratio, Bound::AtMost { limit: 1.0 + CONTINUITY_SLACK })
        .measure("max F ratio", a.max_f_ratio, Bound::AtMost { limit: 1.0 + F_SLACK });
    Ok((r.finish(), serde_json::to_value(&a).map_err(io)?))
}

/// `check suite` or `check <id>`.
pub fn run_checks(target: &str, out: Option<&Path>, seed: Option<u64>, preset: WeightPreset) -> Result<bool, CliError> {
    let start = Instant::now();
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let ids: Vec<&str> = if target == "suite" { Vec::new() } else { vec![target] };
    if !ids.is_empty() && !CHECK_IDS.contains(&target) && !slab_tbc::verify::OUT_OF_SCOPE.iter().any(|(i, _)| *i == target) {
        return Err(Diagnostic::new("target", format!("unknown check `{target}`; known: suite, {}", CHECK_IDS.join(", "))).into());
    }
    let report: SuiteReport = if ids.is_empty() {
        run_suite_with(&[], seed, preset)
    } else {
        slab_tbc::verify::run_check_with(target, seed, preset).map(|r| SuiteReport { seed, results: vec![r] })
    }
    .map_err(run_err(target))?;
    print!("{}", report.summary());
    let hash = config_hash(&json!({ "command": "check", "target": target, "seed": seed, "preset": preset }));
    if let Some(dir) = out {
        prepare(dir)?;
        let mut v = serde_json::to_value(&report).map_err(io)?;
        v["config_hash"] = json!(hash);
        v["passed"] = json!(report.passed());
        write_json(dir, "checks.json", &v)?;
        write_timing(dir, &hash, start)?;
    }
    Ok(report.passed())
}

pub fn audit_symbols(
    samples: usize,
    eps: f64,
    mu: f64,
    side: Side,
    thickness: f64,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<bool, CliError> {
    let start = Instant::now();
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let (r, audit) = audit_result(samples, eps, mu, side, thickness, seed)?;
    let hash = config_hash(&json!({ "command": "audit-symbols", "samples": samples, "eps": eps, "mu": mu, "side": side, "thickness": thickness, "seed": seed }));
    let v = json!({ "config_hash": hash, "audit": audit, "result": r });
    println!("{}", serde_json::to_string_pretty(&v).map_err(io)?);
    if let Some(dir) = out {
        prepare(dir)?;
        write_json(dir, "audit.json", &v)?;
        write_timing(dir, &hash, start)?;
    }
    Ok(r.passed())
}
