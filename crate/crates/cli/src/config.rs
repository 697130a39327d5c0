//! Run configuration: strict JSON schema and parse-time validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use slab_tbc::cq::Generator;
use slab_tbc::sdomain::{Closure, LayeredProfile};
use slab_tbc::spectral::{LateralGrid, Side};
use slab_tbc::stepper::{
    Bump, Comp, ExteriorModel, SlabMedium, SourceTerm, SupportBox, TemporalProfile, Triple, VerticalPulse,
};
use slab_tbc::symbols::ExteriorMedium;
use slab_tbc::verify::{AprioriConfig, OracleConfig};

/// A rejected configuration: which field and which constraint.
#[derive(Clone, Debug, PartialEq, Serialize, thiserror::Error)]
#[error("{field}: {constraint}")]
pub struct Diagnostic {
    pub field: String,
    pub constraint: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Diagnostic { field: field.into(), constraint: constraint.into() }
    }

    fn from_core(field: &str, e: slab_tbc::error::Error) -> Self {
        Diagnostic::new(field, e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    PecEnergy,
    TbcReflection,
    OracleCompare,
    SymbolAudit,
    LemmaSuite,
    AprioriSweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Cells across the slab.
    pub nz: usize,
    pub period: [f64; 2],
    /// `[h2, h1]`.
    pub z: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExteriorSpec {
    pub eps: f64,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MediumSpec {
    Homogeneous { eps: f64, mu: f64 },
    Layered { breakpoints: Vec<f64>, eps: Vec<f64>, mu: Vec<f64> },
    /// JSON file with `eps` and `mu` sampled on the staggered grid and the
    /// `top` and `bottom` exterior constants. Relative to the config file.
    Sampled { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledMedium {
    pub eps: Triple<f64>,
    pub mu: Triple<f64>,
    pub top: ExteriorSpec,
    pub bottom: ExteriorSpec,
}

/// `J = polarization * b(x) b(y) b(z) * profile(t)` with periodic `cos^6`
/// bumps laterally.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentSpec {
    pub center: [f64; 3],
    pub radius: [f64; 3],
    pub polarization: [f64; 3],
    pub profile: TemporalProfile,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default)]
    pub pulse: Option<VerticalPulse>,
    #[serde(default)]
    pub current: Option<CurrentSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    /// Fraction of the stability limit; exclusive with `dt`.
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub generator: Generator,
    #[serde(default)]
    pub exterior: ExteriorModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSpec {
    pub samples: usize,
    pub eps: f64,
    pub mu: f64,
    pub side: Side,
    pub thickness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub medium: Option<MediumSpec>,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub time: Option<TimeSpec>,
    /// Snapshot cadence in steps; 0 or absent disables snapshots.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    /// Compare a transparent run with a conductor-walled reference.
    #[serde(default)]
    pub reference: Option<bool>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub apriori: Option<AprioriConfig>,
    #[serde(default)]
    pub audit: Option<AuditSpec>,
    #[serde(default)]
    pub checks: Option<Vec<String>>,
}

/// A stepper run ready to execute.
pub struct StepperJob {
    pub medium: SlabMedium<f64>,
    pub source: SourceTerm<f64>,
    pub dt: f64,
    pub steps: usize,
    pub closure: Closure,
    pub generator: Generator,
    pub exterior: ExteriorModel,
    pub snapshot_every: usize,
    pub pulse: Option<VerticalPulse>,
    /// Exterior constants when the medium is homogeneous.
    pub homogeneous: Option<(f64, f64)>,
}

/// Sha-256 of the canonical JSON form (sorted keys) of `value`.
pub fn config_hash(value: &serde_json::Value) -> String {
    let mut h = Sha256::new();
    h.update(value.to_string().as_bytes());
    slab_tbc::stepper::io::hex(&h.finalize())
}

/// Parses and validates a config. `base` resolves relative paths.
pub fn parse(text: &str) -> Result<(RunConfig, serde_json::Value), Diagnostic> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Diagnostic::new("<document>", format!("syntax error at line {} column {}: {e}", e.line(), e.column())))?;
    let cfg: RunConfig = serde_json::from_value(value.clone()).map_err(|e| Diagnostic::new("<document>", e.to_string()))?;
    cfg.check_sections()?;
    Ok((cfg, value))
}

fn require<'a, T>(v: &'a Option<T>, field: &str, scenario: Scenario) -> Result<&'a T, Diagnostic> {
    v.as_ref().ok_or_else(|| Diagnostic::new(field, format!("required by scenario {}", scenario_name(scenario))))
}

pub fn scenario_name(s: Scenario) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

impl RunConfig {
    fn check_sections(&self) -> Result<(), Diagnostic> {
        use Scenario::*;
        let present: [(&str, bool, &[Scenario]); 9] = [
            ("grid", self.grid.is_some(), &[PecEnergy, TbcReflection]),
            ("medium", self.medium.is_some(), &[PecEnergy, TbcReflection]),
            ("source", self.source.is_some(), &[PecEnergy, TbcReflection]),
            ("time", self.time.is_some(), &[PecEnergy, TbcReflection]),
            ("snapshot_every", self.snapshot_every.is_some(), &[PecEnergy, TbcReflection]),
            ("reference", self.reference.is_some(), &[TbcReflection]),
            ("oracle", self.oracle.is_some(), &[OracleCompare]),
            ("apriori", self.apriori.is_some(), &[AprioriSweep]),
            ("audit", self.audit.is_some(), &[SymbolAudit]),
        ];
        for (name, is_set, allowed) in present {
            if is_set && !allowed.contains(&self.scenario) {
                return Err(Diagnostic::new(name, format!("not used by scenario {}", scenario_name(self.scenario))));
            }
        }
        if self.checks.is_some() && self.scenario != LemmaSuite {
            return Err(Diagnostic::new("checks", format!("not used by scenario {}", scenario_name(self.scenario))));
        }
        match self.scenario {
            PecEnergy | TbcReflection => {
                require(&self.grid, "grid", self.scenario)?;
                require(&self.medium, "medium", self.scenario)?;
                require(&self.source, "source", self.scenario)?;
                require(&self.time, "time", self.scenario)?;
            }
            SymbolAudit => {
                require(&self.audit, "audit", self.scenario)?;
            }
            OracleCompare | LemmaSuite | AprioriSweep => {}
        }
        Ok(())
    }

    /// Builds and validates the stepper inputs of a `pec-energy` or
    /// `tbc-reflection` config.
    pub fn stepper_job(&self, base: &Path) -> Result<StepperJob, Diagnostic> {
        let closure = match self.scenario {
            Scenario::PecEnergy => Closure::Pec,
            Scenario::TbcReflection => Closure::Transparent,
            _ => return Err(Diagnostic::new("scenario", "not a stepper scenario")),
        };
        let gs = require(&self.grid, "grid", self.scenario)?;
        let grid = LateralGrid::new(gs.period[0], gs.period[1], gs.nx, gs.ny, gs.z[1], gs.z[0], gs.nz + 1)
            .map_err(|e| Diagnostic::from_core("grid", e))?;
        let (medium, homogeneous) = match require(&self.medium, "medium", self.scenario)? {
            MediumSpec::Homogeneous { eps, mu } => {
                (SlabMedium::homogeneous(&grid, *eps, *mu).map_err(|e| Diagnostic::from_core("medium", e))?, Some((*eps, *mu)))
            }
            MediumSpec::Layered { breakpoints, eps, mu } => {
                let p = LayeredProfile::new(breakpoints.clone(), eps.clone(), mu.clone())
                    .map_err(|e| Diagnostic::from_core("medium", e))?;
                (SlabMedium::layered(&grid, &p).map_err(|e| Diagnostic::from_core("medium", e))?, None)
            }
            MediumSpec::Sampled { path } => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| Diagnostic::new("medium.path", format!("cannot read {}: {e}", full.display())))?;
                let s: SampledMedium =
                    serde_json::from_str(&text).map_err(|e| Diagnostic::new("medium.path", e.to_string()))?;
                let ext = |x: &ExteriorSpec, side| ExteriorMedium::new(x.eps, x.mu, side);
                let m = SlabMedium {
                    layout: slab_tbc::stepper::YeeLayout::new(&grid),
                    eps: s.eps,
                    mu: s.mu,
                    top: ext(&s.top, Side::Top).map_err(|e| Diagnostic::from_core("medium.top", e))?,
                    bottom: ext(&s.bottom, Side::Bottom).map_err(|e| Diagnostic::from_core("medium.bottom", e))?,
                    eps_bounds: (0.0, 0.0),
                    mu_bounds: (0.0, 0.0),
                };
                (m.validated().map_err(|e| Diagnostic::from_core("medium", e))?, None)
            }
        };
        let l = medium.layout;

        let spec = require(&self.source, "source", self.scenario)?;
        let mut source = SourceTerm::zeros(&l);
        let mut support: Option<SupportBox<f64>> = None;
        let mut widen = |b: SupportBox<f64>| {
            support = Some(match support.take() {
                None => b,
                Some(a) => SupportBox {
                    lo: [0, 1, 2].map(|i| a.lo[i].min(b.lo[i])),
                    hi: [0, 1, 2].map(|i| a.hi[i].max(b.hi[i])),
                },
            });
        };
        if let Some(p) = &spec.pulse {
            let (e0, h0) = p.fields(&l);
            source = source.with_initial(e0, h0);
            widen(p.support(&l));
        }
        if let Some(c) = &spec.current {
            c.profile.validate().map_err(|e| Diagnostic::from_core("source.current.profile", e))?;
            let bx = Bump { center: c.center[0], radius: c.radius[0] };
            let by = Bump { center: c.center[1], radius: c.radius[1] };
            let bz = Bump { center: c.center[2], radius: c.radius[2] };
            let (px, py) = (grid.period_x, grid.period_y);
            let j = l.sample(Comp::E, |comp, p| {
                let a = comp.axis();
                c.polarization[a] * bx.periodic_value(p[0], px) * by.periodic_value(p[1], py) * bz.value(p[2])
            });
            source = source.with_current(j, c.profile);
            let mut b = SupportBox::slab(&l);
            b.lo[2] = c.center[2] - c.radius[2];
            b.hi[2] = c.center[2] + c.radius[2];
            widen(b);
        }
        if let Some(b) = support {
            source = source.with_support(b);
        }
        source.check(&l).map_err(|e| Diagnostic::from_core("source", e))?;
        if closure == Closure::Transparent {
            source.check_h1().map_err(|e| Diagnostic::from_core("source.current.profile", e))?;
        }

        let t = require(&self.time, "time", self.scenario)?;
        let dt = match (t.cfl, t.dt) {
            (Some(f), None) => medium.dt_for_cfl(f).map_err(|e| Diagnostic::from_core("time.cfl", e))?,
            (None, Some(dt)) => {
                medium.check_dt(dt).map_err(|e| Diagnostic::from_core("time.dt", e))?;
                dt
            }
            _ => return Err(Diagnostic::new("time", "exactly one of `cfl` and `dt` is required")),
        };
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return Err(Diagnostic::new("time.t_end", format!("{} must be finite and non-negative", t.t_end)));
        }
        let steps = (t.t_end / dt).round() as usize;
        if self.reference == Some(true) {
            if homogeneous.is_none() {
                return Err(Diagnostic::new("reference", "needs a homogeneous medium"));
            }
            if spec.pulse.is_none() || spec.current.is_some() {
                return Err(Diagnostic::new("reference", "needs a pulse and no current"));
            }
        }
        Ok(StepperJob {
            medium,
            source,
            dt,
            steps,
            closure,
            generator: t.generator,
            exterior: t.exterior,
            snapshot_every: self.snapshot_every.unwrap_or(0),
            pulse: spec.pulse,
            homogeneous,
        })
    }
}
