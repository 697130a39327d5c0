use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::oracle::{mode_response, richardson};
use super::{spread, Bound, CheckResult};
use crate::cq::Generator;
use crate::error::{Error, Result};
use crate::num::C;
use crate::sdomain::{Closure, LayeredProfile, ModeField};
use crate::spectral::LateralGrid;
use crate::stepper::ops::{curl_e, curl_h, weighted_sq};
use crate::stepper::{
    boundary_drive, init, run, step_pec, step_tbc, Bump, Comp, ExteriorModel, FieldState, LateralShape, RunPlan,
    SlabMedium, SourceTerm, TbcKernels, TemporalProfile, Triple, VerticalPulse,
};

const SCHEME_DRIFT_TOL: f64 = 1e-12;
const E1_DRIFT_TOL: f64 = 1e-3;
const DRIFT_RATIO: (f64, f64) = (3.2, 4.8);
const REFINEMENT_SPREAD: f64 = 1.2;
const HOMOGENEITY_TOL: f64 = 1e-10;
const SPLITTING_TOL: f64 = 1e-10;
const MISMATCH_TOL: f64 = 1e-3;
const REFLECTION_TOL: f64 = 1e-3;
const ORDER: (f64, f64) = (1.8, 2.1);

fn slab(n: usize, nz: usize, height: f64) -> Result<SlabMedium<f64>> {
    let g = LateralGrid::new(1.0, 1.0, n, n, height, 0.0, nz + 1)?;
    SlabMedium::homogeneous(&g, 1.0, 1.0)
}

fn l2(l: &crate::stepper::YeeLayout<f64>, comps: [Comp; 3], f: &Triple<f64>) -> f64 {
    weighted_sq(l, comps, f, None).sqrt()
}

fn diff(a: &Triple<f64>, b: &Triple<f64>, r: f64) -> Triple<f64> {
    let mut out = a.clone();
    for (o, p) in out.iter_mut().zip(b) {
        for (x, y) in o.iter_mut().zip(p) {
            *x = (*x - *y) * r;
        }
    }
    out
}

fn max_abs(f: &Triple<f64>) -> f64 {
    f.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
}

/// Steps `steps` times, calling `observe(state, E before the step)` after
/// every step.
fn drive(
    m: &SlabMedium<f64>,
    src: &SourceTerm<f64>,
    dt: f64,
    closure: Closure,
    steps: usize,
    mut observe: impl FnMut(&FieldState<f64>, &Triple<f64>),
) -> Result<FieldState<f64>> {
    let mut s = init(m, src, dt, closure)?;
    let k = match closure {
        Closure::Transparent => Some(TbcKernels::new(m, Generator::Bdf2, dt, steps.max(1))?),
        Closure::Pec => None,
    };
    for _ in 0..steps {
        let prev = s.e.clone();
        match &k {
            Some(k) => step_tbc(&mut s, m, src, k, None)?,
            None => step_pec(&mut s, m, src)?,
        }
        observe(&s, &prev);
    }
    Ok(s)
}

fn pulse_source(m: &SlabMedium<f64>, p: &VerticalPulse, keep_e: bool, keep_h: bool) -> SourceTerm<f64> {
    let l = m.layout;
    let (e0, h0) = p.fields(&l);
    let e0 = if keep_e { e0 } else { l.zeros(Comp::E) };
    let h0 = if keep_h { h0 } else { l.zeros(Comp::H) };
    SourceTerm::zeros(&l).with_initial(e0, h0).with_support(p.support(&l))
}

fn cosine_pulse(rz: f64, center: f64) -> VerticalPulse {
    VerticalPulse {
        center: [0.5, 0.5, center],
        radius: [0.4, 0.4, rz],
        amplitude: 1.0,
        direction: 1.0,
        eps: 1.0,
        mu: 1.0,
        lateral: LateralShape::Cosine,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PecEnergyConfig {
    /// Lateral points per direction on the fine grid.
    pub n: usize,
    /// Cells across the slab on the fine grid.
    pub nz: usize,
    pub steps: usize,
    pub cfl: f64,
    pub height: f64,
    pub pulse: VerticalPulse,
}

impl Default for PecEnergyConfig {
    fn default() -> Self {
        PecEnergyConfig { n: 32, nz: 64, steps: 500, cfl: 0.5, height: 2.0, pulse: cosine_pulse(0.75, 1.0) }
    }
}

struct PecRun {
    scheme: f64,
    e1: f64,
    c2: f64,
    c3: f64,
}

fn pec_run(cfg: &PecEnergyConfig, n: usize, nz: usize, steps: usize) -> Result<Option<PecRun>> {
    let m = slab(n, nz, cfg.height)?;
    let l = m.layout;
    let src = pulse_source(&m, &cfg.pulse, true, true);
    let out = run(&m, &src, cfg.cfl * m.cfl_limit(), &RunPlan::new(Closure::Pec, steps))?;
    if out.report.rows[0].e1 == 0.0 {
        return Ok(None);
    }
    let ce = curl_e(&l, &src.e0);
    let ch = curl_h(&l, &src.h0);
    let curl_sq = weighted_sq(&l, Comp::H, &ce, None) + weighted_sq(&l, Comp::E, &ch, None);
    let cc_sq = weighted_sq(&l, Comp::E, &curl_h(&l, &ce), None) + weighted_sq(&l, Comp::H, &curl_e(&l, &ch), None);
    let e2 = out.report.rows.iter().filter_map(|r| r.e2).fold(0.0, f64::max);
    let e3 = out.report.rows.iter().filter_map(|r| r.e3).fold(0.0, f64::max);
    Ok(Some(PecRun { scheme: out.report.scheme_drift(), e1: out.report.e1_drift(), c2: e2 / curl_sq, c3: e3 / cc_sq }))
}

/// Conductor-closed slab without current: exact conservation of the
/// staggered energy, second-order drift of the continuum energy, and
/// measured constants of the higher energies against the curls of the data.
pub fn check_pec_energy(cfg: &PecEnergyConfig) -> Result<CheckResult> {
    let r = CheckResult::new("pec-energy", None, serde_json::to_value(cfg).unwrap_or_default());
    let (Some(fine), Some(coarse)) =
        (pec_run(cfg, cfg.n, cfg.nz, cfg.steps)?, pec_run(cfg, cfg.n / 2, cfg.nz / 2, cfg.steps / 2)?)
    else {
        return Ok(r.degenerate("zero initial data: every energy vanishes identically"));
    };
    let mut r = r;
    r.measure("scheme energy drift", fine.scheme, Bound::AtMost { limit: SCHEME_DRIFT_TOL })
        .measure("e1 drift", fine.e1, Bound::AtMost { limit: E1_DRIFT_TOL })
        .measure("e1 drift (coarse)", coarse.e1, Bound::Report)
        .measure("drift ratio under refinement", coarse.e1 / fine.e1, Bound::Within { lo: DRIFT_RATIO.0, hi: DRIFT_RATIO.1 })
        .measure("e2 constant", fine.c2, Bound::Finite)
        .measure("e3 constant", fine.c3, Bound::Finite)
        .measure("e2 constant spread", spread(&[fine.c2, coarse.c2]), Bound::AtMost { limit: REFINEMENT_SPREAD })
        .measure("e3 constant spread", spread(&[fine.c3, coarse.c3]), Bound::AtMost { limit: REFINEMENT_SPREAD });
    Ok(r.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedStabilityConfig {
    /// Lateral points per direction on the coarse grid; the fine grid doubles it.
    pub n: usize,
    pub nz: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub pulse: VerticalPulse,
    pub current: TemporalProfile,
}

impl Default for ReducedStabilityConfig {
    fn default() -> Self {
        let mut pulse = cosine_pulse(0.5, 1.0);
        pulse.lateral = LateralShape::Bump;
        ReducedStabilityConfig {
            n: 16,
            nz: 32,
            cfl: 0.5,
            t_end: 1.5,
            pulse,
            current: TemporalProfile::SinSquaredPulse { duration: 0.5 },
        }
    }
}

fn bump_current(m: &SlabMedium<f64>) -> Triple<f64> {
    let b = Bump { center: 1.0, radius: 0.4 };
    let bx = Bump { center: 0.5, radius: 0.4 };
    m.layout.sample(Comp::E, |c, p| match c {
        Comp::Ex => b.value(p[2]) * bx.value(p[1]),
        Comp::Ey => 0.5 * b.value(p[2]) * bx.value(p[0]),
        _ => 0.0,
    })
}

/// `|f|_{H^1(0,T)}` by the composite midpoint rule.
fn h1_norm_in_time(f: &TemporalProfile, t_end: f64) -> f64 {
    let n = 4000;
    let h = t_end / n as f64;
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            f.value(t).powi(2) + f.derivative(t).powi(2)
        })
        .sum::<f64>()
        .mul_add(h, 0.0)
        .sqrt()
}

/// `max_n (|dE| + |curl E| + |dH| + |curl H|) / (|E0|_curl + |H0|_curl + |J|_{H^1 L^2})`.
fn reduced_ratio(cfg: &ReducedStabilityConfig, n: usize, nz: usize, data: bool, current: bool, a: f64) -> Result<f64> {
    let m = slab(n, nz, 2.0)?;
    let l = m.layout;
    let mut src = if data { pulse_source(&m, &cfg.pulse, true, true) } else { SourceTerm::zeros(&l) };
    if current {
        src = src.with_current(bump_current(&m), cfg.current);
    }
    let src = src.scaled(a);
    let dt = cfg.cfl * m.cfl_limit();
    let steps = (cfg.t_end / dt).round() as usize;
    let hcurl = |f: &Triple<f64>, at_e: bool| {
        let (c, cc) = if at_e { (Comp::E, Comp::H) } else { (Comp::H, Comp::E) };
        let curl = if at_e { curl_e(&l, f) } else { curl_h(&l, f) };
        (weighted_sq(&l, c, f, None) + weighted_sq(&l, cc, &curl, None)).sqrt()
    };
    let rhs = hcurl(&src.e0, true) + hcurl(&src.h0, false) + src.current_l2(&l) * h1_norm_in_time(&src.profile, cfg.t_end);
    if rhs == 0.0 {
        return Err(Error::UndefinedRatio("zero data".into()));
    }
    let mut lhs: f64 = 0.0;
    drive(&m, &src, dt, Closure::Transparent, steps, |s, prev| {
        let r = 1.0 / s.dt;
        let de = l2(&l, Comp::E, &diff(&s.e, prev, r));
        let dh = l2(&l, Comp::H, &diff(&s.h, &s.h_prev, r));
        let ce = l2(&l, Comp::H, &curl_e(&l, &s.e));
        let ch = l2(&l, Comp::E, &curl_h(&l, &s.h_mean()));
        lhs = lhs.max(de + dh + ce + ch);
    })?;
    Ok(lhs / rhs)
}

/// Transparent closure, data split into a current-only run and a data-only
/// run: the stability ratio is measured, checked for homogeneity and for
/// stability under refinement.
pub fn check_reduced_stability(cfg: &ReducedStabilityConfig) -> Result<CheckResult> {
    let mut r = CheckResult::new("reduced-stability", None, serde_json::to_value(cfg).unwrap_or_default());
    let mut worst_spread: f64 = 1.0;
    let mut homog: f64 = 0.0;
    for (name, data, current) in [("current only", false, true), ("data only", true, false)] {
        let c = reduced_ratio(cfg, cfg.n, cfg.nz, data, current, 1.0)?;
        let f = reduced_ratio(cfg, 2 * cfg.n, 2 * cfg.nz, data, current, 1.0)?;
        let s = reduced_ratio(cfg, cfg.n, cfg.nz, data, current, 3.0)?;
        worst_spread = worst_spread.max(spread(&[c, f]));
        homog = homog.max((c - s).abs() / c);
        r.measure(&format!("ratio, {name}"), f, Bound::Finite);
    }
    r.measure("refinement spread", worst_spread, Bound::AtMost { limit: REFINEMENT_SPREAD })
        .measure("homogeneity defect", homog, Bound::AtMost { limit: HOMOGENEITY_TOL });
    Ok(r.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriConfig {
    pub n: usize,
    pub nz: usize,
    /// Shortest horizon; the sweep uses `t0`, `2 t0` and `4 t0`.
    pub t0: f64,
    /// Time steps per `t0`.
    pub steps_per_t0: usize,
    pub pulse: VerticalPulse,
}

impl Default for AprioriConfig {
    fn default() -> Self {
        let mut pulse = cosine_pulse(0.5, 1.0);
        pulse.radius[2] = 0.6;
        AprioriConfig { n: 16, nz: 32, t0: 0.015, steps_per_t0: 4, pulse }
    }
}

struct Sweep {
    ie: [f64; 3],
    ie2: [f64; 3],
}

/// `sup |E| / (|E0| + T |E1|)` and `|E|_{L^2(0,T)} / (T^1/2 (|E0| + T |E1|))`
/// for `T = t0, 2 t0, 4 t0`.
fn apriori_sweep(cfg: &AprioriConfig, refine: usize, keep_e: bool, keep_h: bool) -> Result<Option<Sweep>> {
    let m = slab(cfg.n * refine, cfg.nz * refine, 2.0)?;
    let l = m.layout;
    let src = pulse_source(&m, &cfg.pulse, keep_e, keep_h);
    let per = cfg.steps_per_t0 * refine;
    let dt = cfg.t0 / per as f64;
    let e0 = l2(&l, Comp::E, &src.e0);
    let e1 = l2(&l, Comp::E, &src.initial_rate(&l, &m.eps));
    if e0 == 0.0 && e1 == 0.0 {
        return Ok(None);
    }
    let mut norms = vec![e0];
    drive(&m, &src, dt, Closure::Transparent, 4 * per, |s, _| norms.push(l2(&l, Comp::E, &s.e)))?;
    let mut out = Sweep { ie: [0.0; 3], ie2: [0.0; 3] };
    for (i, mult) in [1usize, 2, 4].into_iter().enumerate() {
        let n = mult * per;
        let t = n as f64 * dt;
        let rhs = e0 + t * e1;
        let sup = norms[..=n].iter().cloned().fold(0.0, f64::max);
        let int = (0..n).map(|k| 0.5 * dt * (norms[k].powi(2) + norms[k + 1].powi(2))).sum::<f64>().sqrt();
        out.ie[i] = sup / rhs;
        out.ie2[i] = int / (t.sqrt() * rhs);
    }
    Ok(Some(out))
}

/// A priori bounds of the transparent problem over a sweep of horizons.
pub fn check_apriori(cfg: &AprioriConfig) -> Result<CheckResult> {
    let r = CheckResult::new("apriori", None, serde_json::to_value(cfg).unwrap_or_default());
    let (Some(a), Some(b)) = (apriori_sweep(cfg, 1, false, true)?, apriori_sweep(cfg, 2, false, true)?) else {
        return Ok(r.degenerate("zero data: both sides vanish"));
    };
    let e0_only = apriori_sweep(cfg, 1, true, false)?.map_or(0.0, |s| s.ie[2]);
    let mut r = r;
    let lim = Bound::AtMost { limit: REFINEMENT_SPREAD };
    r.measure("kappa (sup norm), T0", a.ie[0], Bound::Finite)
        .measure("kappa (sup norm), 2 T0", a.ie[1], Bound::Finite)
        .measure("kappa (sup norm), 4 T0", a.ie[2], Bound::Finite)
        .measure("kappa (L2 in time), T0", a.ie2[0], Bound::Finite)
        .measure("kappa (L2 in time), 2 T0", a.ie2[1], Bound::Finite)
        .measure("kappa (L2 in time), 4 T0", a.ie2[2], Bound::Finite)
        .measure("sweep spread (sup norm)", spread(&a.ie), lim)
        .measure("sweep spread (L2 in time)", spread(&a.ie2), lim)
        .measure("refinement spread (sup norm)", spread(&[a.ie[2], b.ie[2]]), lim)
        .measure("refinement spread (L2 in time)", spread(&[a.ie2[2], b.ie2[2]]), lim)
        .measure("kappa, E0-only data", e0_only, Bound::Finite);
    Ok(r.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingConfig {
    pub n: usize,
    pub nz: usize,
    pub steps: usize,
    pub cfl: f64,
}

impl Default for SplittingConfig {
    fn default() -> Self {
        SplittingConfig { n: 16, nz: 32, steps: 200, cfl: 0.5 }
    }
}

/// Conductor run on the initial data plus transparent run on the current,
/// driven by the conductor run's boundary fields, against one transparent
/// run on everything.
pub fn check_splitting(cfg: &SplittingConfig) -> Result<CheckResult> {
    let m = slab(cfg.n, cfg.nz, 2.0)?;
    let l = m.layout;
    let mut p = cosine_pulse(0.5, 1.0);
    p.lateral = LateralShape::Bump;
    let base = pulse_source(&m, &p, true, true);
    let profile = TemporalProfile::SinSquaredRamp { rise: 0.4 };
    let full = base.clone().with_current(bump_current(&m), profile);
    let current_only = SourceTerm::zeros(&l).with_current(bump_current(&m), profile).with_support(full.support);
    let dt = cfg.cfl * m.cfl_limit();
    let k = TbcKernels::new(&m, Generator::Bdf2, dt, cfg.steps)?;
    let mut a = init(&m, &full, dt, Closure::Transparent)?;
    let mut u = init(&m, &base, dt, Closure::Pec)?;
    let mut e = init(&m, &current_only, dt, Closure::Transparent)?;
    for _ in 0..cfg.steps {
        step_tbc(&mut a, &m, &full, &k, None)?;
        let d = boundary_drive(&u, &m);
        step_tbc(&mut e, &m, &current_only, &k, Some(&d))?;
        step_pec(&mut u, &m, &base)?;
    }
    let scale = max_abs(&a.e).max(max_abs(&a.h));
    let mut worst: f64 = 0.0;
    for (x, (y, z)) in a.e.iter().chain(&a.h).zip(u.e.iter().chain(&u.h).zip(e.e.iter().chain(&e.h))) {
        for i in 0..x.len() {
            worst = worst.max((x[i] - y[i] - z[i]).abs());
        }
    }
    let mut r = CheckResult::new("splitting", None, serde_json::to_value(cfg).unwrap_or_default());
    if scale == 0.0 {
        return Ok(r.degenerate("zero data"));
    }
    r.measure("max |full - (conductor + current)| / max |full|", worst / scale, Bound::AtMost { limit: SPLITTING_TOL });
    Ok(r.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TbcFidelityConfig {
    pub n: usize,
    pub nz: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub height: f64,
    pub generator: Generator,
    pub exterior: ExteriorModel,
    pub pulse: VerticalPulse,
}

impl Default for TbcFidelityConfig {
    fn default() -> Self {
        TbcFidelityConfig {
            n: 32,
            nz: 64,
            cfl: 0.125,
            t_end: 4.0,
            height: 2.0,
            generator: Generator::Bdf2,
            exterior: ExteriorModel::MatchedGrid,
            pulse: cosine_pulse(0.75, 1.0),
        }
    }
}

/// Transparent run against a conductor-walled run on a slab four times as
/// tall, sampled on the transparent slab.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    /// `E` mismatch in L2 over all steps, relative to the reference.
    pub mismatch: f64,
    /// `max |E - E_ref|` at the final step over `max |E0|`.
    pub residual: f64,
    pub steps: usize,
}

/// Runs `pulse` in the homogeneous slab of `grid` with the transparent
/// closure and in the same grid padded by `3/2` of its cells on each side
/// with conductor walls, for `steps` steps before the reference's round trip.
#[allow(clippy::too_many_arguments)]
pub fn compare_with_reference(
    grid: &LateralGrid<f64>,
    eps: f64,
    mu: f64,
    pulse: &VerticalPulse,
    dt: f64,
    steps: usize,
    exterior: ExteriorModel,
    generator: Generator,
) -> Result<ReferenceComparison> {
    let nz = grid.nz - 1;
    let pad = 3 * nz / 2;
    let dz = grid.dz();
    let gr = LateralGrid::new(
        grid.period_x,
        grid.period_y,
        grid.modes_x,
        grid.modes_y,
        grid.h1 + pad as f64 * dz,
        grid.h2 - pad as f64 * dz,
        nz + 2 * pad + 1,
    )?;
    let m = SlabMedium::homogeneous(grid, eps, mu)?;
    let mr = SlabMedium::homogeneous(&gr, eps, mu)?;
    let round_trip = 2.0 * pad as f64 * dz / m.max_speed();
    if steps as f64 * dt >= round_trip {
        return Err(Error::Parameter {
            name: "t_end",
            reason: format!("{} reaches the reference walls' round trip time {round_trip}", steps as f64 * dt),
        });
    }
    let src = pulse_source(&m, pulse, true, true);
    let srcr = pulse_source(&mr, pulse, true, true);
    let k = TbcKernels::with_model(&m, exterior, generator, dt, steps.max(1))?;
    let mut s = init(&m, &src, dt, Closure::Transparent)?;
    let mut r = init(&mr, &srcr, dt, Closure::Pec)?;
    let amp = max_abs(&s.e);
    let off = pad * m.layout.plane();
    let (mut num, mut den) = (0.0, 0.0);
    let mut last = 0.0f64;
    for _ in 0..steps {
        step_tbc(&mut s, &m, &src, &k, None)?;
        step_pec(&mut r, &mr, &srcr)?;
        last = 0.0;
        for c in 0..3 {
            for (i, v) in s.e[c].iter().enumerate() {
                let d = v - r.e[c][off + i];
                num += d * d;
                den += r.e[c][off + i].powi(2);
                last = last.max(d.abs());
            }
        }
    }
    if den == 0.0 || amp == 0.0 {
        return Err(Error::UndefinedRatio("zero pulse".into()));
    }
    Ok(ReferenceComparison { mismatch: (num / den).sqrt(), residual: last / amp, steps })
}

fn fidelity_run(cfg: &TbcFidelityConfig, n: usize, nz: usize) -> Result<(f64, f64)> {
    let g = LateralGrid::new(1.0, 1.0, n, n, cfg.height, 0.0, nz + 1)?;
    let dt = cfg.cfl * SlabMedium::homogeneous(&g, cfg.pulse.eps, cfg.pulse.mu)?.cfl_limit();
    let steps = (cfg.t_end / dt).round() as usize;
    let c = compare_with_reference(&g, cfg.pulse.eps, cfg.pulse.mu, &cfg.pulse, dt, steps, cfg.exterior, cfg.generator)?;
    Ok((c.mismatch, c.residual))
}

/// Transparent slab against a conductor-walled slab four times as tall,
/// compared before any reflection from the far walls can return.
pub fn check_tbc_fidelity(cfg: &TbcFidelityConfig) -> Result<CheckResult> {
    let (fine, refl) = fidelity_run(cfg, cfg.n, cfg.nz)?;
    let (coarse, _) = fidelity_run(cfg, cfg.n / 2, cfg.nz / 2)?;
    let mut r = CheckResult::new("tbc-fidelity", None, serde_json::to_value(cfg).unwrap_or_default());
    r.measure("relative L2 mismatch", fine, Bound::AtMost { limit: MISMATCH_TOL })
        .measure("residual after transit / incident", refl, Bound::AtMost { limit: REFLECTION_TOL })
        .measure("mismatch (coarse)", coarse, Bound::Report)
        .measure("observed order", (coarse / fine).log2(), Bound::Within { lo: ORDER.0, hi: ORDER.1 });
    Ok(r.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Lateral points along `x` and cells across the slab at the coarsest
    /// stepper level; each level doubles both and halves `dt`.
    pub nx: usize,
    pub nz: usize,
    pub levels: usize,
    /// Steps of the coarsest level; `dt = t_end / steps`.
    pub steps: usize,
    pub t_end: f64,
    /// Oracle cells on its coarse level; the fine level doubles it.
    pub oracle_nz: usize,
    /// Oracle steps per coarsest stepper step on its coarse level.
    pub oracle_refine: usize,
    pub breakpoints: Vec<f64>,
    pub eps: Vec<f64>,
    pub mu: Vec<f64>,
    /// Vertical profile of the current: `cos^6` bump.
    pub current: Bump,
    pub profile: TemporalProfile,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            nx: 16,
            nz: 32,
            levels: 3,
            steps: 64,
            t_end: 1.0,
            oracle_nz: 256,
            oracle_refine: 8,
            breakpoints: vec![0.0, 0.5, 1.0],
            eps: vec![1.0, 2.0],
            mu: vec![1.0, 1.0],
            current: Bump { center: 0.35, radius: 0.2 },
            profile: TemporalProfile::SinSquaredPulse { duration: 0.5 },
        }
    }
}

const CURRENT_Y: f64 = 0.5;

fn oracle_fields(cfg: &OracleConfig, profile: &LayeredProfile<f64>, nz: usize, refine: usize) -> Result<Vec<ModeField<f64>>> {
    let h = profile.h1() - profile.h2();
    let dz = h / nz as f64;
    let mut j = ModeField::zeros(nz);
    for k in 0..=nz {
        let v = cfg.current.value(profile.h2() + k as f64 * dz);
        j.c1[k] = C::new(v, 0.0);
        j.c2[k] = C::new(CURRENT_Y * v, 0.0);
    }
    let steps = cfg.steps * refine;
    let all = mode_response([1.0, 0.0], profile, &j, cfg.profile, cfg.t_end / steps as f64, steps, Generator::Bdf2)?;
    Ok(all.into_iter().step_by(refine).collect())
}

/// Relative space-time L2 error of the tangential `E` of the stepper at
/// one level against the extrapolated oracle.
fn oracle_level_error(cfg: &OracleConfig, profile: &LayeredProfile<f64>, level: usize, oracle: &[ModeField<f64>]) -> Result<f64> {
    let r = 1usize << level;
    let (nx, nz) = (cfg.nx * r, cfg.nz * r);
    let g = LateralGrid::new(TAU, TAU, nx, 4, profile.h1(), profile.h2(), nz + 1)?;
    let m = SlabMedium::layered(&g, profile)?;
    let l = m.layout;
    let j = l.sample(Comp::E, |c, p| {
        let v = cfg.current.value(p[2]) * p[0].cos();
        match c {
            Comp::Ex => v,
            Comp::Ey => CURRENT_Y * v,
            _ => 0.0,
        }
    });
    let src = SourceTerm::zeros(&l).with_current(j, cfg.profile);
    let steps = cfg.steps * r;
    let dt = cfg.t_end / steps as f64;
    let k = TbcKernels::new(&m, Generator::Bdf2, dt, steps)?;
    let mut s = init(&m, &src, dt, Closure::Transparent)?;
    let onz = oracle[0].nz();
    if onz % nz != 0 {
        return Err(Error::GridMismatch(format!("oracle grid of {onz} cells does not contain {nz} cells")));
    }
    let stride = onz / nz;
    let p = l.plane();
    let (mut num, mut den) = (0.0, 0.0);
    for n in 1..=steps {
        step_tbc(&mut s, &m, &src, &k, None)?;
        if n % r != 0 {
            continue;
        }
        let o = &oracle[n / r];
        for (c, comp) in [(0, Comp::Ex), (1, Comp::Ey)] {
            let col = if c == 0 { &o.c1 } else { &o.c2 };
            for kz in 0..=nz {
                let amp = col[kz * stride];
                for jy in 0..l.ny {
                    for ix in 0..l.nx {
                        let x = l.position(comp, kz, jy, ix)[0];
                        let want = (amp * C::new(0.0, x).exp()).re;
                        let d = s.e[c][kz * p + jy * l.nx + ix] - want;
                        num += d * d;
                        den += want * want;
                    }
                }
            }
        }
    }
    Ok((num / den).sqrt())
}

/// Stepper on a layered slab driven by a single-lateral-mode current
/// against the s-domain solver brought back to the time domain by
/// convolution quadrature and extrapolated in `(dz, dt)`.
pub fn check_oracle_agreement(cfg: &OracleConfig) -> Result<CheckResult> {
    let profile = LayeredProfile::new(cfg.breakpoints.clone(), cfg.eps.clone(), cfg.mu.clone())?;
    let coarse = oracle_fields(cfg, &profile, cfg.oracle_nz, cfg.oracle_refine)?;
    let fine = oracle_fields(cfg, &profile, 2 * cfg.oracle_nz, 2 * cfg.oracle_refine)?;
    let oracle: Vec<ModeField<f64>> = coarse.iter().zip(&fine).map(|(c, f)| richardson(c, f)).collect::<Result<_>>()?;
    let mut oracle_defect: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (c, x) in coarse.iter().zip(&oracle) {
        for k in 0..=cfg.oracle_nz {
            oracle_defect = oracle_defect.max((c.c1[k] - x.c1[k]).norm()).max((c.c2[k] - x.c2[k]).norm());
            scale = scale.max(x.c1[k].norm()).max(x.c2[k].norm());
        }
    }
    let errors: Vec<f64> = (0..cfg.levels).map(|lv| oracle_level_error(cfg, &profile, lv, &oracle)).collect::<Result<_>>()?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mut r = CheckResult::new("oracle-agreement", None, serde_json::to_value(cfg).unwrap_or_default());
    r.measure("oracle extrapolation correction / max", oracle_defect / scale, Bound::Report);
    for (i, e) in errors.iter().enumerate() {
        r.measure(&format!("relative L2 error, level {i}"), *e, Bound::Report);
    }
    for (i, o) in orders.iter().enumerate() {
        r.measure(&format!("observed order, levels {i}-{}", i + 1), *o, Bound::Within { lo: ORDER.0, hi: ORDER.1 });
    }
    Ok(r.finish())
}
