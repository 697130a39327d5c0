use std::io::Write;

use serde::{Deserialize, Serialize};

use super::layout::{Comp, Triple};
use super::medium::SlabMedium;
use super::ops::{curl_e, curl_h, divergence, weighted_dot, weighted_sq};
use super::source::SourceTerm;
use super::state::FieldState;
use crate::error::Result;
use crate::num::Real;

/// Energy functionals and norms at one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEntry {
    pub step: usize,
    pub t: f64,
    /// `||eps^1/2 E||^2 + ||mu^1/2 H||^2` with `H` averaged to integer time.
    pub e1: f64,
    /// Same with first time differences; absent at step 0.
    pub e2: Option<f64>,
    /// Same with second time differences; absent before step 2.
    pub e3: Option<f64>,
    /// `||eps^1/2 E^n||^2 + (mu H^(n+1/2), H^(n-1/2))`, conserved exactly by
    /// the PEC scheme.
    pub scheme: f64,
    pub l2_e: f64,
    pub l2_h: f64,
    pub hcurl_e: f64,
    pub hcurl_h: f64,
    pub boundary_work: f64,
}

/// Energies without time differences.
pub fn energies<T: Real>(state: &FieldState<T>, medium: &SlabMedium<T>) -> EnergyEntry {
    let l = &medium.layout;
    let hm = state.h_mean();
    let ee = weighted_sq(l, Comp::E, &state.e, Some(&medium.eps));
    let eh = weighted_sq(l, Comp::H, &hm, Some(&medium.mu));
    let scheme = ee + weighted_dot(l, Comp::H, &state.h, &state.h_prev, &medium.mu);
    let l2e = weighted_sq(l, Comp::E, &state.e, None);
    let l2h = weighted_sq(l, Comp::H, &hm, None);
    let ce = weighted_sq(l, Comp::H, &curl_e(l, &state.e), None);
    let ch = weighted_sq(l, Comp::E, &curl_h(l, &hm), None);
    EnergyEntry {
        step: state.step,
        t: state.time().to_f64_lossy(),
        e1: (ee + eh).to_f64_lossy(),
        e2: None,
        e3: None,
        scheme: scheme.to_f64_lossy(),
        l2_e: l2e.sqrt().to_f64_lossy(),
        l2_h: l2h.sqrt().to_f64_lossy(),
        hcurl_e: (l2e + ce).sqrt().to_f64_lossy(),
        hcurl_h: (l2h + ch).sqrt().to_f64_lossy(),
        boundary_work: state.boundary_work.to_f64_lossy(),
    }
}

fn combo<T: Real>(terms: &[(&Triple<T>, T)]) -> Triple<T> {
    let mut out = terms[0].0.clone();
    for (o, c) in out.iter_mut().enumerate() {
        for (i, v) in c.iter_mut().enumerate() {
            *v = terms.iter().map(|(f, w)| f[o][i] * *w).sum();
        }
    }
    out
}

/// Keeps the previous fields needed for `e2` and `e3`.
#[derive(Clone, Debug, Default)]
pub struct EnergyMonitor<T> {
    e_prev: Vec<Triple<T>>,
    h_older: Option<Triple<T>>,
}

impl<T: Real> EnergyMonitor<T> {
    pub fn new() -> Self {
        EnergyMonitor { e_prev: Vec::new(), h_older: None }
    }

    /// Entry for `state`, which must be one step after the previous call.
    pub fn observe(&mut self, state: &FieldState<T>, medium: &SlabMedium<T>) -> EnergyEntry {
        let l = &medium.layout;
        let mut entry = energies(state, medium);
        let dt = state.dt;
        let r1 = T::one() / dt;
        let r2 = r1 * r1;
        let dh = combo(&[(&state.h, r1), (&state.h_prev, -r1)]);
        let dh_sq = weighted_sq(l, Comp::H, &dh, Some(&medium.mu));
        if let Some(e1) = self.e_prev.last() {
            let de = combo(&[(&state.e, r1), (e1, -r1)]);
            entry.e2 = Some((weighted_sq(l, Comp::E, &de, Some(&medium.eps)) + dh_sq).to_f64_lossy());
        }
        if let (Some(ho), 2) = (&self.h_older, self.e_prev.len()) {
            let dde = combo(&[(&state.e, r2), (&self.e_prev[1], -r2 * T::c(2.0)), (&self.e_prev[0], r2)]);
            let ddh = combo(&[(&state.h, r2), (&state.h_prev, -r2 * T::c(2.0)), (ho, r2)]);
            entry.e3 = Some(
                (weighted_sq(l, Comp::E, &dde, Some(&medium.eps)) + weighted_sq(l, Comp::H, &ddh, Some(&medium.mu)))
                    .to_f64_lossy(),
            );
        }
        self.e_prev.push(state.e.clone());
        if self.e_prev.len() > 2 {
            self.e_prev.remove(0);
        }
        self.h_older = Some(state.h_prev.clone());
        entry
    }
}

/// Per-step rows of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub rows: Vec<EnergyEntry>,
}

impl EnergyReport {
    pub fn push(&mut self, e: EnergyEntry) {
        self.rows.push(e);
    }

    pub fn max_e1(&self) -> f64 {
        self.rows.iter().map(|r| r.e1).fold(0.0, f64::max)
    }

    /// `max_n |e1(n) - e1(0)| / e1(0)`.
    pub fn e1_drift(&self) -> f64 {
        relative_drift(self.rows.iter().map(|r| r.e1))
    }

    pub fn scheme_drift(&self) -> f64 {
        relative_drift(self.rows.iter().map(|r| r.scheme))
    }

    /// CSV with a leading `# config_hash=...` comment line. Numbers use the
    /// shortest representation that round-trips.
    pub fn write_csv(&self, mut w: impl Write, config_hash: &str) -> Result<()> {
        writeln!(w, "# config_hash={config_hash}")?;
        writeln!(w, "step,t,e1,e2,e3,l2_E,l2_H,hcurl_E,hcurl_H,boundary_work")?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.step,
                r.t,
                r.e1,
                opt(r.e2),
                opt(r.e3),
                r.l2_e,
                r.l2_h,
                r.hcurl_e,
                r.hcurl_h,
                r.boundary_work
            )?;
        }
        Ok(())
    }
}

fn relative_drift(mut it: impl Iterator<Item = f64>) -> f64 {
    let Some(first) = it.next() else { return 0.0 };
    let d = it.fold(0.0f64, |m, v| m.max((v - first).abs()));
    if first == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d / first.abs()
    }
}

/// `max |div(eps E^n) + div J_acc| / scale` over the interior nodes, where
/// `J_acc = int_0^t J` and `scale = max|eps E| / h_min`. Zero when the
/// state and source vanish.
pub fn divergence_residual<T: Real>(state: &FieldState<T>, medium: &SlabMedium<T>, source: &SourceTerm<T>) -> T {
    let l = &medium.layout;
    let d = divergence(l, &state.e, &medium.eps);
    let ones = l.zeros(Comp::E).map(|v| v.into_iter().map(|_| T::one()).collect());
    let dj = divergence(l, &source.current, &ones);
    let mut worst = T::zero();
    for (a, b) in d.iter().zip(&dj) {
        worst = worst.max((*a + *b * state.current_integral).abs());
    }
    let mut scale = T::zero();
    for c in 0..3 {
        for (v, e) in state.e[c].iter().zip(&medium.eps[c]) {
            scale = scale.max((*v * *e).abs());
        }
    }
    let hmin = l.dx.min(l.dy).min(l.dz);
    if scale == T::zero() {
        return worst;
    }
    worst * hmin / scale
}
