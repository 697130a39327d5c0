use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::TbcKernels;
use super::layout::{Comp, Triple, YeeLayout};
use super::medium::SlabMedium;
use super::ops::{curl_e, curl_e_level, curl_h_level};
use super::source::SourceTerm;
use crate::error::{Error, Result};
use crate::num::{Mat2, Real, C};
use crate::sdomain::Closure;
use crate::spectral::{LateralFft, Side};

/// Per-mode tangential `E` history on one plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHistory<T> {
    /// `per_mode[mode][step]`, storage-order lateral DFT of `(Ex, Ey)`.
    pub per_mode: Vec<Vec<[C<T>; 2]>>,
    /// `sum_{j >= 1} W_j u^{n-j}` for the current step `n`.
    pub tail: Vec<[C<T>; 2]>,
}

impl<T: Real> TraceHistory<T> {
    pub fn len(&self) -> usize {
        self.per_mode.first().map_or(0, |v| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coefficients of all modes at one step.
    pub fn at_step(&self, n: usize) -> Vec<[C<T>; 2]> {
        self.per_mode.iter().map(|v| v[n]).collect()
    }
}

/// Leapfrog state at step `n`: `E^n`, `H^(n+1/2)` and `H^(n-1/2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldState<T> {
    pub step: usize,
    pub dt: T,
    pub closure: Closure,
    pub e: Triple<T>,
    pub h: Triple<T>,
    pub h_prev: Triple<T>,
    /// Top and bottom trace histories; empty under the PEC closure, where
    /// the traces vanish identically.
    pub traces: Vec<TraceHistory<T>>,
    /// `sum_n 2 dt sum_Gamma g . E_bar dA`, the energy that left through the planes.
    pub boundary_work: T,
    /// `sum_n 2 dt sum J . E_bar dV`.
    pub source_work: T,
    /// `sum_n dt f((n + 1/2) dt)`.
    pub current_integral: T,
}

impl<T: Real> FieldState<T> {
    pub fn time(&self) -> T {
        self.dt * T::c(self.step as f64)
    }

    pub fn trace(&self, side: Side) -> Option<&TraceHistory<T>> {
        self.traces.get(side_index(side))
    }

    /// `H` at integer time, `(H^(n+1/2) + H^(n-1/2)) / 2`.
    pub fn h_mean(&self) -> Triple<T> {
        let mut out = self.h.clone();
        for (o, p) in out.iter_mut().zip(&self.h_prev) {
            for (a, b) in o.iter_mut().zip(p) {
                *a = (*a + *b) * T::c(0.5);
            }
        }
        out
    }
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Top => 0,
        Side::Bottom => 1,
    }
}

fn plane_level<T: Real>(l: &YeeLayout<T>, side: Side) -> usize {
    match side {
        Side::Top => l.nc,
        Side::Bottom => 0,
    }
}

/// Lateral DFT of the tangential `E` on a plane.
fn plane_coeffs<T: Real>(fft: &LateralFft<T>, l: &YeeLayout<T>, e: &Triple<T>, side: Side) -> Result<Vec<[C<T>; 2]>> {
    let p = l.plane();
    let k = plane_level(l, side);
    let ux = fft.forward_real(&e[0][k * p..(k + 1) * p])?;
    let uy = fft.forward_real(&e[1][k * p..(k + 1) * p])?;
    Ok(ux.into_iter().zip(uy).map(|(a, b)| [a, b]).collect())
}

/// Initial state: `E^0 = E0`, `H^(1/2) = H0 - dt/2 mu^-1 curl E0` and
/// `H^(-1/2) = H0 + dt/2 mu^-1 curl E0`.
pub fn init<T: Real>(medium: &SlabMedium<T>, source: &SourceTerm<T>, dt: T, closure: Closure) -> Result<FieldState<T>> {
    let l = &medium.layout;
    medium.check_dt(dt)?;
    source.check(l)?;
    if closure == Closure::Transparent {
        source.check_h1()?;
    }
    let p = l.plane();
    if closure == Closure::Pec {
        for c in 0..2 {
            for k in [0, l.nc] {
                if source.e0[c][k * p..(k + 1) * p].iter().any(|v| *v != T::zero()) {
                    return Err(Error::Support(format!("E0.{} is tangential on a PEC plane", Comp::E[c].name())));
                }
            }
        }
    }
    let ce = curl_e(l, &source.e0);
    let mut h = source.h0.clone();
    let mut h_prev = source.h0.clone();
    let half = dt * T::c(0.5);
    for c in 0..3 {
        for i in 0..h[c].len() {
            let d = half * ce[c][i] / medium.mu[c][i];
            h[c][i] = h[c][i] - d;
            h_prev[c][i] = h_prev[c][i] + d;
        }
    }
    let traces = if closure == Closure::Transparent {
        let fft = LateralFft::new(&l.grid);
        Side::BOTH
            .iter()
            .map(|side| {
                let u0 = plane_coeffs(&fft, l, &source.e0, *side)?;
                Ok(TraceHistory {
                    tail: vec![[C::new(T::zero(), T::zero()); 2]; u0.len()],
                    per_mode: u0.into_iter().map(|u| vec![u]).collect(),
                })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(FieldState {
        step: 0,
        dt,
        closure,
        e: source.e0.clone(),
        h,
        h_prev,
        traces,
        boundary_work: T::zero(),
        source_work: T::zero(),
        current_integral: T::zero(),
    })
}

/// Interior `E` update from `H^(n+1/2)` and `J^(n+1/2)`; returns the
/// source work increment `2 dt sum J . E_bar dV` over the updated entries.
fn advance_e_interior<T: Real>(state: &mut FieldState<T>, medium: &SlabMedium<T>, source: &SourceTerm<T>, f: T) -> T {
    let l = medium.layout;
    let p = l.plane();
    let dt = state.dt;
    let h = &state.h;
    let mut work = T::zero();
    for c in 0..3 {
        let eps = &medium.eps[c];
        let j = &source.current[c];
        let comp = Comp::E[c];
        let w: T = state.e[c]
            .par_chunks_mut(p)
            .enumerate()
            .map(|(k, lvl)| {
                if c < 2 && (k == 0 || k == l.nc) {
                    return T::zero();
                }
                let mut curl = vec![T::zero(); p];
                curl_h_level(&l, h, c, k, &mut curl);
                let off = k * p;
                let mut acc = T::zero();
                for a in 0..p {
                    let jj = j[off + a] * f;
                    let old = lvl[a];
                    lvl[a] = old + dt * (curl[a] - jj) / eps[off + a];
                    acc = acc + jj * (old + lvl[a]);
                }
                acc * l.weight(comp, k)
            })
            .sum();
        work = work + w;
    }
    work * dt * l.cell_volume()
}

/// `H^(n+3/2) = H^(n+1/2) - dt mu^-1 curl E^(n+1)`.
fn advance_h<T: Real>(state: &mut FieldState<T>, medium: &SlabMedium<T>) {
    let l = medium.layout;
    let p = l.plane();
    let dt = state.dt;
    std::mem::swap(&mut state.h, &mut state.h_prev);
    let e = &state.e;
    for c in 0..3 {
        let mu = &medium.mu[c];
        let prev = &state.h_prev[c];
        state.h[c].par_chunks_mut(p).enumerate().for_each(|(k, lvl)| {
            let mut curl = vec![T::zero(); p];
            curl_e_level(&l, e, c, k, &mut curl);
            let off = k * p;
            for a in 0..p {
                lvl[a] = prev[off + a] - dt * curl[a] / mu[off + a];
            }
        });
    }
}

fn check_finite<T: Real>(state: &FieldState<T>, l: &YeeLayout<T>) -> Result<()> {
    let p = l.plane();
    for (name, f) in [("E", &state.e), ("H", &state.h)] {
        for comp in f {
            let mid = comp.len() / p / 2;
            if comp[mid * p..(mid + 1) * p].iter().any(|v| !v.is_finite()) || comp.iter().step_by(p / 4 + 1).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { field: name, step: state.step });
            }
        }
    }
    Ok(())
}

/// One leapfrog step with the PEC closure.
pub fn step_pec<T: Real>(state: &mut FieldState<T>, medium: &SlabMedium<T>, source: &SourceTerm<T>) -> Result<()> {
    if state.closure != Closure::Pec {
        return Err(Error::Parameter { name: "closure", reason: "step_pec needs a PEC state".into() });
    }
    let tm = (T::c(state.step as f64) + T::c(0.5)) * state.dt;
    let f = source.factor(tm);
    let w = advance_e_interior(state, medium, source, f);
    state.source_work = state.source_work + w;
    state.current_integral = state.current_integral + f * state.dt;
    advance_h(state, medium);
    state.step += 1;
    check_finite(state, &medium.layout)
}

/// Tangential `H` contribution to the half-cell balance on a plane:
/// `R = (dz/2) (d_y Hz, -d_x Hz) + (Hy, -Hx)` at the top and
/// `(dz/2) (d_y Hz, -d_x Hz) - (Hy, -Hx)` at the bottom, evaluated at the
/// `Ex` and `Ey` positions of the plane.
pub fn boundary_drive_side<T: Real>(l: &YeeLayout<T>, h: &Triple<T>, side: Side) -> [Vec<T>; 2] {
    let p = l.plane();
    let (nx, ny) = (l.nx, l.ny);
    let k = plane_level(l, side);
    let kh = match side {
        Side::Top => l.nc - 1,
        Side::Bottom => 0,
    };
    let sgn = T::c(side.normal_sign());
    let hz = &h[2][k * p..(k + 1) * p];
    let hx = &h[0][kh * p..(kh + 1) * p];
    let hy = &h[1][kh * p..(kh + 1) * p];
    let half = l.dz * T::c(0.5);
    let (rx, ry) = (T::one() / l.dx, T::one() / l.dy);
    let mut out = [vec![T::zero(); p], vec![T::zero(); p]];
    for j in 0..ny {
        let jp = if j == 0 { ny - 1 } else { j - 1 };
        for i in 0..nx {
            let ip = if i == 0 { nx - 1 } else { i - 1 };
            let a = j * nx + i;
            out[0][a] = half * (hz[a] - hz[jp * nx + i]) * ry + sgn * hy[a];
            out[1][a] = -half * (hz[a] - hz[j * nx + ip]) * rx - sgn * hx[a];
        }
    }
    out
}

/// Boundary forcing taken from a companion run, indexed like
/// [`Side::BOTH`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDrive<T> {
    pub planes: [[Vec<T>; 2]; 2],
}

/// The `H` part of the half-cell balance of `state` on both planes. Feeding
/// it from a PEC run on `(E0, H0)` into a transparent run on `(0, 0, J)`
/// reproduces the transparent run on `(E0, H0, J)`.
pub fn boundary_drive<T: Real>(state: &FieldState<T>, medium: &SlabMedium<T>) -> BoundaryDrive<T> {
    let l = medium.layout;
    BoundaryDrive { planes: Side::BOTH.map(|s| boundary_drive_side(&l, &state.h, s)) }
}

/// One leapfrog step with the transparent closure. Tangential `E` on each
/// plane solves the half-cell balance
/// `a (u^(n+1) - u^n) = R - (g^(n+1) + g^n)/2` per lateral mode, where
/// `a = eps dz / (2 dt)` and `g = W * u` is the convolution-quadrature
/// approximation of the exterior tangential `H`.
pub fn step_tbc<T: Real>(
    state: &mut FieldState<T>,
    medium: &SlabMedium<T>,
    source: &SourceTerm<T>,
    kernels: &TbcKernels<T>,
    drive: Option<&BoundaryDrive<T>>,
) -> Result<()> {
    if state.closure != Closure::Transparent || state.traces.len() != 2 {
        return Err(Error::Parameter { name: "closure", reason: "step_tbc needs a transparent state".into() });
    }
    kernels.check(medium, state.dt)?;
    let n = state.step;
    if n + 1 > kernels.top.horizon.min(kernels.bottom.horizon) {
        return Err(Error::KernelTooShort { horizon: kernels.top.horizon.min(kernels.bottom.horizon), step: n + 1 });
    }
    let l = medium.layout;
    let p = l.plane();
    let dt = state.dt;
    let tm = (T::c(n as f64) + T::c(0.5)) * dt;
    let f = source.factor(tm);
    let half = l.dz * T::c(0.5);

    // balance terms use H^(n+1/2) before it is overwritten
    let mut rhs_real = Vec::with_capacity(2);
    for (si, side) in Side::BOTH.iter().enumerate() {
        let k = plane_level(&l, *side);
        let mut r = boundary_drive_side(&l, &state.h, *side);
        for c in 0..2 {
            for a in 0..p {
                r[c][a] = r[c][a] - half * source.current[c][k * p + a] * f;
                if let Some(d) = drive {
                    r[c][a] = r[c][a] + d.planes[si][c][a];
                }
            }
        }
        rhs_real.push(r);
    }

    let mut w = advance_e_interior(state, medium, source, f);

    let mut boundary = T::zero();
    for (si, side) in Side::BOTH.iter().enumerate() {
        let kern = kernels.side(*side);
        let k = plane_level(&l, *side);
        let eps = medium.exterior(*side).eps;
        let a = eps * l.dz / (T::c(2.0) * dt);
        let r = &rhs_real[si];
        let rx = kernels.fft.forward_real(&r[0])?;
        let ry = kernels.fft.forward_real(&r[1])?;
        let hist = &state.traces[si];
        let solved: Vec<([C<T>; 2], [C<T>; 2])> = (0..p)
            .into_par_iter()
            .map(|m| {
                let h = &hist.per_mode[m];
                let un = h[n];
                let w0 = kern.weight(m, 0);
                let w0u = w0.apply(un);
                let g_n = [w0u[0] + hist.tail[m][0], w0u[1] + hist.tail[m][1]];
                let tail = kern.convolve_tail(m, h, 1, 0);
                let rhs = [
                    un[0] * a + rx[m] - (g_n[0] + tail[0]) * T::c(0.5),
                    un[1] * a + ry[m] - (g_n[1] + tail[1]) * T::c(0.5),
                ];
                let sys = Mat2::scalar(C::new(a, T::zero())) + w0.scale(C::new(T::c(0.5), T::zero()));
                let inv = sys.inverse().expect("a > 0 and Re W0 >= 0 keep the system regular");
                (inv.apply(rhs), tail)
            })
            .collect();
        let mut ux: Vec<C<T>> = solved.iter().map(|s| s.0[0]).collect();
        let mut uy: Vec<C<T>> = solved.iter().map(|s| s.0[1]).collect();
        kernels.fft.inverse_in_place(&mut ux)?;
        kernels.fft.inverse_in_place(&mut uy)?;
        let mut work = T::zero();
        for aidx in 0..p {
            let idx = k * p + aidx;
            for (c, u) in [(0, &ux), (1, &uy)] {
                let new = u[aidx].re;
                if !new.is_finite() {
                    return Err(Error::NonFinite { field: "E trace", step: n + 1 });
                }
                let old = state.e[c][idx];
                let g = r[c][aidx] - a * (new - old);
                work = work + g * (old + new);
                w = w + source.current[c][idx] * f * (old + new) * half * l.dx * l.dy * dt;
                state.e[c][idx] = new;
            }
        }
        boundary = boundary + work * dt * l.dx * l.dy;
        let u_new = plane_coeffs(&kernels.fft, &l, &state.e, *side)?;
        let hist = &mut state.traces[si];
        for (m, u) in u_new.into_iter().enumerate() {
            hist.per_mode[m].push(u);
            hist.tail[m] = solved[m].1;
        }
    }
    state.source_work = state.source_work + w;
    state.boundary_work = state.boundary_work + boundary;
    state.current_integral = state.current_integral + f * dt;
    advance_h(state, medium);
    state.step += 1;
    check_finite(state, &l)
}
