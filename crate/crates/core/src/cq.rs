//! Convolution quadrature for the time-domain capacity operators, plus
//! Laplace-transform utilities.
//!
//! Weights come from the generating function `K(delta(zeta)/dt)` evaluated on
//! a circle of radius `lambda` and inverted with an FFT.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{Mat2, Real, C};
use crate::spectral::{LateralGrid, Side};
use crate::symbols::{grid_capacity_matrix, ComplexFrequency, ExteriorMedium};

/// Multistep method whose generating polynomial defines the quadrature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Bdf1,
    #[default]
    Bdf2,
}

impl Generator {
    /// `delta(zeta)`.
    pub fn delta<T: Real>(self, z: C<T>) -> C<T> {
        let one = C::new(T::one(), T::zero());
        match self {
            Generator::Bdf1 => one - z,
            Generator::Bdf2 => C::new(T::c(1.5), T::zero()) - z * T::c(2.0) + z * z * T::c(0.5),
        }
    }
}

/// Which operator the kernel discretizes: the capacity operator itself (`T`)
/// or `s` times it (`C`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    T,
    C,
}

/// Number of contour nodes and the contour radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourParams<T> {
    pub points: usize,
    pub radius: T,
}

impl<T: Real> ContourParams<T> {
    /// Default contour for a horizon of `n` steps: `M = 8(n+1)` nodes and
    /// `lambda = eps^(1/(M+n+1))`, which balances aliasing (`lambda^M`)
    /// against round-off amplification (`eps lambda^-n`).
    pub fn for_horizon(n: usize) -> Self {
        Self::with_oversampling(n, 8)
    }

    pub fn with_oversampling(n: usize, factor: usize) -> Self {
        let m = factor.max(2) * (n + 1);
        let radius = T::epsilon().powf(T::one() / T::c((m + n + 1) as f64));
        ContourParams { points: m, radius }
    }

    /// `M = 2n`, `lambda = eps^(1/(2M))`.
    pub fn classic(n: usize) -> Self {
        let m = (2 * n).max(2);
        ContourParams { points: m, radius: T::epsilon().powf(T::one() / T::c((2 * m) as f64)) }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.radius > T::zero() && self.radius < T::one()) {
            return Err(Error::Parameter { name: "contour_radius", reason: format!("{} not in (0, 1)", self.radius) });
        }
        if self.points < n + 1 {
            return Err(Error::Parameter {
                name: "contour_points",
                reason: format!("{} nodes cannot resolve {} weights", self.points, n + 1),
            });
        }
        Ok(())
    }

    /// Frequencies `delta(lambda zeta_l)/dt` at which the symbol is sampled.
    pub fn nodes(&self, generator: Generator, dt: T) -> Vec<C<T>> {
        let m = self.points;
        (0..m)
            .map(|l| {
                let th = T::c(std::f64::consts::TAU * l as f64 / m as f64);
                let z = C::new(th.cos(), th.sin()) * self.radius;
                generator.delta(z) / dt
            })
            .collect()
    }
}

fn check_dt<T: Real>(dt: T) -> Result<()> {
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(Error::Parameter { name: "dt", reason: format!("{dt} must be positive") });
    }
    Ok(())
}

/// Turns symbol samples on the contour into weights `W_0..W_n`.
fn invert_samples<T: Real>(vals: &mut [C<T>], n: usize, contour: &ContourParams<T>) -> Vec<C<T>> {
    let m = contour.points;
    FftPlanner::new().plan_fft_forward(m).process(vals);
    let inv_m = T::one() / T::c(m as f64);
    let inv_r = T::one() / contour.radius;
    let mut scale = inv_m;
    (0..=n)
        .map(|j| {
            let w = vals[j] * scale;
            scale = scale * inv_r;
            w
        })
        .collect()
}

/// Weights of a scalar symbol.
pub fn cq_weights_scalar<T: Real>(
    symbol: impl Fn(C<T>) -> C<T>,
    dt: T,
    n: usize,
    generator: Generator,
    contour: &ContourParams<T>,
) -> Result<Vec<C<T>>> {
    check_dt(dt)?;
    contour.validate(n)?;
    let mut vals: Vec<C<T>> = contour.nodes(generator, dt).into_iter().map(symbol).collect();
    Ok(invert_samples(&mut vals, n, contour))
}

/// Weights of a 2x2 matrix symbol.
pub fn cq_weights_matrix<T: Real>(
    symbol: impl Fn(ComplexFrequency<T>) -> Result<Mat2<T>>,
    dt: T,
    n: usize,
    generator: Generator,
    contour: &ContourParams<T>,
) -> Result<Vec<Mat2<T>>> {
    check_dt(dt)?;
    contour.validate(n)?;
    let nodes = contour.nodes(generator, dt);
    let mut parts = vec![vec![C::new(T::zero(), T::zero()); nodes.len()]; 4];
    for (l, s) in nodes.iter().enumerate() {
        let m = symbol(ComplexFrequency::from_complex(*s)?)?;
        for (p, v) in parts.iter_mut().zip(m.m.iter().flatten()) {
            p[l] = *v;
        }
    }
    let w: Vec<Vec<C<T>>> = parts.iter_mut().map(|p| invert_samples(p, n, contour)).collect();
    Ok((0..=n).map(|j| Mat2::new(w[0][j], w[1][j], w[2][j], w[3][j])).collect())
}

/// Per-mode convolution weights for a boundary operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CQKernel<T> {
    pub generator: Generator,
    pub dt: T,
    pub horizon: usize,
    pub contour: ContourParams<T>,
    pub kind: OperatorKind,
    /// Mode grid, absent for single-mode kernels.
    pub grid: Option<LateralGrid<T>>,
    pub side: Option<Side>,
    /// `weights[mode][step]`.
    #[serde(skip)]
    pub weights: Vec<Vec<Mat2<T>>>,
}

/// Builds a single-mode kernel from an arbitrary matrix symbol.
pub fn cq_weights<T: Real>(
    symbol: impl Fn(ComplexFrequency<T>) -> Result<Mat2<T>>,
    dt: T,
    n: usize,
    generator: Generator,
    contour: &ContourParams<T>,
    kind: OperatorKind,
) -> Result<CQKernel<T>> {
    let w = cq_weights_matrix(symbol, dt, n, generator, contour)?;
    Ok(CQKernel {
        generator,
        dt,
        horizon: n,
        contour: *contour,
        kind,
        grid: None,
        side: None,
        weights: vec![w],
    })
}

impl<T: Real> CQKernel<T> {
    /// Kernel for the capacity operator of `medium` on every mode of `grid`.
    pub fn capacity(
        grid: &LateralGrid<T>,
        medium: &ExteriorMedium<T>,
        kind: OperatorKind,
        generator: Generator,
        dt: T,
        n: usize,
        contour: &ContourParams<T>,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let weights = (0..grid.n_lateral())
            .into_par_iter()
            .map(|i| {
                cq_weights_matrix(
                    |s| {
                        let m = grid_capacity_matrix(grid, i, s, medium)?;
                        Ok(match kind {
                            OperatorKind::T => m,
                            OperatorKind::C => m.scale(s.value()),
                        })
                    },
                    dt,
                    n,
                    generator,
                    contour,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CQKernel {
            generator,
            dt,
            horizon: n,
            contour: *contour,
            kind,
            grid: Some(*grid),
            side: Some(medium.side),
            weights,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.weights.len()
    }

    /// Largest violation of `W(-xi) = conj(W(xi))` over all modes and steps.
    pub fn conjugate_symmetry_defect(&self) -> T {
        let Some(g) = self.grid else { return T::zero() };
        let mut d = T::zero();
        for i in 0..self.n_modes() {
            let j = g.mirror_index(i);
            for (a, b) in self.weights[i].iter().zip(&self.weights[j]) {
                d = d.max((*a - b.conj()).max_abs());
            }
        }
        d
    }

    /// Writes the documented binary layout: `u64` header length (LE), JSON
    /// header, then `f64` LE values `re, im` of `W[mode][step]` entries
    /// `(0,0), (0,1), (1,0), (1,1)`, mode-major then step.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = serde_json::json!({
            "format": "cq-kernel",
            "version": 1,
            "generator": self.generator,
            "kind": self.kind,
            "dt": self.dt.to_f64_lossy(),
            "horizon": self.horizon,
            "contour_points": self.contour.points,
            "contour_radius": self.contour.radius.to_f64_lossy(),
            "side": self.side,
            "grid": self.grid.map(|g| serde_json::json!({
                "period_x": g.period_x.to_f64_lossy(),
                "period_y": g.period_y.to_f64_lossy(),
                "modes_x": g.modes_x,
                "modes_y": g.modes_y,
            })),
            "n_modes": self.n_modes(),
            "layout": "mode-major, step, entries 00 01 10 11, re im",
        });
        let h = serde_json::to_vec(&header).map_err(|e| Error::Io(e.to_string()))?;
        w.write_all(&(h.len() as u64).to_le_bytes())?;
        w.write_all(&h)?;
        for mode in &self.weights {
            for m in mode {
                for v in m.m.iter().flatten() {
                    w.write_all(&v.re.to_f64_lossy().to_le_bytes())?;
                    w.write_all(&v.im.to_f64_lossy().to_le_bytes())?;
                }
            }
        }
        Ok(())
    }
}

/// Reads a kernel written by [`CQKernel::write_to`] back as `f64`.
pub fn read_kernel(mut r: impl Read) -> Result<CQKernel<f64>> {
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut h = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut h)?;
    let v: serde_json::Value = serde_json::from_slice(&h).map_err(|e| Error::Io(e.to_string()))?;
    let field = |k: &str| v.get(k).cloned().ok_or_else(|| Error::Io(format!("missing header field {k}")));
    let parse = |k: &str| -> Result<serde_json::Value> { field(k) };
    let generator: Generator = serde_json::from_value(parse("generator")?).map_err(|e| Error::Io(e.to_string()))?;
    let kind: OperatorKind = serde_json::from_value(parse("kind")?).map_err(|e| Error::Io(e.to_string()))?;
    let side: Option<Side> = serde_json::from_value(parse("side")?).map_err(|e| Error::Io(e.to_string()))?;
    let num = |k: &str| -> Result<f64> { parse(k)?.as_f64().ok_or_else(|| Error::Io(format!("bad {k}"))) };
    let dt = num("dt")?;
    let horizon = num("horizon")? as usize;
    let points = num("contour_points")? as usize;
    let radius = num("contour_radius")?;
    let n_modes = num("n_modes")? as usize;
    let grid = match parse("grid")? {
        serde_json::Value::Null => None,
        g => {
            let gf = |k: &str| g.get(k).and_then(|x| x.as_f64()).ok_or_else(|| Error::Io(format!("bad grid.{k}")));
            Some(LateralGrid::new(
                gf("period_x")?,
                gf("period_y")?,
                gf("modes_x")? as usize,
                gf("modes_y")? as usize,
                1.0,
                0.0,
                2,
            )?)
        }
    };
    let mut buf = [0u8; 8];
    let mut next = |r: &mut dyn Read| -> Result<f64> {
        r.read_exact(&mut buf)?;
        Ok(f64::from_le_bytes(buf))
    };
    let mut weights = Vec::with_capacity(n_modes);
    for _ in 0..n_modes {
        let mut seq = Vec::with_capacity(horizon + 1);
        for _ in 0..=horizon {
            let mut e = [C::new(0.0, 0.0); 4];
            for x in e.iter_mut() {
                let re = next(&mut r)?;
                let im = next(&mut r)?;
                *x = C::new(re, im);
            }
            seq.push(Mat2::new(e[0], e[1], e[2], e[3]));
        }
        weights.push(seq);
    }
    Ok(CQKernel { generator, dt, horizon, contour: ContourParams { points, radius }, kind, grid, side, weights })
}

/// Uniformly sampled real signal `u^0..u^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSignal<T> {
    pub dt: T,
    pub samples: Vec<T>,
}

impl<T: Real> TimeSignal<T> {
    pub fn from_fn(dt: T, n: usize, f: impl Fn(T) -> T) -> Self {
        TimeSignal { dt, samples: (0..=n).map(|k| f(dt * T::c(k as f64))).collect() }
    }

    pub fn horizon(&self) -> T {
        self.dt * T::c((self.samples.len().max(1) - 1) as f64)
    }
}

/// Per-mode tangential trace history, `samples[step][mode]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSignal<T> {
    pub dt: T,
    pub samples: Vec<Vec<[C<T>; 2]>>,
}

/// `sum_{m=0}^{n} W_{n-m} u^m` for every mode.
pub fn convolve<T: Real>(kernel: &CQKernel<T>, history: &TraceSignal<T>, n: usize) -> Result<Vec<[C<T>; 2]>> {
    if n > kernel.horizon {
        return Err(Error::KernelTooShort { horizon: kernel.horizon, step: n });
    }
    if history.samples.len() < n + 1 {
        return Err(Error::Parameter {
            name: "history",
            reason: format!("{} samples, need {}", history.samples.len(), n + 1),
        });
    }
    let z = C::new(T::zero(), T::zero());
    let mut out = vec![[z, z]; kernel.n_modes()];
    for (mode, o) in out.iter_mut().enumerate() {
        let w = &kernel.weights[mode];
        for m in 0..=n {
            let u = history.samples[m].get(mode).ok_or_else(|| {
                Error::GridMismatch(format!("history has fewer than {} modes", kernel.n_modes()))
            })?;
            let v = w[n - m].apply(*u);
            o[0] = o[0] + v[0];
            o[1] = o[1] + v[1];
        }
    }
    Ok(out)
}

/// Scalar discrete convolution `sum_{m=0}^{n} w_{n-m} u^m`.
pub fn convolve_scalar<T: Real>(w: &[C<T>], u: &[C<T>], n: usize) -> Result<C<T>> {
    if n >= w.len() {
        return Err(Error::KernelTooShort { horizon: w.len().saturating_sub(1), step: n });
    }
    let mut acc = C::new(T::zero(), T::zero());
    for m in 0..=n.min(u.len().saturating_sub(1)) {
        acc = acc + w[n - m] * u[m];
    }
    Ok(acc)
}

fn phi1<T: Real>(z: C<T>) -> C<T> {
    // (1 - e^-z)/z
    if z.norm() < T::c(0.5) {
        let mut term = C::new(T::one(), T::zero());
        let mut sum = term;
        for k in 1..24 {
            term = -term * z / T::c((k + 1) as f64);
            sum = sum + term;
        }
        sum
    } else {
        (C::new(T::one(), T::zero()) - (-z).exp()) / z
    }
}

fn phi2<T: Real>(z: C<T>) -> C<T> {
    // int_0^1 x e^{-z x} dx = (1 - e^-z - z e^-z)/z^2
    if z.norm() < T::c(0.5) {
        let mut fact = C::new(T::one(), T::zero());
        let mut sum = C::new(T::c(0.5), T::zero());
        for k in 1..24 {
            fact = -fact * z / T::c(k as f64);
            sum = sum + fact / T::c((k + 2) as f64);
        }
        sum
    } else {
        let e = (-z).exp();
        (C::new(T::one(), T::zero()) - e - z * e) / (z * z)
    }
}

/// Laplace transform of the piecewise-linear interpolant of `u`, taken as
/// zero beyond the last sample. Exact up to round-off.
pub fn laplace_transform<T: Real>(u: &TimeSignal<T>, s: C<T>) -> C<T> {
    let h = u.dt;
    let z = s * h;
    let p1 = phi1(z) * h;
    let p2 = phi2(z) * h;
    let step = (-z).exp();
    let mut shift = C::new(T::one(), T::zero());
    let mut acc = C::new(T::zero(), T::zero());
    for w in u.samples.windows(2) {
        acc = acc + shift * (p1 * w[0] + p2 * (w[1] - w[0]));
        shift = shift * step;
    }
    acc
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, t);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * t * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (t * q1 - q0) / (t * t - 1.0);
                w[i] = 2.0 / ((1.0 - t * t) * dq * dq);
                break;
            }
        }
        x[i] = t;
    }
    (x, w)
}

/// Both sides of the Laplace-domain Parseval identity for two signals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsevalReport {
    /// `(1/2pi) int u_hat(s1 + i s2) conj(v_hat(s1 + i s2)) ds2`.
    pub frequency_side: [f64; 2],
    /// `int_0^T e^{-2 s1 t} u(t) conj(v(t)) dt` on the interpolants.
    pub time_side: f64,
    pub residual: f64,
    /// Bound on the part of the time integral lost by truncating at `T`.
    pub truncation: f64,
}

/// Evaluates the Parseval identity for the Laplace transform by quadrature.
///
/// The `s2` integral uses the map `s2 = c tan(theta)` with composite
/// Gauss-Legendre panels, the time integral uses Gauss-Legendre per sample
/// interval.
pub fn parseval_residual(u: &TimeSignal<f64>, v: &TimeSignal<f64>, s1: f64) -> Result<ParsevalReport> {
    if u.samples.len() != v.samples.len() || u.dt != v.dt {
        return Err(Error::Parameter { name: "signals", reason: "u and v must share dt and length".into() });
    }
    if !(s1 > 0.0) {
        return Err(Error::InvalidFrequency { s1 });
    }
    let (gx, gw) = gauss_legendre(8);
    let t_end = u.horizon();
    let c = s1 + 1.0 / t_end.max(u.dt);
    let panels = 600;
    let half = std::f64::consts::FRAC_PI_2;
    let mut acc = C::new(0.0, 0.0);
    for p in 0..panels {
        let a = -half + std::f64::consts::PI * p as f64 / panels as f64;
        let b = a + std::f64::consts::PI / panels as f64;
        for (x, w) in gx.iter().zip(&gw) {
            let th = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let s2 = c * th.tan();
            let jac = c / (th.cos() * th.cos());
            let s = C::new(s1, s2);
            let val = laplace_transform(u, s) * laplace_transform(v, s).conj();
            acc += val * (0.5 * (b - a) * w * jac);
        }
    }
    let freq = acc / std::f64::consts::TAU;

    let (tx, tw) = gauss_legendre(4);
    let mut time = 0.0;
    for (k, (ua, va)) in u.samples.windows(2).zip(v.samples.windows(2)).enumerate() {
        let t0 = k as f64 * u.dt;
        for (x, w) in tx.iter().zip(&tw) {
            let r = 0.5 * (1.0 + x);
            let t = t0 + r * u.dt;
            let uu = ua[0] + r * (ua[1] - ua[0]);
            let vv = va[0] + r * (va[1] - va[0]);
            time += 0.5 * u.dt * w * (-2.0 * s1 * t).exp() * uu * vv;
        }
    }
    let last = u.samples.last().copied().unwrap_or(0.0).abs() * v.samples.last().copied().unwrap_or(0.0).abs();
    Ok(ParsevalReport {
        frequency_side: [freq.re, freq.im],
        time_side: time,
        residual: (freq - C::new(time, 0.0)).norm(),
        truncation: last * (-2.0 * s1 * t_end).exp() / (2.0 * s1),
    })
}

/// Minimum over random trace histories of
/// `Re sum_n (I[C u])^n . conj(u^n) dt / sum_n |u^n|^2 dt`,
/// where `I` is the quadrature of `1/s` from the kernel's own generator.
///
/// For the backward Euler generator `I` is `dt` times the running sum.
pub fn passivity_certificate(kernel: &CQKernel<f64>, trials: usize, seed: u64) -> Result<f64> {
    if kernel.kind != OperatorKind::C {
        return Err(Error::Parameter { name: "kernel", reason: "passivity certificate needs an s-times kernel".into() });
    }
    let n = kernel.horizon;
    let integ = cq_weights_scalar(|s| C::new(1.0, 0.0) / s, kernel.dt, n, kernel.generator, &kernel.contour)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let mode = rng.gen_range(0..kernel.n_modes());
        let len = rng.gen_range(2..=(n + 1).max(2));
        let smooth = rng.gen_bool(0.5);
        let mut u = vec![[C::new(0.0, 0.0); 2]; len];
        for k in 1..len {
            let fresh = [
                C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ];
            u[k] = if smooth {
                [u[k - 1][0] * 0.9 + fresh[0] * 0.1, u[k - 1][1] * 0.9 + fresh[1] * 0.1]
            } else {
                fresh
            };
        }
        let w = &kernel.weights[mode];
        let y: Vec<[C<f64>; 2]> = (0..len)
            .map(|k| {
                let mut acc = [C::new(0.0, 0.0); 2];
                for m in 0..=k {
                    let v = w[k - m].apply(u[m]);
                    acc[0] += v[0];
                    acc[1] += v[1];
                }
                acc
            })
            .collect();
        let mut work = 0.0;
        let mut norm = 0.0;
        for k in 0..len {
            let mut big = [C::new(0.0, 0.0); 2];
            for m in 0..=k {
                big[0] += integ[k - m] * y[m][0];
                big[1] += integ[k - m] * y[m][1];
            }
            work += (big[0] * u[k][0].conj() + big[1] * u[k][1].conj()).re * kernel.dt;
            norm += (u[k][0].norm_sqr() + u[k][1].norm_sqr()) * kernel.dt;
        }
        if norm > 0.0 {
            worst = worst.min(work / norm);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(x: f64) -> C<f64> {
        C::new(x, 0.0)
    }

    #[test]
    fn identity_symbol_gives_unit_first_weight() {
        let c = ContourParams::for_horizon(20);
        let w = cq_weights_scalar(|_| one(1.0), 0.1, 20, Generator::Bdf2, &c).unwrap();
        assert!((w[0] - one(1.0)).norm() < 1e-13);
        assert!(w[1..].iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn derivative_symbol_gives_backward_difference() {
        let c = ContourParams::for_horizon(30);
        let dt = 0.05;
        let w = cq_weights_scalar(|s| s, dt, 30, Generator::Bdf1, &c).unwrap();
        assert!((w[0] - one(1.0 / dt)).norm() < 1e-11 / dt);
        assert!((w[1] - one(-1.0 / dt)).norm() < 1e-11 / dt);
        assert!(w[2..].iter().all(|v| v.norm() < 1e-11 / dt));
    }

    #[test]
    fn integrator_weights_are_dt() {
        let c = ContourParams::for_horizon(200);
        let dt = 0.01;
        let w = cq_weights_scalar(|s| one(1.0) / s, dt, 200, Generator::Bdf1, &c).unwrap();
        for v in &w {
            assert!((v - one(dt)).norm() < 1e-12 * dt, "{v}");
        }
        let ones = vec![one(1.0); 201];
        for n in [0usize, 7, 200] {
            let got = convolve_scalar(&w, &ones, n).unwrap();
            assert!((got - one((n + 1) as f64 * dt)).norm() < 1e-12);
        }
    }

    #[test]
    fn bdf2_integrator_weights_match_series() {
        // dt / delta(zeta) = dt (1/(1 - zeta) - 1/(3 - zeta))
        for n in [10usize, 500, 4000] {
            let dt = 1e-2;
            let c = ContourParams::for_horizon(n);
            let w = cq_weights_scalar(|s| one(1.0) / s, dt, n, Generator::Bdf2, &c).unwrap();
            let err = w
                .iter()
                .enumerate()
                .map(|(k, v)| (v - one(dt * (1.0 - 3f64.powi(-(k as i32) - 1)))).norm() / dt)
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "n = {n}: {err}");
        }
    }

    #[test]
    fn rejects_bad_contour() {
        let bad = ContourParams { points: 64, radius: 1.0 };
        assert!(cq_weights_scalar(|s| s, 0.1, 10, Generator::Bdf2, &bad).is_err());
        let short = ContourParams { points: 4, radius: 0.5 };
        assert!(cq_weights_scalar(|s| s, 0.1, 10, Generator::Bdf2, &short).is_err());
    }

    #[test]
    fn convolution_is_causal() {
        let c = ContourParams::for_horizon(40);
        let w = cq_weights_scalar(|s| one(1.0) / (s + 1.0), 0.1, 40, Generator::Bdf2, &c).unwrap();
        let mut u: Vec<C<f64>> = (0..41).map(|k| one((k as f64 * 0.3).sin())).collect();
        let a = convolve_scalar(&w, &u, 17).unwrap();
        for v in u.iter_mut().skip(18) {
            *v = one(1e6);
        }
        assert_eq!(a, convolve_scalar(&w, &u, 17).unwrap());
        assert!(matches!(convolve_scalar(&w, &u, 41), Err(Error::KernelTooShort { .. })));
    }

    #[test]
    fn laplace_transform_of_linear_pieces_is_exact() {
        // u(t) = t on [0, 1]: int_0^1 t e^{-st} dt
        let u = TimeSignal { dt: 0.25, samples: vec![0.0, 0.25, 0.5, 0.75, 1.0] };
        for s in [C::new(0.3, 0.0), C::new(2.0, 5.0)] {
            let e = (-s).exp();
            let exact = (one(1.0) - e - s * e) / (s * s);
            assert!((laplace_transform(&u, s) - exact).norm() < 1e-13);
        }
        let s = C::new(1e-3, 1e-3);
        let series = one(0.5) - s / 3.0 + s * s / 8.0 - s * s * s / 30.0 + s * s * s * s / 144.0;
        assert!((laplace_transform(&u, s) - series).norm() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_binary_roundtrip() {
        let g = LateralGrid::new(1.0, 1.0, 4, 4, 1.0, 0.0, 2).unwrap();
        let m = ExteriorMedium::new(1.0, 2.0, Side::Top).unwrap();
        let c = ContourParams::for_horizon(5);
        let k = CQKernel::capacity(&g, &m, OperatorKind::T, Generator::Bdf2, 0.1, 5, &c).unwrap();
        let mut buf = Vec::new();
        k.write_to(&mut buf).unwrap();
        let back = read_kernel(&buf[..]).unwrap();
        assert_eq!(back.weights, k.weights);
        assert_eq!(back.generator, k.generator);
        assert_eq!(back.side, Some(Side::Top));
        let scale = k.weights.iter().flatten().map(|m| m.max_abs()).fold(0.0, f64::max);
        let d = k.conjugate_symmetry_defect();
        assert!(d < 1e-12 * scale, "{d} {scale}");
    }
}
