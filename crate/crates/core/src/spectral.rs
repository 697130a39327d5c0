//! Lateral Fourier grid on the periodized plane, transforms, and the
//! Fourier-weighted norms and pairings used throughout.
//!
//! Coefficients use the unitary torus convention
//! `u_hat(k) = sqrt(Lx*Ly)/(Nx*Ny) * sum_rho u(rho) exp(-i xi.rho)`, so that
//! `sum_k |u_hat(k)|^2` equals the Riemann sum of `|u|^2` over one period.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{Real, C};

/// Boundary plane of the slab.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Upper plane `z = h1`, outward normal `+z`.
    Top,
    /// Lower plane `z = h2`, outward normal `-z`.
    Bottom,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Top, Side::Bottom];

    /// z-component of the outward unit normal.
    pub fn normal_sign(self) -> f64 {
        match self {
            Side::Top => 1.0,
            Side::Bottom => -1.0,
        }
    }
}

/// Periodic lateral grid plus the vertical extent of the slab.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LateralGrid<T> {
    pub period_x: T,
    pub period_y: T,
    pub modes_x: usize,
    pub modes_y: usize,
    pub h1: T,
    pub h2: T,
    /// Number of z samples, endpoints included.
    pub nz: usize,
}

impl<T: Real> LateralGrid<T> {
    pub fn new(
        period_x: T,
        period_y: T,
        modes_x: usize,
        modes_y: usize,
        h1: T,
        h2: T,
        nz: usize,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        if !(period_x > T::zero() && period_y > T::zero()) {
            return bad("periods must be positive".into());
        }
        for (name, n) in [("modes_x", modes_x), ("modes_y", modes_y)] {
            if n < 4 || n % 2 != 0 {
                return bad(format!("{name} = {n} must be even and at least 4"));
            }
        }
        if !(h1 > h2) || !h1.is_finite() || !h2.is_finite() {
            return bad(format!("need h1 > h2, got h1 = {h1}, h2 = {h2}"));
        }
        if nz < 2 {
            return bad(format!("nz = {nz} must be at least 2"));
        }
        Ok(LateralGrid { period_x, period_y, modes_x, modes_y, h1, h2, nz })
    }

    pub fn n_lateral(&self) -> usize {
        self.modes_x * self.modes_y
    }

    pub fn thickness(&self) -> T {
        self.h1 - self.h2
    }

    pub fn dx(&self) -> T {
        self.period_x / T::c(self.modes_x as f64)
    }

    pub fn dy(&self) -> T {
        self.period_y / T::c(self.modes_y as f64)
    }

    pub fn dz(&self) -> T {
        self.thickness() / T::c((self.nz - 1) as f64)
    }

    pub fn cell_area(&self) -> T {
        self.dx() * self.dy()
    }

    pub fn z(&self, k: usize) -> T {
        self.h2 + self.dz() * T::c(k as f64)
    }

    /// Signed mode number for storage index `i` of an axis with `n` points.
    pub fn signed_mode(i: usize, n: usize) -> i64 {
        let i = i as i64;
        let n = n as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage index for signed mode `k`, or `None` outside `[-n/2, n/2 - 1]`.
    pub fn storage_index(k: i64, n: usize) -> Option<usize> {
        let h = (n / 2) as i64;
        if k < -h || k >= h {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + n as i64) as usize })
    }

    /// Index of the mode `-xi` (the Nyquist mode maps to itself).
    pub fn mirror_index(&self, idx: usize) -> usize {
        let (ix, iy) = (idx % self.modes_x, idx / self.modes_x);
        let mx = (self.modes_x - ix) % self.modes_x;
        let my = (self.modes_y - iy) % self.modes_y;
        my * self.modes_x + mx
    }

    pub fn xi(&self, idx: usize) -> [T; 2] {
        let (ix, iy) = (idx % self.modes_x, idx / self.modes_x);
        let kx = Self::signed_mode(ix, self.modes_x) as f64;
        let ky = Self::signed_mode(iy, self.modes_y) as f64;
        let two_pi = T::PI() + T::PI();
        [two_pi * T::c(kx) / self.period_x, two_pi * T::c(ky) / self.period_y]
    }

    /// Wavenumbers represented by storage index `idx`: one entry, or the
    /// `+/-` aliases when a component sits on the Nyquist line.
    pub fn xi_variants(&self, idx: usize) -> Vec<[T; 2]> {
        let xi = self.xi(idx);
        let (ix, iy) = (idx % self.modes_x, idx / self.modes_x);
        let nyx = ix == self.modes_x / 2;
        let nyy = iy == self.modes_y / 2;
        let mut v = vec![xi];
        if nyx {
            v.push([-xi[0], xi[1]]);
        }
        if nyy {
            let n = v.len();
            for k in 0..n {
                v.push([v[k][0], -xi[1]]);
            }
        }
        v
    }

    pub fn same_lateral(&self, o: &Self) -> bool {
        self.period_x == o.period_x
            && self.period_y == o.period_y
            && self.modes_x == o.modes_x
            && self.modes_y == o.modes_y
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_lateral() {
            return Err(Error::Shape {
                expected: format!("{}x{}", self.modes_y, self.modes_x),
                got: format!("{len} samples"),
            });
        }
        Ok(())
    }
}

/// Cached FFT plans for one lateral grid.
#[derive(Clone)]
pub struct LateralFft<T: Real> {
    grid: LateralGrid<T>,
    fx: Arc<dyn Fft<T>>,
    fy: Arc<dyn Fft<T>>,
    ix: Arc<dyn Fft<T>>,
    iy: Arc<dyn Fft<T>>,
}

impl<T: Real> LateralFft<T> {
    pub fn new(grid: &LateralGrid<T>) -> Self {
        let mut p = FftPlanner::new();
        LateralFft {
            grid: *grid,
            fx: p.plan_fft_forward(grid.modes_x),
            fy: p.plan_fft_forward(grid.modes_y),
            ix: p.plan_fft_inverse(grid.modes_x),
            iy: p.plan_fft_inverse(grid.modes_y),
        }
    }

    pub fn grid(&self) -> &LateralGrid<T> {
        &self.grid
    }

    fn transform(&self, data: &mut [C<T>], inverse: bool) {
        let (nx, ny) = (self.grid.modes_x, self.grid.modes_y);
        let (fx, fy) = if inverse { (&self.ix, &self.iy) } else { (&self.fx, &self.fy) };
        fx.process(data);
        let mut col = vec![C::new(T::zero(), T::zero()); nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                col[ix * ny + iy] = data[iy * nx + ix];
            }
        }
        fy.process(&mut col);
        for iy in 0..ny {
            for ix in 0..nx {
                data[iy * nx + ix] = col[ix * ny + iy];
            }
        }
    }

    /// Samples (row-major, `y` slow) to mode coefficients, in place.
    pub fn forward_in_place(&self, data: &mut [C<T>]) -> Result<()> {
        self.grid.check_len(data.len())?;
        self.transform(data, false);
        let n = T::c(self.grid.n_lateral() as f64);
        let scale = (self.grid.period_x * self.grid.period_y).sqrt() / n;
        data.iter_mut().for_each(|v| *v = *v * scale);
        Ok(())
    }

    pub fn inverse_in_place(&self, data: &mut [C<T>]) -> Result<()> {
        self.grid.check_len(data.len())?;
        self.transform(data, true);
        let scale = T::one() / (self.grid.period_x * self.grid.period_y).sqrt();
        data.iter_mut().for_each(|v| *v = *v * scale);
        Ok(())
    }

    pub fn forward(&self, samples: &[C<T>]) -> Result<Vec<C<T>>> {
        let mut d = samples.to_vec();
        self.forward_in_place(&mut d)?;
        Ok(d)
    }

    pub fn inverse(&self, coeffs: &[C<T>]) -> Result<Vec<C<T>>> {
        let mut d = coeffs.to_vec();
        self.inverse_in_place(&mut d)?;
        Ok(d)
    }

    pub fn forward_real(&self, samples: &[T]) -> Result<Vec<C<T>>> {
        let mut d: Vec<C<T>> = samples.iter().map(|&x| C::new(x, T::zero())).collect();
        self.forward_in_place(&mut d)?;
        Ok(d)
    }
}

pub fn forward_lateral<T: Real>(grid: &LateralGrid<T>, samples: &[C<T>]) -> Result<Vec<C<T>>> {
    LateralFft::new(grid).forward(samples)
}

pub fn inverse_lateral<T: Real>(grid: &LateralGrid<T>, coeffs: &[C<T>]) -> Result<Vec<C<T>>> {
    LateralFft::new(grid).inverse(coeffs)
}

/// Tangential field on one boundary plane, stored per lateral mode.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentialTrace<T> {
    pub side: Side,
    pub grid: LateralGrid<T>,
    pub coeffs: Vec<[C<T>; 2]>,
}

impl<T: Real> TangentialTrace<T> {
    pub fn zeros(grid: &LateralGrid<T>, side: Side) -> Self {
        let z = C::new(T::zero(), T::zero());
        TangentialTrace { side, grid: *grid, coeffs: vec![[z, z]; grid.n_lateral()] }
    }

    pub fn from_coeffs(grid: &LateralGrid<T>, side: Side, coeffs: Vec<[C<T>; 2]>) -> Result<Self> {
        grid.check_len(coeffs.len())?;
        Ok(TangentialTrace { side, grid: *grid, coeffs })
    }

    pub fn from_samples(
        fft: &LateralFft<T>,
        side: Side,
        u1: &[C<T>],
        u2: &[C<T>],
    ) -> Result<Self> {
        let a = fft.forward(u1)?;
        let b = fft.forward(u2)?;
        let coeffs = a.into_iter().zip(b).map(|(x, y)| [x, y]).collect();
        Ok(TangentialTrace { side, grid: *fft.grid(), coeffs })
    }

    pub fn to_samples(&self, fft: &LateralFft<T>) -> Result<[Vec<C<T>>; 2]> {
        let a: Vec<C<T>> = self.coeffs.iter().map(|c| c[0]).collect();
        let b: Vec<C<T>> = self.coeffs.iter().map(|c| c[1]).collect();
        Ok([fft.inverse(&a)?, fft.inverse(&b)?])
    }

    /// Largest violation of `u(-xi) = conj(u(xi))`.
    pub fn hermitian_defect(&self) -> T {
        let mut d = T::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = self.coeffs[self.grid.mirror_index(i)];
            d = d.max((c[0] - m[0].conj()).norm()).max((c[1] - m[1].conj()).norm());
        }
        d
    }

    /// Surface L2 norm squared.
    pub fn l2_sq(&self) -> T {
        self.coeffs.iter().map(|c| c[0].norm_sqr() + c[1].norm_sqr()).sum()
    }
}

/// Which tangential trace space a norm measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    CurlMinusHalf,
    DivMinusHalf,
}

/// Weight applied to each mode of a trace norm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightPreset {
    /// `(1 + |xi|^2)^(-1/2)`.
    #[default]
    StandardWeight,
    /// `(1 + |xi|^2)`, the factor in the printed definition.
    AsPrintedWeight,
}

impl WeightPreset {
    pub fn weight<T: Real>(self, xi: [T; 2]) -> T {
        let p = T::one() + xi[0] * xi[0] + xi[1] * xi[1];
        match self {
            WeightPreset::StandardWeight => T::one() / p.sqrt(),
            WeightPreset::AsPrintedWeight => p,
        }
    }
}

/// Per-mode squared trace norm of the pair `u` at wavenumber `xi`.
pub fn trace_norm_sq_mode<T: Real>(
    u: [C<T>; 2],
    xi: [T; 2],
    kind: TraceKind,
    preset: WeightPreset,
) -> T {
    let xi1 = C::new(xi[0], T::zero());
    let xi2 = C::new(xi[1], T::zero());
    let extra = match kind {
        TraceKind::CurlMinusHalf => xi1 * u[1] - xi2 * u[0],
        TraceKind::DivMinusHalf => xi1 * u[0] + xi2 * u[1],
    };
    preset.weight(xi) * (u[0].norm_sqr() + u[1].norm_sqr() + extra.norm_sqr())
}

pub fn trace_norm_with<T: Real>(trace: &TangentialTrace<T>, kind: TraceKind, preset: WeightPreset) -> T {
    let g = &trace.grid;
    trace
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &u)| trace_norm_sq_mode(u, g.xi(i), kind, preset))
        .sum::<T>()
        .sqrt()
}

/// Trace norm with the standard weight.
pub fn trace_norm<T: Real>(trace: &TangentialTrace<T>, kind: TraceKind) -> T {
    trace_norm_with(trace, kind, WeightPreset::StandardWeight)
}

/// Surface pairing `sum_xi u_hat . conj(v_hat)`.
pub fn duality_pairing<T: Real>(u: &TangentialTrace<T>, v: &TangentialTrace<T>) -> Result<C<T>> {
    if !u.grid.same_lateral(&v.grid) || u.side != v.side {
        return Err(Error::GridMismatch("traces live on different grids or planes".into()));
    }
    let mut acc = C::new(T::zero(), T::zero());
    for (a, b) in u.coeffs.iter().zip(&v.coeffs) {
        acc = acc + a[0] * b[0].conj() + a[1] * b[1].conj();
    }
    Ok(acc)
}

/// Surface pairing evaluated by Riemann sum on physical samples.
pub fn duality_pairing_physical<T: Real>(
    grid: &LateralGrid<T>,
    u: [&[C<T>]; 2],
    v: [&[C<T>]; 2],
) -> Result<C<T>> {
    for s in u.iter().chain(v.iter()) {
        grid.check_len(s.len())?;
    }
    let mut acc = C::new(T::zero(), T::zero());
    for c in 0..2 {
        for (a, b) in u[c].iter().zip(v[c]) {
            acc = acc + *a * b.conj();
        }
    }
    Ok(acc * grid.cell_area())
}

/// Vector field sampled at colocated points `(k, iy, ix)` of the slab grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SlabField<T> {
    pub grid: LateralGrid<T>,
    pub comps: [Vec<C<T>>; 3],
}

impl<T: Real> SlabField<T> {
    pub fn zeros(grid: &LateralGrid<T>) -> Self {
        let n = grid.nz * grid.n_lateral();
        let z = vec![C::new(T::zero(), T::zero()); n];
        SlabField { grid: *grid, comps: [z.clone(), z.clone(), z] }
    }

    /// Builds a field from a function of `(x, y, z)`.
    pub fn from_fn(grid: &LateralGrid<T>, f: impl Fn(T, T, T) -> [C<T>; 3]) -> Self {
        let mut out = Self::zeros(grid);
        let (nx, ny) = (grid.modes_x, grid.modes_y);
        for k in 0..grid.nz {
            let z = grid.z(k);
            for iy in 0..ny {
                let y = grid.dy() * T::c(iy as f64);
                for ix in 0..nx {
                    let x = grid.dx() * T::c(ix as f64);
                    let v = f(x, y, z);
                    let at = (k * ny + iy) * nx + ix;
                    for c in 0..3 {
                        out.comps[c][at] = v[c];
                    }
                }
            }
        }
        out
    }

    pub fn level(&self, c: usize, k: usize) -> &[C<T>] {
        let n = self.grid.n_lateral();
        &self.comps[c][k * n..(k + 1) * n]
    }

    /// Tangential trace on a boundary plane.
    pub fn trace(&self, fft: &LateralFft<T>, side: Side) -> Result<TangentialTrace<T>> {
        let k = match side {
            Side::Top => self.grid.nz - 1,
            Side::Bottom => 0,
        };
        TangentialTrace::from_samples(fft, side, self.level(0, k), self.level(1, k))
    }

    fn check(&self) -> Result<()> {
        let n = self.grid.nz * self.grid.n_lateral();
        for c in &self.comps {
            if c.len() != n {
                return Err(Error::Shape { expected: format!("{n} samples"), got: format!("{}", c.len()) });
            }
        }
        Ok(())
    }
}

fn trapezoid_weight<T: Real>(k: usize, nz: usize) -> T {
    if k == 0 || k + 1 == nz {
        T::c(0.5)
    } else {
        T::one()
    }
}

/// L2 norm over the slab by physical-space quadrature
/// (rectangle rule laterally, trapezoid rule in z).
pub fn l2_norm_slab<T: Real>(field: &SlabField<T>) -> Result<T> {
    field.check()?;
    let g = &field.grid;
    let mut acc = T::zero();
    for k in 0..g.nz {
        let w = trapezoid_weight::<T>(k, g.nz);
        let s: T = (0..3).map(|c| field.level(c, k).iter().map(|v| v.norm_sqr()).sum::<T>()).sum();
        acc = acc + w * s;
    }
    Ok((acc * g.cell_area() * g.dz()).sqrt())
}

/// Per-level mode coefficients of each component.
fn level_spectra<T: Real>(field: &SlabField<T>, fft: &LateralFft<T>) -> Result<[Vec<C<T>>; 3]> {
    let g = &field.grid;
    let n = g.n_lateral();
    let mut out = field.comps.clone();
    for comp in out.iter_mut() {
        for k in 0..g.nz {
            fft.forward_in_place(&mut comp[k * n..(k + 1) * n])?;
        }
    }
    Ok(out)
}

/// L2 norm over the slab evaluated from the mode coefficients.
pub fn l2_norm_slab_spectral<T: Real>(field: &SlabField<T>) -> Result<T> {
    field.check()?;
    let g = &field.grid;
    let spec = level_spectra(field, &LateralFft::new(g))?;
    let n = g.n_lateral();
    let mut acc = T::zero();
    for k in 0..g.nz {
        let w = trapezoid_weight::<T>(k, g.nz);
        let s: T = (0..3).map(|c| spec[c][k * n..(k + 1) * n].iter().map(|v| v.norm_sqr()).sum::<T>()).sum();
        acc = acc + w * s;
    }
    Ok((acc * g.dz()).sqrt())
}

/// Second-order z-derivative of a column sampled at `nz` points.
fn dz_column<T: Real>(col: &[C<T>], dz: T) -> Vec<C<T>> {
    let n = col.len();
    let mut d = vec![C::new(T::zero(), T::zero()); n];
    if n == 2 {
        let v = (col[1] - col[0]) / dz;
        d[0] = v;
        d[1] = v;
        return d;
    }
    let h2 = dz + dz;
    d[0] = (col[0] * T::c(-3.0) + col[1] * T::c(4.0) - col[2]) / h2;
    d[n - 1] = (col[n - 1] * T::c(3.0) - col[n - 2] * T::c(4.0) + col[n - 3]) / h2;
    for k in 1..n - 1 {
        d[k] = (col[k + 1] - col[k - 1]) / h2;
    }
    d
}

/// H(curl) norm from the six-term spectral formula; lateral derivatives are
/// exact per mode and `d/dz` uses second-order differences.
pub fn hcurl_norm<T: Real>(field: &SlabField<T>) -> Result<T> {
    field.check()?;
    let g = &field.grid;
    let spec = level_spectra(field, &LateralFft::new(g))?;
    let n = g.n_lateral();
    let nz = g.nz;
    let i = C::new(T::zero(), T::one());
    let mut acc = vec![T::zero(); nz];
    let mut col = [
        vec![C::new(T::zero(), T::zero()); nz],
        vec![C::new(T::zero(), T::zero()); nz],
        vec![C::new(T::zero(), T::zero()); nz],
    ];
    for m in 0..n {
        let xi = g.xi(m);
        for c in 0..3 {
            for k in 0..nz {
                col[c][k] = spec[c][k * n + m];
            }
        }
        let d1 = dz_column(&col[0], g.dz());
        let d2 = dz_column(&col[1], g.dz());
        for k in 0..nz {
            let (u1, u2, u3) = (col[0][k], col[1][k], col[2][k]);
            let c1 = i * xi[1] * u3 - d2[k];
            let c2 = d1[k] - i * xi[0] * u3;
            let c3 = i * (u2 * xi[0] - u1 * xi[1]);
            acc[k] = acc[k]
                + u1.norm_sqr()
                + u2.norm_sqr()
                + u3.norm_sqr()
                + c1.norm_sqr()
                + c2.norm_sqr()
                + c3.norm_sqr();
        }
    }
    let total: T = (0..nz).map(|k| trapezoid_weight::<T>(k, nz) * acc[k]).sum();
    Ok((total * g.dz()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize, nz: usize) -> LateralGrid<f64> {
        LateralGrid::new(1.3, 0.7, nx, ny, 1.0, 0.0, nz).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(LateralGrid::new(1.0, 1.0, 3, 4, 1.0, 0.0, 4).is_err());
        assert!(LateralGrid::new(1.0, 1.0, 2, 4, 1.0, 0.0, 4).is_err());
        assert!(LateralGrid::new(1.0, 1.0, 4, 4, 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn mode_map_is_bijective() {
        for n in [4usize, 6, 8, 32] {
            let mut seen = vec![false; n];
            for k in -(n as i64 / 2)..(n as i64 / 2) {
                let i = LateralGrid::<f64>::storage_index(k, n).unwrap();
                assert_eq!(LateralGrid::<f64>::signed_mode(i, n), k);
                assert!(!seen[i]);
                seen[i] = true;
            }
            assert!(LateralGrid::<f64>::storage_index(n as i64 / 2, n).is_none());
        }
    }

    #[test]
    fn constant_field_lands_in_zero_mode() {
        let g = grid(8, 6, 2);
        let c = forward_lateral(&g, &vec![C::new(1.0, 0.0); 48]).unwrap();
        let area: f64 = 1.3 * 0.7;
        assert!((c[0] - C::new(area.sqrt(), 0.0)).norm() < 1e-14);
        assert!(c[1..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn pure_mode_lands_in_one_coefficient() {
        let g = grid(8, 8, 2);
        let s: Vec<C<f64>> = (0..64)
            .map(|i| {
                let x = (i % 8) as f64 * g.dx();
                C::new(0.0, 2.0 * std::f64::consts::PI * x / g.period_x).exp()
            })
            .collect();
        let c = forward_lateral(&g, &s).unwrap();
        for (i, v) in c.iter().enumerate() {
            if i == 1 {
                assert!(v.norm() > 0.5);
            } else {
                assert!(v.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let g = grid(8, 8, 2);
        assert!(matches!(forward_lateral(&g, &[C::new(0.0, 0.0); 10]), Err(Error::Shape { .. })));
    }

    #[test]
    fn single_mode_trace_norms() {
        let g = LateralGrid::new(2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI, 4, 4, 1.0, 0.0, 2)
            .unwrap();
        let mut t = TangentialTrace::zeros(&g, Side::Top);
        t.coeffs[0] = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
        assert!((trace_norm(&t, TraceKind::CurlMinusHalf) - 1.0).abs() < 1e-15);
        assert!((trace_norm(&t, TraceKind::DivMinusHalf) - 1.0).abs() < 1e-15);
        let mut t = TangentialTrace::zeros(&g, Side::Top);
        t.coeffs[1] = [C::new(0.0, 0.0), C::new(1.0, 0.0)];
        let expect = 2f64.powf(0.25);
        assert!((trace_norm(&t, TraceKind::CurlMinusHalf) - expect).abs() < 1e-14);
    }

    #[test]
    fn pairing_of_unit_mode_is_one() {
        let g = grid(4, 4, 2);
        let mut u = TangentialTrace::zeros(&g, Side::Bottom);
        u.coeffs[5] = [C::new(0.6, 0.0), C::new(0.0, 0.8)];
        assert!((duality_pairing(&u, &u).unwrap() - C::new(1.0, 0.0)).norm() < 1e-15);
        let v = TangentialTrace::zeros(&g, Side::Bottom);
        assert_eq!(duality_pairing(&u, &v).unwrap(), C::new(0.0, 0.0));
        let w = TangentialTrace::zeros(&g, Side::Top);
        assert!(duality_pairing(&u, &w).is_err());
    }

    #[test]
    fn constant_field_norms() {
        let g = grid(8, 4, 9);
        let f = SlabField::from_fn(&g, |_, _, _| [C::new(2.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0)]);
        let vol: f64 = 1.3 * 0.7 * 1.0;
        let expect = (5.0 * vol).sqrt();
        assert!((l2_norm_slab(&f).unwrap() - expect).abs() < 1e-13);
        assert!((hcurl_norm(&f).unwrap() - expect).abs() < 1e-13);
        assert_eq!(l2_norm_slab(&SlabField::zeros(&g)).unwrap(), 0.0);
    }

    #[test]
    fn sine_field_hcurl_matches_direct_quadrature() {
        let g = grid(16, 16, 5);
        let ky = 2.0 * std::f64::consts::PI / g.period_y;
        let f = SlabField::from_fn(&g, |_, y, _| {
            [C::new((ky * y).sin(), 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]
        });
        // curl u = (0, 0, -ky cos(ky y)); both integrals by the same Riemann sum
        let mut sum_u = 0.0;
        let mut sum_c = 0.0;
        for iy in 0..16 {
            let y = iy as f64 * g.dy();
            sum_u += 16.0 * (ky * y).sin().powi(2);
            sum_c += 16.0 * (ky * (ky * y).cos()).powi(2);
        }
        let expect = ((sum_u + sum_c) * g.cell_area() * g.thickness()).sqrt();
        assert!((hcurl_norm(&f).unwrap() - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn gradient_field_is_curl_free() {
        let g = grid(16, 12, 7);
        let (a, b) = (2.0 * std::f64::consts::PI / g.period_x, 2.0 * std::f64::consts::PI / g.period_y);
        // phi = sin(a x) cos(2 b y) + 0.3 cos(3 a x + b y)
        let f = SlabField::from_fn(&g, |x, y, _| {
            let gx = a * (a * x).cos() * (2.0 * b * y).cos() - 0.9 * a * (3.0 * a * x + b * y).sin();
            let gy = -2.0 * b * (a * x).sin() * (2.0 * b * y).sin() - 0.3 * b * (3.0 * a * x + b * y).sin();
            [C::new(gx, 0.0), C::new(gy, 0.0), C::new(0.0, 0.0)]
        });
        let l2 = l2_norm_slab(&f).unwrap();
        assert!((hcurl_norm(&f).unwrap() - l2).abs() < 1e-10 * l2);
    }
}
