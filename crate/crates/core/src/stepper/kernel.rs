use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::medium::SlabMedium;
use crate::cq::{cq_weights_scalar, CQKernel, ContourParams, Generator, OperatorKind};
use crate::error::{Error, Result};
use crate::num::{csqrt, Mat2, Real, C};
use crate::spectral::{LateralFft, LateralGrid, Side};
use crate::symbols::ExteriorMedium;

/// Capacity-operator convolution weights matched to the lateral Yee
/// differences.
///
/// On the staggered lateral grid the exterior symbol is
/// `W(s) = eps s / beta I + N / (mu s beta)` with
/// `N = [[|d2|^2, -conj(d2) d1], [-conj(d1) d2, |d1|^2]]`,
/// `d = (exp(i xi h) - 1)/h` the forward-difference symbols and
/// `beta^2 = eps mu s^2 + |d1|^2 + |d2|^2`. The two scalar factors depend on
/// the mode only through `|d|^2`, so their weights are computed once per
/// distinct value.
///
/// With [`ExteriorModel::MatchedGrid`] the symbol is multiplied by
/// `sqrt(1 + beta^2 dz^2 / 4)`, which turns it into the exact half-cell
/// closure of a semi-infinite continuation of the same staggered grid; the
/// factor tends to 1 as `dz -> 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryKernel<T> {
    pub side: Side,
    pub model: ExteriorModel,
    pub medium: ExteriorMedium<T>,
    pub generator: Generator,
    pub dt: T,
    pub horizon: usize,
    pub contour: ContourParams<T>,
    pub grid: LateralGrid<T>,
    group: Vec<usize>,
    lateral: Vec<Mat2<T>>,
    group_q: Vec<T>,
    #[serde(skip)]
    a: Vec<Vec<T>>,
    #[serde(skip)]
    b: Vec<Vec<T>>,
}

/// How the exterior is represented in the boundary kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExteriorModel {
    /// Capacity symbol of the continuous exterior, lateral differences only.
    Continuous,
    /// Exact closure for the exterior discretized on the slab's own grid.
    #[default]
    MatchedGrid,
}

fn difference_symbol<T: Real>(m: usize, n: usize, period: T) -> C<T> {
    let h = period / T::c(n as f64);
    let th = T::c(std::f64::consts::TAU * m as f64 / n as f64);
    C::new(th.cos() - T::one(), th.sin()) / h
}

/// `N` for storage index `idx`.
pub fn lateral_matrix<T: Real>(grid: &LateralGrid<T>, idx: usize) -> Mat2<T> {
    let d1 = difference_symbol(idx % grid.modes_x, grid.modes_x, grid.period_x);
    let d2 = difference_symbol(idx / grid.modes_x, grid.modes_y, grid.period_y);
    Mat2::new(
        C::new(d2.norm_sqr(), T::zero()),
        -(d2.conj() * d1),
        -(d1.conj() * d2),
        C::new(d1.norm_sqr(), T::zero()),
    )
}

impl<T: Real> BoundaryKernel<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: &LateralGrid<T>,
        medium: ExteriorMedium<T>,
        model: ExteriorModel,
        generator: Generator,
        dt: T,
        horizon: usize,
        contour: &ContourParams<T>,
    ) -> Result<Self> {
        let lateral: Vec<Mat2<T>> = (0..grid.n_lateral()).map(|i| lateral_matrix(grid, i)).collect();
        let q: Vec<T> = lateral.iter().map(|m| (m.m[0][0] + m.m[1][1]).re).collect();
        let mut sorted = q.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let mut group_q: Vec<T> = Vec::new();
        let tol = T::c(1e-12);
        for v in sorted {
            match group_q.last() {
                Some(last) if (v - *last).abs() <= tol * (T::one() + v.abs()) => {}
                _ => group_q.push(v),
            }
        }
        let group = q
            .iter()
            .map(|v| {
                group_q
                    .iter()
                    .position(|g| (*v - *g).abs() <= tol * (T::one() + v.abs()))
                    .expect("grouped value")
            })
            .collect();
        let (eps, mu) = (medium.eps, medium.mu);
        let dz = grid.dz();
        let weights: Vec<(Vec<T>, Vec<T>)> = group_q
            .par_iter()
            .map(|&qv| {
                let one = C::new(T::one(), T::zero());
                let quarter = dz * dz * T::c(0.25);
                let beta = move |s: C<T>| csqrt(s * s * (eps * mu) + qv);
                let factor = move |s: C<T>| match model {
                    ExteriorModel::Continuous => one,
                    ExteriorModel::MatchedGrid => {
                        let b = beta(s);
                        csqrt(one + b * b * quarter)
                    }
                };
                let a = cq_weights_scalar(move |s| s * eps / beta(s) * factor(s), dt, horizon, generator, contour)?;
                let b = if qv > T::zero() {
                    cq_weights_scalar(move |s| factor(s) / (s * mu * beta(s)), dt, horizon, generator, contour)?
                } else {
                    vec![C::new(T::zero(), T::zero()); horizon + 1]
                };
                Ok((a.into_iter().map(|v| v.re).collect(), b.into_iter().map(|v| v.re).collect()))
            })
            .collect::<Result<_>>()?;
        let (a, b) = weights.into_iter().unzip();
        Ok(BoundaryKernel {
            side: medium.side,
            model,
            medium,
            generator,
            dt,
            horizon,
            contour: *contour,
            grid: *grid,
            group,
            lateral,
            group_q,
            a,
            b,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.group.len()
    }

    pub fn n_groups(&self) -> usize {
        self.group_q.len()
    }

    /// `W_j` for mode `idx`.
    pub fn weight(&self, idx: usize, j: usize) -> Mat2<T> {
        let g = self.group[idx];
        Mat2::scalar(C::new(self.a[g][j], T::zero())) + self.lateral[idx].scale(C::new(self.b[g][j], T::zero()))
    }

    /// `sum_{i} W_{n-i} u^i` over `i` in `from..history.len()` with
    /// `n = history.len() - 1 + shift`.
    pub fn convolve_tail(&self, idx: usize, history: &[[C<T>; 2]], shift: usize, from: usize) -> [C<T>; 2] {
        let g = self.group[idx];
        let (a, b) = (&self.a[g], &self.b[g]);
        let n = history.len() - 1 + shift;
        let z = C::new(T::zero(), T::zero());
        let (mut sa, mut sb) = ([z; 2], [z; 2]);
        for (i, u) in history.iter().enumerate().skip(from) {
            let (wa, wb) = (a[n - i], b[n - i]);
            sa[0] = sa[0] + u[0] * wa;
            sa[1] = sa[1] + u[1] * wa;
            sb[0] = sb[0] + u[0] * wb;
            sb[1] = sb[1] + u[1] * wb;
        }
        let nb = self.lateral[idx].apply(sb);
        [sa[0] + nb[0], sa[1] + nb[1]]
    }

    /// Expands into a per-mode [`CQKernel`] (memory `modes x horizon`).
    pub fn to_cq_kernel(&self) -> CQKernel<T> {
        CQKernel {
            generator: self.generator,
            dt: self.dt,
            horizon: self.horizon,
            contour: self.contour,
            kind: OperatorKind::T,
            grid: Some(self.grid),
            side: Some(self.side),
            weights: (0..self.n_modes()).map(|i| (0..=self.horizon).map(|j| self.weight(i, j)).collect()).collect(),
        }
    }
}

/// Kernels for both planes plus the lateral transform.
#[derive(Clone)]
pub struct TbcKernels<T: Real> {
    pub top: BoundaryKernel<T>,
    pub bottom: BoundaryKernel<T>,
    pub fft: LateralFft<T>,
}

impl<T: Real> TbcKernels<T> {
    pub fn new(medium: &SlabMedium<T>, generator: Generator, dt: T, horizon: usize) -> Result<Self> {
        Self::with_model(medium, ExteriorModel::default(), generator, dt, horizon)
    }

    pub fn with_model(
        medium: &SlabMedium<T>,
        model: ExteriorModel,
        generator: Generator,
        dt: T,
        horizon: usize,
    ) -> Result<Self> {
        let contour = ContourParams::for_horizon(horizon);
        let g = medium.layout.grid;
        Ok(TbcKernels {
            top: BoundaryKernel::new(&g, medium.top, model, generator, dt, horizon, &contour)?,
            bottom: BoundaryKernel::new(&g, medium.bottom, model, generator, dt, horizon, &contour)?,
            fft: LateralFft::new(&g),
        })
    }

    pub fn side(&self, side: Side) -> &BoundaryKernel<T> {
        match side {
            Side::Top => &self.top,
            Side::Bottom => &self.bottom,
        }
    }

    pub fn check(&self, medium: &SlabMedium<T>, dt: T) -> Result<()> {
        for k in [&self.top, &self.bottom] {
            if !k.grid.same_lateral(&medium.layout.grid) {
                return Err(Error::GridMismatch("kernel grid differs from the medium grid".into()));
            }
            if (k.dt - dt).abs() > T::c(1e-12) * dt {
                return Err(Error::Parameter { name: "dt", reason: format!("kernel dt {} differs from {dt}", k.dt) });
            }
            if *medium.exterior(k.side) != k.medium {
                return Err(Error::InvalidMedium(format!("kernel built for a different {:?} exterior", k.side)));
            }
        }
        Ok(())
    }
}
