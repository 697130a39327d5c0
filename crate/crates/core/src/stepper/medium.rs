use serde::{Deserialize, Serialize};

use super::layout::{Comp, Triple, YeeLayout};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::sdomain::LayeredProfile;
use crate::spectral::{LateralGrid, Side};
use crate::symbols::ExteriorMedium;

/// Material samples on the staggered grid: `eps` at the `E` positions,
/// `mu` at the `H` positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabMedium<T> {
    pub layout: YeeLayout<T>,
    pub eps: Triple<T>,
    pub mu: Triple<T>,
    pub top: ExteriorMedium<T>,
    pub bottom: ExteriorMedium<T>,
    pub eps_bounds: (T, T),
    pub mu_bounds: (T, T),
}

fn bounds<T: Real>(t: &Triple<T>) -> (T, T) {
    t.iter().flatten().fold((T::infinity(), T::neg_infinity()), |(a, b), v| (a.min(*v), b.max(*v)))
}

impl<T: Real> SlabMedium<T> {
    /// Builds a medium from point evaluators and checks every invariant.
    pub fn from_fn(
        grid: &LateralGrid<T>,
        eps: impl Fn([T; 3]) -> T,
        mu: impl Fn([T; 3]) -> T,
        top: ExteriorMedium<T>,
        bottom: ExteriorMedium<T>,
    ) -> Result<Self> {
        let layout = YeeLayout::new(grid);
        let m = SlabMedium {
            layout,
            eps: layout.sample(Comp::E, |_, p| eps(p)),
            mu: layout.sample(Comp::H, |_, p| mu(p)),
            top,
            bottom,
            eps_bounds: (T::zero(), T::zero()),
            mu_bounds: (T::zero(), T::zero()),
        };
        m.validated()
    }

    pub fn homogeneous(grid: &LateralGrid<T>, eps: T, mu: T) -> Result<Self> {
        Self::from_fn(
            grid,
            |_| eps,
            |_| mu,
            ExteriorMedium::new(eps, mu, Side::Top)?,
            ExteriorMedium::new(eps, mu, Side::Bottom)?,
        )
    }

    /// Layered medium; the slab extent of `grid` must match the profile.
    pub fn layered(grid: &LateralGrid<T>, profile: &LayeredProfile<T>) -> Result<Self> {
        let tol = T::c(1e-12) * grid.thickness();
        if (profile.h1() - grid.h1).abs() > tol || (profile.h2() - grid.h2).abs() > tol {
            return Err(Error::GridMismatch("profile extent differs from the slab".into()));
        }
        Self::from_fn(
            grid,
            |p| profile.eps_at(p[2]),
            |p| profile.mu_at(p[2]),
            profile.exterior(Side::Top),
            profile.exterior(Side::Bottom),
        )
    }

    pub fn exterior(&self, side: Side) -> &ExteriorMedium<T> {
        match side {
            Side::Top => &self.top,
            Side::Bottom => &self.bottom,
        }
    }

    /// Recomputes the bounds and checks positivity and the homogeneity of the
    /// cells touching each plane.
    pub fn validated(mut self) -> Result<Self> {
        let l = self.layout;
        l.check(Comp::E, &self.eps, "eps")?;
        l.check(Comp::H, &self.mu, "mu")?;
        for v in self.eps.iter().chain(&self.mu).flatten() {
            if !(*v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidMedium(format!("sample {v} is not positive and finite")));
            }
        }
        self.eps_bounds = bounds(&self.eps);
        self.mu_bounds = bounds(&self.mu);
        let plane = l.plane();
        let tol = T::c(1e-12);
        for (side, ext, node, half) in [(Side::Top, self.top, l.nc, l.nc - 1), (Side::Bottom, self.bottom, 0, 0)] {
            if ext.side != side {
                return Err(Error::InvalidMedium(format!("exterior medium for {side:?} has side {:?}", ext.side)));
            }
            let check = |vals: &[T], lvl: usize, want: T, what: &str| -> Result<()> {
                for v in &vals[lvl * plane..(lvl + 1) * plane] {
                    if (*v - want).abs() > tol * want {
                        return Err(Error::InvalidMedium(format!(
                            "{what} = {v} in the cell next to the {side:?} plane differs from the exterior value {want}"
                        )));
                    }
                }
                Ok(())
            };
            check(&self.eps[0], node, ext.eps, "eps")?;
            check(&self.eps[1], node, ext.eps, "eps")?;
            check(&self.eps[2], half, ext.eps, "eps")?;
            check(&self.mu[0], half, ext.mu, "mu")?;
            check(&self.mu[1], half, ext.mu, "mu")?;
            check(&self.mu[2], node, ext.mu, "mu")?;
        }
        Ok(self)
    }

    /// Largest wave speed `(eps_min mu_min)^(-1/2)`.
    pub fn max_speed(&self) -> T {
        T::one() / (self.eps_bounds.0 * self.mu_bounds.0).sqrt()
    }

    pub fn cfl_limit(&self) -> T {
        self.layout.cfl_limit(self.max_speed())
    }

    /// `dt` at a fraction of the stability limit.
    pub fn dt_for_cfl(&self, fraction: T) -> Result<T> {
        if !(fraction > T::zero() && fraction < T::one()) {
            return Err(Error::Cfl { dt: fraction.to_f64_lossy(), limit: 1.0 });
        }
        Ok(self.cfl_limit() * fraction)
    }

    pub fn check_dt(&self, dt: T) -> Result<()> {
        let limit = self.cfl_limit();
        if !(dt > T::zero()) || dt >= limit {
            return Err(Error::Cfl { dt: dt.to_f64_lossy(), limit: limit.to_f64_lossy() });
        }
        Ok(())
    }
}
