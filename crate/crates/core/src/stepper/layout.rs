use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::spectral::LateralGrid;

/// Field component on the staggered grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comp {
    Ex,
    Ey,
    Ez,
    Hx,
    Hy,
    Hz,
}

impl Comp {
    pub const E: [Comp; 3] = [Comp::Ex, Comp::Ey, Comp::Ez];
    pub const H: [Comp; 3] = [Comp::Hx, Comp::Hy, Comp::Hz];
    pub const ALL: [Comp; 6] = [Comp::Ex, Comp::Ey, Comp::Ez, Comp::Hx, Comp::Hy, Comp::Hz];

    /// Offsets in cell units.
    pub fn offset(self) -> [f64; 3] {
        match self {
            Comp::Ex => [0.5, 0.0, 0.0],
            Comp::Ey => [0.0, 0.5, 0.0],
            Comp::Ez => [0.0, 0.0, 0.5],
            Comp::Hx => [0.0, 0.5, 0.5],
            Comp::Hy => [0.5, 0.0, 0.5],
            Comp::Hz => [0.5, 0.5, 0.0],
        }
    }

    /// Whether the component lives on integer z levels.
    pub fn on_nodes(self) -> bool {
        self.offset()[2] == 0.0
    }

    pub fn axis(self) -> usize {
        match self {
            Comp::Ex | Comp::Hx => 0,
            Comp::Ey | Comp::Hy => 1,
            Comp::Ez | Comp::Hz => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Comp::Ex => "Ex",
            Comp::Ey => "Ey",
            Comp::Ez => "Ez",
            Comp::Hx => "Hx",
            Comp::Hy => "Hy",
            Comp::Hz => "Hz",
        }
    }
}

/// Three component arrays, `x, y, z`.
pub type Triple<T> = [Vec<T>; 3];

/// Yee layout over a lateral grid: `E` on edges, `H` on faces, periodic in
/// `x, y`, `nz - 1` cells across the slab. Arrays are level-major, then `y`,
/// then `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YeeLayout<T> {
    pub grid: LateralGrid<T>,
    pub nx: usize,
    pub ny: usize,
    /// Number of cells in `z`.
    pub nc: usize,
    pub dx: T,
    pub dy: T,
    pub dz: T,
}

impl<T: Real> YeeLayout<T> {
    pub fn new(grid: &LateralGrid<T>) -> Self {
        YeeLayout {
            grid: *grid,
            nx: grid.modes_x,
            ny: grid.modes_y,
            nc: grid.nz - 1,
            dx: grid.dx(),
            dy: grid.dy(),
            dz: grid.dz(),
        }
    }

    pub fn plane(&self) -> usize {
        self.nx * self.ny
    }

    pub fn levels(&self, c: Comp) -> usize {
        if c.on_nodes() {
            self.nc + 1
        } else {
            self.nc
        }
    }

    pub fn len(&self, c: Comp) -> usize {
        self.levels(c) * self.plane()
    }

    #[inline]
    pub fn index(&self, k: usize, j: usize, i: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    pub fn position(&self, c: Comp, k: usize, j: usize, i: usize) -> [T; 3] {
        let o = c.offset();
        [
            (T::c(i as f64) + T::c(o[0])) * self.dx,
            (T::c(j as f64) + T::c(o[1])) * self.dy,
            self.grid.h2 + (T::c(k as f64) + T::c(o[2])) * self.dz,
        ]
    }

    pub fn cell_volume(&self) -> T {
        self.dx * self.dy * self.dz
    }

    /// Quadrature weight of level `k`: trapezoid for node components.
    pub fn weight(&self, c: Comp, k: usize) -> T {
        if c.on_nodes() && (k == 0 || k == self.nc) {
            T::c(0.5)
        } else {
            T::one()
        }
    }

    pub fn zeros(&self, comps: [Comp; 3]) -> Triple<T> {
        comps.map(|c| vec![T::zero(); self.len(c)])
    }

    /// Samples `f(position)` for each of three components.
    pub fn sample(&self, comps: [Comp; 3], f: impl Fn(Comp, [T; 3]) -> T) -> Triple<T> {
        comps.map(|c| {
            let mut v = Vec::with_capacity(self.len(c));
            for k in 0..self.levels(c) {
                for j in 0..self.ny {
                    for i in 0..self.nx {
                        v.push(f(c, self.position(c, k, j, i)));
                    }
                }
            }
            v
        })
    }

    pub fn check(&self, comps: [Comp; 3], f: &Triple<T>, what: &str) -> Result<()> {
        for (c, v) in comps.iter().zip(f) {
            if v.len() != self.len(*c) {
                return Err(Error::Shape {
                    expected: format!("{} samples of {what}.{}", self.len(*c), c.name()),
                    got: v.len().to_string(),
                });
            }
        }
        Ok(())
    }

    /// Stability limit of the leapfrog scheme at wave speed `c`.
    pub fn cfl_limit(&self, speed: T) -> T {
        let s = (self.dx.powi(-2) + self.dy.powi(-2) + self.dz.powi(-2)).sqrt();
        T::one() / (speed * s)
    }
}
