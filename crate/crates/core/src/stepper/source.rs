use serde::{Deserialize, Serialize};

use super::layout::{Comp, Triple, YeeLayout};
use super::ops::{curl_e, curl_h, curl_of_vertical, weighted_sq};
use crate::error::{Error, Result};
use crate::num::Real;

/// Time factor multiplying the spatial current profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TemporalProfile {
    /// No current.
    Zero,
    /// `sin^2(pi t / (2 rise))` up to `rise`, then 1.
    SinSquaredRamp { rise: f64 },
    /// `sin^2(pi t / duration)` on `[0, duration]`, zero afterwards.
    SinSquaredPulse { duration: f64 },
    /// 1 for every `t >= 0`; switched on at `t = 0`.
    Step,
}

impl Default for TemporalProfile {
    fn default() -> Self {
        TemporalProfile::Zero
    }
}

impl TemporalProfile {
    pub fn value(&self, t: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            TemporalProfile::Zero => 0.0,
            TemporalProfile::SinSquaredRamp { rise } => {
                if t <= 0.0 {
                    0.0
                } else if t < rise {
                    (PI * t / (2.0 * rise)).sin().powi(2)
                } else {
                    1.0
                }
            }
            TemporalProfile::SinSquaredPulse { duration } => {
                if t <= 0.0 || t >= duration {
                    0.0
                } else {
                    (PI * t / duration).sin().powi(2)
                }
            }
            TemporalProfile::Step => {
                if t >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Time derivative, zero where undefined.
    pub fn derivative(&self, t: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            TemporalProfile::Zero | TemporalProfile::Step => 0.0,
            TemporalProfile::SinSquaredRamp { rise } => {
                if t <= 0.0 || t >= rise {
                    0.0
                } else {
                    let w = PI / (2.0 * rise);
                    w * (2.0 * w * t).sin()
                }
            }
            TemporalProfile::SinSquaredPulse { duration } => {
                if t <= 0.0 || t >= duration {
                    0.0
                } else {
                    let w = PI / duration;
                    w * (2.0 * w * t).sin()
                }
            }
        }
    }

    /// Time after which the factor no longer changes.
    pub fn settles_at(&self) -> f64 {
        match *self {
            TemporalProfile::Zero | TemporalProfile::Step => 0.0,
            TemporalProfile::SinSquaredRamp { rise } => rise,
            TemporalProfile::SinSquaredPulse { duration } => duration,
        }
    }

    /// `int_0^t |f'|`.
    pub fn total_variation(&self, t: f64) -> f64 {
        match *self {
            TemporalProfile::Zero | TemporalProfile::Step => 0.0,
            TemporalProfile::SinSquaredRamp { .. } => self.value(t),
            TemporalProfile::SinSquaredPulse { duration } => {
                if t <= duration / 2.0 {
                    self.value(t)
                } else {
                    2.0 - self.value(t.min(duration))
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TemporalProfile::SinSquaredRamp { rise } => rise > 0.0 && rise.is_finite(),
            TemporalProfile::SinSquaredPulse { duration } => duration > 0.0 && duration.is_finite(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter { name: "temporal_profile", reason: format!("{self:?} needs a positive finite time") })
        }
    }
}

/// Closed box `[lo, hi]` holding all data. Laterally the coordinates are
/// taken in `[0, period)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBox<T> {
    pub lo: [T; 3],
    pub hi: [T; 3],
}

impl<T: Real> SupportBox<T> {
    /// The whole closed slab.
    pub fn slab(l: &YeeLayout<T>) -> Self {
        SupportBox {
            lo: [T::zero(), T::zero(), l.grid.h2],
            hi: [l.grid.period_x, l.grid.period_y, l.grid.h1],
        }
    }

    pub fn contains(&self, p: [T; 3]) -> bool {
        let tol = T::c(1e-12);
        (0..3).all(|a| p[a] >= self.lo[a] - tol && p[a] <= self.hi[a] + tol)
    }

    /// Whether the box stays clear of both planes.
    pub fn interior(&self, l: &YeeLayout<T>) -> bool {
        self.lo[2] > l.grid.h2 && self.hi[2] < l.grid.h1
    }
}

/// Current density, initial fields and their declared support.
///
/// `J(x, t) = current(x) * profile(t)` with `current` sampled at the `E`
/// positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceTerm<T> {
    pub current: Triple<T>,
    pub profile: TemporalProfile,
    pub e0: Triple<T>,
    pub h0: Triple<T>,
    pub support: SupportBox<T>,
}

impl<T: Real> SourceTerm<T> {
    pub fn zeros(l: &YeeLayout<T>) -> Self {
        SourceTerm {
            current: l.zeros(Comp::E),
            profile: TemporalProfile::Zero,
            e0: l.zeros(Comp::E),
            h0: l.zeros(Comp::H),
            support: SupportBox::slab(l),
        }
    }

    pub fn with_initial(mut self, e0: Triple<T>, h0: Triple<T>) -> Self {
        self.e0 = e0;
        self.h0 = h0;
        self
    }

    pub fn with_current(mut self, current: Triple<T>, profile: TemporalProfile) -> Self {
        self.current = current;
        self.profile = profile;
        self
    }

    pub fn with_support(mut self, support: SupportBox<T>) -> Self {
        self.support = support;
        self
    }

    /// Scales every datum by `a`.
    pub fn scaled(&self, a: T) -> Self {
        let s = |t: &Triple<T>| t.clone().map(|v| v.into_iter().map(|x| x * a).collect());
        SourceTerm { current: s(&self.current), e0: s(&self.e0), h0: s(&self.h0), ..self.clone() }
    }

    pub fn has_current(&self) -> bool {
        self.profile != TemporalProfile::Zero && self.current.iter().flatten().any(|v| *v != T::zero())
    }

    /// Factor of the current at time `t`.
    pub fn factor(&self, t: T) -> T {
        T::c(self.profile.value(t.to_f64_lossy()))
    }

    /// Shapes, finiteness and support of every datum.
    pub fn check(&self, l: &YeeLayout<T>) -> Result<()> {
        self.profile.validate()?;
        l.check(Comp::E, &self.current, "J")?;
        l.check(Comp::E, &self.e0, "E0")?;
        l.check(Comp::H, &self.h0, "H0")?;
        for (name, comps, f) in [("J", Comp::E, &self.current), ("E0", Comp::E, &self.e0), ("H0", Comp::H, &self.h0)] {
            for (c, v) in comps.iter().zip(f) {
                let p = l.plane();
                for (idx, x) in v.iter().enumerate() {
                    if !x.is_finite() {
                        return Err(Error::Support(format!("{name}.{} is not finite", c.name())));
                    }
                    if *x != T::zero() {
                        let (k, r) = (idx / p, idx % p);
                        let pos = l.position(*c, k, r / l.nx, r % l.nx);
                        if !self.support.contains(pos) {
                            return Err(Error::Support(format!(
                                "{name}.{} = {x} at ({}, {}, {}) lies outside the declared support",
                                c.name(),
                                pos[0],
                                pos[1],
                                pos[2]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Transparent runs need `J(., 0) = 0`.
    pub fn check_h1(&self) -> Result<()> {
        let f0 = self.profile.value(0.0);
        let m = self.current.iter().flatten().fold(0.0f64, |a, v| a.max(v.to_f64_lossy().abs()));
        if f0 != 0.0 && m > 0.0 {
            return Err(Error::InitialCurrent(f0.abs() * m));
        }
        Ok(())
    }

    /// `E1 = eps^-1 (curl H0 - J(., 0))` on the interior `E` positions.
    pub fn initial_rate(&self, l: &YeeLayout<T>, eps: &Triple<T>) -> Triple<T> {
        let mut c = curl_h(l, &self.h0);
        let f0 = self.factor(T::zero());
        for a in 0..3 {
            for (i, v) in c[a].iter_mut().enumerate() {
                *v = (*v - self.current[a][i] * f0) / eps[a][i];
            }
        }
        c
    }

    /// `||J||` of the spatial profile.
    pub fn current_l2(&self, l: &YeeLayout<T>) -> T {
        weighted_sq(l, Comp::E, &self.current, None).sqrt()
    }
}

/// `cos^6` bump of half-width `r`, with its derivative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
}

impl Bump {
    pub fn value(&self, u: f64) -> f64 {
        let x = (u - self.center) / self.radius;
        if x.abs() >= 1.0 {
            0.0
        } else {
            (std::f64::consts::FRAC_PI_2 * x).cos().powi(6)
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let x = (u - self.center) / self.radius;
        if x.abs() >= 1.0 {
            0.0
        } else {
            let a = std::f64::consts::FRAC_PI_2 * x;
            -6.0 * a.cos().powi(5) * a.sin() * std::f64::consts::FRAC_PI_2 / self.radius
        }
    }

    /// Periodic version: distance measured on a circle of length `period`.
    pub fn periodic_value(&self, u: f64, period: f64) -> f64 {
        let d = (u - self.center).rem_euclid(period);
        let d = if d > period / 2.0 { d - period } else { d };
        Bump { center: 0.0, radius: self.radius }.value(d)
    }
}

/// Lateral profile of a [`VerticalPulse`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LateralShape {
    /// Periodic `cos^6` bump of the given radius.
    #[default]
    Bump,
    /// `cos^2(pi (x - x0) / L)`: lateral modes `0, +-1` only.
    Cosine,
}

/// Pulse travelling in `+z` (`direction = 1`) or `-z` (`direction = -1`)
/// through a homogeneous region.
///
/// With `phi = b(x) b(y) b(z)`, `E0 = curl(0, 0, d phi/dz)` and
/// `H0 = direction * sqrt(eps/mu) * curl curl(0, 0, phi)`, both built from
/// the discrete curl pair so that they are exactly divergence free.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerticalPulse {
    pub center: [f64; 3],
    pub radius: [f64; 3],
    pub amplitude: f64,
    pub direction: f64,
    pub eps: f64,
    pub mu: f64,
    #[serde(default)]
    pub lateral: LateralShape,
}

impl VerticalPulse {
    fn phi<T: Real>(&self, l: &YeeLayout<T>, dz_order: bool) -> Vec<T> {
        let bx = Bump { center: self.center[0], radius: self.radius[0] };
        let by = Bump { center: self.center[1], radius: self.radius[1] };
        let bz = Bump { center: self.center[2], radius: self.radius[2] };
        let (lx, ly) = (l.grid.period_x.to_f64_lossy(), l.grid.period_y.to_f64_lossy());
        let [f, _, _] = l.sample([Comp::Hz; 3], |_, p| {
            let p = p.map(|v| v.to_f64_lossy());
            let z = if dz_order { bz.derivative(p[2]) } else { bz.value(p[2]) };
            let (fx, fy) = match self.lateral {
                LateralShape::Bump => (bx.periodic_value(p[0], lx), by.periodic_value(p[1], ly)),
                LateralShape::Cosine => (
                    (std::f64::consts::PI * (p[0] - self.center[0]) / lx).cos().powi(2),
                    (std::f64::consts::PI * (p[1] - self.center[1]) / ly).cos().powi(2),
                ),
            };
            T::c(self.amplitude * fx * fy * z)
        });
        f
    }

    pub fn fields<T: Real>(&self, l: &YeeLayout<T>) -> (Triple<T>, Triple<T>) {
        let e0 = curl_of_vertical(l, &self.phi(l, true));
        let g = curl_of_vertical(l, &self.phi(l, false));
        let y = T::c(self.direction * (self.eps / self.mu).sqrt());
        let h0 = curl_e(l, &g).map(|v| v.into_iter().map(|x| x * y).collect());
        (e0, h0)
    }

    /// Box holding the pulse, padded by one cell for the curl stencils;
    /// laterally the whole period.
    pub fn support<T: Real>(&self, l: &YeeLayout<T>) -> SupportBox<T> {
        let mut b = SupportBox::slab(l);
        b.lo[2] = T::c(self.center[2] - self.radius[2]) - l.dz;
        b.hi[2] = T::c(self.center[2] + self.radius[2]) + l.dz;
        b
    }
}
