//! Per-mode s-domain solver for layered slabs.
//!
//! For one lateral wavenumber `xi` and one frequency `s` it solves
//! `curl((s mu)^-1 curl u) + s eps u = j` on `h2 < z < h1` with the capacity
//! operator closing both planes. The z-grid is staggered like the time
//! stepper: `u1, u2` at nodes `k = 0..=nz`, `u3` at half nodes. Boundary rows
//! are half-cell balances, so the discrete system is the Galerkin form with
//! the boundary term `<B u, v>` added.

use serde::{Deserialize, Serialize};

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::num::{Mat2, Real, C};
use crate::spectral::{trace_norm_sq_mode, Side, TraceKind, WeightPreset};
use crate::symbols::{beta, capacity_matrix, ComplexFrequency, ExteriorMedium};

/// Piecewise-constant medium across the slab.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredProfile<T> {
    /// `h2 = z_0 < z_1 < ... < z_m = h1`.
    pub breakpoints: Vec<T>,
    pub eps: Vec<T>,
    pub mu: Vec<T>,
}

impl<T: Real> LayeredProfile<T> {
    pub fn new(breakpoints: Vec<T>, eps: Vec<T>, mu: Vec<T>) -> Result<Self> {
        let m = eps.len();
        if m == 0 || mu.len() != m || breakpoints.len() != m + 1 {
            return Err(Error::InvalidMedium(format!(
                "{} breakpoints for {} eps and {} mu values",
                breakpoints.len(),
                eps.len(),
                mu.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidMedium("breakpoints must increase strictly".into()));
        }
        if eps.iter().chain(&mu).any(|v| !(*v > T::zero() && v.is_finite())) {
            return Err(Error::InvalidMedium("eps and mu must be finite and positive".into()));
        }
        Ok(LayeredProfile { breakpoints, eps, mu })
    }

    pub fn homogeneous(h2: T, h1: T, eps: T, mu: T) -> Result<Self> {
        Self::new(vec![h2, h1], vec![eps], vec![mu])
    }

    pub fn h1(&self) -> T {
        *self.breakpoints.last().expect("nonempty")
    }

    pub fn h2(&self) -> T {
        self.breakpoints[0]
    }

    pub fn eps_bounds(&self) -> (T, T) {
        bounds(&self.eps)
    }

    pub fn mu_bounds(&self) -> (T, T) {
        bounds(&self.mu)
    }

    /// Medium of the half-space adjoining a plane.
    pub fn exterior(&self, side: Side) -> ExteriorMedium<T> {
        let i = match side {
            Side::Top => self.eps.len() - 1,
            Side::Bottom => 0,
        };
        ExteriorMedium { eps: self.eps[i], mu: self.mu[i], side }
    }

    /// Value of a layer table at `z`; the mean of both sides on a breakpoint.
    pub fn sample(&self, table: &[T], z: T) -> T {
        let tol = T::c(1e-9) * (self.h1() - self.h2());
        for (i, b) in self.breakpoints.iter().enumerate().skip(1).take(table.len() - 1) {
            if (z - *b).abs() <= tol {
                return (table[i - 1] + table[i]) * T::c(0.5);
            }
        }
        let i = self.breakpoints[1..].iter().position(|b| z < *b).unwrap_or(table.len() - 1);
        table[i.min(table.len() - 1)]
    }

    pub fn eps_at(&self, z: T) -> T {
        self.sample(&self.eps, z)
    }

    /// `mu` at `z`; on a breakpoint the mean of `mu`, i.e. the harmonic mean
    /// of `1/mu`.
    pub fn mu_at(&self, z: T) -> T {
        self.sample(&self.mu, z)
    }
}

fn bounds<T: Real>(v: &[T]) -> (T, T) {
    v.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), x| (a.min(*x), b.max(*x)))
}

/// Per-mode vector samples on the staggered z-grid: components 1 and 2 at
/// the `nz + 1` nodes, component 3 at the `nz` half nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeField<T> {
    pub c1: Vec<C<T>>,
    pub c2: Vec<C<T>>,
    pub c3: Vec<C<T>>,
}

impl<T: Real> ModeField<T> {
    pub fn zeros(nz: usize) -> Self {
        let z = C::new(T::zero(), T::zero());
        ModeField { c1: vec![z; nz + 1], c2: vec![z; nz + 1], c3: vec![z; nz] }
    }

    pub fn nz(&self) -> usize {
        self.c1.len().saturating_sub(1)
    }

    pub fn scale(&self, a: C<T>) -> Self {
        let f = |v: &Vec<C<T>>| v.iter().map(|x| *x * a).collect();
        ModeField { c1: f(&self.c1), c2: f(&self.c2), c3: f(&self.c3) }
    }

    fn check(&self, nz: usize) -> Result<()> {
        if self.c1.len() != nz + 1 || self.c2.len() != nz + 1 || self.c3.len() != nz {
            return Err(Error::Shape {
                expected: format!("{} nodes and {nz} half nodes", nz + 1),
                got: format!("{}, {}, {}", self.c1.len(), self.c2.len(), self.c3.len()),
            });
        }
        Ok(())
    }

    /// Discrete L2 norm: trapezoid weights at nodes, midpoint at half nodes.
    pub fn l2(&self, dz: T) -> T {
        let n = self.c1.len();
        let mut acc = T::zero();
        for k in 0..n {
            let w = if k == 0 || k + 1 == n { T::c(0.5) } else { T::one() };
            acc = acc + w * (self.c1[k].norm_sqr() + self.c2[k].norm_sqr());
        }
        acc = acc + self.c3.iter().map(|v| v.norm_sqr()).sum::<T>();
        (acc * dz).sqrt()
    }
}

/// Tangential boundary data `V x n` on each plane for one mode.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundaryData<T> {
    pub top: [C<T>; 2],
    pub bottom: [C<T>; 2],
}

/// Closure of the planes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    /// Capacity-operator condition on both planes.
    Transparent,
    /// Tangential field forced to zero on both planes.
    Pec,
}

/// Solution of one per-mode problem.
#[derive(Clone, Debug)]
pub struct ModeSolution<T> {
    pub xi: [T; 2],
    pub s: ComplexFrequency<T>,
    pub h2: T,
    pub dz: T,
    pub field: ModeField<T>,
    /// `|A u - b| / |b|`, zero for zero data.
    pub residual: T,
}

impl<T: Real> ModeSolution<T> {
    pub fn nz(&self) -> usize {
        self.field.nz()
    }

    /// Curl of the solution: components 1, 2 at half nodes, 3 at nodes.
    pub fn curl(&self) -> ModeField<T> {
        curl_mode(&self.field, self.xi, self.dz)
    }
}

/// Discrete curl of a staggered per-mode field.
pub fn curl_mode<T: Real>(u: &ModeField<T>, xi: [T; 2], dz: T) -> ModeField<T> {
    let nz = u.nz();
    let i = C::new(T::zero(), T::one());
    let mut out = ModeField::zeros(nz);
    // result is stored with swapped staggering: c1, c2 at half nodes in c3-sized
    // slots would break ModeField's layout, so nodes hold c3 and half nodes c1, c2
    let mut h1 = Vec::with_capacity(nz);
    let mut h2 = Vec::with_capacity(nz);
    for k in 0..nz {
        h1.push(i * xi[1] * u.c3[k] - (u.c2[k + 1] - u.c2[k]) / dz);
        h2.push((u.c1[k + 1] - u.c1[k]) / dz - i * xi[0] * u.c3[k]);
    }
    for k in 0..=nz {
        out.c1[k] = i * (u.c2[k] * xi[0] - u.c1[k] * xi[1]);
    }
    out.c2 = h1;
    out.c3 = h2;
    out
}

/// L2 norm of a field returned by [`curl_mode`] (node component `c1`,
/// half-node components `c2`, `c3`).
pub fn curl_l2<T: Real>(c: &ModeField<T>, dz: T) -> T {
    let n = c.c1.len();
    let mut acc = T::zero();
    for k in 0..n {
        let w = if k == 0 || k + 1 == n { T::c(0.5) } else { T::one() };
        acc = acc + w * c.c1[k].norm_sqr();
    }
    for k in 0..c.c2.len() {
        acc = acc + c.c2[k].norm_sqr() + c.c3[k].norm_sqr();
    }
    (acc * dz).sqrt()
}

#[inline]
fn idx(k: usize, c: usize) -> usize {
    3 * k + c
}

struct Assembly<T> {
    a: BandMatrix<T>,
    b: Vec<C<T>>,
}

fn assemble<T: Real>(
    xi: [T; 2],
    s: ComplexFrequency<T>,
    profile: &LayeredProfile<T>,
    source: &ModeField<T>,
    boundary: Option<&BoundaryData<T>>,
    closure: Closure,
) -> Result<Assembly<T>> {
    let nz = source.nz();
    if nz < 2 {
        return Err(Error::Parameter { name: "nz", reason: "need at least two cells".into() });
    }
    source.check(nz)?;
    let n = 3 * nz + 2;
    let mut a = BandMatrix::zeros(n, 3, 3);
    let mut b = vec![C::new(T::zero(), T::zero()); n];
    let (h1, h2) = (profile.h1(), profile.h2());
    let dz = (h1 - h2) / T::c(nz as f64);
    let sv = s.value();
    let one = C::new(T::one(), T::zero());
    let i = C::new(T::zero(), T::one());
    let ix1 = i * xi[0];
    let ix2 = i * xi[1];
    let zn = |k: usize| h2 + dz * T::c(k as f64);
    let zh = |k: usize| h2 + dz * (T::c(k as f64) + T::c(0.5));

    // w1, w2 at half node k as linear forms over (col, coef)
    let w12 = |k: usize| -> [[(usize, C<T>); 3]; 2] {
        let al = one / (sv * profile.mu_at(zh(k)));
        [
            [(idx(k, 2), al * ix2), (idx(k + 1, 1), -al / dz), (idx(k, 1), al / dz)],
            [(idx(k + 1, 0), al / dz), (idx(k, 0), -al / dz), (idx(k, 2), -al * ix1)],
        ]
    };
    // w3 at node k
    let w3 = |k: usize| -> [(usize, C<T>); 2] {
        let ga = one / (sv * profile.mu_at(zn(k)));
        [(idx(k, 1), ga * ix1), (idx(k, 0), -ga * ix2)]
    };

    for k in 0..=nz {
        let r1 = idx(k, 0);
        let r2 = idx(k, 1);
        let boundary_side = if k == nz {
            Some(Side::Top)
        } else if k == 0 {
            Some(Side::Bottom)
        } else {
            None
        };
        if closure == Closure::Pec && boundary_side.is_some() {
            a.add(r1, r1, one);
            a.add(r2, r2, one);
            continue;
        }
        let wt = if boundary_side.is_some() { dz * T::c(0.5) } else { dz };
        let e = profile.eps_at(zn(k));
        // volume terms
        for (c, v) in w3(k) {
            a.add(r1, c, v * ix2 * wt);
            a.add(r2, c, -v * ix1 * wt);
        }
        a.add(r1, r1, sv * e * wt);
        a.add(r2, r2, sv * e * wt);
        b[r1] = source.c1[k] * wt;
        b[r2] = source.c2[k] * wt;
        // flux differences: row1 gets -(w2_up - w2_dn), row2 gets (w1_up - w1_dn)
        if k < nz {
            let up = w12(k);
            for (c, v) in up[1] {
                a.add(r1, c, -v);
            }
            for (c, v) in up[0] {
                a.add(r2, c, v);
            }
        }
        if k > 0 {
            let dn = w12(k - 1);
            for (c, v) in dn[1] {
                a.add(r1, c, v);
            }
            for (c, v) in dn[0] {
                a.add(r2, c, -v);
            }
        }
        if let Some(side) = boundary_side {
            let m = capacity_matrix(xi, s, &profile.exterior(side))?.matrix;
            a.add(r1, r1, m.m[0][0]);
            a.add(r1, r2, m.m[0][1]);
            a.add(r2, r1, m.m[1][0]);
            a.add(r2, r2, m.m[1][1]);
            if let Some(bd) = boundary {
                let g = match side {
                    Side::Top => bd.top,
                    Side::Bottom => bd.bottom,
                };
                b[r1] = b[r1] + g[0];
                b[r2] = b[r2] + g[1];
            }
        }
    }
    for k in 0..nz {
        let r = idx(k, 2);
        let w = w12(k);
        for (c, v) in w[1] {
            a.add(r, c, ix1 * v * dz);
        }
        for (c, v) in w[0] {
            a.add(r, c, -ix2 * v * dz);
        }
        a.add(r, r, sv * profile.eps_at(zh(k)) * dz);
        b[r] = source.c3[k] * dz;
    }
    Ok(Assembly { a, b })
}

fn unpack<T: Real>(x: &[C<T>], nz: usize) -> ModeField<T> {
    let mut f = ModeField::zeros(nz);
    for k in 0..=nz {
        f.c1[k] = x[idx(k, 0)];
        f.c2[k] = x[idx(k, 1)];
        if k < nz {
            f.c3[k] = x[idx(k, 2)];
        }
    }
    f
}

fn norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
}

/// Solves one per-mode problem with `source.nz()` cells across the profile.
pub fn solve_mode<T: Real>(
    xi: [T; 2],
    s: ComplexFrequency<T>,
    profile: &LayeredProfile<T>,
    source: &ModeField<T>,
    boundary: Option<&BoundaryData<T>>,
    closure: Closure,
) -> Result<ModeSolution<T>> {
    let nz = source.nz();
    let Assembly { a, b } = assemble(xi, s, profile, source, boundary, closure)?;
    let lu = a.clone().factor()?;
    let x = lu.solve(&b);
    let r: Vec<C<T>> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| *p - *q).collect();
    let bn = norm(&b);
    let residual = if bn > T::zero() { norm(&r) / bn } else { norm(&r) };
    Ok(ModeSolution {
        xi,
        s,
        h2: profile.h2(),
        dz: (profile.h1() - profile.h2()) / T::c(nz as f64),
        field: unpack(&x, nz),
        residual,
    })
}

/// Continues a boundary value into the exterior with the outgoing decay
/// `exp(-beta |z - plane|)`.
pub fn outgoing_extension<T: Real>(
    trace_value: C<T>,
    xi: [T; 2],
    s: ComplexFrequency<T>,
    medium: &ExteriorMedium<T>,
    plane: T,
    z: T,
) -> Result<C<T>> {
    let d = match medium.side {
        Side::Top => z - plane,
        Side::Bottom => plane - z,
    };
    if d < T::zero() {
        return Err(Error::Parameter { name: "z", reason: format!("{z} lies inside the slab") });
    }
    let b = beta(xi, s, medium)?;
    Ok(trace_value * (-(b * d)).exp())
}

/// `(|curl u| + |s u|) s1 / |s j|`.
pub fn theorem_at_check<T: Real>(solution: &ModeSolution<T>, source: &ModeField<T>, s: ComplexFrequency<T>) -> Result<T> {
    let dz = solution.dz;
    let sj = source.l2(dz) * s.value().norm();
    if sj == T::zero() {
        return Err(Error::UndefinedRatio("zero source".into()));
    }
    let lhs = curl_l2(&solution.curl(), dz) + solution.field.l2(dz) * s.value().norm();
    Ok(lhs * s.s1() / sj)
}

/// `(|curl e| + |s e|) / (s1^-1 [|s J| + sum_j (|s g_j|_div + ||s|^2 g_j|_div)])`
/// with `g_j = V x n_j`.
pub fn lemma_es_check<T: Real>(
    solution: &ModeSolution<T>,
    source_j: &ModeField<T>,
    boundary_v: &BoundaryData<T>,
    s: ComplexFrequency<T>,
) -> Result<T> {
    let dz = solution.dz;
    let sa = s.value().norm();
    let mut rhs = source_j.l2(dz) * sa;
    for g in [boundary_v.top, boundary_v.bottom] {
        let n = trace_norm_sq_mode(g, solution.xi, TraceKind::DivMinusHalf, WeightPreset::StandardWeight).sqrt();
        rhs = rhs + n * sa + n * sa * sa;
    }
    if rhs == T::zero() {
        return Err(Error::UndefinedRatio("zero data".into()));
    }
    let lhs = curl_l2(&solution.curl(), dz) + solution.field.l2(dz) * sa;
    Ok(lhs * s.s1() / rhs)
}

/// Capacity symbol of a plane, exposed for oracle assembly.
pub fn plane_symbol<T: Real>(xi: [T; 2], s: ComplexFrequency<T>, profile: &LayeredProfile<T>, side: Side) -> Result<Mat2<T>> {
    Ok(capacity_matrix(xi, s, &profile.exterior(side))?.matrix)
}
