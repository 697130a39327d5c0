//! Vertical decay rate `beta`, capacity-operator symbols, and their
//! continuity and positivity audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{csqrt, Mat2, Real, C};
use crate::spectral::{
    trace_norm_sq_mode, LateralGrid, Side, TangentialTrace, TraceKind, WeightPreset,
};

/// Laplace variable `s = s1 + i s2` with `s1 > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexFrequency<T> {
    s1: T,
    s2: T,
}

impl<T: Real> ComplexFrequency<T> {
    pub fn new(s1: T, s2: T) -> Result<Self> {
        if !(s1 > T::zero()) || !s1.is_finite() || !s2.is_finite() {
            return Err(Error::InvalidFrequency { s1: s1.to_f64_lossy() });
        }
        Ok(ComplexFrequency { s1, s2 })
    }

    pub fn from_complex(s: C<T>) -> Result<Self> {
        Self::new(s.re, s.im)
    }

    pub fn s1(&self) -> T {
        self.s1
    }

    pub fn s2(&self) -> T {
        self.s2
    }

    pub fn value(&self) -> C<T> {
        C::new(self.s1, self.s2)
    }

    pub fn conj(&self) -> Self {
        ComplexFrequency { s1: self.s1, s2: -self.s2 }
    }
}

/// Homogeneous half-space above (`Top`) or below (`Bottom`) the slab.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorMedium<T> {
    pub eps: T,
    pub mu: T,
    pub side: Side,
}

impl<T: Real> ExteriorMedium<T> {
    pub fn new(eps: T, mu: T, side: Side) -> Result<Self> {
        if !(eps > T::zero() && eps.is_finite() && mu > T::zero() && mu.is_finite()) {
            return Err(Error::InvalidMedium(format!("eps = {eps}, mu = {mu} must be finite and positive")));
        }
        Ok(ExteriorMedium { eps, mu, side })
    }

    /// Plane-wave admittance `sqrt(eps/mu)`.
    pub fn admittance(&self) -> T {
        (self.eps / self.mu).sqrt()
    }
}

const BETA_FLOOR: f64 = 1e-300;

/// Principal root of `eps mu s^2 + |xi|^2`, the decay rate of outgoing modes.
pub fn beta<T: Real>(xi: [T; 2], s: ComplexFrequency<T>, medium: &ExteriorMedium<T>) -> Result<C<T>> {
    let sv = s.value();
    let z = sv * sv * (medium.eps * medium.mu) + C::new(xi[0] * xi[0] + xi[1] * xi[1], T::zero());
    let b = csqrt(z);
    if b.norm().to_f64_lossy() < BETA_FLOOR {
        return Err(Error::InvalidFrequency { s1: s.s1().to_f64_lossy() });
    }
    Ok(b)
}

/// Symbol of the capacity operator at one lateral mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacitySymbol<T> {
    pub xi: [T; 2],
    pub s: ComplexFrequency<T>,
    pub side: Side,
    pub matrix: Mat2<T>,
}

/// Symbol in surface-curl form:
/// `M = (eps mu s^2 I + xi_perp xi_perp^T) / (mu s beta)`.
pub fn capacity_matrix<T: Real>(
    xi: [T; 2],
    s: ComplexFrequency<T>,
    medium: &ExteriorMedium<T>,
) -> Result<CapacitySymbol<T>> {
    let b = beta(xi, s, medium)?;
    let sv = s.value();
    let k2 = sv * sv * (medium.eps * medium.mu);
    let f = C::new(T::one(), T::zero()) / (sv * b * medium.mu);
    let re = |x: T| C::new(x, T::zero());
    let m = Mat2::new(
        (k2 + re(xi[1] * xi[1])) * f,
        re(-xi[0] * xi[1]) * f,
        re(-xi[0] * xi[1]) * f,
        (k2 + re(xi[0] * xi[0])) * f,
    );
    Ok(CapacitySymbol { xi, s, side: medium.side, matrix: m })
}

/// Symbol in surface-divergence form: `M = (beta I - xi xi^T / beta) / (mu s)`.
pub fn capacity_matrix_div_form<T: Real>(
    xi: [T; 2],
    s: ComplexFrequency<T>,
    medium: &ExteriorMedium<T>,
) -> Result<Mat2<T>> {
    let b = beta(xi, s, medium)?;
    let f = C::new(T::one(), T::zero()) / (s.value() * medium.mu);
    let ib = C::new(T::one(), T::zero()) / b;
    Ok(Mat2::new(
        (b - ib * (xi[0] * xi[0])) * f,
        -(ib * (xi[0] * xi[1])) * f,
        -(ib * (xi[0] * xi[1])) * f,
        (b - ib * (xi[1] * xi[1])) * f,
    ))
}

/// Eigenvalues of the symbol along `xi` and across it:
/// `(eps s / beta, beta / (mu s))`.
pub fn capacity_scalars<T: Real>(
    xi: [T; 2],
    s: ComplexFrequency<T>,
    medium: &ExteriorMedium<T>,
) -> Result<(C<T>, C<T>)> {
    let b = beta(xi, s, medium)?;
    let sv = s.value();
    Ok((sv * medium.eps / b, b / (sv * medium.mu)))
}

/// Symbol for storage index `idx` of `grid`, averaged over the `+/-` aliases
/// of Nyquist components so that real traces map to real traces.
pub fn grid_capacity_matrix<T: Real>(
    grid: &LateralGrid<T>,
    idx: usize,
    s: ComplexFrequency<T>,
    medium: &ExteriorMedium<T>,
) -> Result<Mat2<T>> {
    let vars = grid.xi_variants(idx);
    let mut acc = Mat2::zero();
    for xi in &vars {
        acc = acc + capacity_matrix(*xi, s, medium)?.matrix;
    }
    Ok(acc.scale(C::new(T::one() / T::c(vars.len() as f64), T::zero())))
}

/// Capacity symbols for every mode of a lateral grid at one frequency.
#[derive(Clone, Debug)]
pub struct SymbolSet<T> {
    pub grid: LateralGrid<T>,
    pub s: ComplexFrequency<T>,
    pub medium: ExteriorMedium<T>,
    pub mats: Vec<Mat2<T>>,
}

impl<T: Real> SymbolSet<T> {
    pub fn new(grid: &LateralGrid<T>, s: ComplexFrequency<T>, medium: &ExteriorMedium<T>) -> Result<Self> {
        let mats = (0..grid.n_lateral())
            .map(|i| grid_capacity_matrix(grid, i, s, medium))
            .collect::<Result<Vec<_>>>()?;
        Ok(SymbolSet { grid: *grid, s, medium: *medium, mats })
    }
}

/// Applies the symbol set mode by mode.
pub fn apply_capacity<T: Real>(set: &SymbolSet<T>, trace: &TangentialTrace<T>) -> Result<TangentialTrace<T>> {
    if !set.grid.same_lateral(&trace.grid) || set.mats.len() != trace.coeffs.len() {
        return Err(Error::GridMismatch("symbol set and trace cover different modes".into()));
    }
    if set.medium.side != trace.side {
        return Err(Error::GridMismatch("symbol set and trace belong to different planes".into()));
    }
    let coeffs = set.mats.iter().zip(&trace.coeffs).map(|(m, u)| m.apply(*u)).collect();
    TangentialTrace::from_coeffs(&trace.grid, trace.side, coeffs)
}

/// `Re <B u, u>` over all modes of the trace.
pub fn positivity_margin<T: Real>(
    trace: &TangentialTrace<T>,
    s: ComplexFrequency<T>,
    medium: &ExteriorMedium<T>,
) -> Result<T> {
    let mut acc = T::zero();
    for (i, u) in trace.coeffs.iter().enumerate() {
        let m = grid_capacity_matrix(&trace.grid, i, s, medium)?;
        let v = m.apply(*u);
        acc = acc + (v[0] * u[0].conj() + v[1] * u[1].conj()).re;
    }
    Ok(acc)
}

/// `((1-a)^2 + b^2) / b^2` raised to `1/4`, the bound on `(1+|xi|^2)^(1/2) / |beta|`.
pub fn f_bound<T: Real>(s: ComplexFrequency<T>, medium: &ExteriorMedium<T>) -> Result<T> {
    let (a, b) = ab(s, medium);
    if b == T::zero() {
        return Err(Error::DegenerateConstant("imaginary part of s is zero, so b = 0".into()));
    }
    let one_a = T::one() - a;
    Ok(((one_a * one_a + b * b) / (b * b)).sqrt().sqrt())
}

fn ab<T: Real>(s: ComplexFrequency<T>, medium: &ExteriorMedium<T>) -> (T, T) {
    let em = medium.eps * medium.mu;
    (em * (s.s1() * s.s1() - s.s2() * s.s2()), T::c(2.0) * em * s.s1() * s.s2())
}

/// Continuity constant of the capacity operator between the curl and div
/// trace spaces.
pub fn continuity_constant<T: Real>(s: ComplexFrequency<T>, medium: &ExteriorMedium<T>) -> Result<T> {
    let f = f_bound(s, medium)?;
    let (a, b) = ab(s, medium);
    let mx = (a * a + b * b).sqrt().max(T::one());
    Ok(f * mx / (medium.mu * s.s1()))
}

/// Constant of the trace inequality for a slab of the given thickness.
pub fn trace_constant<T: Real>(thickness: T) -> T {
    (T::one() + T::one() / thickness).sqrt().max(T::c(2.0).sqrt())
}

/// Exact per-mode norm of the symbol from the curl trace norm to the div
/// trace norm (weight-independent).
pub fn mode_operator_norm<T: Real>(xi: [T; 2], s: ComplexFrequency<T>, medium: &ExteriorMedium<T>) -> Result<T> {
    let (gp, gt) = capacity_scalars(xi, s, medium)?;
    let p = (T::one() + xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
    Ok((p * gp.norm()).max(gt.norm() / p))
}

/// Residuals of `m^2 - n^2 = eps mu (s1^2 - s2^2) + |xi|^2` and
/// `m n = eps mu s1 s2` for `beta = m + i n`, relative to `|beta|^2`.
pub fn beta_identities<T: Real>(xi: [T; 2], s: ComplexFrequency<T>, medium: &ExteriorMedium<T>) -> Result<(T, T)> {
    let b = beta(xi, s, medium)?;
    let (m, n) = (b.re, b.im);
    let em = medium.eps * medium.mu;
    let x2 = xi[0] * xi[0] + xi[1] * xi[1];
    let scale = b.norm_sqr();
    let r2 = (m * m - n * n - (em * (s.s1() * s.s1() - s.s2() * s.s2()) + x2)).abs() / scale;
    let r3 = (m * n - em * s.s1() * s.s2()).abs() / scale;
    Ok((r2, r3))
}

/// One extreme sample recorded by an audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSample {
    pub quantity: String,
    pub xi: [f64; 2],
    pub s: [f64; 2],
    pub eps: f64,
    pub mu: f64,
    pub value: f64,
}

/// Sampling box for symbol audits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRanges {
    pub xi_abs: [f64; 2],
    pub s1: [f64; 2],
    pub s2: [f64; 2],
    /// Fraction of samples placed exactly at `xi = 0`.
    pub zero_xi_fraction: f64,
}

impl Default for AuditRanges {
    fn default() -> Self {
        AuditRanges { xi_abs: [1e-3, 1e3], s1: [1e-2, 1e2], s2: [-1e2, 1e2], zero_xi_fraction: 0.02 }
    }
}

/// Result of a seeded continuity audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolAudit {
    pub samples: usize,
    pub seed: u64,
    pub ranges: AuditRanges,
    pub eps: f64,
    pub mu: f64,
    /// Minimum of `Re<Bu,u> / |u|^2`.
    pub min_positivity_margin: f64,
    /// Maximum of `|Bu|_div / (C_j |u|_curl)`.
    pub max_continuity_ratio: f64,
    /// Maximum of `((1+|xi|^2)^(1/2) / |beta|) / F-bound`.
    pub max_f_ratio: f64,
    /// Maximum of `|<Bu, w>| / (C_j |u|_curl |w|_curl)`.
    pub max_pairing_ratio: f64,
    /// Maximum of `|Bu|_div / (C C_j |u|_curl)` with `C` the trace constant.
    pub max_operator_ratio: f64,
    pub trace_constant: f64,
    pub worst_case_inputs: Vec<AuditSample>,
}

/// Draws a frequency-wavenumber sample from the audit box.
pub fn sample_xi_s(rng: &mut ChaCha8Rng, r: &AuditRanges) -> ([f64; 2], ComplexFrequency<f64>) {
    let xi = if rng.gen::<f64>() < r.zero_xi_fraction {
        [0.0, 0.0]
    } else {
        let m = log_uniform(rng, r.xi_abs);
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        [m * th.cos(), m * th.sin()]
    };
    let s1 = log_uniform(rng, r.s1);
    let mut s2 = rng.gen_range(r.s2[0]..r.s2[1]);
    if s2 == 0.0 {
        s2 = 1.0;
    }
    (xi, ComplexFrequency::new(s1, s2).expect("s1 is positive"))
}

pub fn log_uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    (r[0].ln() + rng.gen::<f64>() * (r[1].ln() - r[0].ln())).exp()
}

fn random_pair(rng: &mut ChaCha8Rng) -> [C<f64>; 2] {
    [
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    ]
}

/// Seeded audit of the continuity bound, its F-bound ingredient, and
/// the positivity margin, for one exterior medium.
pub fn symbol_bound_audit(n_samples: usize, seed: u64, medium: &ExteriorMedium<f64>) -> Result<SymbolAudit> {
    symbol_bound_audit_with(n_samples, seed, medium, &AuditRanges::default(), 1.0)
}

pub fn symbol_bound_audit_with(
    n_samples: usize,
    seed: u64,
    medium: &ExteriorMedium<f64>,
    ranges: &AuditRanges,
    thickness: f64,
) -> Result<SymbolAudit> {
    if n_samples == 0 {
        return Err(Error::Parameter { name: "n_samples", reason: "must be at least 1".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tc = trace_constant(thickness);
    let w = WeightPreset::StandardWeight;
    let mut out = SymbolAudit {
        samples: n_samples,
        seed,
        ranges: ranges.clone(),
        eps: medium.eps,
        mu: medium.mu,
        min_positivity_margin: f64::INFINITY,
        max_continuity_ratio: 0.0,
        max_f_ratio: 0.0,
        max_pairing_ratio: 0.0,
        max_operator_ratio: 0.0,
        trace_constant: tc,
        worst_case_inputs: Vec::new(),
    };
    let mut worst: [Option<AuditSample>; 4] = Default::default();
    let mut record = |slot: usize, name: &str, xi: [f64; 2], s: ComplexFrequency<f64>, v: f64, better: bool| {
        if better {
            worst[slot] = Some(AuditSample {
                quantity: name.into(),
                xi,
                s: [s.s1(), s.s2()],
                eps: medium.eps,
                mu: medium.mu,
                value: v,
            });
        }
    };
    for _ in 0..n_samples {
        let (xi, s) = sample_xi_s(&mut rng, ranges);
        let cj = continuity_constant(s, medium)?;
        let fb = f_bound(s, medium)?;
        let b = beta(xi, s, medium)?;
        let f = (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt() / b.norm();
        let m = capacity_matrix(xi, s, medium)?.matrix;
        let u = random_pair(&mut rng);
        let v = random_pair(&mut rng);
        let bu = m.apply(u);
        let nu = trace_norm_sq_mode(u, xi, TraceKind::CurlMinusHalf, w).sqrt();
        let nv = trace_norm_sq_mode(v, xi, TraceKind::CurlMinusHalf, w).sqrt();
        let nbu = trace_norm_sq_mode(bu, xi, TraceKind::DivMinusHalf, w).sqrt();
        let pair = (bu[0] * v[0].conj() + bu[1] * v[1].conj()).norm();
        let margin = (bu[0] * u[0].conj() + bu[1] * u[1].conj()).re / (u[0].norm_sqr() + u[1].norm_sqr());

        let cr = nbu / (cj * nu);
        record(0, "continuity_ratio", xi, s, cr, cr > out.max_continuity_ratio);
        out.max_continuity_ratio = out.max_continuity_ratio.max(cr);
        let fr = f / fb;
        record(1, "f_ratio", xi, s, fr, fr > out.max_f_ratio);
        out.max_f_ratio = out.max_f_ratio.max(fr);
        let pr = pair / (cj * nu * nv);
        record(2, "pairing_ratio", xi, s, pr, pr > out.max_pairing_ratio);
        out.max_pairing_ratio = out.max_pairing_ratio.max(pr);
        record(3, "positivity_margin", xi, s, margin, margin < out.min_positivity_margin);
        out.min_positivity_margin = out.min_positivity_margin.min(margin);
        out.max_operator_ratio = out.max_operator_ratio.max(nbu / (tc * cj * nu));
    }
    out.worst_case_inputs = worst.into_iter().flatten().collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vac(side: Side) -> ExteriorMedium<f64> {
        ExteriorMedium::new(1.0, 1.0, side).unwrap()
    }

    fn sf(a: f64, b: f64) -> ComplexFrequency<f64> {
        ComplexFrequency::new(a, b).unwrap()
    }

    #[test]
    fn frequency_requires_positive_real_part() {
        assert!(ComplexFrequency::new(0.0, 1.0).is_err());
        assert!(ComplexFrequency::new(-1.0, 0.0).is_err());
        assert!(ComplexFrequency::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn beta_examples() {
        let m = vac(Side::Top);
        assert!((beta([0.0, 0.0], sf(1.0, 0.0), &m).unwrap() - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!((beta([0.0, 0.0], sf(1.0, 1.0), &m).unwrap() - C::new(1.0, 1.0)).norm() < 1e-15);
        let b = beta([3.0, 4.0], sf(2.0, 0.0), &m).unwrap();
        assert!((b.re - 29f64.sqrt()).abs() < 1e-14 && b.im == 0.0);
    }

    #[test]
    fn zero_mode_symbol_is_admittance() {
        let m = ExteriorMedium::new(4.0, 0.25, Side::Bottom).unwrap();
        let c = capacity_matrix([0.0, 0.0], sf(0.3, -2.0), &m).unwrap().matrix;
        assert!((c - Mat2::scalar(C::new(4.0, 0.0))).max_abs() < 1e-14);
    }

    #[test]
    fn hand_evaluated_symbol() {
        let c = capacity_matrix([1.0, 0.0], sf(1.0, 0.0), &vac(Side::Top)).unwrap().matrix;
        let r = 2f64.sqrt();
        let expect = Mat2::new(C::new(1.0 / r, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(2.0 / r, 0.0));
        assert!((c - expect).max_abs() < 1e-15);
    }

    #[test]
    fn continuity_constant_examples() {
        let c = continuity_constant(sf(1.0, 1.0), &vac(Side::Top)).unwrap();
        assert!((c - 1.25f64.powf(0.25) * 2.0).abs() < 1e-14);
        assert!((c - 2.1147425).abs() < 1e-7);
        // s1^2 - s2^2 = 1 puts a on the boundary case a = 1
        let s2: f64 = 0.75;
        let s = sf((1.0 + s2 * s2).sqrt(), s2);
        let b = 2.0 * s.s1() * s2;
        let expect = (1.0 + b * b).sqrt() / s.s1();
        assert!((continuity_constant(s, &vac(Side::Top)).unwrap() - expect).abs() < 1e-13);
        assert!(matches!(
            continuity_constant(sf(2.0, 0.0), &vac(Side::Top)),
            Err(Error::DegenerateConstant(_))
        ));
    }

    #[test]
    fn identities_examples() {
        let (r2, r3) = beta_identities([0.0, 0.0], sf(3.0, 0.0), &vac(Side::Top)).unwrap();
        assert_eq!((r2, r3), (0.0, 0.0));
        let (r2, r3) = beta_identities([3.0, 4.0], sf(1.0, 2.0), &vac(Side::Top)).unwrap();
        assert!(r2 <= 1e-12 && r3 <= 1e-12);
    }

    #[test]
    fn small_audit_is_consistent() {
        let a = symbol_bound_audit(500, 3, &vac(Side::Top)).unwrap();
        assert!(a.max_continuity_ratio <= 1.0 + 1e-9);
        assert!(a.max_f_ratio <= 1.0 + 1e-12);
        assert!(a.min_positivity_margin >= -1e-12);
        let w = a.worst_case_inputs.iter().find(|w| w.quantity == "continuity_ratio").unwrap();
        assert_eq!(w.value, a.max_continuity_ratio);
    }

    #[test]
    fn works_in_single_precision() {
        let m = ExteriorMedium::new(2.0f32, 0.5, Side::Top).unwrap();
        let s = ComplexFrequency::new(0.7f32, 1.3).unwrap();
        let a = capacity_matrix([0.4f32, -1.1], s, &m).unwrap().matrix;
        let b = capacity_matrix_div_form([0.4f32, -1.1], s, &m).unwrap();
        assert!((a - b).max_abs() < 1e-5 * a.max_abs());
    }
}
