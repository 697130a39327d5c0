//! Time-domain reference for a single lateral mode: the per-mode s-domain
//! solver sampled on a convolution-quadrature contour and transformed back.

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::cq::{ContourParams, Generator};
use crate::error::{Error, Result};
use crate::num::C;
use crate::sdomain::{solve_mode, Closure, LayeredProfile, ModeField};
use crate::stepper::TemporalProfile;
use crate::symbols::ComplexFrequency;

/// Fields `E^n`, `n = 0..=steps`, for the current `j(z) f(t)` of one lateral
/// mode `xi`, zero initial data and the transparent closure.
///
/// With `z_l = lambda zeta_l` on the contour and `F(z) = sum_k f(k dt) z^k`,
/// `E^n = lambda^-n / M sum_l zeta_l^-n F(z_l) S(delta(z_l)/dt)(-j)`.
pub fn mode_response(
    xi: [f64; 2],
    profile: &LayeredProfile<f64>,
    current: &ModeField<f64>,
    temporal: TemporalProfile,
    dt: f64,
    steps: usize,
    generator: Generator,
) -> Result<Vec<ModeField<f64>>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter { name: "dt", reason: format!("{dt} must be positive") });
    }
    let nz = current.nz();
    let contour = ContourParams::<f64>::with_oversampling(steps, 2);
    let m = contour.points;
    let lam = contour.radius;
    let f: Vec<f64> = (0..=steps).map(|k| temporal.value(k as f64 * dt)).collect();
    let width = 3 * nz + 2;

    let samples: Vec<Vec<C<f64>>> = (0..m)
        .into_par_iter()
        .map(|l| -> Result<Vec<C<f64>>> {
            let th = std::f64::consts::TAU * l as f64 / m as f64;
            let z = C::from_polar(lam, th);
            let big_f = f.iter().rev().fold(C::new(0.0, 0.0), |acc, v| acc * z + *v);
            let s = ComplexFrequency::from_complex(generator.delta(z) / dt)?;
            let sol = solve_mode(xi, s, profile, &current.scale(-big_f), None, Closure::Transparent)?;
            Ok(flatten(&sol.field))
        })
        .collect::<Result<_>>()?;

    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut out = vec![vec![C::new(0.0, 0.0); width]; steps + 1];
    let mut col = vec![C::new(0.0, 0.0); m];
    for u in 0..width {
        for (l, s) in samples.iter().enumerate() {
            col[l] = s[u];
        }
        fft.process(&mut col);
        let mut scale = 1.0 / m as f64;
        for (n, row) in out.iter_mut().enumerate() {
            row[u] = col[n] * scale;
            scale /= lam;
        }
    }
    Ok(out.iter().map(|v| unflatten(v, nz)).collect())
}

fn flatten(f: &ModeField<f64>) -> Vec<C<f64>> {
    f.c1.iter().chain(&f.c2).chain(&f.c3).copied().collect()
}

fn unflatten(v: &[C<f64>], nz: usize) -> ModeField<f64> {
    ModeField { c1: v[..=nz].to_vec(), c2: v[nz + 1..2 * nz + 2].to_vec(), c3: v[2 * nz + 2..].to_vec() }
}

/// `(4 fine - coarse) / 3` on the nodes of `coarse`; `fine` has twice as many
/// cells. Only the node components are extrapolated; `c3` is left empty.
pub fn richardson(coarse: &ModeField<f64>, fine: &ModeField<f64>) -> Result<ModeField<f64>> {
    let nz = coarse.nz();
    if fine.nz() != 2 * nz {
        return Err(Error::GridMismatch(format!("fine grid has {} cells, expected {}", fine.nz(), 2 * nz)));
    }
    let ex = |a: &[C<f64>], b: &[C<f64>]| (0..=nz).map(|k| (b[2 * k] * 4.0 - a[k]) / 3.0).collect();
    Ok(ModeField { c1: ex(&coarse.c1, &fine.c1), c2: ex(&coarse.c2, &fine.c2), c3: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_current_gives_zero_response() {
        let p = LayeredProfile::homogeneous(0.0, 1.0, 1.0, 1.0).unwrap();
        let r = mode_response([1.0, 0.0], &p, &ModeField::zeros(16), TemporalProfile::Step, 0.05, 8, Generator::Bdf2)
            .unwrap();
        assert!(r.iter().all(|f| f.l2(1.0 / 16.0) == 0.0));
    }

    #[test]
    fn response_is_causal() {
        let p = LayeredProfile::homogeneous(0.0, 1.0, 1.0, 1.0).unwrap();
        let mut j = ModeField::zeros(16);
        j.c1[8] = C::new(1.0, 0.0);
        let f = TemporalProfile::SinSquaredPulse { duration: 1.0 };
        let r = mode_response([1.0, 0.0], &p, &j, f, 0.05, 20, Generator::Bdf2).unwrap();
        assert!(r[0].l2(1.0 / 16.0) < 1e-10);
        assert!(r[20].l2(1.0 / 16.0) > 1e-3);
    }
}
