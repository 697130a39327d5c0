use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{spread, Bound, CheckResult};
use crate::cq::{
    cq_weights_scalar, laplace_transform, parseval_residual, passivity_certificate, CQKernel, ContourParams, Generator,
    OperatorKind, TimeSignal,
};
use crate::error::Result;
use crate::num::C;
use crate::sdomain::{
    lemma_es_check, solve_mode, theorem_at_check, BoundaryData, Closure, LayeredProfile, ModeField,
};
use crate::spectral::{
    duality_pairing, hcurl_norm, trace_norm, trace_norm_with, LateralFft, LateralGrid, Side, SlabField, TangentialTrace,
    TraceKind, WeightPreset,
};
use crate::stepper::{run, LateralShape, RunPlan, SlabMedium, SourceTerm, VerticalPulse};
use crate::symbols::{
    beta, beta_identities, capacity_matrix, capacity_matrix_div_form, grid_capacity_matrix, log_uniform,
    positivity_margin, sample_xi_s, ComplexFrequency, symbol_bound_audit_with, trace_constant, AuditRanges, ExteriorMedium,
};

const BETA_RESIDUAL_TOL: f64 = 1e-13;
const FORM_TOL: f64 = 1e-12;
const ROUNDOFF_SLACK: f64 = 1e-12;
const CONTINUITY_SLACK: f64 = 1e-9;
const TRACE_SLACK: f64 = 1.05;
const PARSEVAL_TOL: f64 = 1e-6;
const PASSIVITY_TOL: f64 = 1e-10;
const PULSE_WORK_TOL: f64 = 1e-8;
const REFINEMENT_SPREAD: f64 = 1.2;
const HOMOGENEITY_TOL: f64 = 1e-12;
const GREEN_TOL: f64 = 1e-8;

fn c(x: f64) -> C<f64> {
    C::new(x, 0.0)
}

fn random_pair(rng: &mut ChaCha8Rng) -> [C<f64>; 2] {
    [C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))]
}

/// Branch of `beta` and agreement of the two algebraic forms of the
/// capacity symbol on both planes.
pub fn check_branch_and_forms(samples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges = AuditRanges::default();
    let mut min_re = f64::INFINITY;
    let mut sq_res: f64 = 0.0;
    let mut id_res: f64 = 0.0;
    let mut form = [0.0f64; 2];
    for _ in 0..samples {
        let (xi, s) = sample_xi_s(&mut rng, &ranges);
        let eps = log_uniform(&mut rng, [0.1, 10.0]);
        let mu = log_uniform(&mut rng, [0.1, 10.0]);
        for (i, side) in Side::BOTH.iter().enumerate() {
            let m = ExteriorMedium::new(eps, mu, *side)?;
            let b = beta(xi, s, &m)?;
            min_re = min_re.min(b.re / b.norm());
            let sv = s.value();
            let z = sv * sv * (eps * mu) + c(xi[0] * xi[0] + xi[1] * xi[1]);
            sq_res = sq_res.max((b * b - z).norm() / b.norm_sqr());
            let (r2, r3) = beta_identities(xi, s, &m)?;
            id_res = id_res.max(r2).max(r3);
            let a = capacity_matrix(xi, s, &m)?.matrix;
            let d = capacity_matrix_div_form(xi, s, &m)?;
            form[i] = form[i].max((a - d).max_abs() / a.max_abs());
        }
    }
    let mut r = CheckResult::new("branch-and-forms", Some(seed), json!({ "samples": samples, "ranges": ranges }));
    r.measure("min Re(beta)/|beta|", min_re, Bound::AtLeast { limit: f64::MIN_POSITIVE })
        .measure("max beta^2 residual", sq_res, Bound::AtMost { limit: BETA_RESIDUAL_TOL })
        .measure("max real/imag identity residual", id_res, Bound::AtMost { limit: BETA_RESIDUAL_TOL })
        .measure("max form defect (top)", form[0], Bound::AtMost { limit: FORM_TOL })
        .measure("max form defect (bottom)", form[1], Bound::AtMost { limit: FORM_TOL });
    Ok(r.finish())
}

/// `|<u, v>| <= |u|_div |v|_curl` for random traces.
pub fn check_duality(pairs: usize, seed: u64) -> Result<CheckResult> {
    let g = LateralGrid::new(1.0, 1.0, 16, 16, 1.0, 0.0, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let n = g.n_lateral();
    for _ in 0..pairs {
        let decay = rng.gen_range(0.0..2.0);
        let draw = |rng: &mut ChaCha8Rng| {
            let coeffs = (0..n)
                .map(|i| {
                    let xi = g.xi(i);
                    let w = (1.0f64 + xi[0] * xi[0] + xi[1] * xi[1]).powf(-decay / 2.0);
                    random_pair(rng).map(|v| v * w)
                })
                .collect();
            TangentialTrace::from_coeffs(&g, Side::Top, coeffs)
        };
        let u = draw(&mut rng)?;
        let v = draw(&mut rng)?;
        let p = duality_pairing(&u, &v)?.norm();
        worst = worst.max(p / (trace_norm(&u, TraceKind::DivMinusHalf) * trace_norm(&v, TraceKind::CurlMinusHalf)));
    }
    let mut r = CheckResult::new("duality-pairing", Some(seed), json!({ "pairs": pairs, "grid": g }));
    r.measure("max |<u,v>| / (|u|_div |v|_curl)", worst, Bound::AtMost { limit: 1.0 + ROUNDOFF_SLACK });
    Ok(r.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceInequalityConfig {
    pub n_fields: usize,
    pub modes: usize,
    pub cells_z: usize,
    pub thickness: f64,
    #[serde(default)]
    pub weight: WeightPreset,
}

impl Default for TraceInequalityConfig {
    fn default() -> Self {
        TraceInequalityConfig { n_fields: 1000, modes: 32, cells_z: 64, thickness: 1.0, weight: WeightPreset::StandardWeight }
    }
}

/// One vertical profile of a random test field.
fn profile(rng: &mut ChaCha8Rng, h: f64) -> Box<dyn Fn(f64) -> f64> {
    match rng.gen_range(0..4) {
        0 => {
            let a = rng.gen_range(0.0..20.0);
            Box::new(move |z| (-a * (h - z)).exp())
        }
        1 => {
            let a = rng.gen_range(0.0..20.0);
            Box::new(move |z| (-a * z).exp())
        }
        2 => {
            let (p, q, r) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            Box::new(move |z| p + q * z / h + r * (z / h) * (z / h))
        }
        _ => {
            let (k, ph) = (rng.gen_range(0.0..8.0), rng.gen_range(0.0..std::f64::consts::TAU));
            Box::new(move |z| (k * z / h + ph).cos())
        }
    }
}

/// Tangential trace norm over the `H(curl)` norm for random discrete fields
/// on both planes, against the explicit constant of the trace inequality.
pub fn check_trace_inequality(cfg: &TraceInequalityConfig, seed: u64) -> Result<CheckResult> {
    let g = LateralGrid::new(1.0, 1.0, cfg.modes, cfg.modes, cfg.thickness, 0.0, cfg.cells_z + 1)?;
    let fft = LateralFft::new(&g);
    let bound = trace_constant(cfg.thickness);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = cfg.thickness;
    let mut worst: f64 = 0.0;
    let mut examples = [0.0f64; 2];
    let kmax = (cfg.modes / 8).max(1) as i64;
    for f in 0..cfg.n_fields {
        let field = match f {
            0 => SlabField::from_fn(&g, |_, _, _| [c(1.0), c(-0.5), c(0.25)]),
            1 => SlabField::from_fn(&g, |_, _, z| [c(z), c(1.0 - z), c(0.0)]),
            _ => {
                let terms: Vec<_> = (0..3)
                    .map(|_| {
                        let comp = rng.gen_range(0..3usize);
                        let m = [rng.gen_range(-kmax..=kmax), rng.gen_range(-kmax..=kmax)];
                        let amp = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                            / (1.0 + (m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
                        (comp, m, amp, profile(&mut rng, h))
                    })
                    .collect();
                SlabField::from_fn(&g, |x, y, z| {
                    let mut v = [c(0.0); 3];
                    for (comp, m, amp, p) in &terms {
                        let ph = std::f64::consts::TAU * (m[0] as f64 * x + m[1] as f64 * y);
                        v[*comp] += *amp * C::new(0.0, ph).exp() * p(z);
                    }
                    v
                })
            }
        };
        let norm = hcurl_norm(&field)?;
        for side in Side::BOTH {
            let t = field.trace(&fft, side)?;
            let ratio = trace_norm_with(&t, TraceKind::CurlMinusHalf, cfg.weight) / norm;
            worst = worst.max(ratio);
            if f < 2 {
                examples[f] = examples[f].max(ratio);
            }
        }
    }
    let mut r = CheckResult::new("trace-inequality", Some(seed), serde_json::to_value(cfg).unwrap_or_default());
    let lim = Bound::AtMost { limit: bound * TRACE_SLACK };
    r.measure("trace constant", bound, Bound::Report)
        .measure("ratio, constant field", examples[0], lim)
        .measure("ratio, z-linear field", examples[1], lim)
        .measure("max ratio", worst, lim);
    Ok(r.finish())
}

fn audit_media() -> Result<[ExteriorMedium<f64>; 2]> {
    Ok([ExteriorMedium::new(1.0, 1.0, Side::Top)?, ExteriorMedium::new(2.5, 1.3, Side::Bottom)?])
}

/// Sampled operator norm of the capacity symbol between the trace spaces
/// against the explicit continuity constant, and the pointwise bound on
/// `(1+|xi|^2)^(1/2) / |beta|`.
pub fn check_continuity(samples: usize, seed: u64) -> Result<CheckResult> {
    let mut op: f64 = 0.0;
    let mut f: f64 = 0.0;
    let mut pair: f64 = 0.0;
    for (i, m) in audit_media()?.iter().enumerate() {
        let a = symbol_bound_audit_with(samples, seed.wrapping_add(i as u64), m, &AuditRanges::default(), 1.0)?;
        op = op.max(a.max_operator_ratio);
        f = f.max(a.max_f_ratio);
        pair = pair.max(a.max_pairing_ratio);
    }
    let mut r = CheckResult::new("capacity-continuity", Some(seed), json!({ "samples": samples, "media": audit_media()? }));
    r.measure("max |Bu|_div / (C C_j |u|_curl)", op, Bound::AtMost { limit: 1.0 + CONTINUITY_SLACK })
        .measure("max |<Bu,w>| / (C_j |u| |w|)", pair, Bound::AtMost { limit: 1.0 + CONTINUITY_SLACK })
        .measure("max decay ratio / F-bound", f, Bound::AtMost { limit: 1.0 + ROUNDOFF_SLACK });
    Ok(r.finish())
}

/// `Re <B u, u> >= 0` for random traces and frequencies, and a positive
/// semidefinite Hermitian part mode by mode.
pub fn check_positivity(samples: usize, seed: u64) -> Result<CheckResult> {
    let g = LateralGrid::new(1.0, 1.0, 8, 8, 1.0, 0.0, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges = AuditRanges::default();
    let mut margin = f64::INFINITY;
    let mut eig = f64::INFINITY;
    for k in 0..samples {
        let (_, s) = sample_xi_s(&mut rng, &ranges);
        let eps = log_uniform(&mut rng, [0.1, 10.0]);
        let mu = log_uniform(&mut rng, [0.1, 10.0]);
        let side = if k % 2 == 0 { Side::Top } else { Side::Bottom };
        let m = ExteriorMedium::new(eps, mu, side)?;
        let coeffs: Vec<_> = (0..g.n_lateral()).map(|_| random_pair(&mut rng)).collect();
        let u = TangentialTrace::from_coeffs(&g, side, coeffs)?;
        let norm = u.l2_sq();
        margin = margin.min(positivity_margin(&u, s, &m)? / norm);
        if k % 16 == 0 {
            for i in 0..g.n_lateral() {
                let mat = grid_capacity_matrix(&g, i, s, &m)?;
                let e = mat.hermitian_part_eigs();
                eig = eig.min(e[0].min(e[1]) / mat.max_abs());
            }
        }
    }
    let mut r = CheckResult::new("capacity-positivity", Some(seed), json!({ "samples": samples, "grid": g }));
    r.measure("min Re<Bu,u> / |u|^2", margin, Bound::AtLeast { limit: -ROUNDOFF_SLACK })
        .measure("min Hermitian-part eigenvalue / |B|", eig, Bound::AtLeast { limit: -ROUNDOFF_SLACK });
    Ok(r.finish())
}

/// Parseval identity for the Laplace transform on an exponential pair, the
/// transform of an antiderivative, and the backward Euler integrator
/// weights.
pub fn check_parseval() -> Result<CheckResult> {
    let dt = 2e-3;
    let n = 8000;
    let u = TimeSignal::from_fn(dt, n, |t: f64| (-t).exp());
    let v = TimeSignal::from_fn(dt, n, |t: f64| (-2.0 * t).exp());
    let s1 = 0.5;
    let rep = parseval_residual(&u, &v, s1)?;
    // int_0^inf e^{-t} e^{-2t} e^{-t} dt
    let exact = 0.25;
    let analytic = (rep.frequency_side[0] - exact).abs().max(rep.frequency_side[1].abs());

    // antiderivative of e^{-t} is 1 - e^{-t}; its transform is u_hat / s
    let fine = 5e-4;
    let uf = TimeSignal::from_fn(fine, 32_000, |t: f64| (-t).exp());
    let w = TimeSignal::from_fn(fine, 32_000, |t: f64| 1.0 - (-t).exp());
    let mut a1: f64 = 0.0;
    for s in [C::new(2.0, 0.0), C::new(2.5, 3.0), C::new(3.0, -7.0)] {
        let lhs = laplace_transform(&w, s);
        let rhs = laplace_transform(&uf, s) / s;
        a1 = a1.max((lhs - rhs).norm() / rhs.norm());
    }

    let steps = 200;
    let wdt = 0.01;
    let weights = cq_weights_scalar(|s| c(1.0) / s, wdt, steps, Generator::Bdf1, &ContourParams::for_horizon(steps))?;
    let integ = weights.iter().map(|x| (x - c(wdt)).norm() / wdt).fold(0.0, f64::max);

    let mut r = CheckResult::new("laplace-parseval", None, json!({ "dt": dt, "samples": n, "s1": s1 }));
    r.measure("parseval residual", rep.residual, Bound::AtMost { limit: PARSEVAL_TOL })
        .measure("deviation from analytic value", analytic, Bound::AtMost { limit: PARSEVAL_TOL })
        .measure("antiderivative transform defect", a1, Bound::AtMost { limit: PARSEVAL_TOL })
        .measure("max |W_n - dt| / dt (backward Euler, 1/s)", integ, Bound::AtMost { limit: ROUNDOFF_SLACK });
    Ok(r.finish())
}

/// Discrete time-domain positivity of the boundary operator: random trace
/// histories through the convolution weights of both generators, and the
/// cumulative boundary work of a transparent pulse run.
pub fn check_passivity(trials: usize, seed: u64) -> Result<CheckResult> {
    let g = LateralGrid::new(1.0, 1.0, 4, 4, 1.0, 0.0, 2)?;
    let n = 64;
    let contour = ContourParams::for_horizon(n);
    let mut cert = f64::INFINITY;
    for (i, gen) in [Generator::Bdf1, Generator::Bdf2].into_iter().enumerate() {
        for (j, m) in audit_media()?.iter().enumerate() {
            let k = CQKernel::capacity(&g, m, OperatorKind::C, gen, 0.05, n, &contour)?;
            let t = trials.div_ceil(4);
            cert = cert.min(passivity_certificate(&k, t, seed.wrapping_add((2 * i + j) as u64))?);
        }
    }

    let grid = LateralGrid::new(1.0, 1.0, 16, 16, 2.0, 0.0, 33)?;
    let medium = SlabMedium::homogeneous(&grid, 1.0, 1.0)?;
    let l = medium.layout;
    let p = VerticalPulse {
        center: [0.5, 0.5, 1.0],
        radius: [0.4, 0.4, 0.5],
        amplitude: 1.0,
        direction: 1.0,
        eps: 1.0,
        mu: 1.0,
        lateral: LateralShape::Bump,
    };
    let (e0, h0) = p.fields(&l);
    let src = SourceTerm::zeros(&l).with_initial(e0, h0).with_support(p.support(&l));
    let dt = 0.5 * medium.cfl_limit();
    let out = run(&medium, &src, dt, &RunPlan::new(Closure::Transparent, 400))?;
    let max_e1 = out.report.max_e1();
    let min_work = out.report.rows.iter().map(|r| r.boundary_work).fold(f64::INFINITY, f64::min);
    let min_step = out.report.rows.windows(2).map(|w| w[1].boundary_work - w[0].boundary_work).fold(f64::INFINITY, f64::min);

    let mut r = CheckResult::new(
        "boundary-passivity",
        Some(seed),
        json!({ "trials": trials, "horizon": n, "pulse": p, "pulse_grid": grid, "pulse_steps": 400 }),
    );
    r.measure("min random-history work / |u|^2", cert, Bound::AtLeast { limit: -PASSIVITY_TOL })
        .measure("min cumulative pulse work / max e1", min_work / max_e1, Bound::AtLeast { limit: -PULSE_WORK_TOL })
        .measure("min per-step pulse work / max e1", min_step / max_e1, Bound::AtLeast { limit: -PULSE_WORK_TOL })
        .measure("energy left through the planes / e1(0)", out.state.boundary_work / out.report.rows[0].e1, Bound::Report);
    Ok(r.finish())
}

/// Smooth source on `[0, d]`, all three components nonzero.
pub fn smooth_mode_source(nz: usize, d: f64) -> ModeField<f64> {
    let dz = d / nz as f64;
    let mut src = ModeField::zeros(nz);
    for k in 0..=nz {
        let z = k as f64 * dz / d;
        src.c1[k] = c((std::f64::consts::PI * z).sin().powi(2));
        src.c2[k] = C::new(0.0, z * (1.0 - z));
    }
    for k in 0..nz {
        let z = (k as f64 + 0.5) * dz / d;
        src.c3[k] = c(z * z);
    }
    src
}

/// Ratio at each (s, xi) sample for two resolutions, plus homogeneity.
fn ratio_study(
    id: &str,
    closure: Closure,
    ratio: &dyn Fn(usize, f64, ComplexFrequency<f64>, [f64; 2]) -> Result<f64>,
) -> Result<CheckResult> {
    let cases = [([1.0, 1.0], [0.0, 0.0]), ([0.5, 2.0], [1.0, 0.5]), ([2.0, -1.0], [3.0, 0.0]), ([0.25, 0.5], [0.5, 2.0])];
    let mut worst_spread: f64 = 1.0;
    let mut worst_ratio: f64 = 0.0;
    let mut homog: f64 = 0.0;
    for (s, xi) in cases {
        let s = ComplexFrequency::new(s[0], s[1])?;
        let a = ratio(128, 1.0, s, xi)?;
        let b = ratio(256, 1.0, s, xi)?;
        let h = ratio(128, 3.0, s, xi)?;
        worst_spread = worst_spread.max(spread(&[a, b]));
        worst_ratio = worst_ratio.max(a).max(b);
        homog = homog.max((a - h).abs() / a);
    }
    let mut r = CheckResult::new(id, None, json!({ "closure": closure, "nz": [128, 256], "cases": cases }));
    r.measure("max measured constant", worst_ratio, Bound::Finite)
        .measure("refinement spread", worst_spread, Bound::AtMost { limit: REFINEMENT_SPREAD })
        .measure("homogeneity defect", homog, Bound::AtMost { limit: HOMOGENEITY_TOL });
    Ok(r.finish())
}

fn unit_slab() -> Result<LayeredProfile<f64>> {
    LayeredProfile::new(vec![0.0, 0.4, 1.0], vec![1.0, 2.0], vec![1.0, 1.5])
}

/// Bound for the auxiliary s-domain problem with the transparent closure:
/// `(|curl u| + |s u|) s1 / |s j|` measured and shown to be resolution
/// independent.
pub fn check_auxiliary_bound() -> Result<CheckResult> {
    let p = unit_slab()?;
    ratio_study("auxiliary-bound", Closure::Transparent, &|nz, a, s, xi| {
        let src = smooth_mode_source(nz, 1.0).scale(c(a));
        let sol = solve_mode(xi, s, &p, &src, None, Closure::Transparent)?;
        theorem_at_check(&sol, &src, s)
    })
}

/// Same ratio for the conductor-closed slab.
pub fn check_conductor_bound() -> Result<CheckResult> {
    let p = unit_slab()?;
    ratio_study("conductor-bound", Closure::Pec, &|nz, a, s, xi| {
        let src = smooth_mode_source(nz, 1.0).scale(c(a));
        let sol = solve_mode(xi, s, &p, &src, None, Closure::Pec)?;
        theorem_at_check(&sol, &src, s)
    })
}

/// Bound for the reduced s-domain problem with a current and boundary
/// data `V x n`.
pub fn check_reduced_sdomain_bound() -> Result<CheckResult> {
    let p = unit_slab()?;
    let g = BoundaryData { top: [C::new(0.3, 0.1), C::new(-0.2, 0.0)], bottom: [C::new(0.0, 0.4), C::new(0.1, -0.1)] };
    ratio_study("reduced-sdomain-bound", Closure::Transparent, &|nz, a, s, xi| {
        let src = smooth_mode_source(nz, 1.0).scale(c(a));
        let bd = BoundaryData { top: g.top.map(|v| v * a), bottom: g.bottom.map(|v| v * a) };
        let rhs = src.scale(c(-1.0));
        let sol = solve_mode(xi, s, &p, &rhs, Some(&bd), Closure::Transparent)?;
        lemma_es_check(&sol, &src, &bd, s)
    })
}

/// Error of the per-mode solver against the closed-form response to a
/// point source at normal incidence.
pub fn green_error(nz: usize) -> Result<f64> {
    let d = 0.25;
    let s = ComplexFrequency::new(0.5, 0.5)?;
    let p = LayeredProfile::homogeneous(0.0, d, 1.0, 1.0)?;
    let dz = d / nz as f64;
    let mut src = ModeField::zeros(nz);
    src.c1[nz / 2] = c(1.0 / dz);
    let sol = solve_mode([0.0, 0.0], s, &p, &src, None, Closure::Transparent)?;
    let sv = s.value();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..=nz {
        let z = k as f64 * dz;
        // s mu / (2 beta) exp(-beta |z - z0|) with beta = s
        let exact = c(0.5) * (-(sv * (z - d / 2.0).abs())).exp();
        err = err.max((sol.field.c1[k] - exact).norm());
        scale = scale.max(exact.norm());
    }
    Ok(err / scale)
}

/// Closed-form agreement and convergence order of the per-mode solver.
pub fn check_sdomain_oracle() -> Result<CheckResult> {
    let e: Vec<f64> = [64, 128, 256, 512].into_iter().map(green_error).collect::<Result<_>>()?;
    let orders: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mut r = CheckResult::new("sdomain-oracle", None, json!({ "nz": [64, 128, 256, 512], "s": [0.5, 0.5], "width": 0.25 }));
    r.measure("max error at nz = 512", e[3], Bound::AtMost { limit: GREEN_TOL })
        .measure("min observed order", orders.iter().cloned().fold(f64::INFINITY, f64::min), Bound::Within { lo: 1.9, hi: 2.1 })
        .measure("max observed order", orders.iter().cloned().fold(0.0, f64::max), Bound::Within { lo: 1.9, hi: 2.1 });
    Ok(r.finish())
}
