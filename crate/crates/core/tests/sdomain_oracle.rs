use num_complex::Complex64 as C64;
use slab_tbc::sdomain::{lemma_es_check, outgoing_extension, solve_mode, theorem_at_check, BoundaryData, Closure, LayeredProfile, ModeField};
use slab_tbc::spectral::Side;
use slab_tbc::symbols::beta;
use slab_tbc::symbols::ComplexFrequency;

fn green_error(nz: usize) -> f64 {
    let d = 0.25;
    let s = ComplexFrequency::new(0.5, 0.5).unwrap();
    let p = LayeredProfile::homogeneous(0.0, d, 1.0, 1.0).unwrap();
    let dz = d / nz as f64;
    let a = C64::new(1.0, 0.0);
    let mut src = ModeField::zeros(nz);
    src.c1[nz / 2] = a / dz;
    let sol = solve_mode([0.0, 0.0], s, &p, &src, None, Closure::Transparent).unwrap();
    let sv = s.value();
    let z0 = d / 2.0;
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..=nz {
        let z = k as f64 * dz;
        let exact = sv * a / (2.0 * sv) * (-(sv * (z - z0).abs())).exp();
        err = err.max((sol.field.c1[k] - exact).norm());
        scale = scale.max(exact.norm());
        assert!(sol.field.c2[k].norm() < 1e-14);
    }
    err / scale
}

#[test]
fn delta_source_matches_closed_form_green_function() {
    let e = [64, 128, 256, 512].map(green_error);
    println!("{e:?}");
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.9..=2.1).contains(&order), "order {order}");
    }
    assert!(e[3] < 1e-8, "{}", e[3]);
}

fn smooth_source(nz: usize, d: f64) -> ModeField<f64> {
    let dz = d / nz as f64;
    let mut src = ModeField::zeros(nz);
    for k in 0..=nz {
        let z = k as f64 * dz / d;
        src.c1[k] = C64::new((std::f64::consts::PI * z).sin().powi(2), 0.0);
        src.c2[k] = C64::new(0.0, z * (1.0 - z));
    }
    for k in 0..nz {
        let z = (k as f64 + 0.5) * dz / d;
        src.c3[k] = C64::new(z * z, 0.0);
    }
    src
}

fn at_ratio(nz: usize, s: ComplexFrequency<f64>, xi: [f64; 2], scale: f64) -> f64 {
    let p = LayeredProfile::homogeneous(0.0, 1.0, 1.0, 1.0).unwrap();
    let src = smooth_source(nz, 1.0).scale(C64::new(scale, 0.0));
    let sol = solve_mode(xi, s, &p, &src, None, Closure::Transparent).unwrap();
    theorem_at_check(&sol, &src, s).unwrap()
}

#[test]
fn theorem_at_ratio_is_homogeneous() {
    let s = ComplexFrequency::new(1.0, 1.0).unwrap();
    let a = at_ratio(64, s, [0.5, 0.0], 1.0);
    let b = at_ratio(64, s, [0.5, 0.0], 2.0);
    assert!((a - b).abs() < 1e-12 * a);
}

#[test]
fn theorem_at_ratio_is_refinement_stable() {
    let s = ComplexFrequency::new(1.0, 1.0).unwrap();
    let r: Vec<f64> = [128, 256, 512].iter().map(|&n| at_ratio(n, s, [0.0, 0.0], 1.0)).collect();
    assert!(r.iter().all(|v| v.is_finite()));
    assert!(((r[2] - r[1]) / r[2]).abs() < 5e-4, "{r:?}");
}

#[test]
fn theorem_at_ratio_is_bounded_over_s1_sweep() {
    let dir = C64::new(1.0, 1.0) / 2f64.sqrt();
    let r: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&m| {
            let v = dir * m * 2f64.sqrt();
            at_ratio(128, ComplexFrequency::new(v.re, v.im).unwrap(), [1.0, 0.5], 1.0)
        })
        .collect();
    assert!(r.iter().all(|v| v.is_finite() && *v < 10.0), "{r:?}");
}

#[test]
fn lemma_es_ratio_is_stable_and_homogeneous() {
    let s = ComplexFrequency::new(1.0, 1.0).unwrap();
    let p = LayeredProfile::homogeneous(0.0, 1.0, 1.0, 1.0).unwrap();
    let g = BoundaryData {
        top: [C64::new(0.3, 0.1), C64::new(-0.2, 0.0)],
        bottom: [C64::new(0.0, 0.4), C64::new(0.1, -0.1)],
    };
    let run = |nz: usize, a: f64| {
        let src = smooth_source(nz, 1.0).scale(C64::new(a, 0.0));
        let bd = BoundaryData { top: g.top.map(|v| v * a), bottom: g.bottom.map(|v| v * a) };
        let rhs = src.scale(-C64::new(1.0, 0.0));
        let sol = solve_mode([0.5, 1.0], s, &p, &rhs, Some(&bd), Closure::Transparent).unwrap();
        lemma_es_check(&sol, &src, &bd, s).unwrap()
    };
    let (a, b) = (run(128, 1.0), run(128, 3.0));
    assert!((a - b).abs() < 1e-12 * a);
    let (c, d) = (run(256, 1.0), run(512, 1.0));
    assert!(((c - d) / d).abs() < 5e-3, "{c} {d}");
}

#[test]
fn two_layer_solution_satisfies_discrete_system() {
    let p = LayeredProfile::new(vec![0.0, 0.5, 1.0], vec![1.0, 4.0], vec![1.0, 2.0]).unwrap();
    let s = ComplexFrequency::new(1.0, 2.0).unwrap();
    for nz in [64, 256] {
        let sol = solve_mode([1.0, 0.0], s, &p, &smooth_source(nz, 1.0), None, Closure::Transparent).unwrap();
        assert!(sol.residual < 1e-10, "{}", sol.residual);
    }
}

#[test]
fn exterior_extension_satisfies_exponential_decay() {
    let s = ComplexFrequency::new(0.7, -1.3).unwrap();
    let p = LayeredProfile::homogeneous(0.0, 1.0, 2.0, 1.0).unwrap();
    let sol = solve_mode([0.3, 0.4], s, &p, &smooth_source(64, 1.0), None, Closure::Transparent).unwrap();
    let m = p.exterior(Side::Top);
    let b = beta([0.3, 0.4], s, &m).unwrap();
    let u = sol.field.c1[64];
    for (z, dz) in [(1.0, 0.1), (1.5, 0.25), (2.0, 1.0)] {
        let a = outgoing_extension(u, [0.3, 0.4], s, &m, 1.0, z).unwrap();
        let c = outgoing_extension(u, [0.3, 0.4], s, &m, 1.0, z + dz).unwrap();
        assert!((c / a - (-(b * dz)).exp()).norm() < 1e-14);
    }
}
