use std::time::Instant;

use slab_tbc::cq::Generator;
use slab_tbc::sdomain::Closure;
use slab_tbc::spectral::LateralGrid;
use slab_tbc::stepper::io::{medium_hash, read_snapshot, write_snapshot};
use slab_tbc::stepper::ops::{curl_e, divergence, weighted_sq};
use slab_tbc::stepper::*;

fn slab(n: usize, nz: usize) -> SlabMedium<f64> {
    let g = LateralGrid::new(1.0, 1.0, n, n, 2.0, 0.0, nz + 1).unwrap();
    SlabMedium::homogeneous(&g, 1.0, 1.0).unwrap()
}

fn pulse(m: &SlabMedium<f64>, lateral: LateralShape, rz: f64) -> SourceTerm<f64> {
    let l = m.layout;
    let p = VerticalPulse {
        center: [0.5, 0.5, 1.0],
        radius: [0.4, 0.4, rz],
        amplitude: 1.0,
        direction: 1.0,
        eps: 1.0,
        mu: 1.0,
        lateral,
    };
    let (e0, h0) = p.fields(&l);
    SourceTerm::zeros(&l).with_initial(e0, h0).with_support(p.support(&l))
}

fn current(m: &SlabMedium<f64>) -> Triple<f64> {
    let b = Bump { center: 1.0, radius: 0.4 };
    let bx = Bump { center: 0.5, radius: 0.4 };
    m.layout.sample(Comp::E, |c, p| match c {
        Comp::Ex => b.value(p[2]) * bx.value(p[1]),
        Comp::Ey => 0.5 * b.value(p[2]) * bx.value(p[0]),
        _ => 0.0,
    })
}

fn max_abs(f: &Triple<f64>) -> f64 {
    f.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
}

#[test]
fn pec_energy_is_conserved_and_continuum_drift_is_second_order() {
    let mut drifts = Vec::new();
    for (n, steps) in [(16, 250), (32, 500)] {
        let m = slab(n, 2 * n);
        let src = pulse(&m, LateralShape::Cosine, 0.75);
        let dt = 0.5 * m.cfl_limit();
        let out = run(&m, &src, dt, &RunPlan::new(Closure::Pec, steps)).unwrap();
        assert!(out.report.scheme_drift() < 1e-12, "{}", out.report.scheme_drift());
        drifts.push(out.report.e1_drift());
    }
    assert!(drifts[1] <= 1e-3, "{drifts:?}");
    let ratio = drifts[0] / drifts[1];
    assert!((3.2..=4.8).contains(&ratio), "{ratio}");
}

#[test]
fn continuum_and_scheme_energy_differ_by_the_staggering_term() {
    let m = slab(8, 16);
    let l = m.layout;
    let src = pulse(&m, LateralShape::Bump, 0.5);
    let dt = 0.5 * m.cfl_limit();
    let mut s = init(&m, &src, dt, Closure::Pec).unwrap();
    for _ in 0..37 {
        step_pec(&mut s, &m, &src).unwrap();
    }
    let e = energies(&s, &m);
    let gap = 0.25 * dt * dt * weighted_sq(&l, Comp::H, &curl_e(&l, &s.e), None);
    assert!((e.e1 - e.scheme - gap).abs() < 1e-13 * e.e1);
}

#[test]
fn solenoidal_pulse_stays_divergence_free() {
    for closure in [Closure::Pec, Closure::Transparent] {
        let m = slab(16, 32);
        let src = pulse(&m, LateralShape::Bump, 0.5).with_current(current(&m), TemporalProfile::SinSquaredPulse { duration: 0.3 });
        let dt = 0.5 * m.cfl_limit();
        let mut s = init(&m, &src, dt, closure).unwrap();
        let k = TbcKernels::new(&m, Generator::Bdf2, dt, 500).unwrap();
        let mut worst = divergence_residual(&s, &m, &src);
        for _ in 0..500 {
            match closure {
                Closure::Pec => step_pec(&mut s, &m, &src).unwrap(),
                Closure::Transparent => step_tbc(&mut s, &m, &src, &k, None).unwrap(),
            }
            worst = worst.max(divergence_residual(&s, &m, &src));
        }
        assert!(worst <= 1e-10, "{closure:?}: {worst}");
    }
}

#[test]
fn non_solenoidal_charge_is_transported_not_amplified() {
    let m = slab(8, 16);
    let l = m.layout;
    let b = Bump { center: 1.0, radius: 0.5 };
    let bl = Bump { center: 0.5, radius: 0.4 };
    let e0 = l.sample(Comp::E, |c, p| if c == Comp::Ex { b.value(p[2]) * bl.value(p[0]) * bl.value(p[1]) } else { 0.0 });
    let src = SourceTerm::zeros(&l).with_initial(e0, l.zeros(Comp::H));
    let dt = 0.5 * m.cfl_limit();
    let mut s = init(&m, &src, dt, Closure::Pec).unwrap();
    let d0 = divergence(&l, &s.e, &m.eps);
    let scale = d0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(scale > 1.0);
    for _ in 0..300 {
        step_pec(&mut s, &m, &src).unwrap();
    }
    let d = divergence(&l, &s.e, &m.eps);
    let diff = d.iter().zip(&d0).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    assert!(diff < 1e-12 * scale, "{diff}");
}

#[test]
fn transparent_closure_is_passive_for_a_pulse() {
    let m = slab(16, 32);
    let src = pulse(&m, LateralShape::Bump, 0.5);
    let dt = 0.5 * m.cfl_limit();
    let out = run(&m, &src, dt, &RunPlan::new(Closure::Transparent, 400)).unwrap();
    let max_e1 = out.report.max_e1();
    let rows = &out.report.rows;
    for w in rows.windows(2) {
        assert!(w[1].boundary_work - w[0].boundary_work >= -1e-8 * max_e1);
        assert!(w[1].scheme <= w[0].scheme + 1e-8 * max_e1);
    }
    let last = rows.last().unwrap();
    assert!(last.scheme < 0.5 * rows[0].scheme, "{} {}", last.scheme, rows[0].scheme);
}

#[test]
fn splitting_into_conductor_and_current_runs_is_exact() {
    let m = slab(16, 32);
    let base = pulse(&m, LateralShape::Bump, 0.5);
    let j = current(&m);
    let profile = TemporalProfile::SinSquaredRamp { rise: 0.4 };
    let full = base.clone().with_current(j.clone(), profile);
    let l = m.layout;
    let data_only = base;
    let current_only = SourceTerm::zeros(&l).with_current(j, profile).with_support(full.support);
    let dt = 0.5 * m.cfl_limit();
    let steps = 200;
    let k = TbcKernels::new(&m, Generator::Bdf2, dt, steps).unwrap();
    let mut a = init(&m, &full, dt, Closure::Transparent).unwrap();
    let mut u = init(&m, &data_only, dt, Closure::Pec).unwrap();
    let mut e = init(&m, &current_only, dt, Closure::Transparent).unwrap();
    for _ in 0..steps {
        step_tbc(&mut a, &m, &full, &k, None).unwrap();
        let drive = boundary_drive(&u, &m);
        step_tbc(&mut e, &m, &current_only, &k, Some(&drive)).unwrap();
        step_pec(&mut u, &m, &data_only).unwrap();
    }
    let scale = max_abs(&a.e).max(max_abs(&a.h));
    let mut worst: f64 = 0.0;
    for (x, (y, z)) in a.e.iter().chain(&a.h).zip(u.e.iter().chain(&u.h).zip(e.e.iter().chain(&e.h))) {
        for i in 0..x.len() {
            worst = worst.max((x[i] - y[i] - z[i]).abs());
        }
    }
    assert!(worst <= 1e-10 * scale, "{worst} vs {scale}");
}

#[test]
fn smoke_run_is_fast_and_deterministic() {
    let m = slab(16, 16);
    let src = pulse(&m, LateralShape::Bump, 0.4).with_current(current(&m), TemporalProfile::SinSquaredRamp { rise: 0.2 });
    let dt = 0.5 * m.cfl_limit();
    let t0 = Instant::now();
    let a = run(&m, &src, dt, &RunPlan::new(Closure::Transparent, 10)).unwrap();
    assert!(t0.elapsed().as_secs_f64() < 1.0);
    let b = run(&m, &src, dt, &RunPlan::new(Closure::Transparent, 10)).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.state, b.state);
    assert_eq!(a.report.rows.len(), 11);
    assert!(a.report.rows[0].e2.is_none() && a.report.rows[1].e3.is_none() && a.report.rows[2].e3.is_some());
    let top = a.state.trace(slab_tbc::spectral::Side::Top).unwrap();
    assert_eq!(top.len(), 11);
}

#[test]
fn snapshots_round_trip() {
    let m = slab(4, 8);
    let src = pulse(&m, LateralShape::Bump, 0.5);
    let dt = 0.5 * m.cfl_limit();
    let mut plan = RunPlan::new(Closure::Pec, 6);
    plan.snapshot_every = 3;
    let out = run(&m, &src, dt, &plan).unwrap();
    assert_eq!(out.snapshots.iter().map(|s| s.step).collect::<Vec<_>>(), vec![0, 3, 6]);
    let snap = &out.snapshots[1];
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &m, "abc", snap.step, dt, &snap.e, &snap.h).unwrap();
    let (header, e, h) = read_snapshot(&buf[..]).unwrap();
    assert_eq!(header.step, 3);
    assert_eq!(header.config_hash, "abc");
    assert_eq!(header.medium_hash, medium_hash(&m));
    assert_eq!(header.components, ["Ex", "Ey", "Ez", "Hx", "Hy", "Hz"]);
    assert_eq!(e, snap.e);
    assert_eq!(h, snap.h);
}

#[test]
fn energy_csv_has_the_documented_columns() {
    let m = slab(4, 8);
    let src = SourceTerm::zeros(&m.layout);
    let out = run(&m, &src, 0.5 * m.cfl_limit(), &RunPlan::new(Closure::Pec, 2)).unwrap();
    let mut buf = Vec::new();
    out.report.write_csv(&mut buf, "h").unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "# config_hash=h");
    assert_eq!(lines[1], "step,t,e1,e2,e3,l2_E,l2_H,hcurl_E,hcurl_H,boundary_work");
    assert_eq!(lines[2], "0,0,0,,,0,0,0,0,0");
    assert_eq!(lines.len(), 5);
}
