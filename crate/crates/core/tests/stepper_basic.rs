use slab_tbc::cq::Generator;
use slab_tbc::sdomain::Closure;
use slab_tbc::spectral::LateralGrid;
use slab_tbc::stepper::*;

fn grid(n: usize, nz: usize, lz: f64) -> LateralGrid<f64> {
    LateralGrid::new(1.0, 1.0, n, n, lz, 0.0, nz + 1).unwrap()
}

#[test]
fn discrete_pec_eigenmode_oscillates_at_the_discrete_frequency() {
    let g = grid(8, 16, 1.0);
    let m = SlabMedium::homogeneous(&g, 1.0, 1.0).unwrap();
    let l = m.layout;
    let e0 = l.sample(Comp::E, |c, p| if c == Comp::Ex && p[2] > 1e-9 && p[2] < 1.0 - 1e-9 { (std::f64::consts::PI * p[2]).sin() } else { 0.0 });
    // eigenvalue of the second difference for sin(pi z) on nc cells
    let lam = (2.0 / l.dz * (std::f64::consts::PI * l.dz / 2.0).sin()).powi(2);
    let src = SourceTerm::zeros(&l).with_initial(e0.clone(), l.zeros(Comp::H));
    let dt = 0.9 * m.cfl_limit();
    let theta = 2.0 * (dt * lam.sqrt() / 2.0).asin();
    let mut s = init(&m, &src, dt, Closure::Pec).unwrap();
    let mut worst: f64 = 0.0;
    for n in 1..=1000 {
        step_pec(&mut s, &m, &src).unwrap();
        let c = (n as f64 * theta).cos();
        for (a, b) in s.e[0].iter().zip(&e0[0]) {
            worst = worst.max((a - c * b).abs());
        }
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn zero_data_stays_zero() {
    let g = grid(4, 8, 1.0);
    let m = SlabMedium::homogeneous(&g, 1.0, 1.0).unwrap();
    let src = SourceTerm::zeros(&m.layout);
    let dt = 0.5 * m.cfl_limit();
    let k = TbcKernels::new(&m, Generator::Bdf2, dt, 10).unwrap();
    let mut s = init(&m, &src, dt, Closure::Transparent).unwrap();
    for _ in 0..10 {
        step_tbc(&mut s, &m, &src, &k, None).unwrap();
    }
    assert!(s.e.iter().chain(&s.h).flatten().all(|v| *v == 0.0));
    assert!(step_tbc(&mut s, &m, &src, &k, None).is_err());
}

fn pulse_setup(n: usize, nz: usize) -> (SlabMedium<f64>, SourceTerm<f64>) {
    let g = grid(n, nz, 2.0);
    let m = SlabMedium::homogeneous(&g, 1.0, 1.0).unwrap();
    let l = m.layout;
    let p = VerticalPulse { center: [0.5, 0.5, 1.0], radius: [0.5, 0.5, 0.5], amplitude: 1.0, direction: 1.0, eps: 1.0, mu: 1.0, lateral: LateralShape::Bump };
    let (e0, h0) = p.fields(&l);
    let src = SourceTerm::zeros(&l).with_initial(e0, h0).with_support(p.support(&l));
    (m, src)
}

#[test]
fn transparent_step_satisfies_discrete_energy_identity() {
    let (m, src) = pulse_setup(8, 16);
    let l = m.layout;
    let cur = l.sample(Comp::E, |c, p| if c == Comp::Ey { Bump { center: 1.0, radius: 0.4 }.value(p[2]) * (6.28 * p[0]).cos() } else { 0.0 });
    let src = src.with_current(cur, TemporalProfile::SinSquaredPulse { duration: 0.5 });
    let dt = 0.5 * m.cfl_limit();
    let k = TbcKernels::new(&m, Generator::Bdf2, dt, 200).unwrap();
    let mut s = init(&m, &src, dt, Closure::Transparent).unwrap();
    let e_start = energies(&s, &m).scheme;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        step_tbc(&mut s, &m, &src, &k, None).unwrap();
        let now = energies(&s, &m).scheme;
        worst = worst.max((now - e_start + s.boundary_work + s.source_work).abs());
    }
    println!("boundary work {} identity defect {worst}", s.boundary_work);
    assert!(worst < 1e-12 * e_start, "{worst}");
    assert!(s.boundary_work > 0.5 * e_start);
}
