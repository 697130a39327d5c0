use proptest::prelude::*;
use slab_tbc::cq::{cq_weights_scalar, laplace_transform, ContourParams, Generator, TimeSignal};
use slab_tbc::sdomain::{solve_mode, Closure, LayeredProfile, ModeField};
use slab_tbc::spectral::{LateralFft, LateralGrid, Side};
use slab_tbc::symbols::{
    beta, capacity_matrix, capacity_matrix_div_form, f_bound, ComplexFrequency, ExteriorMedium,
};
use slab_tbc::{Mat2, C};

fn freq() -> impl Strategy<Value = ComplexFrequency<f64>> {
    (0.05f64..20.0, -50.0f64..50.0).prop_map(|(a, b)| ComplexFrequency::new(a, b).unwrap())
}

fn xi() -> impl Strategy<Value = [f64; 2]> {
    (-60.0f64..60.0, -60.0f64..60.0).prop_map(|(a, b)| [a, b])
}

fn medium() -> impl Strategy<Value = ExteriorMedium<f64>> {
    (0.2f64..10.0, 0.2f64..10.0, any::<bool>()).prop_map(|(e, m, top)| {
        ExteriorMedium::new(e, m, if top { Side::Top } else { Side::Bottom }).unwrap()
    })
}

fn cvec(n: usize) -> impl Strategy<Value = Vec<C<f64>>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C::new(a, b)), n)
}

fn mat_dist(a: &Mat2<f64>, b: &Mat2<f64>) -> (f64, f64) {
    let mut d: f64 = 0.0;
    let mut n: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a.m[i][j] - b.m[i][j]).norm());
            n = n.max(a.m[i][j].norm());
        }
    }
    (d, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn beta_is_the_principal_root(x in xi(), s in freq(), m in medium()) {
        let b = beta(x, s, &m).unwrap();
        prop_assert!(b.re > 0.0);
        let sv = s.value();
        let target = sv * sv * (m.eps * m.mu) + C::new(x[0] * x[0] + x[1] * x[1], 0.0);
        prop_assert!((b * b - target).norm() <= 1e-13 * target.norm().max(1e-300) * 4.0);
    }

    #[test]
    fn symbols_commute_with_conjugation(x in xi(), s in freq(), m in medium()) {
        let b = beta(x, s, &m).unwrap();
        let bc = beta(x, s.conj(), &m).unwrap();
        prop_assert!((bc - b.conj()).norm() <= 1e-14 * b.norm());
        let a = capacity_matrix(x, s, &m).unwrap().matrix;
        let ac = capacity_matrix(x, s.conj(), &m).unwrap().matrix;
        let (d, n) = mat_dist(&ac, &a.conj());
        prop_assert!(d <= 1e-13 * n);
    }

    #[test]
    fn curl_and_div_forms_agree(x in xi(), s in freq(), m in medium()) {
        let a = capacity_matrix(x, s, &m).unwrap().matrix;
        let b = capacity_matrix_div_form(x, s, &m).unwrap();
        let (d, n) = mat_dist(&a, &b);
        prop_assert!(d <= 1e-12 * n);
    }

    #[test]
    fn capacity_is_accretive(x in xi(), s in freq(), m in medium(), u in cvec(2)) {
        let a = capacity_matrix(x, s, &m).unwrap().matrix;
        let v = a.apply([u[0], u[1]]);
        let re = (v[0] * u[0].conj() + v[1] * u[1].conj()).re;
        let (_, n) = mat_dist(&a, &a);
        let u2 = u[0].norm_sqr() + u[1].norm_sqr();
        prop_assert!(re >= -1e-12 * n * u2);
    }

    #[test]
    fn decay_ratio_obeys_f_bound(x in xi(), s1 in 0.05f64..20.0, s2 in prop_oneof![-50.0f64..-0.05, 0.05f64..50.0], m in medium()) {
        let s = ComplexFrequency::new(s1, s2).unwrap();
        let ratio = (1.0 + x[0] * x[0] + x[1] * x[1]).sqrt() / beta(x, s, &m).unwrap().norm();
        prop_assert!(ratio <= f_bound(s, &m).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn backward_euler_integrator_weights_are_dt(dt in 1e-3f64..0.5, n in 1usize..200) {
        let contour = ContourParams::for_horizon(n);
        let w = cq_weights_scalar(|s: C<f64>| s.inv(), dt, n, Generator::Bdf1, &contour).unwrap();
        for wj in &w {
            prop_assert!((wj - C::new(dt, 0.0)).norm() <= 1e-12 * dt);
        }
    }

    #[test]
    fn constant_symbol_has_one_weight(c in -5.0f64..5.0, dt in 1e-3f64..0.5, n in 1usize..100, bdf2 in any::<bool>()) {
        let g = if bdf2 { Generator::Bdf2 } else { Generator::Bdf1 };
        let w = cq_weights_scalar(|_| C::new(c, 0.0), dt, n, g, &ContourParams::for_horizon(n)).unwrap();
        prop_assert!((w[0].re - c).abs() <= 1e-12 * (1.0 + c.abs()));
        for wj in &w[1..] {
            prop_assert!(wj.norm() <= 1e-12 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn laplace_transform_is_linear(
        a in prop::collection::vec(-1.0f64..1.0, 2..40),
        k in -3.0f64..3.0,
        s1 in 0.1f64..5.0,
        s2 in -20.0f64..20.0,
    ) {
        let dt = 0.05;
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v * (i as f64).cos()).collect();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| k * x + y).collect();
        let sig = |v: &Vec<f64>| TimeSignal { dt, samples: v.clone() };
        let s = C::new(s1, s2);
        let lhs = laplace_transform(&sig(&mix), s);
        let rhs = laplace_transform(&sig(&a), s) * k + laplace_transform(&sig(&b), s);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn lateral_fft_round_trips(v in cvec(64)) {
        let grid = LateralGrid::new(1.0, 2.0, 8, 8, 1.0, 0.0, 4).unwrap();
        let fft = LateralFft::new(&grid);
        let back = fft.inverse(&fft.forward(&v).unwrap()).unwrap();
        for (x, y) in v.iter().zip(&back) {
            prop_assert!((x - y).norm() <= 1e-13);
        }
    }
}

fn mode_source(v: &[C<f64>], nz: usize) -> ModeField<f64> {
    let mut f = ModeField::zeros(nz);
    f.c1.copy_from_slice(&v[..=nz]);
    f.c2.copy_from_slice(&v[nz + 1..2 * nz + 2]);
    f.c3.copy_from_slice(&v[2 * nz + 2..]);
    f
}

fn field_dist(a: &ModeField<f64>, b: &ModeField<f64>) -> (f64, f64) {
    let pairs = a.c1.iter().zip(&b.c1).chain(a.c2.iter().zip(&b.c2)).chain(a.c3.iter().zip(&b.c3));
    pairs.fold((0.0, 0.0), |(d, n), (x, y)| (f64::max(d, (x - y).norm()), f64::max(n, y.norm())))
}

const NZ: usize = 24;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mode_solver_is_linear(
        f in cvec(3 * NZ + 2),
        g in cvec(3 * NZ + 2),
        k in -3.0f64..3.0,
        x in (-8.0f64..8.0, -8.0f64..8.0),
        s in freq(),
        pec in any::<bool>(),
    ) {
        let p = LayeredProfile::new(vec![0.0, 0.4, 1.0], vec![1.0, 3.0], vec![1.0, 2.0]).unwrap();
        let closure = if pec { Closure::Pec } else { Closure::Transparent };
        let xi = [x.0, x.1];
        let (f, g) = (mode_source(&f, NZ), mode_source(&g, NZ));
        let mut mix = ModeField::zeros(NZ);
        for (m, (a, b)) in [(&mut mix.c1, (&f.c1, &g.c1)), (&mut mix.c2, (&f.c2, &g.c2)), (&mut mix.c3, (&f.c3, &g.c3))] {
            for i in 0..m.len() {
                m[i] = a[i] * k + b[i];
            }
        }
        let solve = |src: &ModeField<f64>| solve_mode(xi, s, &p, src, None, closure).unwrap().field;
        let (uf, ug, um) = (solve(&f), solve(&g), solve(&mix));
        let mut expect = ModeField::zeros(NZ);
        for (e, (a, b)) in [(&mut expect.c1, (&uf.c1, &ug.c1)), (&mut expect.c2, (&uf.c2, &ug.c2)), (&mut expect.c3, (&uf.c3, &ug.c3))] {
            for i in 0..e.len() {
                e[i] = a[i] * k + b[i];
            }
        }
        let (d, n) = field_dist(&um, &expect);
        prop_assert!(d <= 1e-9 * n.max(1e-300));
    }

    #[test]
    fn mode_solver_maps_mirrored_conjugate_data_to_conjugate_solution(
        f in cvec(3 * NZ + 2),
        x in (-8.0f64..8.0, -8.0f64..8.0),
        s in freq(),
    ) {
        let p = LayeredProfile::new(vec![0.0, 0.4, 1.0], vec![1.0, 3.0], vec![1.0, 2.0]).unwrap();
        let xi = [x.0, x.1];
        let f = mode_source(&f, NZ);
        let fc = ModeField {
            c1: f.c1.iter().map(|z| z.conj()).collect(),
            c2: f.c2.iter().map(|z| z.conj()).collect(),
            c3: f.c3.iter().map(|z| z.conj()).collect(),
        };
        let u = solve_mode(xi, s, &p, &f, None, Closure::Transparent).unwrap().field;
        let uc = solve_mode([-xi[0], -xi[1]], s.conj(), &p, &fc, None, Closure::Transparent).unwrap().field;
        let conj = ModeField {
            c1: u.c1.iter().map(|z| z.conj()).collect(),
            c2: u.c2.iter().map(|z| z.conj()).collect(),
            c3: u.c3.iter().map(|z| z.conj()).collect(),
        };
        let (d, n) = field_dist(&uc, &conj);
        prop_assert!(d <= 1e-9 * n.max(1e-300));
    }
}
