mod common;

use common::c;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_cone::lame::*;
use torus_cone::numeric::contour::laurent_coefficient;
use torus_cone::*;

/// Three seeded `(τ, p)` pairs with `p` well away from two-torsion.
fn random_configs(seed: u64) -> Vec<(Torus, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < 3 {
        let tau = c(rng.gen_range(0.0..1.0), rng.gen_range(0.9..1.5));
        let t = make_torus(tau, 1e-12).unwrap();
        let (r, s) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        let near_half = |x: f64| (2.0 * x - (2.0 * x).round()).abs() < 0.15;
        if near_half(r) && near_half(s) {
            continue;
        }
        out.push((t.clone(), t.point(r, s)));
    }
    out
}

fn example() -> LameEquation {
    let t = make_torus(c(0.0, 1.0), 1e-12).unwrap();
    LameEquation::new(&t, c(0.23, 0.31), c(0.7, -0.2)).unwrap()
}

#[test]
fn route_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (t, p) in random_configs(3) {
        let poly = spectral_q_closed(&t, p).unwrap();
        let eq = LameEquation::new(&t, p, c(0.0, 0.0)).unwrap();
        for _ in 0..8 {
            let a = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let defn = eq.with_a(a).unwrap().spectral_q_defn().unwrap();
            let closed = poly.eval(a);
            assert!((defn - closed).norm() <= 1e-8 * closed.norm().max(1.0), "tau {} p {p} A {a}: {defn} vs {closed}", t.tau);
        }
    }
}

#[test]
fn anchor_value_at_a0() {
    for (t, p) in random_configs(5).into_iter().chain([(example().torus, c(0.23, 0.31))]) {
        let d = PointData::new(&t, p).unwrap();
        let target = -d.wp1 * d.wp1;
        let closed = spectral_q_closed(&t, p).unwrap().eval(d.a0());
        assert!((closed - target).norm() <= 1e-10 * target.norm());
        let eq = LameEquation::new(&t, p, d.a0()).unwrap();
        let defn = eq.spectral_q_defn().unwrap();
        assert!((defn - target).norm() <= 1e-8 * target.norm().max(1.0));
        assert!(eq.is_completely_reducible().unwrap());
    }
}

#[test]
fn polynomial_shape() {
    let eq = example();
    let poly = spectral_q_closed(&eq.torus, eq.p).unwrap();
    assert_eq!(poly.degree(), 6);
    assert_eq!(poly.coeffs.len(), 7);
    assert!((poly.leading() + 1.0).norm() < 1e-15);
    let (y1, y2) = spectral_factors(&eq.data);
    assert_eq!((y1.degree(), y2.degree()), (3, 3));
    assert_eq!(y1.leading(), c(1.0, 0.0));
    assert_eq!(y2.leading(), c(1.0, 0.0));
}

#[test]
fn b_is_reproduced_exactly() {
    let eq = example();
    for a in [c(0.0, 0.0), c(0.7, -0.2), c(-3.0, 1.5)] {
        let e2 = eq.with_a(a).unwrap();
        assert_eq!(e2.b, apparency_b(eq.engine(), eq.p, a).unwrap());
        let e = eq.engine();
        let p2 = 2.0 * eq.p;
        let direct = a * a - e.zeta(p2).unwrap() * a - 0.75 * e.wp(p2).unwrap() - 2.0 * e.wp(eq.p).unwrap();
        assert!((e2.b - direct).norm() <= 1e-12 * direct.norm().max(1.0));
    }
}

#[test]
fn laurent_coefficients_and_exponents() {
    let eq = example();
    let q = |z: Complex64| eq.potential_q(z).unwrap();
    for (center, expected, exps) in [
        (c(0.0, 0.0), 2.0, (-1.0, 2.0)),
        (eq.p, 0.75, (-0.5, 1.5)),
        (-eq.p, 0.75, (-0.5, 1.5)),
    ] {
        let c2 = laurent_coefficient(q, center, -2, 0.02);
        assert!((c2 - expected).norm() < 1e-9, "{center}: {c2}");
        let (lo, hi) = local_exponents(c2);
        assert!((lo - exps.0).norm() < 1e-8 && (hi - exps.1).norm() < 1e-8);
    }
}

#[test]
fn third_order_equation_at_ten_points() {
    let eq = example();
    let t = &eq.torus;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut n = 0;
    while n < 10 {
        let z = t.point(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        if eq.singular_distance(z) < 0.05 {
            continue;
        }
        let (res, scale) = eq.third_order_residual(z).unwrap();
        assert!(res <= 1e-7 * scale, "{z}: {res} vs {scale}");
        n += 1;
    }
}

#[test]
fn singularities_are_rejected() {
    let eq = example();
    for z in [c(0.0, 0.0), eq.p, -eq.p, eq.p + eq.torus.tau] {
        assert!(matches!(eq.potential_q(z), Err(Error::PoleAtSingularity(_))));
        assert!(matches!(eq.phi_e(z), Err(Error::PoleAtSingularity(_))));
    }
}

#[test]
fn two_torsion_is_rejected() {
    let t = make_torus(c(0.3, 1.1), 1e-12).unwrap();
    for p in [c(0.5, 0.0), 0.5 * t.tau, 0.5 + 0.5 * t.tau] {
        assert!(matches!(LameEquation::new(&t, p, c(1.0, 0.0)), Err(Error::TwoTorsion(_))));
        assert!(matches!(spectral_q_closed(&t, p), Err(Error::TwoTorsion(_))));
    }
}

#[test]
fn roots_of_y1_are_not_reducible() {
    let eq = example();
    let (y1, y2) = spectral_factors(&eq.data);
    for root in y1.roots() {
        assert!(y1.eval(root).norm() < 1e-12 * (1.0 + root.norm()).powi(3));
        let e = eq.with_a(root).unwrap();
        assert!(!e.is_completely_reducible().unwrap());
    }
    for root in y2.roots() {
        assert!(!eq.with_a(root).unwrap().is_completely_reducible().unwrap());
    }
}

#[test]
fn band_is_indeterminate() {
    let eq = example();
    let poly = spectral_q_closed(&eq.torus, eq.p).unwrap();
    let (y1, _) = spectral_factors(&eq.data);
    let root = y1.roots()[1];
    let slope = poly.derivative().eval(root);
    let scale = (1.0 + root.norm()).powi(6);
    let e = eq.with_a(root + 3e-11 * scale / slope.norm()).unwrap();
    match e.is_completely_reducible() {
        Err(Error::Indeterminate { value, lower, upper }) => assert!(value > lower && value <= upper),
        other => panic!("{other:?}"),
    }
}

#[test]
fn spectral_points() {
    let eq = example();
    for sign in [1, -1] {
        let p = make_spectral_point(&eq, c(0.7, -0.2), sign).unwrap();
        let q = eq.spectral_q();
        assert!((p.c * p.c - q).norm() <= 1e-9 * (1.0 + q.norm()));
        assert!(p.curve_defect() <= 1e-9);
        let d = p.dual();
        assert_eq!(d.a, p.a);
        assert_eq!(d.c, -p.c);
        assert_eq!(d.dual().c, p.c);
    }
    let plus = make_spectral_point(&eq, c(0.7, -0.2), 1).unwrap();
    assert_eq!(plus.c, eq.spectral_q().sqrt());
}

#[test]
fn spectral_point_allows_zero_c() {
    let eq = example();
    let (y1, _) = spectral_factors(&eq.data);
    let p = make_spectral_point(&eq, y1.roots()[0], 1).unwrap();
    assert!(p.c.norm() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn potential_is_even_and_elliptic(r in 0.0f64..1.0, s in 0.0f64..1.0, ar in -2.0f64..2.0, ai in -2.0f64..2.0) {
        let eq = example().with_a(c(ar, ai)).unwrap();
        let t = &eq.torus;
        let z = t.point(r, s);
        prop_assume!(eq.singular_distance(z) > 0.05);
        let q = eq.potential_q(z).unwrap();
        let scale = q.norm().max(1.0);
        prop_assert!((eq.potential_q(-z).unwrap() - q).norm() <= 1e-11 * scale);
        prop_assert!((eq.potential_q(z + 1.0).unwrap() - q).norm() <= 1e-11 * scale);
        prop_assert!((eq.potential_q(z + t.tau).unwrap() - q).norm() <= 1e-11 * scale);
    }

    #[test]
    fn phi_e_is_even_and_elliptic(r in 0.0f64..1.0, s in 0.0f64..1.0, ar in -2.0f64..2.0, ai in -2.0f64..2.0) {
        let eq = example().with_a(c(ar, ai)).unwrap();
        let t = &eq.torus;
        let z = t.point(r, s);
        prop_assume!(eq.singular_distance(z) > 0.05);
        let f = eq.phi_e(z).unwrap();
        let scale = f.norm().max(1.0);
        prop_assert!((eq.phi_e(-z).unwrap() - f).norm() <= 1e-10 * scale);
        prop_assert!((eq.phi_e(z + 1.0).unwrap() - f).norm() <= 1e-10 * scale);
        prop_assert!((eq.phi_e(z + t.tau).unwrap() - f).norm() <= 1e-10 * scale);
        let (res, sc) = eq.third_order_residual(z).unwrap();
        prop_assert!(res <= 1e-7 * sc);
    }
}
