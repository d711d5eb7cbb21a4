mod common;

use common::{c, oracle_radius, rho, wp_oracle};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_cone::numeric::contour::circle_integral;
use torus_cone::*;

const TORI: [(f64, f64); 3] = [(0.0, 1.0), (0.5, 0.866_025_403_784_438_6), (0.3, 1.1)];

fn torus(tau: (f64, f64)) -> Torus {
    make_torus(c(tau.0, tau.1), 1e-12).unwrap()
}

/// Seeded points of the cell at distance at least `clear` from the lattice.
fn cell_points(t: &Torus, n: usize, seed: u64, clear: f64) -> Vec<Complex64> {
    let e = t.engine();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let z = t.point(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        if e.lattice_distance(z) >= clear {
            out.push(z);
        }
    }
    out
}

/// `f'(z)` by a Cauchy integral on a circle of radius `r`.
fn cauchy_derivative<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64, r: f64) -> Complex64 {
    circle_integral(|w| f(w) / ((w - z) * (w - z)), z, r, 64)
}

#[test]
fn wp_matches_lattice_sum_oracle() {
    let radius = oracle_radius();
    for (k, &tau) in TORI.iter().enumerate() {
        let t = torus(tau);
        let e = t.engine();
        for z in cell_points(&t, 20, 100 + k as u64, 0.05) {
            let v = e.wp(z).unwrap();
            let o = wp_oracle(t.tau, z, radius);
            assert!((v - o).norm() <= 1e-6 * v.norm().max(1.0), "tau {} z {z}: {v} vs {o}", t.tau);
        }
    }
}

#[test]
fn wp_example_point_square_torus() {
    let t = torus((0.0, 1.0));
    let z = c(0.31, 0.22);
    let v = t.engine().wp(z).unwrap();
    let o = wp_oracle(t.tau, z, oracle_radius());
    assert!((v - o).norm() < 1e-6, "{v} vs {o}");
}

#[test]
fn wp_vanishes_at_rigidity_point() {
    let t = make_torus(rho(), 1e-12).unwrap();
    let a = (1.0 + rho()) / 3.0;
    let e = t.engine();
    assert!(e.wp(a).unwrap().norm() < 1e-9);
    assert!(e.wp_pp(a).unwrap().norm() < 1e-9);
}

#[test]
fn poles_are_reported() {
    let t = torus((0.0, 1.0));
    let e = t.engine();
    for z in [c(0.0, 0.0), 1.0 + t.tau, c(-2.0, 0.0)] {
        assert!(matches!(e.wp(z), Err(Error::PoleAtLattice(_))));
        assert!(matches!(e.zeta(z), Err(Error::PoleAtLattice(_))));
    }
    assert!(e.sigma(c(0.0, 0.0)).norm() < 1e-300);
}

#[test]
fn differential_identities_at_fifty_points() {
    for (k, &tau) in TORI.iter().enumerate() {
        let t = torus(tau);
        let e = t.engine();
        for z in cell_points(&t, 50, 7 + k as u64, 0.1) {
            let wp = e.wp(z).unwrap();
            let wp1 = e.wp_prime(z).unwrap();
            let wp2 = e.wp_pp(z).unwrap();
            let scale = wp.norm().max(1.0);

            let dzeta = cauchy_derivative(|w| e.zeta(w).unwrap(), z, 0.02);
            assert!((dzeta + wp).norm() <= 1e-9 * scale, "zeta' + wp at {z}");

            let dsigma = cauchy_derivative(|w| e.sigma(w), z, 0.02);
            let zeta = e.zeta(z).unwrap();
            assert!((dsigma / e.sigma(z) - zeta).norm() <= 1e-9 * zeta.norm().max(1.0), "sigma'/sigma at {z}");

            let dwp = cauchy_derivative(|w| e.wp(w).unwrap(), z, 0.02);
            assert!((dwp - wp1).norm() <= 1e-9 * wp1.norm().max(1.0));

            let cubic = 4.0 * wp * wp * wp - t.g2 * wp - t.g3;
            assert!((wp1 * wp1 - cubic).norm() <= 1e-8 * cubic.norm().max(1.0), "cubic at {z}");
            assert!((wp2 - (6.0 * wp * wp - 0.5 * t.g2)).norm() <= 1e-9 * (wp * wp).norm().max(1.0));
        }
    }
}

#[test]
fn zeta_at_half_period_is_half_quasi_period() {
    for i in 0..4 {
        for j in 0..3 {
            let t = make_torus(c(0.25 * i as f64, 0.9 + 0.4 * j as f64), 1e-12).unwrap();
            let v = t.engine().zeta(c(0.5, 0.0)).unwrap();
            assert!((v - 0.5 * t.eta1).norm() < 1e-12);
        }
    }
}

#[test]
fn sigma_law_example() {
    let t = torus((0.0, 1.0));
    let e = t.engine();
    let z = c(0.2, 0.3);
    let lhs = e.sigma(z + 1.0) / e.sigma(z);
    let rhs = -(t.eta1 * (z + 0.5)).exp();
    assert!((lhs - rhs).norm() < 1e-10 * rhs.norm());
}

#[test]
fn quasi_periodicity_and_sigma_law() {
    for (k, &tau) in TORI.iter().enumerate() {
        let t = torus(tau);
        let e = t.engine();
        for z in cell_points(&t, 50, 31 + k as u64, 0.05) {
            for (w, eta) in [(c(1.0, 0.0), t.eta1), (t.tau, t.eta2)] {
                let dz = e.zeta(z + w).unwrap() - e.zeta(z).unwrap();
                assert!((dz - eta).norm() <= 1e-9 * eta.norm().max(1.0));
                let ratio = e.sigma(z + w) / e.sigma(z);
                let law = -(eta * (z + 0.5 * w)).exp();
                assert!((ratio - law).norm() <= 1e-9 * law.norm());
            }
        }
    }
}

#[test]
fn addition_formula_at_twenty_points() {
    let t = torus((0.3, 1.1));
    let e = t.engine();
    let mut checked = 0;
    for a in cell_points(&t, 60, 5, 0.1) {
        let (r, s) = t.coords(a);
        let off_two_torsion = [2.0 * r, 2.0 * s].iter().any(|x| (x - x.round()).abs() > 0.1);
        if !off_two_torsion || e.lattice_distance(2.0 * a) < 0.1 {
            continue;
        }
        let (wp, wp1, wp2) = (e.wp(a).unwrap(), e.wp_prime(a).unwrap(), e.wp_pp(a).unwrap());
        let rhs = -2.0 * wp + wp2 * wp2 / (4.0 * wp1 * wp1);
        let lhs = e.wp(2.0 * a).unwrap();
        assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm().max(1.0), "a = {a}");
        checked += 1;
        if checked == 20 {
            break;
        }
    }
    assert_eq!(checked, 20);
}

#[test]
fn truncation_plus_eight_changes_nothing() {
    for &tau in &TORI {
        let t = torus(tau);
        let e = t.engine();
        let f = EllipticEngine::with_truncation(&t, t.truncation() + 8).unwrap();
        for z in cell_points(&t, 10, 2, 0.1) {
            assert!((e.wp(z).unwrap() - f.wp(z).unwrap()).norm() <= t.precision * e.wp(z).unwrap().norm().max(1.0));
            assert!((e.zeta(z).unwrap() - f.zeta(z).unwrap()).norm() <= t.precision * 10.0);
        }
    }
}

#[test]
fn nome_inside_unit_disk() {
    for &tau in &TORI {
        let e = torus(tau).engine();
        assert!(e.q_nome.norm() < 1.0);
    }
}

#[test]
fn sqrt_sigma_squares_back() {
    let t = torus((0.3, 1.1));
    let e = t.engine();
    let p = c(0.23, 0.31);
    let base = t.point(0.137, 0.293);
    for z in cell_points(&t, 20, 9, 0.1) {
        if e.branch_distance(z, p) < 0.05 {
            continue;
        }
        let y = e.sqrt_sigma_branch(z, p, base).unwrap();
        let target = e.sigma(z + p) * e.sigma(z - p);
        assert!((y * y - target).norm() <= 1e-12 * target.norm().max(1.0));
    }
}

/// `n` points on the circle through `start` around `center`, ending at `start`.
fn loop_around(center: Complex64, start: Complex64, n: usize) -> Vec<Complex64> {
    let first = start - center;
    (1..=n)
        .map(|k| center + first * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect()
}

#[test]
fn sqrt_sigma_loop_monodromy() {
    let t = torus((0.0, 1.0));
    let e = t.engine();
    let p = c(0.23, 0.31);

    // small loop around p flips the sign
    let start = p + c(0.1, 0.0);
    let mut path = SqrtSigmaPath::new(&e, p, start).unwrap();
    let v0 = path.value;
    let v1 = path.follow(&e, &loop_around(p, start, 2000), 1).unwrap();
    assert!((v1 + v0).norm() < 1e-10 * v0.norm());

    // loop around both p and -p returns the same value
    let start = c(0.6, 0.0);
    let mut path = SqrtSigmaPath::new(&e, p, start).unwrap();
    let v0 = path.value;
    let v1 = path.follow(&e, &loop_around(c(0.0, 0.0), start, 2000), 1).unwrap();
    assert!((v1 - v0).norm() < 1e-10 * v0.norm());
}

#[test]
fn branch_points_are_rejected() {
    let t = torus((0.0, 1.0));
    let e = t.engine();
    let p = c(0.23, 0.31);
    let base = t.point(0.137, 0.293);
    assert!(matches!(e.sqrt_sigma_branch(p, p, base), Err(Error::BranchPointAt(_))));
    assert!(matches!(e.sqrt_sigma_branch(1.0 - p, p, base), Err(Error::BranchPointAt(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parity(r in -0.5f64..0.5, s in -0.5f64..0.5, k in 0usize..3) {
        let t = torus(TORI[k]);
        let e = t.engine();
        let z = t.point(r, s);
        prop_assume!(e.lattice_distance(z) > 0.05);
        let wp = e.wp(z).unwrap();
        prop_assert!((wp - e.wp(-z).unwrap()).norm() <= 1e-10 * wp.norm().max(1.0));
        prop_assert!((e.zeta(z).unwrap() + e.zeta(-z).unwrap()).norm() <= 1e-10 * e.zeta(z).unwrap().norm().max(1.0));
        prop_assert!((e.sigma(z) + e.sigma(-z)).norm() <= 1e-10 * e.sigma(z).norm());
        let d1 = e.wp_prime(z).unwrap();
        prop_assert!((d1 + e.wp_prime(-z).unwrap()).norm() <= 1e-10 * d1.norm().max(1.0));
    }

    #[test]
    fn wp_is_doubly_periodic(r in -0.5f64..0.5, s in -0.5f64..0.5, m in -2i32..=2, n in -2i32..=2) {
        let t = torus(TORI[2]);
        let e = t.engine();
        let z = t.point(r, s);
        prop_assume!(e.lattice_distance(z) > 0.05);
        let w = z + m as f64 + n as f64 * t.tau;
        let v = e.wp(z).unwrap();
        prop_assert!((e.wp(w).unwrap() - v).norm() <= 1e-9 * v.norm().max(1.0));
    }
}
