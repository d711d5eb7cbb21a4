//! Weierstrass ℘, ℘′, ℘″, ζ and σ for the lattice `Z + τZ`.
//!
//! Evaluation goes through a reduced basis `(w1, w2)` of the same lattice
//! with `τ' = w2 / w1` in the standard fundamental domain, so the nome
//! `|e^{iπτ'}| ≤ e^{-π√3/2}` and every series converges geometrically at a
//! rate independent of the caller's τ. Homogeneity of the Weierstrass
//! functions (`℘(λv; λΛ) = λ^{-2}℘(v; Λ)` and so on) maps back to the caller's
//! normalization. Arguments are reduced into the cell around the origin with
//! the quasi-periodicity laws before summing.
//!
//! ζ, ℘ and its derivatives use the logarithmic-derivative (Lambert) series
//! of θ₁; σ uses the θ₁ series itself, so `σ'/σ = ζ` compares two
//! independent expansions.

use crate::error::{Error, Result};
use crate::lattice::Torus;
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default hard cap on series length.
pub const DEFAULT_MAX_TERMS: usize = 200;

/// Integer change of basis `w1 = a + bτ`, `w2 = c + dτ`.
#[allow(dead_code)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Basis {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

/// Reduce τ into `|Re τ'| ≤ 1/2, |τ'| ≥ 1`.
pub(crate) fn reduce_modulus(tau: Complex64) -> Basis {
    let mut t = tau;
    // rows: coefficients of w1 and w2 in terms of (1, τ)
    let (mut w1, mut w2) = ((1i64, 0i64), (0i64, 1i64));
    for _ in 0..200 {
        let k = t.re.round();
        if k != 0.0 {
            t -= k;
            let k = k as i64;
            w2 = (w2.0 - k * w1.0, w2.1 - k * w1.1);
        }
        if t.norm_sqr() < 1.0 - 1e-14 {
            t = -1.0 / t;
            let old1 = w1;
            w1 = w2;
            w2 = (-old1.0, -old1.1);
        } else {
            break;
        }
    }
    Basis {
        a: w1.0,
        b: w1.1,
        c: w2.0,
        d: w2.1,
    }
}

/// Series data for the lattice `Z + τ'Z` with τ' reduced.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NormalizedLattice {
    #[allow(dead_code)]
    pub basis: Basis,
    /// `w1 = a + bτ`, the scale mapping the normalized lattice onto the caller's.
    pub lambda: Complex64,
    pub tau: Complex64,
    /// `e^{iπτ'}`
    pub q: Complex64,
    pub terms: usize,
    pub eta1: Complex64,
    pub eta2: Complex64,
    pub g2: Complex64,
    pub g3: Complex64,
    /// derivative at 0 of the θ₁ series with the q^{1/4} factor removed
    theta_prime0: Complex64,
}

fn cot(x: Complex64) -> Complex64 {
    if x.im >= 0.0 {
        let w = (2.0 * I * x).exp();
        I * (w + 1.0) / (w - 1.0)
    } else {
        let w = (-2.0 * I * x).exp();
        I * (1.0 + w) / (1.0 - w)
    }
}

/// Values of the normalized functions at a reduced argument.
#[derive(Debug, Clone, Copy)]
struct Lambert {
    cot: Complex64,
    s1: Complex64,
    s_wp: Complex64,
    s_wp1: Complex64,
    s_wp2: Complex64,
}

impl NormalizedLattice {
    pub fn new(tau: Complex64, terms: usize) -> Self {
        let basis = reduce_modulus(tau);
        let lambda = Complex64::new(basis.a as f64, 0.0) + tau * basis.b as f64;
        let w2 = Complex64::new(basis.c as f64, 0.0) + tau * basis.d as f64;
        let tau_r = w2 / lambda;
        let q = (I * PI * tau_r).exp();
        let qq = q * q;

        let mut e2 = Complex64::new(0.0, 0.0);
        let mut e4 = Complex64::new(0.0, 0.0);
        let mut e6 = Complex64::new(0.0, 0.0);
        let mut qn = Complex64::new(1.0, 0.0);
        for n in 1..=terms {
            qn *= qq;
            let l = qn / (1.0 - qn);
            let nf = n as f64;
            e2 += l * nf;
            e4 += l * nf.powi(3);
            e6 += l * nf.powi(5);
        }
        let eta1 = PI * PI / 3.0 * (1.0 - 24.0 * e2);
        let g2 = 4.0 * PI.powi(4) / 3.0 * (1.0 + 240.0 * e4);
        let g3 = 8.0 * PI.powi(6) / 27.0 * (1.0 - 504.0 * e6);

        let mut theta_prime0 = Complex64::new(0.0, 0.0);
        for n in 0..terms {
            let nf = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            theta_prime0 += sign * (2.0 * nf + 1.0) * (I * PI * tau_r * (nf * (nf + 1.0))).exp();
        }
        theta_prime0 *= PI;

        let mut lat = NormalizedLattice {
            basis,
            lambda,
            tau: tau_r,
            q,
            terms,
            eta1,
            eta2: Complex64::new(0.0, 0.0),
            g2,
            g3,
            theta_prime0,
        };
        // second quasi-period straight from the series at the cell edge,
        // not from the Legendre relation
        let half = 0.5 * tau_r;
        lat.eta2 = 2.0 * lat.zeta_unreduced(half);
        lat
    }

    /// Split `v = v_r + m + nτ'` with `v_r` in the cell centred at 0.
    fn split(&self, v: Complex64) -> (Complex64, i64, i64) {
        let n = (v.im / self.tau.im).round();
        let m = (v.re - n * self.tau.re).round();
        (v - m - n * self.tau, m as i64, n as i64)
    }

    fn lambert(&self, v: Complex64) -> Lambert {
        let qq = self.q * self.q;
        let xp = (2.0 * PI * I * (self.tau + v)).exp();
        let xm = (2.0 * PI * I * (self.tau - v)).exp();
        let (mut pp, mut pm, mut qn) = (
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
        let zero = Complex64::new(0.0, 0.0);
        let (mut s1, mut s_wp, mut s_wp1, mut s_wp2) = (zero, zero, zero, zero);
        for n in 1..=self.terms {
            pp *= xp;
            pm *= xm;
            qn *= qq;
            let inv = 1.0 / (1.0 - qn);
            let sin_part = (pp - pm) * inv / (2.0 * I);
            let cos_part = (pp + pm) * inv * 0.5;
            let nf = n as f64;
            s1 += sin_part;
            s_wp += cos_part * nf;
            s_wp1 += sin_part * nf * nf;
            s_wp2 += cos_part * nf * nf * nf;
        }
        Lambert {
            cot: cot(PI * v),
            s1,
            s_wp,
            s_wp1,
            s_wp2,
        }
    }

    fn zeta_unreduced(&self, v: Complex64) -> Complex64 {
        let l = self.lambert(v);
        self.eta1 * v + PI * l.cot + 4.0 * PI * l.s1
    }

    fn wp_reduced(&self, v: Complex64) -> Complex64 {
        let l = self.lambert(v);
        -self.eta1 + PI * PI * (1.0 + l.cot * l.cot) - 8.0 * PI * PI * l.s_wp
    }

    fn wp1_reduced(&self, v: Complex64) -> Complex64 {
        let l = self.lambert(v);
        let c = l.cot;
        -2.0 * PI.powi(3) * c * (1.0 + c * c) + 16.0 * PI.powi(3) * l.s_wp1
    }

    fn wp2_reduced(&self, v: Complex64) -> Complex64 {
        let l = self.lambert(v);
        let c2 = l.cot * l.cot;
        2.0 * PI.powi(4) * (1.0 + c2) * (1.0 + 3.0 * c2) + 32.0 * PI.powi(4) * l.s_wp2
    }

    /// θ₁(πv) / (2q^{1/4}).
    fn theta_series(&self, v: Complex64) -> Complex64 {
        let mut t = Complex64::new(0.0, 0.0);
        for n in 0..self.terms {
            let nf = n as f64;
            let base = I * PI * self.tau * (nf * (nf + 1.0));
            let arg = I * PI * v * (2.0 * nf + 1.0);
            let term = ((base + arg).exp() - (base - arg).exp()) / (2.0 * I);
            if n % 2 == 0 {
                t += term;
            } else {
                t -= term;
            }
        }
        t
    }

    /// θ₁(πv) / (π θ₁'(0)) · e^{η₁'v²/2}, the normalized σ at a reduced point.
    fn sigma_reduced(&self, v: Complex64) -> Complex64 {
        (0.5 * self.eta1 * v * v).exp() * self.theta_series(v) / self.theta_prime0
    }

    /// `log |η(τ')|` for the Dedekind η.
    fn ln_abs_dedekind(&self) -> f64 {
        let qq = self.q * self.q;
        let mut acc = -PI * self.tau.im / 12.0;
        let mut qn = Complex64::new(1.0, 0.0);
        for _ in 1..=self.terms {
            qn *= qq;
            acc += (1.0 - qn).norm().ln();
        }
        acc
    }

    /// `−(1/2π) log|θ₁(πv)/η(τ')| + (Im v)²/(2 Im τ')` at a reduced point.
    fn green_reduced(&self, v: Complex64) -> f64 {
        let ln_theta = 2f64.ln() - PI * self.tau.im / 4.0 + self.theta_series(v).norm().ln();
        -(ln_theta - self.ln_abs_dedekind()) / (2.0 * PI) + v.im * v.im / (2.0 * self.tau.im)
    }

    fn ln_sigma_reduced(&self, v: Complex64) -> Complex64 {
        self.sigma_reduced(v).ln()
    }
}

/// Evaluator for the Weierstrass functions of one torus. Immutable; all
/// methods are pure.
#[derive(Debug, Clone)]
pub struct EllipticEngine {
    pub torus: Torus,
    /// `e^{iπτ}` for the caller's τ (evaluation itself uses the reduced nome).
    pub q_nome: Complex64,
    pub theta_truncation: usize,
    pub max_terms: usize,
    lat: NormalizedLattice,
}

/// Number of series terms needed so the tail is below `tol` for nome `q`.
pub(crate) fn terms_for(q: Complex64, tol: f64) -> usize {
    let r = q.norm().max(1e-300);
    let tol = tol.max(1e-300);
    let mut n = 1usize;
    while (n as f64).powi(5) * r.powi(n as i32) > tol && n < 100_000 {
        n += 1;
    }
    n + 2
}

impl EllipticEngine {
    pub fn new(torus: &Torus) -> Self {
        EllipticEngine {
            torus: torus.clone(),
            q_nome: (I * PI * torus.tau).exp(),
            theta_truncation: torus.lattice.terms,
            max_terms: torus.max_terms,
            lat: torus.lattice,
        }
    }

    /// Same torus, explicit series length.
    pub fn with_truncation(torus: &Torus, terms: usize) -> Result<Self> {
        if terms > torus.max_terms {
            return Err(Error::PrecisionUnreachable {
                precision: torus.precision,
                needed: terms,
                max_terms: torus.max_terms,
            });
        }
        let mut e = EllipticEngine::new(torus);
        e.lat = NormalizedLattice::new(torus.tau, terms);
        e.theta_truncation = terms;
        Ok(e)
    }

    pub fn tau(&self) -> Complex64 {
        self.torus.tau
    }

    pub fn eta1(&self) -> Complex64 {
        self.torus.eta1
    }

    pub fn eta2(&self) -> Complex64 {
        self.torus.eta2
    }

    pub fn g2(&self) -> Complex64 {
        self.torus.g2
    }

    pub fn g3(&self) -> Complex64 {
        self.torus.g3
    }

    fn split(&self, z: Complex64) -> (Complex64, i64, i64) {
        self.lat.split(z / self.lat.lambda)
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: Complex64) -> f64 {
        let (vr, _, _) = self.split(z);
        (vr * self.lat.lambda).norm()
    }

    fn check_pole(&self, z: Complex64) -> Result<Complex64> {
        let (vr, _, _) = self.split(z);
        if (vr * self.lat.lambda).norm() <= self.torus.precision {
            return Err(Error::PoleAtLattice(z));
        }
        Ok(vr)
    }

    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        let vr = self.check_pole(z)?;
        Ok(self.lat.wp_reduced(vr) / self.lat.lambda.powi(2))
    }

    pub fn wp_prime(&self, z: Complex64) -> Result<Complex64> {
        let vr = self.check_pole(z)?;
        Ok(self.lat.wp1_reduced(vr) / self.lat.lambda.powi(3))
    }

    pub fn wp_pp(&self, z: Complex64) -> Result<Complex64> {
        let vr = self.check_pole(z)?;
        Ok(self.lat.wp2_reduced(vr) / self.lat.lambda.powi(4))
    }

    /// ℘‴ = 12℘℘′.
    pub fn wp_ppp(&self, z: Complex64) -> Result<Complex64> {
        Ok(12.0 * self.wp(z)? * self.wp_prime(z)?)
    }

    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        let (vr, m, n) = self.split(z);
        if (vr * self.lat.lambda).norm() <= self.torus.precision {
            return Err(Error::PoleAtLattice(z));
        }
        let shift = self.lat.eta1 * m as f64 + self.lat.eta2 * n as f64;
        Ok((self.lat.zeta_unreduced(vr) + shift) / self.lat.lambda)
    }

    /// Mean-zero Green function of the torus. It is invariant under the
    /// scaling `z ↦ λz, Λ ↦ λΛ`, so it is evaluated on the reduced lattice.
    pub fn green(&self, z: Complex64) -> Result<f64> {
        let vr = self.check_pole(z)?;
        Ok(self.lat.green_reduced(vr))
    }

    pub fn sigma(&self, z: Complex64) -> Complex64 {
        self.ln_sigma(z).exp()
    }

    /// A logarithm of σ(z). The imaginary part is only meaningful mod 2π;
    /// the value is exact for any expression using integer powers of σ.
    /// Returns `-∞` real part at lattice points.
    pub fn ln_sigma(&self, z: Complex64) -> Complex64 {
        let (vr, m, n) = self.split(z);
        let omega = Complex64::new(m as f64, 0.0) + self.lat.tau * n as f64;
        let eta = self.lat.eta1 * m as f64 + self.lat.eta2 * n as f64;
        let sign = if (m + n + m * n).rem_euclid(2) == 1 {
            Complex64::new(0.0, PI)
        } else {
            Complex64::new(0.0, 0.0)
        };
        self.lat.ln_sigma_reduced(vr) + self.lat.lambda.ln() + sign + eta * (vr + 0.5 * omega)
    }

    /// Principal square root of σ(z+p)σ(z-p), with no continuation.
    pub fn sqrt_sigma_principal(&self, z: Complex64, p: Complex64) -> Complex64 {
        (0.5 * (self.ln_sigma(z + p) + self.ln_sigma(z - p))).exp()
    }

    /// Distance from `z` to `{p, -p} + Λ`.
    pub fn branch_distance(&self, z: Complex64, p: Complex64) -> f64 {
        self.lattice_distance(z - p).min(self.lattice_distance(z + p))
    }

    /// Branch of `√(σ(z+p)σ(z−p))` obtained by continuing along the straight
    /// segment from `base`, where the value is the principal root.
    pub fn sqrt_sigma_branch(&self, z: Complex64, p: Complex64, base: Complex64) -> Result<Complex64> {
        let mut path = SqrtSigmaPath::new(self, p, base)?;
        path.continue_to(self, z, 64)
    }
}

/// Caller-held continuation state for `√(σ(z+p)σ(z−p))`.
#[derive(Debug, Clone, Copy)]
pub struct SqrtSigmaPath {
    pub p: Complex64,
    pub position: Complex64,
    pub value: Complex64,
}

impl SqrtSigmaPath {
    pub fn new(engine: &EllipticEngine, p: Complex64, base: Complex64) -> Result<Self> {
        if engine.branch_distance(base, p) <= engine.torus.precision {
            return Err(Error::BranchPointAt(base));
        }
        Ok(SqrtSigmaPath {
            p,
            position: base,
            value: engine.sqrt_sigma_principal(base, p),
        })
    }

    /// Move along the straight segment to `target` in at least `min_steps`
    /// steps, refining near branch points. Returns the continued value.
    pub fn continue_to(&mut self, engine: &EllipticEngine, target: Complex64, min_steps: usize) -> Result<Complex64> {
        let start = self.position;
        let len = (target - start).norm();
        if len == 0.0 {
            return Ok(self.value);
        }
        let mut t = 0.0f64;
        let base_step = 1.0 / min_steps.max(1) as f64;
        while t < 1.0 {
            let here = start + (target - start) * t;
            let clearance = engine.branch_distance(here, self.p);
            if clearance <= engine.torus.precision {
                return Err(Error::BranchPointAt(here));
            }
            // keep each step well inside the disk of convergence of the root
            let dt = base_step.min(0.2 * clearance / len).min(1.0 - t);
            t += dt;
            let z = start + (target - start) * t;
            if engine.branch_distance(z, self.p) <= engine.torus.precision {
                return Err(Error::BranchPointAt(z));
            }
            let w = engine.sqrt_sigma_principal(z, self.p);
            self.value = if (w - self.value).norm() <= (w + self.value).norm() { w } else { -w };
            self.position = z;
        }
        Ok(self.value)
    }

    /// Continue through a sequence of vertices.
    pub fn follow(&mut self, engine: &EllipticEngine, vertices: &[Complex64], min_steps: usize) -> Result<Complex64> {
        for &v in vertices {
            self.continue_to(engine, v, min_steps)?;
        }
        Ok(self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_torus;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reduction_lands_in_standard_domain() {
        for tau in [c(0.01, 0.2), c(0.95, 0.3), c(3.7, 0.05), c(-2.2, 1.9), c(0.5, 0.866)] {
            let lat = NormalizedLattice::new(tau, 20);
            assert!(lat.tau.re.abs() <= 0.5 + 1e-12, "{tau}: {}", lat.tau);
            assert!(lat.tau.norm() >= 1.0 - 1e-12, "{tau}: {}", lat.tau);
            let b = lat.basis;
            assert_eq!((b.a * b.d - b.b * b.c).abs(), 1);
        }
    }

    #[test]
    fn wp_is_even_and_periodic() {
        let t = make_torus(c(0.3, 1.1), 1e-12).unwrap();
        let e = t.engine();
        for z in [c(0.21, 0.13), c(-0.4, 0.7), c(1.3, -0.2)] {
            let w = e.wp(z).unwrap();
            assert!((w - e.wp(-z).unwrap()).norm() < 1e-10 * w.norm().max(1.0));
            assert!((w - e.wp(z + t.tau).unwrap()).norm() < 1e-10 * w.norm().max(1.0));
            assert!((w - e.wp(z + 1.0).unwrap()).norm() < 1e-10 * w.norm().max(1.0));
        }
    }

    #[test]
    fn pole_at_lattice() {
        let t = make_torus(c(0.0, 1.0), 1e-12).unwrap();
        let e = t.engine();
        assert!(matches!(e.wp(c(1.0, 1.0)), Err(Error::PoleAtLattice(_))));
        assert!(matches!(e.zeta(c(0.0, 0.0)), Err(Error::PoleAtLattice(_))));
        assert_eq!(e.sigma(c(0.0, 0.0)).norm(), 0.0);
    }

    #[test]
    fn zeta_at_half_period() {
        for tau in [c(0.0, 1.0), c(0.5, 0.8660254037844386), c(0.2, 0.7), c(0.9, 2.3)] {
            let t = make_torus(tau, 1e-12).unwrap();
            let e = t.engine();
            let z = e.zeta(c(0.5, 0.0)).unwrap();
            assert!((z - 0.5 * t.eta1).norm() < 1e-12 * t.eta1.norm().max(1.0));
        }
    }

    #[test]
    fn truncation_plus_eight_is_stable() {
        let t = make_torus(c(0.3, 1.1), 1e-12).unwrap();
        let e = t.engine();
        let e8 = EllipticEngine::with_truncation(&t, e.theta_truncation + 8).unwrap();
        for z in [c(0.21, 0.13), c(0.4, 0.7)] {
            assert!((e.wp(z).unwrap() - e8.wp(z).unwrap()).norm() <= t.precision);
            assert!((e.zeta(z).unwrap() - e8.zeta(z).unwrap()).norm() <= t.precision);
            assert!((e.sigma(z) - e8.sigma(z)).norm() <= t.precision);
        }
    }

    #[test]
    fn truncation_above_cap_is_refused() {
        let t = make_torus(c(0.0, 1.0), 1e-12).unwrap();
        assert!(matches!(
            EllipticEngine::with_truncation(&t, t.max_terms + 1),
            Err(Error::PrecisionUnreachable { .. })
        ));
    }

    #[test]
    fn sqrt_branch_square_and_monodromy() {
        let t = make_torus(c(0.0, 1.0), 1e-12).unwrap();
        let e = t.engine();
        let p = c(0.23, 0.31);
        let base = c(0.137, 0.293);
        let z = c(0.6, 0.1);
        let w = e.sqrt_sigma_branch(z, p, base).unwrap();
        let sq = e.sigma(z + p) * e.sigma(z - p);
        assert!((w * w - sq).norm() < 1e-12 * sq.norm().max(1.0));

        // small loop around p flips the sign
        let mut path = SqrtSigmaPath::new(&e, p, p + 0.05).unwrap();
        let start = path.value;
        for k in 1..=2000 {
            let th = 2.0 * PI * k as f64 / 2000.0;
            path.continue_to(&e, p + Complex64::from_polar(0.05, th), 1).unwrap();
        }
        assert!((path.value + start).norm() < 1e-10 * start.norm());

        // loop around both p and -p returns to the same value
        let mut path = SqrtSigmaPath::new(&e, p, c(0.45, 0.0)).unwrap();
        let start = path.value;
        for k in 1..=2000 {
            let th = 2.0 * PI * k as f64 / 2000.0;
            path.continue_to(&e, Complex64::from_polar(0.45, th), 1).unwrap();
        }
        assert!((path.value - start).norm() < 1e-10 * start.norm());
    }

    #[test]
    fn branch_point_is_rejected() {
        let t = make_torus(c(0.0, 1.0), 1e-12).unwrap();
        let e = t.engine();
        let p = c(0.23, 0.31);
        assert!(matches!(
            e.sqrt_sigma_branch(p, p, c(0.137, 0.293)),
            Err(Error::BranchPointAt(_))
        ));
    }
}
