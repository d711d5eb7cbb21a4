//! Baker–Akhiezer functions of the even Lamé-type equation, elliptic
//! functions of the second kind with the fixed divisor
//! `{0: −1, p: −1/2, −p: −1/2}`, and their monodromy data.

use crate::complex_serde;
use crate::elliptic::{EllipticEngine, SqrtSigmaPath};
use crate::error::{Error, Result};
use crate::lame::{LameEquation, PointData, SpectralPoint};
use crate::lattice::Torus;
use crate::numeric::quadrature;
use crate::numeric::roots;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Minimum clearance between an integration path and a pole of φ.
pub const PATH_CLEARANCE: f64 = 0.02;
/// Radius of automatic detours.
pub const DETOUR_RADIUS: f64 = 0.05;

/// Default base point `0.137 + 0.293τ`.
pub fn default_base_point(torus: &Torus) -> Complex64 {
    torus.point(0.137, 0.293)
}

/// `φ(P; z) = (iC + ½Φₑ'(z)) / Φₑ(z)`.
pub fn phi(point: &SpectralPoint, z: Complex64) -> Result<Complex64> {
    Ok(phi_with_derivative(point, z)?.0)
}

/// `φ` and its analytic derivative.
pub fn phi_with_derivative(point: &SpectralPoint, z: Complex64) -> Result<(Complex64, Complex64)> {
    let eq = &point.equation;
    if eq.singular_distance(z) <= eq.torus.precision {
        return Err(Error::PhiPole(z));
    }
    let j = eq.phi_e_jet(z)?;
    let scale = 1f64.max(j.d1.norm());
    if j.value.norm() <= eq.torus.precision * scale {
        return Err(Error::PhiPole(z));
    }
    let num = I * point.c + 0.5 * j.d1;
    let f = num / j.value;
    let df = (0.5 * j.d2 * j.value - num * j.d1) / (j.value * j.value);
    Ok((f, df))
}

/// `|φ' + φ² − q|` and the scale `max(1, |q|, |φ|²)`.
pub fn riccati_residual(point: &SpectralPoint, z: Complex64) -> Result<(f64, f64)> {
    let (f, df) = phi_with_derivative(point, z)?;
    let q = point.equation.potential_q(z)?;
    Ok(((df + f * f - q).norm(), 1f64.max(q.norm()).max(f.norm_sqr())))
}

/// Zeros of `Φₑ` in the cell, found by Newton from a seed grid and
/// deduplicated modulo the lattice.
pub fn phi_e_zeros(eq: &LameEquation) -> Vec<Complex64> {
    let torus = &eq.torus;
    let engine = eq.engine();
    let n = 8;
    let mut found: Vec<Complex64> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let seed = torus.point((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
            // Newton on Φ/Φ' keeps quadratic convergence at double zeros
            let f = |z: Complex64| eq.phi_e_jet(z).ok().map(|j| j.value / j.d1);
            let df = |z: Complex64| {
                eq.phi_e_jet(z)
                    .ok()
                    .map(|j| 1.0 - j.value * j.d2 / (j.d1 * j.d1))
            };
            if let Ok(root) = roots::newton(f, df, seed, 1e-15, 60) {
                let (r, s) = torus.coords(root.root);
                let z = torus.point(r.rem_euclid(1.0), s.rem_euclid(1.0));
                if eq.singular_distance(z) < 1e-6 {
                    continue;
                }
                if !found.iter().any(|w| engine.lattice_distance(z - w) < 1e-7) {
                    found.push(z);
                }
            }
        }
    }
    found
}

/// Poles of `φ(P; ·)` modulo the lattice: `0, ±p` and the zeros of `Φₑ`.
pub fn phi_singularities(eq: &LameEquation) -> Vec<Complex64> {
    let mut s = vec![Complex64::new(0.0, 0.0), eq.p, -eq.p];
    s.extend(phi_e_zeros(eq));
    s
}

/// Closest approach of the segment `[a, b]` to `s + Λ`; returns the
/// distance and the nearest translate.
fn segment_clearance(torus: &Torus, a: Complex64, b: Complex64, s: Complex64) -> (f64, Complex64) {
    let (ra, sa) = torus.coords(a - s);
    let (rb, sb) = torus.coords(b - s);
    let (m0, m1) = (ra.min(rb).floor() as i64 - 1, ra.max(rb).ceil() as i64 + 1);
    let (n0, n1) = (sa.min(sb).floor() as i64 - 1, sa.max(sb).ceil() as i64 + 1);
    let mut best = (f64::INFINITY, s);
    let d = b - a;
    for m in m0..=m1 {
        for n in n0..=n1 {
            let w = s + torus.point(m as f64, n as f64);
            let t = if d.norm_sqr() > 0.0 {
                (((w - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let dist = (a + d * t - w).norm();
            if dist < best.0 {
                best = (dist, w);
            }
        }
    }
    best
}

/// Piecewise-linear integration path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    #[serde(with = "complex_serde::vec")]
    pub vertices: Vec<Complex64>,
}

impl Path {
    pub fn straight(from: Complex64, to: Complex64) -> Self {
        Path { vertices: vec![from, to] }
    }

    pub fn polyline(vertices: Vec<Complex64>) -> Self {
        Path { vertices }
    }

    pub fn start(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn end(&self) -> Complex64 {
        *self.vertices.last().unwrap()
    }

    /// Straight path from `from` to `to`, detouring to the left of every
    /// singular point (and lattice translate) closer than the detour radius.
    pub fn avoiding(torus: &Torus, singularities: &[Complex64], from: Complex64, to: Complex64) -> Self {
        let d = to - from;
        let len = d.norm();
        if len == 0.0 {
            return Path::straight(from, to);
        }
        let unit = d / len;
        let mut hits: Vec<(f64, Complex64)> = Vec::new();
        for &s in singularities {
            let (dist, w) = segment_clearance(torus, from, to, s);
            if dist < DETOUR_RADIUS {
                let t = ((w - from) * unit.conj()).re;
                hits.push((t, w));
            }
        }
        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut vertices = vec![from];
        let rad = 1.5 * DETOUR_RADIUS;
        for (t, w) in hits {
            // two corners of a box on the left of w, measured from the foot point
            let foot = from + unit * t;
            let offset = ((w - foot) * unit.conj()).im;
            let side = I * unit * (offset + rad);
            vertices.push(foot - unit * rad);
            vertices.push(foot - unit * rad + side);
            vertices.push(foot + unit * rad + side);
            vertices.push(foot + unit * rad);
        }
        vertices.push(to);
        Path { vertices }
    }

    /// Smallest distance from the path to `singularities + Λ`.
    pub fn clearance(&self, torus: &Torus, singularities: &[Complex64]) -> (f64, Complex64) {
        let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
        for seg in self.vertices.windows(2) {
            for &s in singularities {
                let c = segment_clearance(torus, seg[0], seg[1], s);
                if c.0 < best.0 {
                    best = c;
                }
            }
        }
        best
    }
}

/// `∫ φ(P; ξ) dξ` along `path`, segment by segment with adaptive
/// Gauss–Kronrod quadrature.
pub fn integrate_phi(point: &SpectralPoint, path: &Path, singularities: &[Complex64]) -> Result<Complex64> {
    let eq = &point.equation;
    let (dist, sing) = path.clearance(&eq.torus, singularities);
    if dist < PATH_CLEARANCE {
        return Err(Error::PathTooClose {
            singularity: sing,
            distance: dist,
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for seg in path.vertices.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let d = b - a;
        let f = |t: f64| phi(point, a + d * t).map(|v| v * d).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        let v = quadrature::integrate(f, 0.0, 1.0, 1e-12);
        if !v.is_finite() {
            return Err(Error::PhiPole(a));
        }
        acc += v;
    }
    Ok(acc)
}

/// `ψ(P; z, z₀) = exp ∫_{z₀}^{z} φ(P; ξ) dξ` along `path` (from `z₀`),
/// extended by a final straight leg to `z` if needed.
pub fn baker_psi(point: &SpectralPoint, z: Complex64, path: &Path) -> Result<Complex64> {
    let sing = phi_singularities(&point.equation);
    baker_psi_with(point, z, path, &sing)
}

/// As [`baker_psi`] with precomputed singularities.
pub fn baker_psi_with(point: &SpectralPoint, z: Complex64, path: &Path, singularities: &[Complex64]) -> Result<Complex64> {
    let mut route = path.clone();
    if route.end() != z {
        route.vertices.push(z);
    }
    Ok(integrate_phi(point, &route, singularities)?.exp())
}

/// `ψ(P)ψ(P*)` and `W(ψ(P), ψ(P*)) = ψ'(P)ψ(P*) − ψ(P)ψ'(P*)` at the end of
/// `path`, both from the same route.
pub fn product_and_wronskian(point: &SpectralPoint, path: &Path) -> Result<(Complex64, Complex64)> {
    let sing = phi_singularities(&point.equation);
    let dual = point.dual();
    let z = path.end();
    let y1 = baker_psi_with(point, z, path, &sing)?;
    let y2 = baker_psi_with(&dual, z, path, &sing)?;
    let (f1, f2) = (phi(point, z)?, phi(&dual, z)?);
    Ok((y1 * y2, y1 * y2 * (f1 - f2)))
}

/// `e^{cz} σ(z−a₁)σ(z−a₂) / (σ(z) √(σ(z+p)σ(z−p)))`.
#[derive(Debug, Clone, Serialize)]
pub struct SecondKindFunction {
    #[serde(with = "complex_serde")]
    pub c: Complex64,
    #[serde(with = "complex_serde")]
    pub a1: Complex64,
    #[serde(with = "complex_serde")]
    pub a2: Complex64,
    #[serde(with = "complex_serde")]
    pub p: Complex64,
    #[serde(skip)]
    pub torus: Torus,
    #[serde(skip)]
    engine: EllipticEngine,
}

impl SecondKindFunction {
    pub fn new(torus: &Torus, p: Complex64, c: Complex64, a1: Complex64, a2: Complex64) -> Self {
        SecondKindFunction {
            c,
            a1,
            a2,
            p,
            torus: torus.clone(),
            engine: torus.engine(),
        }
    }

    pub fn engine(&self) -> &EllipticEngine {
        &self.engine
    }

    /// `y'/y`
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        let e = &self.engine;
        let p = self.p;
        Ok(self.c + e.zeta(z - self.a1)? + e.zeta(z - self.a2)? - e.zeta(z)? - 0.5 * (e.zeta(z + p)? + e.zeta(z - p)?))
    }

    /// `(y'/y)'`
    pub fn log_derivative_prime(&self, z: Complex64) -> Result<Complex64> {
        let e = &self.engine;
        let p = self.p;
        Ok(e.wp(z)? + 0.5 * (e.wp(z + p)? + e.wp(z - p)?) - e.wp(z - self.a1)? - e.wp(z - self.a2)?)
    }

    /// `|y''/y − q|` for the equation with parameter `A`, and its scale.
    pub fn gle_residual(&self, eq: &LameEquation, z: Complex64) -> Result<(f64, f64)> {
        let l = self.log_derivative(z)?;
        let dl = self.log_derivative_prime(z)?;
        let q = eq.potential_q(z)?;
        Ok(((dl + l * l - q).norm(), 1f64.max(q.norm()).max(l.norm_sqr())))
    }

    /// Everything except the square root, `e^{cz}σ(z−a₁)σ(z−a₂)/σ(z)`.
    fn rational_part(&self, z: Complex64) -> Complex64 {
        let e = &self.engine;
        (self.c * z + e.ln_sigma(z - self.a1) + e.ln_sigma(z - self.a2) - e.ln_sigma(z)).exp()
    }

    /// Value at the current end of a square-root continuation path after
    /// moving it to `z`.
    pub fn eval_along(&self, path: &mut SqrtSigmaPath, z: Complex64) -> Result<Complex64> {
        let root = path.continue_to(&self.engine, z, 64)?;
        Ok(self.rational_part(z) / root)
    }

    /// Value at `z` with the root continued along the straight segment from `base`.
    pub fn eval(&self, z: Complex64, base: Complex64) -> Result<Complex64> {
        let mut path = SqrtSigmaPath::new(&self.engine, self.p, base)?;
        self.eval_along(&mut path, z)
    }

    /// Closed-form multipliers `λⱼ = exp(cωⱼ − ηⱼ(a₁ + a₂))`.
    pub fn multipliers(&self) -> (Complex64, Complex64) {
        let sum = self.a1 + self.a2;
        let t = &self.torus;
        ((self.c - t.eta1 * sum).exp(), (self.c * t.tau - t.eta2 * sum).exp())
    }

    /// `y(z + ω)/y(z)` with the root continued from `base` to `z` and on
    /// along the straight segment to `z + ω`.
    pub fn ratio_along(&self, base: Complex64, z: Complex64, omega: Complex64) -> Result<Complex64> {
        let mut path = SqrtSigmaPath::new(&self.engine, self.p, base)?;
        let y0 = self.eval_along(&mut path, z)?;
        let y1 = self.eval_along(&mut path, z + omega)?;
        Ok(y1 / y0)
    }

    /// `(r, s)` from `r + sτ = a₁ + a₂`, `rη₁ + sη₂ = c`.
    pub fn monodromy_data(&self) -> MonodromyData {
        let t = &self.torus;
        let sum = self.a1 + self.a2;
        let s = (t.eta1 * sum - self.c) / (2.0 * PI * I);
        let r = sum - s * t.tau;
        MonodromyData::new(r, s)
    }
}

/// Pair `(r, s)` modulo `Z²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonodromyData {
    #[serde(with = "complex_serde")]
    pub r: Complex64,
    #[serde(with = "complex_serde")]
    pub s: Complex64,
    pub degenerate: bool,
    pub unitary: bool,
}

pub const MONODROMY_TOLERANCE: f64 = 1e-8;

fn mod1(z: Complex64) -> Complex64 {
    let mut re = z.re.rem_euclid(1.0);
    if re > 1.0 - 1e-12 {
        re = 0.0;
    }
    Complex64::new(re, z.im)
}

impl MonodromyData {
    pub fn new(r: Complex64, s: Complex64) -> Self {
        let (r, s) = (mod1(r), mod1(s));
        let half = |x: Complex64| {
            x.im.abs() <= MONODROMY_TOLERANCE && (2.0 * x.re - (2.0 * x.re).round()).abs() <= 2.0 * MONODROMY_TOLERANCE
        };
        MonodromyData {
            r,
            s,
            degenerate: half(r) && half(s),
            unitary: r.im.abs() <= MONODROMY_TOLERANCE && s.im.abs() <= MONODROMY_TOLERANCE,
        }
    }

    /// From `λ₁ = e^{−2πis}`, `λ₂ = e^{2πir}`.
    pub fn from_multipliers(l1: Complex64, l2: Complex64) -> Self {
        let s = -l1.ln() / (2.0 * PI * I);
        let r = l2.ln() / (2.0 * PI * I);
        MonodromyData::new(r, s)
    }

    pub fn multipliers(&self) -> (Complex64, Complex64) {
        ((-2.0 * PI * I * self.s).exp(), (2.0 * PI * I * self.r).exp())
    }

    pub fn dual(&self) -> Self {
        MonodromyData::new(-self.r, -self.s)
    }

    /// Distance modulo `Z²` between two pairs.
    pub fn distance(&self, other: &MonodromyData) -> f64 {
        let d = |a: Complex64, b: Complex64| {
            let x = a - b;
            Complex64::new(x.re - x.re.round(), x.im).norm()
        };
        d(self.r, other.r).max(d(self.s, other.s))
    }
}

/// Complete reducibility read off from the monodromy data.
pub fn reducibility_by_monodromy(data: &MonodromyData) -> bool {
    !data.degenerate
}

/// The second-kind representation of `ψ(P; ·)`: its zeros are the zeros of
/// `Φₑ` where `Φₑ' = 2iC`, and `c` is matched against `φ` at a regular point.
pub fn second_kind_of(point: &SpectralPoint) -> Result<SecondKindFunction> {
    let eq = &point.equation;
    let zeros = phi_e_zeros(eq);
    let target = 2.0 * I * point.c;
    let mut scored: Vec<(f64, Complex64)> = Vec::new();
    for &z in &zeros {
        let d1 = eq.phi_e_jet(z)?.d1;
        scored.push(((d1 - target).norm() / (1.0 + target.norm()), z));
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if scored.len() < 2 || scored[1].0 > 1e-6 {
        return Err(Error::DegenerateZeros(format!(
            "could not identify two zeros of psi among {} zeros of Phi_e",
            zeros.len()
        )));
    }
    let (a1, a2) = (scored[0].1, scored[1].1);
    let mut y = SecondKindFunction::new(&eq.torus, eq.p, Complex64::new(0.0, 0.0), a1, a2);
    let z = default_base_point(&eq.torus);
    y.c = phi(point, z)? - y.log_derivative(z)?;
    Ok(y)
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralZeros {
    pub valid: bool,
    /// `|℘'(a₁)/(℘(p)−℘(a₁)) + ℘'(a₂)/(℘(p)−℘(a₂))|`
    pub condition: f64,
    #[serde(with = "complex_serde")]
    pub c: Complex64,
    #[serde(with = "complex_serde", rename = "A")]
    pub a: Complex64,
}

/// `h(x) = ℘'(x)/(℘(p) − ℘(x))`.
pub fn zero_condition_term(engine: &EllipticEngine, p: Complex64, x: Complex64) -> Result<Complex64> {
    Ok(engine.wp_prime(x)? / (engine.wp(p)? - engine.wp(x)?))
}

pub fn check_general_zeros(torus: &Torus, p: Complex64, a1: Complex64, a2: Complex64) -> Result<GeneralZeros> {
    let e = torus.engine();
    let tol = 1e-9;
    for a in [a1, a2] {
        if e.lattice_distance(a) < tol || e.branch_distance(a, p) < tol {
            return Err(Error::DegenerateZeros(format!("zero {a} hits the fixed divisor")));
        }
    }
    if e.lattice_distance(a1 - a2) < tol {
        return Err(Error::DegenerateZeros("a1 = a2".into()));
    }
    let d = PointData::new(torus, p)?;
    let h1 = zero_condition_term(&e, p, a1)?;
    let h2 = zero_condition_term(&e, p, a2)?;
    let condition = (h1 + h2).norm();
    let valid = condition <= tol * (1.0 + h1.norm().max(h2.norm()));
    let c = e.zeta(a1)? + e.zeta(a2)?;
    let a = (d.wp1 - e.wp_prime(a1)?) / (2.0 * (d.wp - e.wp(a1)?))
        + (d.wp1 - e.wp_prime(a2)?) / (2.0 * (d.wp - e.wp(a2)?))
        - d.wp2 / (4.0 * d.wp1);
    Ok(GeneralZeros { valid, condition, c, a })
}

/// Solve the zero condition for `a₂` given `a₁`, rejecting the trivial
/// solution `a₂ ≡ −a₁`.
pub fn solve_partner_zero(torus: &Torus, p: Complex64, a1: Complex64, seed: Complex64) -> Result<Complex64> {
    let e = torus.engine();
    let h1 = zero_condition_term(&e, p, a1)?;
    let f = |x: Complex64| zero_condition_term(&e, p, x).ok().map(|h| h + h1);
    let root = roots::secant(f, seed, seed + Complex64::new(1e-3, 7e-4), 1e-14, 100)?;
    let a2 = root.root;
    if e.lattice_distance(a2 + a1) < 1e-6 {
        return Err(Error::DegenerateZeros("converged to a2 = -a1".into()));
    }
    if e.lattice_distance(a2) < 1e-6 || e.branch_distance(a2, p) < 1e-6 || e.lattice_distance(a2 - a1) < 1e-6 {
        return Err(Error::DegenerateZeros(format!("partner zero {a2} is degenerate")));
    }
    Ok(a2)
}

#[derive(Debug, Clone, Serialize)]
pub struct DoubleZero {
    #[serde(with = "complex_serde")]
    pub c: Complex64,
    #[serde(with = "complex_serde", rename = "A0")]
    pub a0: Complex64,
    pub psi: SecondKindFunction,
}

/// `a₁ = a₂ = p`: `c = 2ζ(p)`, `A₀ = 3℘''(p)/(4℘'(p))`.
pub fn check_double_zero_at_p(torus: &Torus, p: Complex64) -> Result<DoubleZero> {
    let d = PointData::new(torus, p)?;
    let c = 2.0 * d.zeta;
    Ok(DoubleZero {
        c,
        a0: d.a0(),
        psi: SecondKindFunction::new(torus, p, c, p, p),
    })
}
