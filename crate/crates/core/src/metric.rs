//! Developing maps of type II, the one-parameter metric family `u_β`,
//! residual checks of the curvature equation, and verification pipelines
//! for the existence, monodromy, rigidity and square-root statements.

use crate::baker::{
    check_double_zero_at_p, default_base_point, integrate_phi, phi, phi_singularities, MonodromyData, Path,
};
use crate::complex_serde;
use crate::elliptic::EllipticEngine;
use crate::error::{Error, Result};
use crate::green::{find_nontrivial_critical, has_nontrivial, hecke_z, min_abs_z_grid, rho, solve_tau, CriticalPoint};
use crate::lame::{LameEquation, PointData, SpectralPoint};
use crate::lattice::{in_delta0, make_torus, reduce, Torus, TorusPoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Seed of the sample-point generator unless a caller supplies one.
pub const DEFAULT_SEED: u64 = 0x7a11_c0de;

/// Closed-form identities.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Identities that go through path integrals.
pub const PATH_INTEGRAL_TOL: f64 = 1e-7;
/// Finite-difference PDE residuals.
pub const PDE_TOL: f64 = 1e-4;
/// `|Z(a)|` below which `a` counts as a critical point.
pub const CRITICAL_TOL: f64 = 1e-8;
/// Floor for `min |Z|` on the no-existence branch.
pub const NO_CRITICAL_FLOOR: f64 = 0.1;
/// Grid and exclusion radius of the no-existence scan.
pub const NO_CRITICAL_GRID: usize = 60;
pub const NO_CRITICAL_EXCLUSION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// `f = e^{4ζ(a)z} σ(z−a)²/σ(z+a)²`
    DoubleCone,
    /// `h = e^{2ζ(a)z} σ(z−a)/σ(z+a)`
    SingleCone,
}

impl MapKind {
    fn power(self) -> f64 {
        match self {
            MapKind::DoubleCone => 2.0,
            MapKind::SingleCone => 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DevelopingMap {
    pub kind: MapKind,
    #[serde(skip)]
    pub torus: Torus,
    pub a: TorusPoint,
    /// `4ζ(a)` or `2ζ(a)`.
    #[serde(with = "complex_serde")]
    pub rate: Complex64,
    /// `|Z(a)|`
    pub critical_residual: f64,
    pub warning: Option<String>,
    #[serde(skip)]
    engine: EllipticEngine,
}

pub fn developing_f(torus: &Torus, a: Complex64) -> Result<DevelopingMap> {
    DevelopingMap::new(torus, a, MapKind::DoubleCone)
}

pub fn developing_h(torus: &Torus, a: Complex64) -> Result<DevelopingMap> {
    DevelopingMap::new(torus, a, MapKind::SingleCone)
}

impl DevelopingMap {
    pub fn new(torus: &Torus, a: Complex64, kind: MapKind) -> Result<Self> {
        if torus.is_two_torsion(a) {
            return Err(Error::TwoTorsion(a));
        }
        let engine = torus.engine();
        let (r, s) = torus.coords(a);
        let critical_residual = hecke_z(torus, r, s)?.norm();
        let warning = (critical_residual > CRITICAL_TOL)
            .then(|| format!("a is not a critical point of G: |Z(a)| = {critical_residual:e}"));
        Ok(DevelopingMap {
            kind,
            torus: torus.clone(),
            a: reduce(torus, a),
            rate: 2.0 * kind.power() * engine.zeta(a)?,
            critical_residual,
            warning,
            engine,
        })
    }

    fn point(&self) -> Complex64 {
        self.a.z
    }

    pub fn engine(&self) -> &EllipticEngine {
        &self.engine
    }

    /// Zeros (at `a`) and poles (at `−a`), each of order 2 for `f` and 1 for `h`.
    pub fn zeros(&self) -> Vec<Complex64> {
        vec![self.point()]
    }

    pub fn poles(&self) -> Vec<Complex64> {
        vec![-self.point()]
    }

    pub fn order(&self) -> u32 {
        self.kind.power() as u32
    }

    /// `log f(z)`, with an imaginary part defined mod 2π.
    pub fn ln_value(&self, z: Complex64) -> Complex64 {
        let e = &self.engine;
        let a = self.point();
        self.rate * z + self.kind.power() * (e.ln_sigma(z - a) - e.ln_sigma(z + a))
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        let e = &self.engine;
        let a = self.point();
        if e.lattice_distance(z - a) == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if e.lattice_distance(z + a) == 0.0 {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        self.ln_value(z).exp()
    }

    /// `f'/f = rate + k(ζ(z−a) − ζ(z+a))`
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        let e = &self.engine;
        let a = self.point();
        Ok(self.rate + self.kind.power() * (e.zeta(z - a)? - e.zeta(z + a)?))
    }

    /// First two derivatives of [`Self::log_derivative`].
    pub fn log_derivative_jet(&self, z: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let e = &self.engine;
        let a = self.point();
        let k = self.kind.power();
        let l = self.rate + k * (e.zeta(z - a)? - e.zeta(z + a)?);
        let l1 = k * (e.wp(z + a)? - e.wp(z - a)?);
        let l2 = k * (e.wp_prime(z + a)? - e.wp_prime(z - a)?);
        Ok((l, l1, l2))
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.value(z) * self.log_derivative(z)?)
    }

    /// Distance from `z` to `{0, a, −a} + Λ`.
    pub fn singular_distance(&self, z: Complex64) -> f64 {
        let e = &self.engine;
        let a = self.point();
        e.lattice_distance(z).min(e.lattice_distance(z - a)).min(e.lattice_distance(z + a))
    }

    /// Type-II data from the closed form: `f(z+1) = e^{−4πis} f(z)`,
    /// `f(z+τ) = e^{4πir} f(z)`. Complex in general, real iff `a` is critical.
    pub fn closed_form_data(&self) -> (Complex64, Complex64) {
        let t = &self.torus;
        let a = self.point();
        let k = self.kind.power();
        let s = (2.0 * k * a * t.eta1 - self.rate) / (4.0 * PI * I);
        let r = (self.rate * t.tau - 2.0 * k * a * t.eta2) / (4.0 * PI * I);
        (r, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSample {
    pub z: TorusPoint,
    pub beta: f64,
    pub u: f64,
    pub valid: bool,
}

/// `ln(1 + eˣ)` without overflow.
fn softplus(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `u_β(z) = log 8e^{2β}|f'|² / (1 + e^{2β}|f|²)²`, evaluated in the log domain.
pub fn metric_u(map: &DevelopingMap, beta: f64, z: Complex64) -> Result<MetricSample> {
    let dist = map.singular_distance(z);
    if dist <= map.torus.precision {
        return Err(Error::SingularPoint(z));
    }
    let u = metric_u_raw(map, beta, z)?;
    Ok(MetricSample {
        z: reduce(&map.torus, z),
        beta,
        u,
        valid: u.is_finite(),
    })
}

fn metric_u_raw(map: &DevelopingMap, beta: f64, z: Complex64) -> Result<f64> {
    let ln_abs_f = map.ln_value(z).re;
    let ln_abs_l = map.log_derivative(z)?.norm().ln();
    let x = 2.0 * beta + 2.0 * ln_abs_f;
    Ok(3.0 * LN_2 + x + 2.0 * ln_abs_l - 2.0 * softplus(x))
}

/// `log 8|g'|²/(1 + |g|²)²` for a map given by its value and derivative.
pub fn liouville_u(g: Complex64, dg: Complex64) -> f64 {
    (8.0 * dg.norm_sqr()).ln() - 2.0 * g.norm_sqr().ln_1p()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvatureResidual {
    #[serde(with = "complex_serde")]
    pub z: Complex64,
    pub beta: f64,
    pub step: f64,
    /// `|Δu + e^u|` with the Richardson combination `(4Δ_{h/2} − Δ_h)/3`.
    pub residual: f64,
    /// `max(1e-4, 2·e)` where `e` estimates the error of `residual` from the
    /// same combination at `2h`.
    pub bound: f64,
    /// `|Δ_h u + e^u|` from a single five-point stencil.
    pub raw_residual: f64,
    /// `max(1e-4, C·step²)` for `raw_residual`.
    pub raw_bound: f64,
    /// `C = (|u_xxxx| + |u_yyyy|)/6`, twice the leading truncation constant.
    pub fourth_derivative_constant: f64,
}

/// Residual of `Δu + e^u = 0` from five-point Laplacians of `u_β`.
pub fn curvature_residual(map: &DevelopingMap, beta: f64, z: Complex64, step: f64) -> Result<CurvatureResidual> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let dist = map.singular_distance(z);
    if dist < 10.0 * step {
        return Err(Error::TooCloseToSingularity {
            point: z,
            distance: dist,
            required: 10.0 * step,
        });
    }
    let u = |w: Complex64| metric_u_raw(map, beta, w);
    let u0 = u(z)?;
    let lap = |h: f64| -> Result<f64> {
        let (dx, dy) = (Complex64::new(h, 0.0), Complex64::new(0.0, h));
        Ok((u(z + dx)? + u(z - dx)? + u(z + dy)? + u(z - dy)? - 4.0 * u0) / (h * h))
    };
    let h = step;
    let (l2, l1, lhalf) = (lap(2.0 * h)?, lap(h)?, lap(0.5 * h)?);
    let fine = (4.0 * lhalf - l1) / 3.0;
    let coarse = (4.0 * l1 - l2) / 3.0;
    let e0 = u0.exp();

    let big = 2.0 * h;
    let fourth = |d: Complex64| -> Result<f64> {
        Ok((u(z - 2.0 * d)? - 4.0 * u(z - d)? + 6.0 * u0 - 4.0 * u(z + d)? + u(z + 2.0 * d)?) / big.powi(4))
    };
    let c = (fourth(Complex64::new(big, 0.0))?.abs() + fourth(Complex64::new(0.0, big))?.abs()) / 6.0;
    Ok(CurvatureResidual {
        z,
        beta,
        step,
        residual: (fine + e0).abs(),
        bound: PDE_TOL.max(2.0 * (coarse - fine).abs() / 15.0),
        raw_residual: (l1 + e0).abs(),
        raw_bound: PDE_TOL.max(c * h * h),
        fourth_derivative_constant: c,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SchwarzianResidual {
    #[serde(with = "complex_serde")]
    pub z: Complex64,
    #[serde(with = "complex_serde")]
    pub schwarzian: Complex64,
    /// `q(z; A₀)` of the equation with `p = a`.
    #[serde(with = "complex_serde")]
    pub potential: Complex64,
    /// `|{f;z} + 2q(z; A₀)|`
    pub residual: f64,
}

/// `{f; z} = L''/L − (3/2)(L'/L)² − L²/2` with `L = f'/f`, against `−2q(z; A₀)`.
pub fn schwarzian_residual(map: &DevelopingMap, z: Complex64) -> Result<SchwarzianResidual> {
    if map.kind != MapKind::DoubleCone {
        return Err(Error::InvalidArgument(
            "the Schwarzian identity applies to the double-cone map f".into(),
        ));
    }
    if map.singular_distance(z) <= map.torus.precision {
        return Err(Error::SingularPoint(z));
    }
    let (l, l1, l2) = map.log_derivative_jet(z)?;
    if l.norm() <= map.torus.precision {
        return Err(Error::SingularPoint(z));
    }
    let schwarzian = l2 / l - 1.5 * (l1 / l).powi(2) - 0.5 * l * l;
    let d = PointData::new(&map.torus, map.point())?;
    let eq = LameEquation::new(&map.torus, map.point(), d.a0())?;
    let potential = eq.potential_q(z)?;
    Ok(SchwarzianResidual {
        z,
        schwarzian,
        potential,
        residual: (schwarzian + 2.0 * potential).norm(),
    })
}

/// `n` points `r + sτ` with `(r, s)` uniform in the unit square, at distance
/// at least `clearance` from `avoid + Λ`. Deterministic in `seed`.
pub fn sample_points(torus: &Torus, n: usize, seed: u64, avoid: &[Complex64], clearance: f64) -> Vec<Complex64> {
    let e = torus.engine();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 10_000 * n.max(1) {
        attempts += 1;
        let z = torus.point(rng.gen::<f64>(), rng.gen::<f64>());
        if avoid.iter().all(|&w| e.lattice_distance(z - w) >= clearance) {
            out.push(z);
        }
    }
    out
}

fn map_avoid(map: &DevelopingMap) -> [Complex64; 3] {
    [Complex64::new(0.0, 0.0), map.point(), -map.point()]
}

fn sample_clearance(torus: &Torus) -> f64 {
    // a tenth of the shortest period
    0.1 * torus.tau.norm().min(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeIIReport {
    pub kind: MapKind,
    /// Closed-form data, reduced mod `Z²`.
    pub data: MonodromyData,
    /// Data read off the measured ratios; determined only mod `½Z²`.
    pub measured_half: (f64, f64),
    /// Spread of `f(z+ωⱼ)/f(z)` across samples, relative.
    pub max_defect: f64,
    /// `max |ratio| − 1`
    pub unit_defect: f64,
    /// Measured against closed-form data, mod `½Z²`.
    pub closed_form_defect: f64,
    pub expected: Option<MonodromyData>,
    pub expected_distance: Option<f64>,
    pub sample_seed: u64,
    pub samples: usize,
}

fn half_distance(x: f64, y: f64) -> f64 {
    let d = 2.0 * (x - y);
    (d - d.round()).abs() / 2.0
}

/// Measure `f(z + ωⱼ)/f(z)` at 10 seeded sample points and read off `(r, s)`.
pub fn verify_type_ii(map: &DevelopingMap, seed: u64) -> Result<TypeIIReport> {
    let torus = &map.torus;
    let pts = sample_points(torus, 10, seed, &map_avoid(map), sample_clearance(torus));
    let omegas = [Complex64::new(1.0, 0.0), torus.tau];
    let mut ratios = [Vec::new(), Vec::new()];
    for &z in &pts {
        let base = map.ln_value(z);
        for (j, &w) in omegas.iter().enumerate() {
            ratios[j].push((map.ln_value(z + w) - base).exp());
        }
    }
    let mean = |v: &[Complex64]| v.iter().sum::<Complex64>() / v.len() as f64;
    let (m1, m2) = (mean(&ratios[0]), mean(&ratios[1]));
    let mut max_defect: f64 = 0.0;
    let mut unit_defect: f64 = 0.0;
    for (v, m) in [(&ratios[0], m1), (&ratios[1], m2)] {
        for x in v.iter() {
            max_defect = max_defect.max((x - m).norm() / m.norm());
            unit_defect = unit_defect.max((x.norm() - 1.0).abs());
        }
    }
    if max_defect > CLOSED_FORM_TOL || unit_defect > CLOSED_FORM_TOL {
        return Err(Error::NotTypeII(max_defect.max(unit_defect)));
    }
    let s_half = (-m1.arg() / (4.0 * PI)).rem_euclid(0.5);
    let r_half = (m2.arg() / (4.0 * PI)).rem_euclid(0.5);
    let (r, s) = map.closed_form_data();
    let data = MonodromyData::new(r, s);
    let closed_form_defect = half_distance(r_half, data.r.re).max(half_distance(s_half, data.s.re));

    let expected = (map.critical_residual <= CRITICAL_TOL).then(|| {
        let (ar, as_) = torus.coords(map.point());
        let k = map.kind.power();
        MonodromyData::new(Complex64::new(k * ar, 0.0), Complex64::new(k * as_, 0.0))
    });
    Ok(TypeIIReport {
        kind: map.kind,
        data,
        measured_half: (r_half, s_half),
        max_defect,
        unit_defect,
        closed_form_defect,
        expected_distance: expected.map(|e| e.distance(&data)),
        expected,
        sample_seed: seed,
        samples: pts.len(),
    })
}

/// `max |f(z) − h(z)²| / |f(z)|` at 20 seeded sample points.
pub fn square_root_defect(torus: &Torus, a: Complex64, seed: u64) -> Result<f64> {
    let f = developing_f(torus, a)?;
    let h = developing_h(torus, a)?;
    let pts = sample_points(torus, 20, seed, &map_avoid(&f), sample_clearance(torus));
    Ok(pts
        .iter()
        .map(|&z| {
            let fv = f.value(z);
            (fv - h.value(z).powi(2)).norm() / fv.norm()
        })
        .fold(0.0, f64::max))
}

/// `max |f(−z)f(z) − 1|` at 10 seeded sample points.
pub fn evenness_defect(map: &DevelopingMap, seed: u64) -> f64 {
    let pts = sample_points(&map.torus, 10, seed, &map_avoid(map), sample_clearance(&map.torus));
    pts.iter()
        .map(|&z| ((map.ln_value(z) + map.ln_value(-z)).exp() - 1.0).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct LiouvilleReport {
    /// `max ||y₁|² + |y₂|² − 2√2|W|e^{−u/2}| / (|y₁|² + |y₂|²)`
    pub max_defect: f64,
    #[serde(with = "complex_serde")]
    pub wronskian: Complex64,
    /// Spread of `(y₁/y₂)/f` across samples, relative.
    pub ratio_spread: f64,
    /// `β` with `y₁/y₂ = e^{β + iθ} f`.
    pub beta: f64,
    /// `max |u(y₁/y₂) − u_β(f)|`
    pub family_defect: f64,
    pub sample_seed: u64,
    pub samples: usize,
}

/// `y₁ = ψ(P)`, `y₂ = ψ(P*)` at `A₀` with `p = a`, by path integration from
/// the default base point, and the norm identity against the constant
/// Wronskian `W = φ(P; z₀) − φ(P*; z₀)`.
pub fn liouville_check(torus: &Torus, a: Complex64, seed: u64) -> Result<LiouvilleReport> {
    let d = PointData::new(torus, a)?;
    let eq = LameEquation::new(torus, a, d.a0())?;
    let p1 = SpectralPoint::new(&eq, 1);
    let p2 = p1.dual();
    let sing = phi_singularities(&eq);
    let base = default_base_point(torus);
    let w = phi(&p1, base)? - phi(&p2, base)?;
    let f = developing_f(torus, a)?;
    let pts = sample_points(torus, 10, seed, &map_avoid(&f), 0.1_f64.max(sample_clearance(torus)));

    struct Row {
        defect: f64,
        ratio: Complex64,
        u: f64,
        z: Complex64,
    }
    let rows: Vec<Result<Row>> = pts
        .par_iter()
        .map(|&z| {
            let path = Path::avoiding(torus, &sing, base, z);
            let y1 = integrate_phi(&p1, &path, &sing)?.exp();
            let y2 = integrate_phi(&p2, &path, &sing)?.exp();
            let g = y1 / y2;
            let dg = g * (phi(&p1, z)? - phi(&p2, z)?);
            let u = liouville_u(g, dg);
            let lhs = y1.norm_sqr() + y2.norm_sqr();
            let rhs = 2.0 * 2f64.sqrt() * w.norm() * (-0.5 * u).exp();
            Ok(Row {
                defect: (lhs - rhs).abs() / lhs,
                ratio: g / f.value(z),
                u,
                z,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mean = rows.iter().map(|r| r.ratio).sum::<Complex64>() / rows.len() as f64;
    let ratio_spread = rows.iter().map(|r| (r.ratio - mean).norm() / mean.norm()).fold(0.0, f64::max);
    let beta = mean.norm().ln();
    let mut family_defect: f64 = 0.0;
    for r in &rows {
        family_defect = family_defect.max((r.u - metric_u_raw(&f, beta, r.z)?).abs());
    }
    Ok(LiouvilleReport {
        max_defect: rows.iter().map(|r| r.defect).fold(0.0, f64::max),
        wronskian: w,
        ratio_spread,
        beta,
        family_defect,
        sample_seed: seed,
        samples: rows.len(),
    })
}

/// `max |u_β(z) − u(e^β f)(z)|` over seeded samples.
pub fn beta_shift_defect(map: &DevelopingMap, beta: f64, seed: u64) -> Result<f64> {
    let pts = sample_points(&map.torus, 10, seed, &map_avoid(map), sample_clearance(&map.torus));
    let mut worst: f64 = 0.0;
    for z in pts {
        let fb = beta.exp() * map.value(z);
        let dfb = fb * map.log_derivative(z)?;
        worst = worst.max((metric_u_raw(map, beta, z)? - liouville_u(fb, dfb)).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowUpProfile {
    pub betas: Vec<f64>,
    /// Circle radius used for each β.
    pub radii: Vec<f64>,
    /// `max_{|z−a| = radius} (u_β(z) + 4πG(z − a))` per β.
    pub maxima: Vec<f64>,
    pub increasing: bool,
}

/// Regularized maximum near the zero `a` of `f` along a ladder of β, on
/// circles of radius `radius · e^{−shrink·β/2}`. With `shrink = 0` the
/// circle is fixed; with `shrink = 1` it follows the scale on which
/// `e^{2β}|f|²` stays constant.
pub fn blowup_profile(map: &DevelopingMap, betas: &[f64], radius: f64, shrink: f64, nodes: usize) -> Result<BlowUpProfile> {
    let a = map.point();
    let mut maxima = Vec::with_capacity(betas.len());
    let mut radii = Vec::with_capacity(betas.len());
    for &beta in betas {
        let rad = radius * (-0.5 * shrink * beta).exp();
        let mut best = f64::NEG_INFINITY;
        for k in 0..nodes {
            let offset = Complex64::from_polar(rad, 2.0 * PI * k as f64 / nodes as f64);
            let v = metric_u_raw(map, beta, a + offset)? + 4.0 * PI * map.engine.green(offset)?;
            best = best.max(v);
        }
        maxima.push(best);
        radii.push(rad);
    }
    let increasing = maxima.windows(2).all(|w| w[1] > w[0]);
    Ok(BlowUpProfile {
        betas: betas.to_vec(),
        radii,
        maxima,
        increasing,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Certificate {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Certificate {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    fn at_least(name: &str, value: f64, floor: f64) -> Self {
        Certificate {
            name: name.into(),
            value,
            tolerance: floor,
            pass: value > floor,
        }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Certificate {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Seeds per side for the critical-point search.
    pub seeds_grid: usize,
    /// Preferred starting point `(r, s)` for the search.
    pub rs_seed: Option<(f64, f64)>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            seeds_grid: 7,
            rs_seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub theorem: u8,
    #[serde(with = "complex_serde")]
    pub tau: Complex64,
    pub sample_seed: u64,
    pub critical_point: Option<CriticalPoint>,
    pub certificates: Vec<Certificate>,
    pub notes: Vec<String>,
    pub rigidity: Option<RigidityReport>,
    pub pass: bool,
}

impl VerificationReport {
    fn new(theorem: u8, tau: Complex64, seed: u64) -> Self {
        VerificationReport {
            theorem,
            tau,
            sample_seed: seed,
            critical_point: None,
            certificates: Vec::new(),
            notes: Vec::new(),
            rigidity: None,
            pass: false,
        }
    }

    fn finish(mut self) -> Self {
        self.pass = !self.certificates.is_empty() && self.certificates.iter().all(|c| c.pass);
        self
    }

    /// Names of the failing certificates.
    pub fn failures(&self) -> Vec<&str> {
        self.certificates.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

fn search_critical(torus: &Torus, opts: &VerifyOptions) -> Option<CriticalPoint> {
    if let Some(seed) = opts.rs_seed {
        if let Ok(cp) = find_nontrivial_critical(torus, seed) {
            if !cp.trivial {
                return Some(cp);
            }
        }
    }
    has_nontrivial(torus, opts.seeds_grid).found.filter(|cp| !cp.trivial)
}

/// Largest relative GLE residual of `ψ` with both zeros at `a`, at `A₀`.
fn gle_certificate(torus: &Torus, a: Complex64, seed: u64) -> Result<f64> {
    let dz = check_double_zero_at_p(torus, a)?;
    let eq = LameEquation::new(torus, a, dz.a0)?;
    let avoid = [Complex64::new(0.0, 0.0), a, -a];
    let pts = sample_points(torus, 10, seed, &avoid, sample_clearance(torus));
    let mut worst: f64 = 0.0;
    for z in pts {
        let (res, scale) = dz.psi.gle_residual(&eq, z)?;
        worst = worst.max(res / scale);
    }
    Ok(worst)
}

fn curvature_certificate(map: &DevelopingMap, seed: u64) -> Result<f64> {
    let pts = sample_points(&map.torus, 10, seed, &map_avoid(map), sample_clearance(&map.torus));
    let res: Vec<Result<CurvatureResidual>> = pts.par_iter().map(|&z| curvature_residual(map, 0.0, z, 1e-3)).collect();
    let mut worst: f64 = 0.0;
    for r in res {
        worst = worst.max(r?.residual);
    }
    Ok(worst)
}

fn type_ii_certificate(report: &mut VerificationReport, map: &DevelopingMap, name: &str, seed: u64) {
    match verify_type_ii(map, seed) {
        Ok(t) => {
            report.certificates.push(Certificate::at_most(&format!("{name}_ratio_defect"), t.max_defect, CLOSED_FORM_TOL));
            report.certificates.push(Certificate::at_most(
                &format!("{name}_measured_vs_closed_form"),
                t.closed_form_defect,
                CLOSED_FORM_TOL,
            ));
            report.certificates.push(Certificate::at_most(
                &format!("{name}_data_matches_critical_point"),
                t.expected_distance.unwrap_or(f64::INFINITY),
                CRITICAL_TOL,
            ));
        }
        Err(e) => {
            report.notes.push(format!("{name}: {e}"));
            report.certificates.push(Certificate::flag(&format!("{name}_type_ii"), false));
        }
    }
}

/// Existence side: find `±a`, then certify the cone metric built on `p = a`.
/// No-existence side: certify that `|Z|` stays above a floor on a grid.
pub fn verify_theorem1(tau: Complex64, opts: &VerifyOptions) -> Result<VerificationReport> {
    let torus = make_torus(tau, 1e-12)?;
    let mut report = VerificationReport::new(1, tau, opts.seed);
    match search_critical(&torus, opts) {
        Some(cp) => {
            let a = cp.a.z;
            report.certificates.push(Certificate::at_most("critical_residual", cp.residual, CRITICAL_TOL));
            report.certificates.push(Certificate::at_most(
                "gle_residual",
                gle_certificate(&torus, a, opts.seed)?,
                CLOSED_FORM_TOL,
            ));
            let f = developing_f(&torus, a)?;
            type_ii_certificate(&mut report, &f, "f", opts.seed);
            report.certificates.push(Certificate::at_most(
                "f_equals_h_squared",
                square_root_defect(&torus, a, opts.seed)?,
                CLOSED_FORM_TOL,
            ));
            report.certificates.push(Certificate::at_most(
                "curvature_residual",
                curvature_certificate(&f, opts.seed)?,
                PDE_TOL,
            ));
            report.critical_point = Some(cp);
        }
        None => {
            let (min, at) = min_abs_z_grid(&torus, NO_CRITICAL_GRID, NO_CRITICAL_EXCLUSION)?;
            report.notes.push(format!(
                "no nontrivial critical point; min |Z| on the {NO_CRITICAL_GRID}x{NO_CRITICAL_GRID} grid at ({}, {})",
                at.0, at.1
            ));
            report.certificates.push(Certificate::at_least("min_abs_z_grid", min, NO_CRITICAL_FLOOR));
        }
    }
    Ok(report.finish())
}

/// Monodromy data of `f` and of the induced `ψ` equal `(2r, 2s)`.
pub fn verify_theorem2(tau: Complex64, opts: &VerifyOptions) -> Result<VerificationReport> {
    let torus = make_torus(tau, 1e-12)?;
    let mut report = VerificationReport::new(2, tau, opts.seed);
    let Some(cp) = search_critical(&torus, opts) else {
        report.notes.push("no nontrivial critical point found".into());
        report.certificates.push(Certificate::flag("critical_point_found", false));
        return Ok(report.finish());
    };
    let a = cp.a.z;
    report.certificates.push(Certificate::at_most("critical_residual", cp.residual, CRITICAL_TOL));
    let f = developing_f(&torus, a)?;
    type_ii_certificate(&mut report, &f, "f", opts.seed);
    let psi = check_double_zero_at_p(&torus, a)?.psi;
    let expected = MonodromyData::new(Complex64::new(2.0 * cp.r, 0.0), Complex64::new(2.0 * cp.s, 0.0));
    let data = psi.monodromy_data();
    report
        .certificates
        .push(Certificate::at_most("psi_data_equals_2r_2s", data.distance(&expected), CRITICAL_TOL));
    report.certificates.push(Certificate::flag("psi_data_unitary", data.unitary));
    report.critical_point = Some(cp);
    Ok(report.finish())
}

/// `f = h²` with `h` of type II carrying `(r, s)` itself.
pub fn verify_theorem4(tau: Complex64, opts: &VerifyOptions) -> Result<VerificationReport> {
    let torus = make_torus(tau, 1e-12)?;
    let mut report = VerificationReport::new(4, tau, opts.seed);
    let Some(cp) = search_critical(&torus, opts) else {
        report.notes.push("no nontrivial critical point found".into());
        report.certificates.push(Certificate::flag("critical_point_found", false));
        return Ok(report.finish());
    };
    let a = cp.a.z;
    report.certificates.push(Certificate::at_most("critical_residual", cp.residual, CRITICAL_TOL));
    report.certificates.push(Certificate::at_most(
        "f_equals_h_squared",
        square_root_defect(&torus, a, opts.seed)?,
        CLOSED_FORM_TOL,
    ));
    type_ii_certificate(&mut report, &developing_h(&torus, a)?, "h", opts.seed);
    type_ii_certificate(&mut report, &developing_f(&torus, a)?, "f", opts.seed);
    report.critical_point = Some(cp);
    Ok(report.finish())
}

/// A fraction `num/den` with `den ≤ 12` within `1e-6` of `x`.
pub fn rationalize(x: f64) -> Option<(i64, i64)> {
    (1..=12_i64).find_map(|den| {
        let num = (x * den as f64).round();
        ((x - num / den as f64).abs() <= 1e-6).then_some((num as i64, den))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub r: f64,
    pub s: f64,
    /// `(r, s)` as exact fractions when the input is within `1e-6` of one.
    pub rational: Option<((i64, i64), (i64, i64))>,
    #[serde(with = "complex_serde")]
    pub tau: Complex64,
    #[serde(with = "complex_serde")]
    pub a: Complex64,
    pub z_residual: f64,
    #[serde(with = "complex_serde")]
    pub wp: Complex64,
    #[serde(with = "complex_serde")]
    pub wp_prime: Complex64,
    #[serde(with = "complex_serde")]
    pub wp_pp: Complex64,
    #[serde(with = "complex_serde")]
    pub g2: Complex64,
    /// `3℘'(a)Z + 2℘''(a)Z + 3℘(a)℘'(a)`
    #[serde(with = "complex_serde")]
    pub hitchin_numerator: Complex64,
    /// `|℘(2a) − (−2℘(a) + ℘''(a)²/(4℘'(a)²))|`, relative.
    pub addition_formula_residual: f64,
    /// `|℘(a)| ≤ 1e-9`
    pub c1_wp_vanishes: bool,
    /// `2a ≡ ±a mod Λ`
    pub c2_blowup_condition: bool,
    /// Whether C2 was decided in exact rational arithmetic.
    pub c2_exact: bool,
    /// `|℘''(a)| ≤ 1e-9` and `|g₂| ≤ 1e-9`
    pub c3_g2_vanishes: bool,
    pub families_coincide: bool,
    pub is_rigidity_point: bool,
    /// The coincidence holds exactly at the rigidity point.
    pub biconditional_consistent: bool,
}

/// Decide `2a ≡ ±a`, that is `3a ∈ Λ` or `a ∈ Λ`.
fn blowup_condition(r: f64, s: f64, rational: Option<((i64, i64), (i64, i64))>) -> (bool, bool) {
    match rational {
        Some(((rn, rd), (sn, sd))) => {
            let minus = (3 * rn) % rd == 0 && (3 * sn) % sd == 0;
            let plus = rn % rd == 0 && sn % sd == 0;
            (minus || plus, true)
        }
        None => {
            let int = |x: f64| (x - x.round()).abs() <= 1e-12;
            ((int(3.0 * r) && int(3.0 * s)) || (int(r) && int(s)), false)
        }
    }
}

/// Evaluate the three conditions under which the even and non-even families
/// coincide, at `a = r + sτ`.
///
/// Inputs within `1e-6` of a fraction with denominator at most 12 are
/// snapped to it, and τ is then re-solved from the given value, so that
/// seven-digit inputs such as `0.3333333` reach the exact configuration.
pub fn verify_rigidity(tau: Complex64, r: f64, s: f64) -> Result<RigidityReport> {
    if !in_delta0(r, s) {
        return Err(Error::OutsideDelta0(r, s));
    }
    let rational = rationalize(r).zip(rationalize(s));
    let (mut r, mut s, mut tau) = (r, s, tau);
    if let Some(((rn, rd), (sn, sd))) = rational {
        let (rr, ss) = (rn as f64 / rd as f64, sn as f64 / sd as f64);
        if let Ok(sample) = solve_tau(rr, ss, tau) {
            if sample.converged && (sample.tau - tau).norm() <= 1e-6 {
                (r, s, tau) = (rr, ss, sample.tau);
            }
        }
    }
    let torus = make_torus(tau, 1e-12)?;
    let z_residual = hecke_z(&torus, r, s)?.norm();
    if z_residual > CRITICAL_TOL {
        return Err(Error::NotACriticalPoint(z_residual));
    }
    let rational = rational.filter(|&((rn, rd), (sn, sd))| rn as f64 / rd as f64 == r && sn as f64 / sd as f64 == s);
    let e = torus.engine();
    let a = torus.point(r, s);
    let zeta_z = e.zeta(a)? - r * torus.eta1 - s * torus.eta2;
    let (wp, wp1, wp2) = (e.wp(a)?, e.wp_prime(a)?, e.wp_pp(a)?);
    let hitchin_numerator = 3.0 * wp1 * zeta_z + 2.0 * wp2 * zeta_z + 3.0 * wp * wp1;
    let doubled = -2.0 * wp + wp2 * wp2 / (4.0 * wp1 * wp1);
    let addition_formula_residual = (e.wp(2.0 * a)? - doubled).norm() / (1.0 + doubled.norm());
    let c1 = wp.norm() <= CLOSED_FORM_TOL;
    let (c2, c2_exact) = blowup_condition(r, s, rational);
    let c3 = wp2.norm() <= CLOSED_FORM_TOL && torus.g2.norm() <= CLOSED_FORM_TOL;
    let third = |x: f64| (x - 1.0 / 3.0).abs() <= 1e-9;
    let is_rigidity_point = (tau - rho()).norm() <= 1e-8 && third(r) && third(s);
    let families_coincide = c1 && c2 && c3;
    Ok(RigidityReport {
        r,
        s,
        rational,
        tau,
        a,
        z_residual,
        wp,
        wp_prime: wp1,
        wp_pp: wp2,
        g2: torus.g2,
        hitchin_numerator,
        addition_formula_residual,
        c1_wp_vanishes: c1,
        c2_blowup_condition: c2,
        c2_exact,
        c3_g2_vanishes: c3,
        families_coincide,
        is_rigidity_point,
        biconditional_consistent: families_coincide == is_rigidity_point,
    })
}

/// Rigidity as a certificate report.
pub fn verify_theorem3(tau: Complex64, r: f64, s: f64) -> Result<VerificationReport> {
    let rig = verify_rigidity(tau, r, s)?;
    let mut report = VerificationReport::new(3, rig.tau, DEFAULT_SEED);
    report.certificates.push(Certificate::at_most("critical_residual", rig.z_residual, CRITICAL_TOL));
    report.certificates.push(Certificate::at_most(
        "addition_formula",
        rig.addition_formula_residual,
        CLOSED_FORM_TOL,
    ));
    let reduced = (rig.hitchin_numerator - 3.0 * rig.wp * rig.wp_prime).norm();
    let scale = 1.0 + rig.wp_prime.norm() + rig.wp_pp.norm();
    report
        .certificates
        .push(Certificate::at_most("hitchin_numerator_reduction", reduced / scale, CRITICAL_TOL));
    report
        .certificates
        .push(Certificate::flag("biconditional_consistent", rig.biconditional_consistent));
    report.notes.push(format!(
        "C1 {} C2 {} C3 {}; families coincide: {}; rigidity point: {}",
        rig.c1_wp_vanishes, rig.c2_blowup_condition, rig.c3_g2_vanishes, rig.families_coincide, rig.is_rigidity_point
    ));
    report.rigidity = Some(rig);
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rigid() -> (Torus, Complex64) {
        let t = make_torus(rho(), 1e-12).unwrap();
        let a = (1.0 + t.tau) / 3.0;
        (t, a)
    }

    #[test]
    fn f_at_origin_is_one() {
        let (t, a) = rigid();
        let f = developing_f(&t, a).unwrap();
        assert!((f.value(c(0.0, 0.0)) - 1.0).norm() < 1e-12);
        assert!(f.warning.is_none());
    }

    #[test]
    fn double_zero() {
        let (t, a) = rigid();
        let f = developing_f(&t, a).unwrap();
        let eps = 1e-4;
        let q1 = f.value(a + eps).norm() / (eps * eps);
        let q2 = f.value(a + eps / 2.0).norm() / (eps * eps / 4.0);
        assert!(q1 > 1e-6 && q1 < 1e6);
        assert!((q1 / q2 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn two_torsion_rejected() {
        let (t, _) = rigid();
        assert!(matches!(developing_f(&t, c(0.5, 0.0)), Err(Error::TwoTorsion(_))));
    }

    #[test]
    fn non_critical_warns() {
        let t = make_torus(c(0.0, 1.0), 1e-12).unwrap();
        let f = developing_f(&t, c(0.3, 0.2)).unwrap();
        assert!(f.warning.is_some());
        assert!(matches!(verify_type_ii(&f, 1), Err(Error::NotTypeII(_))));
    }

    #[test]
    fn softplus_extremes() {
        assert_eq!(softplus(f64::NEG_INFINITY), 0.0);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!((softplus(0.0) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn singular_point() {
        let (t, a) = rigid();
        let f = developing_f(&t, a).unwrap();
        assert!(matches!(metric_u(&f, 0.0, a), Err(Error::SingularPoint(_))));
        assert!(matches!(
            curvature_residual(&f, 0.0, a + 0.005, 1e-3),
            Err(Error::TooCloseToSingularity { .. })
        ));
    }

    #[test]
    fn rigidity_type_ii() {
        let (t, a) = rigid();
        let rf = verify_type_ii(&developing_f(&t, a).unwrap(), DEFAULT_SEED).unwrap();
        assert!(rf.expected_distance.unwrap() < 1e-9);
        assert!((rf.data.r.re - 2.0 / 3.0).abs() < 1e-9 && (rf.data.s.re - 2.0 / 3.0).abs() < 1e-9);
        let rh = verify_type_ii(&developing_h(&t, a).unwrap(), DEFAULT_SEED).unwrap();
        assert!((rh.data.r.re - 1.0 / 3.0).abs() < 1e-9 && (rh.data.s.re - 1.0 / 3.0).abs() < 1e-9);
        assert!(rh.max_defect < 1e-9 && rh.closed_form_defect < 1e-9);
    }

    #[test]
    fn rational_snap() {
        assert_eq!(rationalize(0.3333333), Some((1, 3)));
        assert_eq!(rationalize(0.25), Some((1, 4)));
        assert_eq!(rationalize(0.123456789), None);
        assert_eq!(blowup_condition(0.0, 0.0, Some(((1, 3), (2, 3)))), (true, true));
        assert_eq!(blowup_condition(0.0, 0.0, Some(((1, 3), (1, 4)))), (false, true));
    }
}
