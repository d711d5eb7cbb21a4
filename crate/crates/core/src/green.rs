//! The Hecke function `Z(r, s, τ) = ζ(r + sτ) − rη₁ − sη₂`, the Green
//! function of the torus, its nontrivial critical points, and the map
//! `(r, s) ↦ τ` on the triangle Δ₀.

use crate::complex_serde;
use crate::error::{Error, Result};
use crate::lattice::{in_delta0, in_f0, make_torus, reduce, Torus, TorusPoint};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

fn in_half_lattice(r: f64, s: f64, tol: f64) -> bool {
    let d = |x: f64| (2.0 * x - (2.0 * x).round()).abs() / 2.0;
    d(r) <= tol && d(s) <= tol
}

/// Distance in `(r, s)` coordinates from `½Z²`.
pub fn half_lattice_distance(r: f64, s: f64) -> f64 {
    let d = |x: f64| (x - (2.0 * x).round() / 2.0).abs();
    d(r).hypot(d(s))
}

pub fn hecke_z(torus: &Torus, r: f64, s: f64) -> Result<Complex64> {
    let near = |x: f64| (x - x.round()).abs() <= torus.precision;
    if near(r) && near(s) {
        return Err(Error::PoleAtOrigin(r, s));
    }
    let z = torus.point(r, s);
    Ok(torus.engine().zeta(z)? - r * torus.eta1 - s * torus.eta2)
}

/// Complex-coordinate form, for analytic continuation in `(r, s)`.
pub fn hecke_z_complex(torus: &Torus, r: Complex64, s: Complex64) -> Result<Complex64> {
    let z = r + s * torus.tau;
    if torus.engine().lattice_distance(z) <= torus.precision {
        return Err(Error::PoleAtOrigin(r.re, s.re));
    }
    Ok(torus.engine().zeta(z)? - r * torus.eta1 - s * torus.eta2)
}

/// `Z(z; τ)`, through the same code path as [`hecke_z`].
pub fn z_at(torus: &Torus, z: Complex64) -> Result<Complex64> {
    let (r, s) = torus.coords(z);
    hecke_z(torus, r, s)
}

pub fn green_g(torus: &Torus, z: Complex64) -> Result<f64> {
    torus.engine().green(z)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub a: TorusPoint,
    pub r: f64,
    pub s: f64,
    pub residual: f64,
    pub trivial: bool,
    pub iterations: usize,
}

const EXCLUSION_RADIUS: f64 = 0.02;
const MAX_NEWTON_STEP: f64 = 0.1;
const NEWTON_MAX_ITER: usize = 80;

/// Damped Newton iteration for `Z(r, s) = 0` from `seed`, avoiding the
/// half-periods.
pub fn find_nontrivial_critical(torus: &Torus, seed: (f64, f64)) -> Result<CriticalPoint> {
    let (mut r, mut s) = seed;
    if in_half_lattice(r, s, torus.precision) {
        return Err(Error::SeedDegenerate(r, s));
    }
    let engine = torus.engine();
    let target = torus.precision;
    for it in 0..NEWTON_MAX_ITER {
        r = r.rem_euclid(1.0);
        s = s.rem_euclid(1.0);
        if half_lattice_distance(r, s) < EXCLUSION_RADIUS {
            return Err(Error::NotFound(seed.0, seed.1));
        }
        let z = torus.point(r, s);
        let val = engine.zeta(z)? - r * torus.eta1 - s * torus.eta2;
        if val.norm() <= target {
            return finish(torus, r, s, it);
        }
        let wp = engine.wp(z)?;
        let dr = -wp - torus.eta1;
        let ds = -torus.tau * wp - torus.eta2;
        let det = dr.re * ds.im - ds.re * dr.im;
        if det.abs() < 1e-300 {
            return Err(Error::NotFound(seed.0, seed.1));
        }
        let mut step_r = -(ds.im * val.re - ds.re * val.im) / det;
        let mut step_s = -(-dr.im * val.re + dr.re * val.im) / det;
        let len = step_r.hypot(step_s);
        if len > MAX_NEWTON_STEP {
            step_r *= MAX_NEWTON_STEP / len;
            step_s *= MAX_NEWTON_STEP / len;
        }
        r += step_r;
        s += step_s;
        if len < 1e-15 {
            return finish(torus, r.rem_euclid(1.0), s.rem_euclid(1.0), it + 1);
        }
    }
    let (r, s) = (r.rem_euclid(1.0), s.rem_euclid(1.0));
    match hecke_z(torus, r, s) {
        Ok(v) if v.norm() <= 1e-10 && half_lattice_distance(r, s) >= EXCLUSION_RADIUS => {
            finish(torus, r, s, NEWTON_MAX_ITER)
        }
        _ => Err(Error::NotFound(seed.0, seed.1)),
    }
}

fn finish(torus: &Torus, r: f64, s: f64, iterations: usize) -> Result<CriticalPoint> {
    let residual = hecke_z(torus, r, s)?.norm();
    if residual > 1e-10 {
        return Err(Error::NotFound(r, s));
    }
    // representative of ±a in [0, 1/2] × [0, 1]
    let (r, s) = if r > 0.5 {
        ((1.0 - r).rem_euclid(1.0), (1.0 - s).rem_euclid(1.0))
    } else {
        (r, s)
    };
    let a = reduce(torus, torus.point(r, s));
    Ok(CriticalPoint {
        a,
        r,
        s,
        residual,
        trivial: in_half_lattice(r, s, torus.precision),
        iterations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NontrivialSearch {
    pub found: Option<CriticalPoint>,
    pub seeds_tried: usize,
    /// Smallest `|Z|` reached by any seed.
    pub min_residual: f64,
}

/// Run [`find_nontrivial_critical`] from the seeds `(i/(n+1), j/(n+1))`,
/// `1 ≤ i, j ≤ n`, and keep the first success in seed order.
pub fn has_nontrivial(torus: &Torus, grid: usize) -> NontrivialSearch {
    let step = 1.0 / (grid as f64 + 1.0);
    let seeds: Vec<(f64, f64)> = (1..=grid)
        .flat_map(|i| (1..=grid).map(move |j| (i as f64 * step, j as f64 * step)))
        .filter(|&(r, s)| !in_half_lattice(r, s, 1e-12))
        .collect();
    let results: Vec<Result<CriticalPoint>> = seeds
        .par_iter()
        .map(|&seed| find_nontrivial_critical(torus, seed))
        .collect();
    let mut min_residual = f64::INFINITY;
    let mut found = None;
    for (seed, res) in seeds.iter().zip(&results) {
        match res {
            Ok(cp) => {
                min_residual = min_residual.min(cp.residual);
                if found.is_none() {
                    found = Some(cp.clone());
                }
            }
            Err(_) => {
                if let Ok(v) = hecke_z(torus, seed.0, seed.1) {
                    min_residual = min_residual.min(v.norm());
                }
            }
        }
    }
    NontrivialSearch {
        found,
        seeds_tried: seeds.len(),
        min_residual,
    }
}

/// Minimum of `|Z|` over the grid `(i/n, j/n)`, `0 < i, j < n`, skipping
/// points within `exclusion` of `½Z²` (half-lattice points themselves are
/// always skipped).
pub fn min_abs_z_grid(torus: &Torus, n: usize, exclusion: f64) -> Result<(f64, (f64, f64))> {
    let pts: Vec<(f64, f64)> = (1..n)
        .flat_map(|i| (1..n).map(move |j| (i as f64 / n as f64, j as f64 / n as f64)))
        .filter(|&(r, s)| !in_half_lattice(r, s, 1e-12) && half_lattice_distance(r, s) >= exclusion)
        .collect();
    let vals: Vec<Result<f64>> = pts
        .par_iter()
        .map(|&(r, s)| hecke_z(torus, r, s).map(|v| v.norm()))
        .collect();
    let mut best = (f64::INFINITY, (0.0, 0.0));
    for (p, v) in pts.iter().zip(vals) {
        let v = v?;
        if v < best.0 {
            best = (v, *p);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaSample {
    pub r: f64,
    pub s: f64,
    #[serde(with = "complex_serde")]
    pub tau: Complex64,
    pub z_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct TauSolverOptions {
    pub precision: f64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for TauSolverOptions {
    fn default() -> Self {
        TauSolverOptions {
            precision: 1e-12,
            max_iter: 60,
            tolerance: 1e-9,
        }
    }
}

fn z_of_tau(r: f64, s: f64, tau: Complex64, precision: f64) -> Result<Complex64> {
    let torus = make_torus(tau, precision)?;
    hecke_z(&torus, r, s)
}

pub fn solve_tau(r: f64, s: f64, seed_tau: Complex64) -> Result<OmegaSample> {
    solve_tau_with(r, s, seed_tau, TauSolverOptions::default())
}

/// Newton iteration in τ for `Z(r, s, τ) = 0` with a central-difference
/// derivative.
pub fn solve_tau_with(r: f64, s: f64, seed_tau: Complex64, opts: TauSolverOptions) -> Result<OmegaSample> {
    if !in_delta0(r, s) {
        return Err(Error::OutsideDelta0(r, s));
    }
    if !(seed_tau.im > 0.0) {
        return Err(Error::NotUpperHalfPlane(seed_tau));
    }
    let mut tau = seed_tau;
    let mut val = z_of_tau(r, s, tau, opts.precision)?;
    // aim well below the acceptance tolerance, then stop once stalled
    let aim = opts.tolerance * 1e-3;
    for it in 0..opts.max_iter {
        if val.norm() <= aim {
            return certify(r, s, tau, it, opts);
        }
        let h = 1e-6 * (1.0 + tau.norm());
        let h = h.min(0.5 * tau.im);
        let fp = z_of_tau(r, s, tau + h, opts.precision)?;
        let fm = z_of_tau(r, s, tau - h, opts.precision)?;
        let deriv = (fp - fm) / (2.0 * h);
        if deriv.norm() == 0.0 || !deriv.is_finite() {
            break;
        }
        let mut step = -val / deriv;
        let cap = 0.25 * tau.im;
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        tau += step;
        val = z_of_tau(r, s, tau, opts.precision)?;
        if step.norm() < 1e-14 * (1.0 + tau.norm()) {
            return certify(r, s, tau, it + 1, opts);
        }
    }
    certify(r, s, tau, opts.max_iter, opts)
}

fn certify(r: f64, s: f64, tau: Complex64, iterations: usize, opts: TauSolverOptions) -> Result<OmegaSample> {
    let residual = z_of_tau(r, s, tau, opts.precision)?.norm();
    if residual <= opts.tolerance && in_f0(tau) {
        Ok(OmegaSample {
            r,
            s,
            tau,
            z_residual: residual,
            converged: true,
            iterations,
        })
    } else {
        Err(Error::NoConvergence { iterations, residual })
    }
}

/// Interior points of the barycentric grid of Δ₀ with vertices
/// `(1/2, 0)`, `(0, 1/2)`, `(1/2, 1/2)`, ordered by `(i, j)`.
pub fn delta0_grid(grid_n: usize) -> Vec<(f64, f64)> {
    let n = grid_n as f64;
    let mut pts = Vec::new();
    for i in 1..grid_n {
        for j in 1..grid_n {
            if i + j >= grid_n {
                continue;
            }
            let k = (grid_n - i - j) as f64;
            let (i, j) = (i as f64, j as f64);
            pts.push(((0.5 * i + 0.5 * k) / n, (0.5 * j + 0.5 * k) / n));
        }
    }
    pts
}

pub fn rho() -> Complex64 {
    Complex64::new(0.5, 3f64.sqrt() / 2.0)
}

/// Solve with seed ρ; on failure, continue the solution along the straight
/// segment from the centroid `(1/3, 1/3)`, where τ = ρ.
fn solve_sample(r: f64, s: f64) -> OmegaSample {
    let opts = TauSolverOptions::default();
    if let Ok(sample) = solve_tau_with(r, s, rho(), opts) {
        return sample;
    }
    let (r0, s0) = (1.0 / 3.0, 1.0 / 3.0);
    let steps = 16;
    let mut tau = rho();
    let mut iterations = 0;
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let (rk, sk) = (r0 + t * (r - r0), s0 + t * (s - s0));
        match solve_tau_with(rk, sk, tau, opts) {
            Ok(sample) => {
                tau = sample.tau;
                iterations += sample.iterations;
            }
            Err(e) => {
                let residual = match e {
                    Error::NoConvergence { residual, .. } => residual,
                    _ => f64::NAN,
                };
                return OmegaSample {
                    r,
                    s,
                    tau,
                    z_residual: residual,
                    converged: false,
                    iterations,
                };
            }
        }
    }
    let residual = z_of_tau(r, s, tau, opts.precision).map(|v| v.norm()).unwrap_or(f64::NAN);
    OmegaSample {
        r,
        s,
        tau,
        z_residual: residual,
        converged: residual <= opts.tolerance && in_f0(tau),
        iterations,
    }
}

/// Solve `τ(r, s)` at every interior grid point of Δ₀. Failures are
/// recorded in the sample, never raised.
pub fn scan_omega(grid_n: usize) -> Result<Vec<OmegaSample>> {
    if grid_n < 2 {
        return Err(Error::InvalidArgument(format!("grid_n must be at least 2, got {grid_n}")));
    }
    Ok(delta0_grid(grid_n)
        .par_iter()
        .map(|&(r, s)| solve_sample(r, s))
        .collect())
}
