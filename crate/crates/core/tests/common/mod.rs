//! Slow reference implementations used only to cross-check the library.
#![allow(dead_code)]

use num_complex::Complex64;

pub const DEFAULT_RADIUS: i64 = 300;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rho() -> Complex64 {
    c(0.5, 3f64.sqrt() / 2.0)
}

/// `1/z² + Σ' (1/(z−ω)² − 1/ω²)` over `|m|, |n| ≤ radius`.
pub fn wp_lattice_sum(tau: Complex64, z: Complex64, radius: i64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in -radius..=radius {
        // inner sums are small; accumulate per row to limit cancellation
        let mut row = Complex64::new(0.0, 0.0);
        for m in -radius..=radius {
            if m == 0 && n == 0 {
                continue;
            }
            let w = Complex64::new(m as f64, 0.0) + tau * n as f64;
            let d = z - w;
            row += 1.0 / (d * d) - 1.0 / (w * w);
        }
        acc += row;
    }
    acc + 1.0 / (z * z)
}

/// `60 Σ' ω^{-4}` over `|m|, |n| ≤ radius`.
pub fn g2_lattice_sum(tau: Complex64, radius: i64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in -radius..=radius {
        let mut row = Complex64::new(0.0, 0.0);
        for m in -radius..=radius {
            if m == 0 && n == 0 {
                continue;
            }
            let w = Complex64::new(m as f64, 0.0) + tau * n as f64;
            row += 1.0 / (w * w * w * w);
        }
        acc += row;
    }
    60.0 * acc
}

/// The square-truncated sums above miss a tail `K/R² + O(R⁻⁴)` (odd
/// orders cancel between ±ω). One Richardson step against radius `R/2`
/// removes the leading term.
pub fn wp_oracle(tau: Complex64, z: Complex64, radius: i64) -> Complex64 {
    let full = wp_lattice_sum(tau, z, radius);
    let half = wp_lattice_sum(tau, z, radius / 2);
    let ratio = (radius as f64 / (radius / 2) as f64).powi(2);
    (ratio * full - half) / (ratio - 1.0)
}

pub fn g2_oracle(tau: Complex64, radius: i64) -> Complex64 {
    let full = g2_lattice_sum(tau, radius);
    let half = g2_lattice_sum(tau, radius / 2);
    let ratio = (radius as f64 / (radius / 2) as f64).powi(2);
    (ratio * full - half) / (ratio - 1.0)
}

/// Lattice-sum radius, overridable by `TORUS_ORACLE_RADIUS`.
pub fn oracle_radius() -> i64 {
    std::env::var("TORUS_ORACLE_RADIUS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_RADIUS)
}
