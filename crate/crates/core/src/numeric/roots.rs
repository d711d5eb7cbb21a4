//! Root finders in the complex plane.

use super::poly::Polynomial;
use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub root: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

/// Durand–Kerner (Weierstrass) simultaneous iteration.
pub fn durand_kerner(p: &Polynomial, tol: f64, max_iter: usize) -> Vec<Complex64> {
    let n = p.degree();
    if n == 0 {
        return Vec::new();
    }
    let lead = p.leading();
    let monic: Vec<Complex64> = p.coeffs[..=n].iter().map(|c| c / lead).collect();
    let monic = Polynomial::new(monic);
    let radius = 1.0
        + monic.coeffs[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32) * radius.min(2.0))
        .collect();
    for _ in 0..max_iter {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = monic.eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm() / (1.0 + z[i].norm()));
        }
        if delta < tol {
            break;
        }
    }
    // one Newton polish per root against the original polynomial
    let dp = monic.derivative();
    for zi in z.iter_mut() {
        let d = dp.eval(*zi);
        if d.norm() > 0.0 {
            *zi -= monic.eval(*zi) / d;
        }
    }
    z
}

/// Secant iteration for a holomorphic `f`, stopping when `|f| <= tol` or the
/// step falls below `tol * (1 + |z|)`.
pub fn secant<F>(f: F, z0: Complex64, z1: Complex64, tol: f64, max_iter: usize) -> Result<RootResult>
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    let eval = |z| f(z).ok_or(Error::NoConvergence {
        iterations: 0,
        residual: f64::INFINITY,
    });
    let (mut a, mut b) = (z0, z1);
    let (mut fa, mut fb) = (eval(a)?, eval(b)?);
    for it in 0..max_iter {
        if fb.norm() <= tol {
            return Ok(RootResult {
                root: b,
                residual: fb.norm(),
                iterations: it,
            });
        }
        let denom = fb - fa;
        if denom.norm() == 0.0 {
            break;
        }
        let next = b - fb * (b - a) / denom;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        a = b;
        fa = fb;
        b = next;
        fb = match f(b) {
            Some(v) => v,
            None => break,
        };
        if (b - a).norm() <= tol * (1.0 + b.norm()) && fb.norm() <= tol.sqrt() {
            return Ok(RootResult {
                root: b,
                residual: fb.norm(),
                iterations: it + 1,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: fb.norm(),
    })
}

/// Newton's method with analytic derivative `df`. Either closure may
/// return `None` to signal a point outside the domain.
pub fn newton<F, D>(f: F, df: D, z0: Complex64, tol: f64, max_iter: usize) -> Result<RootResult>
where
    F: Fn(Complex64) -> Option<Complex64>,
    D: Fn(Complex64) -> Option<Complex64>,
{
    let fail = |residual: f64| Error::NoConvergence {
        iterations: max_iter,
        residual,
    };
    let mut z = z0;
    let mut fz = f(z).ok_or(fail(f64::INFINITY))?;
    for it in 0..max_iter {
        if fz.norm() <= tol {
            return Ok(RootResult {
                root: z,
                residual: fz.norm(),
                iterations: it,
            });
        }
        let d = match df(z) {
            Some(d) if d.norm() > 0.0 && d.is_finite() => d,
            _ => break,
        };
        let step = fz / d;
        z -= step;
        fz = match f(z) {
            Some(v) if v.is_finite() => v,
            _ => break,
        };
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            return Ok(RootResult {
                root: z,
                residual: fz.norm(),
                iterations: it + 1,
            });
        }
    }
    if fz.norm() <= tol {
        return Ok(RootResult {
            root: z,
            residual: fz.norm(),
            iterations: max_iter,
        });
    }
    Err(fail(fz.norm()))
}
