//! Tori `C / (Z + τZ)`, their lattice constants, and point reduction.

use crate::complex_serde;
use crate::elliptic::{self, EllipticEngine, NormalizedLattice};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// A flat torus with its quasi-periods and invariants.
#[derive(Debug, Clone, Serialize)]
pub struct Torus {
    #[serde(with = "complex_serde")]
    pub tau: Complex64,
    #[serde(with = "complex_serde")]
    pub eta1: Complex64,
    #[serde(with = "complex_serde")]
    pub eta2: Complex64,
    #[serde(with = "complex_serde")]
    pub g2: Complex64,
    #[serde(with = "complex_serde")]
    pub g3: Complex64,
    pub precision: f64,
    #[serde(skip)]
    pub max_terms: usize,
    #[serde(skip)]
    pub(crate) lattice: NormalizedLattice,
}

pub fn make_torus(tau: Complex64, precision: f64) -> Result<Torus> {
    make_torus_with_cap(tau, precision, elliptic::DEFAULT_MAX_TERMS)
}

/// As [`make_torus`] with an explicit cap on series length.
pub fn make_torus_with_cap(tau: Complex64, precision: f64, max_terms: usize) -> Result<Torus> {
    if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
        return Err(Error::NotUpperHalfPlane(tau));
    }
    if !(precision > 0.0 && precision < 1e-6) {
        return Err(Error::InvalidPrecision(precision));
    }
    let probe = NormalizedLattice::new(tau, 1);
    let needed = elliptic::terms_for(probe.q, precision * 1e-4);
    if needed > max_terms {
        return Err(Error::PrecisionUnreachable {
            precision,
            needed,
            max_terms,
        });
    }
    let lattice = NormalizedLattice::new(tau, needed);
    let mut torus = Torus {
        tau,
        eta1: Complex64::new(0.0, 0.0),
        eta2: Complex64::new(0.0, 0.0),
        g2: lattice.g2 / lattice.lambda.powi(4),
        g3: lattice.g3 / lattice.lambda.powi(6),
        precision,
        max_terms,
        lattice,
    };
    let engine = EllipticEngine::new(&torus);
    torus.eta1 = 2.0 * engine.zeta(Complex64::new(0.5, 0.0))?;
    torus.eta2 = 2.0 * engine.zeta(0.5 * tau)?;
    Ok(torus)
}

impl Torus {
    pub fn engine(&self) -> EllipticEngine {
        EllipticEngine::new(self)
    }

    /// `|τη₁ − η₂ − 2πi|`
    pub fn legendre_defect(&self) -> f64 {
        (self.tau * self.eta1 - self.eta2 - Complex64::new(0.0, 2.0 * std::f64::consts::PI)).norm()
    }

    /// Series length in use.
    pub fn truncation(&self) -> usize {
        self.lattice.terms
    }

    /// Real coordinates `(r, s)` with `z = r + sτ`, not reduced.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let s = z.im / self.tau.im;
        (z.re - s * self.tau.re, s)
    }

    pub fn point(&self, r: f64, s: f64) -> Complex64 {
        Complex64::new(r, 0.0) + self.tau * s
    }

    /// Whether `(r, s)` lies in `½Z²` within precision.
    pub fn is_two_torsion(&self, z: Complex64) -> bool {
        let (r, s) = self.coords(z);
        near_int(2.0 * r, self.precision) && near_int(2.0 * s, self.precision)
    }

    pub fn is_lattice_point(&self, z: Complex64) -> bool {
        let (r, s) = self.coords(z);
        near_int(r, self.precision) && near_int(s, self.precision)
    }
}

fn near_int(x: f64, tol: f64) -> bool {
    (x - x.round()).abs() <= tol
}

/// A point with its representative in the cell `[0,1)²` of `(r, s)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusPoint {
    #[serde(with = "complex_serde")]
    pub z: Complex64,
    #[serde(with = "complex_serde")]
    pub z_reduced: Complex64,
    pub r: f64,
    pub s: f64,
    #[serde(skip)]
    pub precision: f64,
}

impl TorusPoint {
    pub fn is_lattice_point(&self) -> bool {
        let d = |x: f64| x.min(1.0 - x);
        d(self.r) <= self.precision && d(self.s) <= self.precision
    }

    pub fn is_two_torsion(&self) -> bool {
        near_int(2.0 * self.r, self.precision) && near_int(2.0 * self.s, self.precision)
    }
}

fn frac(x: f64, tol: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 - tol || f <= tol {
        0.0
    } else {
        f
    }
}

pub fn reduce(torus: &Torus, z: Complex64) -> TorusPoint {
    let (r, s) = torus.coords(z);
    // snap fractional parts that differ from an integer only by rounding
    let tol = torus.precision * 1e-2;
    let (r, s) = (frac(r, tol), frac(s, tol));
    TorusPoint {
        z,
        z_reduced: torus.point(r, s),
        r,
        s,
        precision: torus.precision,
    }
}

/// `0 < r, s < 1/2` and `r + s > 1/2`.
pub fn in_delta0(r: f64, s: f64) -> bool {
    r > 0.0 && s > 0.0 && r < 0.5 && s < 0.5 && r + s > 0.5
}

/// `0 ≤ Re τ ≤ 1` and `|τ − 1/2| ≥ 1/2`, with `Im τ > 0`.
pub fn in_f0(tau: Complex64) -> bool {
    tau.im > 0.0 && tau.re >= 0.0 && tau.re <= 1.0 && (tau - 0.5).norm() >= 0.5
}

/// Move τ into F₀ with `τ ↦ τ ± 1` and `τ ↦ τ/(1 − τ)`.
/// Only handled for `|Re τ| ≤ 1`.
pub fn reduce_to_f0(tau: Complex64) -> Result<Complex64> {
    if !(tau.im > 0.0) {
        return Err(Error::NotUpperHalfPlane(tau));
    }
    if tau.re.abs() > 1.0 {
        return Err(Error::NotImplemented(
            "reduction into F0 outside |Re tau| <= 1".into(),
        ));
    }
    let mut t = tau;
    for _ in 0..100 {
        if in_f0(t) {
            return Ok(t);
        }
        if t.re < 0.0 {
            t += 1.0;
        } else if (t - 0.5).norm() < 0.5 {
            // τ ↦ τ/(1 − τ) raises Im τ inside the disk
            let w = t / (1.0 - t);
            t = w - w.re.floor();
        } else {
            t -= 1.0;
        }
    }
    Err(Error::NotImplemented("reduction into F0 did not terminate".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(matches!(make_torus(c(0.5, -0.1), 1e-12), Err(Error::NotUpperHalfPlane(_))));
        assert!(matches!(make_torus(c(0.5, 0.0), 1e-12), Err(Error::NotUpperHalfPlane(_))));
    }

    #[test]
    fn rejects_bad_precision() {
        assert!(matches!(make_torus(c(0.0, 1.0), 1e-3), Err(Error::InvalidPrecision(_))));
        assert!(matches!(make_torus(c(0.0, 1.0), 0.0), Err(Error::InvalidPrecision(_))));
    }

    #[test]
    fn small_cap_is_unreachable() {
        assert!(matches!(
            make_torus_with_cap(c(0.0, 1.0), 1e-12, 3),
            Err(Error::PrecisionUnreachable { .. })
        ));
    }

    #[test]
    fn legendre_at_i() {
        let t = make_torus(c(0.0, 1.0), 1e-12).unwrap();
        assert!(t.legendre_defect() < 1e-12);
        assert!((t.eta1 - c(std::f64::consts::PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn equianharmonic_g2_vanishes() {
        let rho = c(0.5, 3f64.sqrt() / 2.0);
        let t = make_torus(rho, 1e-12).unwrap();
        assert!(t.g2.norm() < 1e-10);
    }

    #[test]
    fn reduce_examples() {
        let t = make_torus(c(0.2, 1.3), 1e-12).unwrap();
        let p = reduce(&t, 1.0 + t.tau);
        assert_eq!((p.r, p.s), (0.0, 0.0));
        assert!(p.is_lattice_point());
        let p = reduce(&t, 2.3 + 1.7 * t.tau);
        assert!((p.r - 0.3).abs() < 1e-12 && (p.s - 0.7).abs() < 1e-12);
        let rho = make_torus(c(0.5, 3f64.sqrt() / 2.0), 1e-12).unwrap();
        let p = reduce(&rho, (1.0 + rho.tau) / 3.0);
        assert!((p.r - 1.0 / 3.0).abs() < 1e-12 && (p.s - 1.0 / 3.0).abs() < 1e-12);
        assert!(!p.is_two_torsion());
        assert!(reduce(&t, 0.5 + 1.5 * t.tau).is_two_torsion());
    }

    #[test]
    fn region_membership() {
        assert!(in_delta0(1.0 / 3.0, 1.0 / 3.0));
        assert!(!in_delta0(0.5, 0.5));
        assert!(!in_delta0(0.25, 0.25));
        assert!(in_f0(c(0.5, 3f64.sqrt() / 2.0)));
        assert!(in_f0(c(0.0, 1.0)));
        assert!(in_f0(c(1.0, 0.3)));
        assert!(!in_f0(c(0.5, 0.3)));
        assert!(!in_f0(c(-0.1, 1.0)));
    }

    #[test]
    fn f0_reduction() {
        for tau in [c(-0.3, 0.8), c(0.5, 0.2), c(0.9, 0.05), c(0.4, 2.0)] {
            let t = reduce_to_f0(tau).unwrap();
            assert!(in_f0(t), "{tau} -> {t}");
        }
        assert!(matches!(reduce_to_f0(c(2.5, 1.0)), Err(Error::NotImplemented(_))));
    }
}
