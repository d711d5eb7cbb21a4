//! The even Lamé-type equation `y'' = q(z; A) y` with apparent singularities
//! at `0` and `±p`, the elliptic solution `Φₑ` of its symmetric square, and
//! the spectral polynomial `Q(A)`.

use crate::complex_serde;
use crate::elliptic::EllipticEngine;
use crate::error::{Error, Result};
use crate::lattice::{reduce, Torus, TorusPoint};
use crate::numeric::poly::Polynomial;
use num_complex::Complex64;
use serde::Serialize;

/// `℘(p), ℘'(p), ℘''(p), ζ(p)` and the ratio `K = ℘''(p)/℘'(p)`.
#[derive(Debug, Clone, Copy)]
pub struct PointData {
    pub wp: Complex64,
    pub wp1: Complex64,
    pub wp2: Complex64,
    pub zeta: Complex64,
    pub k: Complex64,
}

impl PointData {
    pub fn new(torus: &Torus, p: Complex64) -> Result<Self> {
        if torus.is_two_torsion(p) {
            return Err(Error::TwoTorsion(p));
        }
        let e = torus.engine();
        let wp1 = e.wp_prime(p)?;
        let scale = e.wp(p)?.norm().powf(1.5).max(1.0);
        if wp1.norm() <= torus.precision * scale {
            return Err(Error::TwoTorsion(p));
        }
        let wp2 = e.wp_pp(p)?;
        Ok(PointData {
            wp: e.wp(p)?,
            wp1,
            wp2,
            zeta: e.zeta(p)?,
            k: wp2 / wp1,
        })
    }

    /// `A₀ = 3℘''(p) / (4℘'(p))`
    pub fn a0(&self) -> Complex64 {
        0.75 * self.k
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LameEquation {
    #[serde(skip)]
    pub torus: Torus,
    #[serde(with = "complex_serde")]
    pub p: Complex64,
    pub p_point: TorusPoint,
    #[serde(with = "complex_serde", rename = "A")]
    pub a: Complex64,
    #[serde(with = "complex_serde", rename = "B")]
    pub b: Complex64,
    #[serde(skip)]
    pub data: PointData,
    #[serde(skip)]
    engine: EllipticEngine,
}

/// `B = A² − ζ(2p)A − (3/4)℘(2p) − 2℘(p)`
pub fn apparency_b(engine: &EllipticEngine, p: Complex64, a: Complex64) -> Result<Complex64> {
    let p2 = 2.0 * p;
    Ok(a * a - engine.zeta(p2)? * a - 0.75 * engine.wp(p2)? - 2.0 * engine.wp(p)?)
}

/// `Φₑ` and its first three derivatives.
#[derive(Debug, Clone, Copy)]
pub struct PhiJet {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

impl LameEquation {
    pub fn new(torus: &Torus, p: Complex64, a: Complex64) -> Result<Self> {
        let data = PointData::new(torus, p)?;
        let engine = torus.engine();
        let b = apparency_b(&engine, p, a)?;
        Ok(LameEquation {
            torus: torus.clone(),
            p,
            p_point: reduce(torus, p),
            a,
            b,
            data,
            engine,
        })
    }

    /// Same torus and `p`, different `A`.
    pub fn with_a(&self, a: Complex64) -> Result<Self> {
        let b = apparency_b(&self.engine, self.p, a)?;
        Ok(LameEquation { a, b, ..self.clone() })
    }

    pub fn engine(&self) -> &EllipticEngine {
        &self.engine
    }

    /// Distance from `z` to `{0, ±p} + Λ`.
    pub fn singular_distance(&self, z: Complex64) -> f64 {
        let e = &self.engine;
        e.lattice_distance(z).min(e.branch_distance(z, self.p))
    }

    fn check_regular(&self, z: Complex64) -> Result<()> {
        if self.singular_distance(z) <= self.torus.precision {
            return Err(Error::PoleAtSingularity(z));
        }
        Ok(())
    }

    pub fn potential_q(&self, z: Complex64) -> Result<Complex64> {
        self.check_regular(z)?;
        let e = &self.engine;
        let (zp, zm) = (z + self.p, z - self.p);
        Ok(2.0 * e.wp(z)? + 0.75 * (e.wp(zp)? + e.wp(zm)?) + self.a * (e.zeta(zp)? - e.zeta(zm)?) + self.b)
    }

    pub fn potential_q_prime(&self, z: Complex64) -> Result<Complex64> {
        self.check_regular(z)?;
        let e = &self.engine;
        let (zp, zm) = (z + self.p, z - self.p);
        Ok(2.0 * e.wp_prime(z)? + 0.75 * (e.wp_prime(zp)? + e.wp_prime(zm)?) - self.a * (e.wp(zp)? - e.wp(zm)?))
    }

    /// Coefficient of `ζ(z+p) − ζ(z−p)` in `Φₑ`.
    fn phi_k1(&self) -> Complex64 {
        0.5 * self.a - 0.375 * self.data.k
    }

    fn phi_k0(&self) -> Complex64 {
        let d = &self.data;
        let a = self.a;
        -a * a + (0.5 * d.k - d.zeta) * a - d.wp + 0.75 * d.k * d.zeta + 0.1875 * d.k * d.k
    }

    pub fn phi_e(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.phi_e_jet(z)?.value)
    }

    pub fn phi_e_jet(&self, z: Complex64) -> Result<PhiJet> {
        self.check_regular(z)?;
        let e = &self.engine;
        let (zp, zm) = (z + self.p, z - self.p);
        let k1 = self.phi_k1();
        let wp = e.wp(z)?;
        let wp1 = e.wp_prime(z)?;
        Ok(PhiJet {
            value: wp + k1 * (e.zeta(zp)? - e.zeta(zm)?) + self.phi_k0(),
            d1: wp1 - k1 * (e.wp(zp)? - e.wp(zm)?),
            d2: e.wp_pp(z)? - k1 * (e.wp_prime(zp)? - e.wp_prime(zm)?),
            d3: 12.0 * wp * wp1 - k1 * (e.wp_pp(zp)? - e.wp_pp(zm)?),
        })
    }

    /// `|Φ''' − 4qΦ' − 2q'Φ|` and the scale `max(1, |Φ|, |qΦ|)`.
    pub fn third_order_residual(&self, z: Complex64) -> Result<(f64, f64)> {
        let j = self.phi_e_jet(z)?;
        let q = self.potential_q(z)?;
        let dq = self.potential_q_prime(z)?;
        let res = (j.d3 - 4.0 * q * j.d1 - 2.0 * dq * j.value).norm();
        Ok((res, 1f64.max(j.value.norm()).max((q * j.value).norm())))
    }

    /// `½ΦΦ'' − ¼Φ'² − qΦ²` at one point, with the largest term magnitude.
    pub fn q_pointwise(&self, z: Complex64) -> Result<(Complex64, f64)> {
        let j = self.phi_e_jet(z)?;
        let q = self.potential_q(z)?;
        let t1 = 0.5 * j.value * j.d2;
        let t2 = 0.25 * j.d1 * j.d1;
        let t3 = q * j.value * j.value;
        let scale = 1f64.max(t1.norm()).max(t2.norm()).max(t3.norm());
        Ok((t1 - t2 - t3, scale))
    }

    /// Sample points for the pointwise route, as `(r, s)` fractions.
    pub const Q_SAMPLES: [(f64, f64); 6] = [
        (0.137, 0.293),
        (0.61, 0.17),
        (0.29, 0.71),
        (0.83, 0.44),
        (0.41, 0.89),
        (0.07, 0.55),
    ];

    /// `Q(A)` from its definition, certified constant over the sample points.
    pub fn spectral_q_defn(&self) -> Result<Complex64> {
        let mut vals = Vec::new();
        let mut scale = 1f64;
        for &(r, s) in Self::Q_SAMPLES.iter() {
            let z = self.torus.point(r, s);
            if self.singular_distance(z) < 0.05 {
                continue;
            }
            let (v, sc) = self.q_pointwise(z)?;
            vals.push(v);
            scale = scale.max(sc);
        }
        let mut spread = 0f64;
        for (i, a) in vals.iter().enumerate() {
            for b in &vals[i + 1..] {
                spread = spread.max((a - b).norm());
            }
        }
        let tolerance = 1e-8 * scale;
        if spread > tolerance {
            return Err(Error::NotConstant { spread, tolerance });
        }
        Ok(vals.iter().sum::<Complex64>() / vals.len() as f64)
    }

    pub fn spectral_q(&self) -> Complex64 {
        spectral_q_from(&self.data).eval(self.a)
    }

    /// Three-way decision on `Q(A) ≠ 0` with band `(1e-12, 1e-10]·(1+|A|)⁶`.
    pub fn is_completely_reducible(&self) -> Result<bool> {
        let value = self.spectral_q().norm();
        let scale = (1.0 + self.a.norm()).powi(6);
        let (lower, upper) = (1e-12 * scale, 1e-10 * scale);
        if value <= lower {
            Ok(false)
        } else if value > upper {
            Ok(true)
        } else {
            Err(Error::Indeterminate { value, lower, upper })
        }
    }
}

/// The monic cubics `Y₁, Y₂` with `Q = −Y₁Y₂`.
pub fn spectral_factors(d: &PointData) -> (Polynomial, Polynomial) {
    let (wp, wp1, k) = (d.wp, d.wp1, d.k);
    let one = Complex64::new(1.0, 0.0);
    let y1 = Polynomial::new(vec![
        0.5 * wp1 - 2.25 * k * wp + 9.0 / 64.0 * k * k * k,
        3.0 * (wp + k * k / 16.0),
        -1.25 * k,
        one,
    ]);
    let y2 = Polynomial::new(vec![
        2.0 * wp1 - 3.0 / 64.0 * k * k * k,
        -5.0 / 16.0 * k * k,
        -0.25 * k,
        one,
    ]);
    (y1, y2)
}

fn spectral_q_from(d: &PointData) -> Polynomial {
    let (y1, y2) = spectral_factors(d);
    -(&y1 * &y2)
}

/// Degree-6 spectral polynomial in `A`, coefficients ascending.
pub fn spectral_q_closed(torus: &Torus, p: Complex64) -> Result<Polynomial> {
    Ok(spectral_q_from(&PointData::new(torus, p)?))
}

/// A point `(A, C)` on `C² = Q(A)`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralPoint {
    pub equation: LameEquation,
    #[serde(with = "complex_serde", rename = "A")]
    pub a: Complex64,
    #[serde(with = "complex_serde", rename = "C")]
    pub c: Complex64,
}

impl SpectralPoint {
    pub fn new(eq: &LameEquation, sign: i8) -> Self {
        let c = eq.spectral_q().sqrt();
        SpectralPoint {
            equation: eq.clone(),
            a: eq.a,
            c: if sign < 0 { -c } else { c },
        }
    }

    pub fn dual(&self) -> Self {
        SpectralPoint {
            c: -self.c,
            ..self.clone()
        }
    }

    /// `|C² − Q(A)|` relative to `1 + |Q(A)|`.
    pub fn curve_defect(&self) -> f64 {
        let q = self.equation.spectral_q();
        (self.c * self.c - q).norm() / (1.0 + q.norm())
    }
}

pub fn make_spectral_point(eq: &LameEquation, a: Complex64, sign: i8) -> Result<SpectralPoint> {
    Ok(SpectralPoint::new(&eq.with_a(a)?, sign))
}

/// Local exponents `ρ` solving `ρ(ρ − 1) = c₋₂`.
pub fn local_exponents(c_minus2: Complex64) -> (Complex64, Complex64) {
    let disc = (1.0 + 4.0 * c_minus2).sqrt();
    ((1.0 - disc) / 2.0, (1.0 + disc) / 2.0)
}
