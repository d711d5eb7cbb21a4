//! Circle contour integrals by the periodic trapezoid rule, which converges
//! geometrically for integrands analytic in an annulus around the circle.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `(1 / 2πi) ∮_{|z - center| = radius} f(z) dz`, counterclockwise.
pub fn circle_integral<F>(f: F, center: Complex64, radius: f64, nodes: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let w = Complex64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
        // dz = i w dθ, and the 1/(2πi) cancels the i
        acc += f(center + w) * w;
    }
    acc / nodes as f64
}

/// Residue of `f` at `center`.
pub fn residue<F: Fn(Complex64) -> Complex64>(f: F, center: Complex64, radius: f64) -> Complex64 {
    circle_integral(f, center, radius, 256)
}

/// Laurent coefficient `c_k` of `f` around `center`.
pub fn laurent_coefficient<F>(f: F, center: Complex64, k: i32, radius: f64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    circle_integral(|z| f(z) * (z - center).powi(-k - 1), center, radius, 256)
}
