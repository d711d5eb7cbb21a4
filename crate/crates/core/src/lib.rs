//! Numerics for flat tori: Weierstrass functions, the Hecke function and
//! Green-function critical points, a Lamé-type equation with its spectral
//! polynomial and Baker–Akhiezer functions, and the developing maps of the
//! associated spherical metrics.

pub mod baker;
pub mod complex_serde;
pub mod config;
pub mod elliptic;
mod error;
pub mod green;
pub mod lame;
pub mod lattice;
pub mod metric;
pub mod numeric;

pub use elliptic::{EllipticEngine, SqrtSigmaPath};
pub use error::{Error, Result};
pub use lattice::{in_delta0, in_f0, make_torus, reduce, Torus, TorusPoint};
pub use num_complex::Complex64;
