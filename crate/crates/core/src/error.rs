use num_complex::Complex64;
use thiserror::Error;

/// Every failure mode of the library. Variant names double as the
/// machine-readable error codes emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus {0} is not in the upper half-plane")]
    NotUpperHalfPlane(Complex64),
    #[error("precision {precision:e} needs {needed} series terms, cap is {max_terms}")]
    PrecisionUnreachable {
        precision: f64,
        needed: usize,
        max_terms: usize,
    },
    #[error("invalid precision {0:e}, expected 0 < precision < 1e-6")]
    InvalidPrecision(f64),
    #[error("pole at lattice point {0}")]
    PoleAtLattice(Complex64),
    #[error("branch point of the square root at {0}")]
    BranchPointAt(Complex64),
    #[error("Z(r, s) has a pole at (r, s) = ({0}, {1}) mod Z^2")]
    PoleAtOrigin(f64, f64),
    #[error("seed ({0}, {1}) lies in the half-lattice")]
    SeedDegenerate(f64, f64),
    #[error("(r, s) = ({0}, {1}) is outside the open triangle Delta_0")]
    OutsideDelta0(f64, f64),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no nontrivial critical point found from seed ({0}, {1})")]
    NotFound(f64, f64),
    #[error("evaluation point {0} is a singularity of the potential")]
    PoleAtSingularity(Complex64),
    #[error("point {0} is two-torsion")]
    TwoTorsion(Complex64),
    #[error("expression is not constant in z: spread {spread:e} exceeds {tolerance:e}")]
    NotConstant { spread: f64, tolerance: f64 },
    #[error("|Q(A)| = {value:e} lies in the indeterminate band ({lower:e}, {upper:e}]")]
    Indeterminate { value: f64, lower: f64, upper: f64 },
    #[error("phi has a pole at {0}")]
    PhiPole(Complex64),
    #[error("path passes within {distance:e} of the singularity {singularity}")]
    PathTooClose {
        singularity: Complex64,
        distance: f64,
    },
    #[error("degenerate zero configuration: {0}")]
    DegenerateZeros(String),
    #[error("point {0} lies on the singular set of the metric")]
    SingularPoint(Complex64),
    #[error("point {point} is within {distance:e} of a singularity, need at least {required:e}")]
    TooCloseToSingularity {
        point: Complex64,
        distance: f64,
        required: f64,
    },
    #[error("developing map is not of type II: ratio defect {0:e}")]
    NotTypeII(f64),
    #[error("a = r + s tau is not a critical point: |Z| = {0:e}")]
    NotACriticalPoint(f64),
    #[error("not implemented: {0}")]
    NotImplemented(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Stable identifier, used as the `error` field of CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotUpperHalfPlane(_) => "NotUpperHalfPlane",
            Error::PrecisionUnreachable { .. } => "PrecisionUnreachable",
            Error::InvalidPrecision(_) => "InvalidPrecision",
            Error::PoleAtLattice(_) => "PoleAtLattice",
            Error::BranchPointAt(_) => "BranchPointAt",
            Error::PoleAtOrigin(..) => "PoleAtOrigin",
            Error::SeedDegenerate(..) => "SeedDegenerate",
            Error::OutsideDelta0(..) => "OutsideDelta0",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NotFound(..) => "NotFound",
            Error::PoleAtSingularity(_) => "PoleAtSingularity",
            Error::TwoTorsion(_) => "TwoTorsion",
            Error::NotConstant { .. } => "NotConstant",
            Error::Indeterminate { .. } => "Indeterminate",
            Error::PhiPole(_) => "PhiPole",
            Error::PathTooClose { .. } => "PathTooClose",
            Error::DegenerateZeros(_) => "DegenerateZeros",
            Error::SingularPoint(_) => "SingularPoint",
            Error::TooCloseToSingularity { .. } => "TooCloseToSingularity",
            Error::NotTypeII(_) => "NotTypeII",
            Error::NotACriticalPoint(_) => "NotACriticalPoint",
            Error::NotImplemented(_) => "NotImplemented",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Config(_) => "Config",
        }
    }

    /// True for failures of an iterative solver, as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::NotFound(..))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
