use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use std::path::PathBuf;

/// `RE,IM`
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = parse_pair(s)?;
    Ok(Complex64::new(re, im))
}

/// `X,Y`
pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let mut parts = s.split(',');
    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(format!("expected two comma-separated numbers, got `{s}`"));
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    Ok((num(a)?, num(b)?))
}

#[derive(Debug, Parser)]
#[command(name = "torus-spherical", version, about = "Weierstrass functions, Green-function critical points, Lamé spectral data and cone spherical metrics on flat tori")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Target precision of the series evaluation.
    #[arg(long, global = true)]
    pub precision: Option<f64>,
    /// Output format for tabular commands.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed of the sample-point generator.
    #[arg(long, global = true)]
    pub sample_seed: Option<u64>,
    /// Seeds per side in critical-point searches.
    #[arg(long, global = true)]
    pub seeds_grid: Option<usize>,
    /// Lattice-sum radius of the ℘ cross-check in `eval wp`.
    #[arg(long, global = true)]
    pub oracle_radius: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Function {
    Wp,
    WpPrime,
    WpPp,
    Zeta,
    Sigma,
    #[value(name = "Z")]
    Z,
    #[value(name = "G")]
    G,
    Q,
    PhiE,
    #[value(name = "Q")]
    SpectralQ,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one function and print its value with self-checks.
    Eval {
        #[arg(value_enum)]
        function: Function,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Option<Complex64>,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        rs: Option<(f64, f64)>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        p: Option<Complex64>,
        #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true)]
        a: Option<Complex64>,
    },
    /// Coefficients and roots of the spectral polynomial Q(A).
    QPoly {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        p: Complex64,
    },
    /// Monodromy data of the Baker–Akhiezer function. Without --A this is
    /// the function with both zeros at p, at A₀ = 3℘''(p)/(4℘'(p)).
    Monodromy {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        p: Complex64,
        #[arg(long = "A", value_parser = parse_complex, allow_hyphen_values = true)]
        a: Option<Complex64>,
        /// Sign of C.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i8,
    },
    /// Search for a nontrivial critical point of the Green function.
    FindCritical {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        /// Single Newton start (r, s); without it a seed grid is used.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        seed: Option<(f64, f64)>,
    },
    /// Solve Z(r, s, τ) = 0 for τ with (r, s) in Δ₀.
    SolveTau {
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        rs: (f64, f64),
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        seed_tau: Option<Complex64>,
    },
    /// Map a barycentric grid on Δ₀ to τ.
    ScanOmega {
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a theorem verification pipeline and print its report.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        theorem: u8,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        rs: Option<(f64, f64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample u_β over the fundamental cell as CSV `x,y,u`.
    MetricSample {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        a: Complex64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 40)]
        grid: usize,
        /// Radius of the disks around 0 and ±a left out of the sample.
        #[arg(long, default_value_t = 0.02)]
        exclusion: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}
