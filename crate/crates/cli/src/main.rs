//! `torus-spherical`: command-line front end of `torus-cone`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or precondition
//! error, 3 numerical non-convergence. Errors are reported on stderr as
//! `{"error": CODE, "message": TEXT}`.

mod args;
mod commands;

use args::{Cli, Command, Format};
use clap::Parser;
use serde_json::json;
use std::process::ExitCode;
use torus_cone::config::{Config, OutputFormat};

#[derive(Debug)]
pub enum CliError {
    Lib(torus_cone::Error),
    Usage(String),
    Io(String),
}

impl From<torus_cone::Error> for CliError {
    fn from(e: torus_cone::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_convergence_failure() => 3,
            _ => 2,
        }
    }

    fn report(&self) -> serde_json::Value {
        match self {
            CliError::Lib(e) => json!({ "error": e.code(), "message": e.to_string() }),
            CliError::Usage(m) => json!({ "error": "Usage", "message": m }),
            CliError::Io(m) => json!({ "error": "Io", "message": m }),
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(p) = cli.precision {
        cfg.precision = p;
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
    }
    if let Some(s) = cli.sample_seed {
        cfg.seeds.sample = s;
    }
    if let Some(g) = cli.seeds_grid {
        cfg.seeds.grid = g;
    }
    if let Some(r) = cli.oracle_radius {
        cfg.oracle.lattice_sum_radius = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Text for stdout and the exit code on success.
fn run(cli: Cli) -> Result<(String, u8), CliError> {
    let cfg = load_config(&cli)?;
    let format = match cfg.output.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Csv => Format::Csv,
    };
    match cli.command {
        Command::Eval { function, tau, z, rs, p, a } => {
            Ok((commands::pretty(&commands::eval(&cfg, function, tau, z, rs, p, a)?)?, 0))
        }
        Command::QPoly { tau, p } => Ok((commands::pretty(&commands::q_poly(&cfg, tau, p)?)?, 0)),
        Command::Monodromy { tau, p, a, sign } => {
            Ok((commands::pretty(&commands::monodromy(&cfg, tau, p, a, sign)?)?, 0))
        }
        Command::FindCritical { tau, seed } => Ok((commands::pretty(&commands::find_critical(&cfg, tau, seed)?)?, 0)),
        Command::SolveTau { rs, seed_tau } => Ok((commands::pretty(&commands::solve(rs, seed_tau)?)?, 0)),
        Command::ScanOmega { grid, out } => Ok((commands::scan(&cfg, format, grid, out.as_deref())?, 0)),
        Command::Verify { theorem, tau, rs, out } => {
            let report = commands::verify(&cfg, theorem, tau, rs)?;
            let text = commands::pretty(&report)?;
            if let Some(path) = out {
                commands::write_file(&path, &text)?;
            }
            if !report.pass {
                eprintln!("{}", json!({ "error": "VerificationFailed", "failures": report.failures() }));
            }
            Ok((text, if report.pass { 0 } else { 1 }))
        }
        Command::MetricSample { tau, a, beta, grid, exclusion, out } => {
            let sample = commands::metric_sample(&cfg, tau, a, beta, grid, exclusion)?;
            if let Some(w) = &sample.warning {
                eprintln!("{}", json!({ "warning": w }));
            }
            match out {
                Some(path) => {
                    commands::write_file(&path, &sample.csv)?;
                    Ok((String::new(), 0))
                }
                None => Ok((sample.csv, 0)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}
