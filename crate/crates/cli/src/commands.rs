use crate::args::{Format, Function};
use crate::CliError;
use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::Path;
use torus_cone::baker::{check_double_zero_at_p, reducibility_by_monodromy, second_kind_of, SecondKindFunction};
use torus_cone::config::Config;
use torus_cone::green::{
    find_nontrivial_critical, green_g, has_nontrivial, hecke_z, rho, scan_omega, solve_tau, OmegaSample,
};
use torus_cone::lame::{spectral_q_closed, LameEquation, PointData, SpectralPoint};
use torus_cone::metric::{
    developing_f, metric_u, sample_points, verify_theorem1, verify_theorem2, verify_theorem3, verify_theorem4, VerificationReport,
    VerifyOptions,
};
use torus_cone::{in_f0, make_torus, Error, Torus};

pub fn cx(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn need<T>(v: Option<T>, flag: &str, function: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("`{function}` needs --{flag}")))
}

fn torus(cfg: &Config, tau: Complex64) -> Result<Torus, CliError> {
    Ok(make_torus(tau, cfg.precision)?)
}

/// ℘ from the square lattice sum of radius `n`, with one Richardson step
/// against radius `n/2`.
fn wp_lattice_sum(tau: Complex64, z: Complex64, n: usize) -> Complex64 {
    let sum = |n: i64| {
        let mut acc = 1.0 / (z * z);
        for m in -n..=n {
            for k in -n..=n {
                if m == 0 && k == 0 {
                    continue;
                }
                let w = Complex64::new(m as f64, 0.0) + tau * k as f64;
                acc += 1.0 / ((z - w) * (z - w)) - 1.0 / (w * w);
            }
        }
        acc
    };
    let (big, small) = (sum(n as i64), sum(n as i64 / 2));
    let ratio = (n as f64 / (n / 2) as f64).powi(2);
    (ratio * big - small) / (ratio - 1.0)
}

pub fn eval(
    cfg: &Config,
    function: Function,
    tau: Complex64,
    z: Option<Complex64>,
    rs: Option<(f64, f64)>,
    p: Option<Complex64>,
    a: Option<Complex64>,
) -> Result<Value, CliError> {
    let t = torus(cfg, tau)?;
    let e = t.engine();
    let legendre = t.legendre_defect();
    let point = || -> Result<Complex64, CliError> {
        match (z, rs) {
            (Some(z), _) => Ok(z),
            (None, Some((r, s))) => Ok(t.point(r, s)),
            (None, None) => Err(CliError::Usage("this function needs --z or --rs".into())),
        }
    };
    let (value, certs) = match function {
        Function::Wp => {
            let z = point()?;
            let (w, w1) = (e.wp(z)?, e.wp_prime(z)?);
            let ode = (w1 * w1 - 4.0 * w * w * w + t.g2 * w + t.g3).norm() / (1.0 + w.norm().powi(3));
            let oracle = wp_lattice_sum(tau, z, cfg.oracle.lattice_sum_radius);
            (
                w,
                json!({
                    "legendre_defect": legendre,
                    "differential_equation": ode,
                    "lattice_sum_difference": (oracle - w).norm(),
                    "lattice_sum_radius": cfg.oracle.lattice_sum_radius,
                }),
            )
        }
        Function::WpPrime => {
            let z = point()?;
            let (w, w1) = (e.wp(z)?, e.wp_prime(z)?);
            let ode = (w1 * w1 - 4.0 * w * w * w + t.g2 * w + t.g3).norm() / (1.0 + w.norm().powi(3));
            (w1, json!({ "legendre_defect": legendre, "differential_equation": ode }))
        }
        Function::WpPp => {
            let z = point()?;
            let (w, w2) = (e.wp(z)?, e.wp_pp(z)?);
            let res = (w2 - 6.0 * w * w + 0.5 * t.g2).norm() / (1.0 + w.norm_sqr());
            (w2, json!({ "legendre_defect": legendre, "second_order_identity": res }))
        }
        Function::Zeta => {
            let z = point()?;
            let v = e.zeta(z)?;
            let shift = (e.zeta(z + 1.0)? - v - t.eta1).norm();
            (v, json!({ "legendre_defect": legendre, "quasi_periodicity": shift }))
        }
        Function::Sigma => {
            let z = point()?;
            let v = e.sigma(z);
            let law = (e.sigma(z + 1.0) + (t.eta1 * (z + 0.5)).exp() * v).norm() / (1.0 + v.norm());
            (v, json!({ "legendre_defect": legendre, "transformation_law": law }))
        }
        Function::Z => {
            let (r, s) = match (rs, z) {
                (Some(rs), _) => rs,
                (None, Some(z)) => t.coords(z),
                (None, None) => return Err(CliError::Usage("`Z` needs --rs or --z".into())),
            };
            let v = hecke_z(&t, r, s)?;
            // −4π ∂_z G by central differences, ∂_z = (∂_x − i∂_y)/2
            let z0 = t.point(r, s);
            let h = 1e-5;
            let gx = (green_g(&t, z0 + h)? - green_g(&t, z0 - h)?) / (2.0 * h);
            let gy = (green_g(&t, z0 + Complex64::new(0.0, h))? - green_g(&t, z0 - Complex64::new(0.0, h))?) / (2.0 * h);
            let grad = -4.0 * PI * 0.5 * Complex64::new(gx, -gy);
            (v, json!({ "legendre_defect": legendre, "green_gradient_difference": (grad - v).norm() }))
        }
        Function::G => {
            let z = point()?;
            let v = green_g(&t, z)?;
            let even = (green_g(&t, -z)? - v).abs();
            (Complex64::new(v, 0.0), json!({ "legendre_defect": legendre, "evenness": even }))
        }
        Function::Q | Function::PhiE => {
            let p = need(p, "p", "q/phi_e")?;
            let a = need(a, "A", "q/phi_e")?;
            let z = point()?;
            let eq = LameEquation::new(&t, p, a)?;
            let (res, scale) = eq.third_order_residual(z)?;
            let v = if function == Function::Q { eq.potential_q(z)? } else { eq.phi_e(z)? };
            (
                v,
                json!({ "B": cx(eq.b), "third_order_residual": res / scale }),
            )
        }
        Function::SpectralQ => {
            let p = need(p, "p", "Q")?;
            let a = need(a, "A", "Q")?;
            let eq = LameEquation::new(&t, p, a)?;
            let closed = eq.spectral_q();
            let defn = eq.spectral_q_defn()?;
            let d = PointData::new(&t, p)?;
            (
                closed,
                json!({
                    "pointwise_definition": cx(defn),
                    "relative_difference": (defn - closed).norm() / (1.0 + closed.norm()),
                    "A0": cx(d.a0()),
                    "minus_wp_prime_squared": cx(-d.wp1 * d.wp1),
                }),
            )
        }
    };
    Ok(json!({
        "function": function.to_possible_value().map(|v| v.get_name().to_string()),
        "tau": cx(tau),
        "value": cx(value),
        "residual_certificates": certs,
    }))
}

pub fn q_poly(cfg: &Config, tau: Complex64, p: Complex64) -> Result<Value, CliError> {
    let t = torus(cfg, tau)?;
    let q = spectral_q_closed(&t, p)?;
    let d = PointData::new(&t, p)?;
    let a0 = d.a0();
    let roots: Vec<[f64; 2]> = q.roots().into_iter().map(cx).collect();
    Ok(json!({
        "tau": cx(tau),
        "p": cx(p),
        "coefficients": q.coeffs.iter().map(|c| cx(*c)).collect::<Vec<_>>(),
        "roots": roots,
        "A0": cx(a0),
        "Q_at_A0": cx(q.eval(a0)),
        "minus_wp_prime_squared": cx(-d.wp1 * d.wp1),
    }))
}

pub fn monodromy(
    cfg: &Config,
    tau: Complex64,
    p: Complex64,
    a: Option<Complex64>,
    sign: i8,
) -> Result<Value, CliError> {
    let t = torus(cfg, tau)?;
    let Some(a) = a else {
        return double_zero_monodromy(cfg, &t, p);
    };
    let eq = LameEquation::new(&t, p, a)?;
    let point = SpectralPoint::new(&eq, sign);
    let y = second_kind_of(&point)?;
    let data = y.monodromy_data();
    let (l1, l2) = y.multipliers();
    let (gle, _) = gle_max(&t, &y, &eq, cfg)?;
    Ok(json!({
        "tau": cx(tau),
        "p": cx(p),
        "A": cx(a),
        "C": cx(point.c),
        "Q": cx(eq.spectral_q()),
        "zeros": [cx(y.a1), cx(y.a2)],
        "c": cx(y.c),
        "multipliers": [cx(l1), cx(l2)],
        "data": data,
        "completely_reducible": reducibility_by_monodromy(&data),
        "residual_certificates": { "gle_residual": gle },
    }))
}

/// Largest relative GLE residual at seeded sample points.
fn gle_max(t: &Torus, y: &SecondKindFunction, eq: &LameEquation, cfg: &Config) -> Result<(f64, usize), CliError> {
    let avoid = [Complex64::new(0.0, 0.0), eq.p, -eq.p, y.a1, y.a2];
    let pts = sample_points(t, 10, cfg.seeds.sample, &avoid, 0.05);
    let mut worst: f64 = 0.0;
    for &z in &pts {
        let (res, scale) = y.gle_residual(eq, z)?;
        worst = worst.max(res / scale);
    }
    Ok((worst, pts.len()))
}

fn d_zeta(t: &Torus, p: Complex64) -> Result<Complex64, CliError> {
    Ok(t.engine().zeta(p)?)
}

fn double_zero_monodromy(cfg: &Config, t: &Torus, p: Complex64) -> Result<Value, CliError> {
    let dz = check_double_zero_at_p(t, p)?;
    let eq = LameEquation::new(t, p, dz.a0)?;
    let data = dz.psi.monodromy_data();
    let (l1, l2) = dz.psi.multipliers();
    let (gle, samples) = gle_max(t, &dz.psi, &eq, cfg)?;
    let d = PointData::new(t, p)?;
    // (r₀, s₀) are reduced mod Z², so both relations hold up to a lattice shift m + nτ
    let (m, n) = t.coords(data.r + data.s * t.tau - 2.0 * p);
    let (mi, ni) = (m.round(), n.round());
    let shift_defect = (m - mi).abs().max((n - ni).abs());
    let eta_defect =
        (data.r * t.eta1 + data.s * t.eta2 - 2.0 * d_zeta(t, p)? - (mi * t.eta1 + ni * t.eta2)).norm();
    Ok(json!({
        "tau": cx(t.tau),
        "p": cx(p),
        "A0": cx(dz.a0),
        "c": cx(dz.c),
        "r0": cx(data.r),
        "s0": cx(data.s),
        "data": data,
        "multipliers": [cx(l1), cx(l2)],
        "Q_at_A0": cx(eq.spectral_q()),
        "minus_wp_prime_squared": cx(-d.wp1 * d.wp1),
        "completely_reducible": reducibility_by_monodromy(&data),
        "residual_certificates": {
            "gle_residual": gle,
            "gle_samples": samples,
            "r0_plus_s0_tau_minus_2p": shift_defect,
            "r0_eta1_plus_s0_eta2_minus_2zeta_p": eta_defect,
            "legendre_defect": t.legendre_defect(),
        },
    }))
}

pub fn find_critical(cfg: &Config, tau: Complex64, seed: Option<(f64, f64)>) -> Result<Value, CliError> {
    let t = torus(cfg, tau)?;
    match seed {
        Some(seed) => Ok(serde_json::to_value(find_nontrivial_critical(&t, seed)?)?),
        None => Ok(serde_json::to_value(has_nontrivial(&t, cfg.seeds.grid))?),
    }
}

pub fn solve(rs: (f64, f64), seed_tau: Option<Complex64>) -> Result<Value, CliError> {
    let sample = solve_tau(rs.0, rs.1, seed_tau.unwrap_or_else(rho))?;
    Ok(json!({ "sample": sample, "in_F0": in_f0(sample.tau) }))
}

fn omega_csv(samples: &[OmegaSample]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r", "s", "tau_re", "tau_im", "residual", "converged", "iterations"])?;
    for s in samples {
        w.write_record([
            s.r.to_string(),
            s.s.to_string(),
            s.tau.re.to_string(),
            s.tau.im.to_string(),
            s.z_residual.to_string(),
            s.converged.to_string(),
            s.iterations.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("csv output is utf-8"))
}

/// Returns the text for stdout.
pub fn scan(cfg: &Config, format: Format, grid: usize, out: Option<&Path>) -> Result<String, CliError> {
    let samples = scan_omega(grid)?;
    let converged = samples.iter().filter(|s| s.converged).count();
    let all_in_f0 = samples.iter().filter(|s| s.converged).all(|s| in_f0(s.tau));
    let summary = json!({
        "grid": grid,
        "points": samples.len(),
        "converged": converged,
        "converged_fraction": converged as f64 / samples.len() as f64,
        "all_converged_in_F0": all_in_f0,
        "precision": cfg.precision,
    });
    let body = match format {
        Format::Csv => omega_csv(&samples)?,
        Format::Json => pretty(&json!({ "summary": summary, "samples": samples }))?,
    };
    match out {
        Some(path) => {
            write_file(path, &body)?;
            pretty(&summary)
        }
        None => Ok(body),
    }
}

pub fn verify(
    cfg: &Config,
    theorem: u8,
    tau: Complex64,
    rs: Option<(f64, f64)>,
) -> Result<VerificationReport, CliError> {
    let opts = VerifyOptions {
        seed: cfg.seeds.sample,
        seeds_grid: cfg.seeds.grid,
        rs_seed: rs,
    };
    let report = match theorem {
        1 => verify_theorem1(tau, &opts)?,
        2 => verify_theorem2(tau, &opts)?,
        3 => {
            let (r, s) = need(rs, "rs", "verify --theorem 3")?;
            verify_theorem3(tau, r, s)?
        }
        4 => verify_theorem4(tau, &opts)?,
        n => return Err(CliError::Usage(format!("unknown theorem {n}"))),
    };
    Ok(report)
}

pub struct MetricGrid {
    pub csv: String,
    pub warning: Option<String>,
}

pub fn metric_sample(
    cfg: &Config,
    tau: Complex64,
    a: Complex64,
    beta: f64,
    grid: usize,
    exclusion: f64,
) -> Result<MetricGrid, CliError> {
    if grid == 0 {
        return Err(CliError::Lib(Error::InvalidArgument("grid must be positive".into())));
    }
    let t = torus(cfg, tau)?;
    let map = developing_f(&t, a)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "u"])?;
    for i in 0..grid {
        for j in 0..grid {
            let r = (i as f64 + 0.5) / grid as f64;
            let s = (j as f64 + 0.5) / grid as f64;
            let z = t.point(r, s);
            if map.singular_distance(z) < exclusion {
                continue;
            }
            let sample = metric_u(&map, beta, z)?;
            w.write_record([z.re.to_string(), z.im.to_string(), sample.u.to_string()])?;
        }
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("csv output is utf-8");
    Ok(MetricGrid {
        csv,
        warning: map.warning.clone(),
    })
}

pub fn pretty<T: Serialize>(v: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
