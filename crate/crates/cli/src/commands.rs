//! The five subcommands.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path;

use gqspi_core::{
    dephasing_order_check, dephasing_response_analytic, fock_oracle_response_many,
    gqsp_build, optimize_angles, p_err_gaussian, p_err_multi, p_err_quadrature,
    response_coefficients, response_curve, response_eval, scaling_study, DephasingSchedule,
    FockConfig, GaussianPrior, Objective, OptimizationProblem, PhaseAngles, PriorDensity,
    ResponseSpectrum, ThresholdSpec,
};

use crate::config::{parse_angle_file, render_angle_lines, Format, RunConfig};
use crate::output::{render_csv, render_json, unix_timestamp, write_file};
use crate::CliError;

fn require_kappa(cfg: &RunConfig) -> Result<f64, CliError> {
    cfg.kappa
        .ok_or_else(|| CliError::config("--kappa is required".into()))
}

fn require_out(cfg_out: &Option<std::path::PathBuf>) -> Result<&Path, CliError> {
    cfg_out
        .as_deref()
        .ok_or_else(|| CliError::config("--out is required".into()))
}

fn thresholds(cfg: &RunConfig, kappa: f64) -> Result<ThresholdSpec, CliError> {
    if cfg.bands.is_empty() {
        return Err(CliError::config("at least one --band lo:hi is required".into()));
    }
    ThresholdSpec::new(cfg.bands.clone(), kappa).map_err(CliError::from)
}

fn load_angles(cfg: &RunConfig) -> Result<PhaseAngles, CliError> {
    let path = cfg
        .angles
        .as_ref()
        .ok_or_else(|| CliError::config("--angles <file> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read angle file {path}: {e}")))?;
    parse_angle_file(&text)
}

pub fn cmd_response(cfg: &RunConfig, out: &Option<std::path::PathBuf>) -> Result<(), CliError> {
    let kappa = require_kappa(cfg)?;
    let out = require_out(out)?;
    if cfg.points < 2 {
        return Err(CliError::config("--points must be >= 2".into()));
    }
    let angles = load_angles(cfg)?;
    let spec = response_coefficients(&gqsp_build(&angles)?, kappa)?;
    let curve = response_curve(&spec, cfg.points)?;

    let mut comments = Vec::new();
    if !cfg.bands.is_empty() {
        let thr = thresholds(cfg, kappa)?;
        if thr.zero_is_exceptional() {
            log::warn!(
                "beta = 0 lies outside the decision bands but the response is pinned to 1 there"
            );
            comments.push("note: beta = 0 is a point of exception for these bands".to_string());
        }
        let analytic = p_err_multi(&spec, &thr)?;
        let quad = p_err_quadrature(&spec, &thr, None)?;
        comments.push(format!("p_err = {analytic}"));
        comments.push(format!("p_err_quadrature = {quad}"));
    }

    match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<f64>> = curve
                .beta_grid()
                .iter()
                .zip(curve.values())
                .map(|(b, v)| vec![*b, *v])
                .collect();
            write_file(out, &render_csv(cfg, &comments, "beta,probability", &rows))
        }
        Format::Json => {
            let data: Vec<serde_json::Value> = curve
                .beta_grid()
                .iter()
                .zip(curve.values())
                .map(|(b, v)| serde_json::json!({"beta": b, "probability": v}))
                .collect();
            write_file(out, &render_json(cfg, serde_json::Value::Array(data)))
        }
    }
}

pub fn cmd_optimize(cfg: &RunConfig, out: &Option<std::path::PathBuf>) -> Result<(), CliError> {
    let kappa = require_kappa(cfg)?;
    let out = require_out(out)?;
    let degree = cfg
        .degree
        .ok_or_else(|| CliError::config("--degree is required".into()))?;
    let thr = thresholds(cfg, kappa)?;
    let objective = match (&cfg.prior, cfg.bands.len()) {
        (Some(_), _) => Objective::Gaussian,
        (None, 1) => Objective::Single,
        (None, _) => Objective::Multi,
    };
    let mut problem = OptimizationProblem::new(degree, thr, objective);
    problem.restarts = cfg.restarts;
    problem.max_iters = cfg.max_iters;
    problem.seed = cfg.seed;
    if let Some((mu, sigma)) = cfg.prior {
        problem.prior = Some(GaussianPrior::new(mu, sigma)?);
    }
    let result = optimize_angles(&problem)?;

    // Angle artifact (always the plain-text format, loadable by `response`).
    let mut text = String::new();
    text.push_str("# gqspi optimize output\n");
    text.push_str(&format!("# timestamp = {}\n", unix_timestamp()));
    text.push_str(&cfg.echo_comment_block());
    text.push_str(&format!("# p_err = {}\n", result.best_p_err));
    text.push_str(&format!("# converged = {}\n", result.converged));
    text.push_str(&format!("# restart_index = {}\n", result.restart_index));
    text.push_str(&render_angle_lines(&result.best_angles));
    write_file(out, &text)?;

    // Trace artifact.
    let trace_path = out.with_extension(match cfg.format {
        Format::Csv => "trace.csv",
        Format::Json => "trace.json",
    });
    match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<f64>> = result
                .trace
                .iter()
                .map(|(i, p)| vec![*i as f64, *p])
                .collect();
            write_file(
                &trace_path,
                &render_csv(cfg, &[], "iteration,p_err", &rows),
            )
        }
        Format::Json => {
            let data: Vec<serde_json::Value> = result
                .trace
                .iter()
                .map(|(i, p)| serde_json::json!({"iteration": i, "p_err": p}))
                .collect();
            write_file(&trace_path, &render_json(cfg, serde_json::Value::Array(data)))
        }
    }
}

pub fn cmd_scaling(cfg: &RunConfig, out: &Option<std::path::PathBuf>) -> Result<(), CliError> {
    let kappa = require_kappa(cfg)?;
    let out = require_out(out)?;
    if cfg.degrees.is_empty() {
        return Err(CliError::config("--degrees is required (e.g. 1,3,6,9,13)".into()));
    }
    let thr = thresholds(cfg, kappa)?;
    let study = scaling_study(&thr, &cfg.degrees, cfg.restarts, cfg.max_iters, cfg.seed)?;

    let mut comments = Vec::new();
    match &study.fit {
        Some(fit) => {
            comments.push("fit: model = a*log(d)/d".to_string());
            comments.push(format!("fit: a = {}", fit.amplitude));
            comments.push(format!("fit: r_squared = {}", fit.r_squared));
        }
        None => comments.push("fit: skipped (fewer than 3 usable degrees)".to_string()),
    }
    match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<f64>> = study
                .rows
                .iter()
                .map(|(d, p)| vec![*d as f64, *p])
                .collect();
            write_file(out, &render_csv(cfg, &comments, "degree,p_err", &rows))
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = study
                .rows
                .iter()
                .map(|(d, p)| serde_json::json!({"degree": d, "p_err": p}))
                .collect();
            let payload = serde_json::json!({
                "rows": rows,
                "fit": study.fit.as_ref().map(|f| serde_json::json!({
                    "model": "a*log(d)/d",
                    "a": f.amplitude,
                    "r_squared": f.r_squared,
                })),
            });
            write_file(out, &render_json(cfg, payload))
        }
    }
}

fn random_angles(rng: &mut impl Rng, d: usize) -> PhaseAngles {
    let theta: Vec<f64> = (0..=d).map(|_| rng.random_range(-PI..PI)).collect();
    let phi: Vec<f64> = (0..=d).map(|_| rng.random_range(-PI..PI)).collect();
    PhaseAngles::new(theta, phi, rng.random_range(-PI..PI)).expect("finite angles")
}

/// Randomized analytic-vs-oracle comparisons; exits nonzero when any
/// deviation exceeds its tolerance.
pub fn cmd_oracle_check(cfg: &RunConfig) -> Result<(), CliError> {
    let degrees = if cfg.degrees.is_empty() {
        vec![1, 2, 3, 4, 5]
    } else {
        cfg.degrees.clone()
    };
    if degrees.contains(&0) {
        return Err(CliError::config("oracle-check degrees must be >= 1".into()));
    }
    let trials = cfg.trials.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fock_cfg = FockConfig::default();

    // (a) Noiseless response: analytic spectrum vs the Fock circuit.
    let mut response_dev: f64 = 0.0;
    let mut response_count = 0;
    for t in 0..trials {
        let d = degrees[t % degrees.len()];
        let kappa = if t % 2 == 0 { 0.25 } else { 0.1 };
        let angles = random_angles(&mut rng, d);
        let spec = response_coefficients(&gqsp_build(&angles)?, kappa)?;
        // Fault injection corrupts one coefficient so the comparison against
        // the (honest) oracle must blow past the tolerance.
        let spec = if cfg.inject_fault && t == 0 {
            inject_fault(&spec)?
        } else {
            spec
        };
        let period = PI / kappa;
        let betas: Vec<f64> = (0..8)
            .map(|j| -0.4 * period + 0.8 * period * j as f64 / 7.0)
            .collect();
        let oracle = fock_oracle_response_many(&angles, kappa, &betas, &fock_cfg, None)?;
        for (b, po) in betas.iter().zip(oracle) {
            let pa = response_eval(&spec, *b)?;
            response_dev = response_dev.max((pa - po).abs());
            response_count += 1;
        }
    }

    // (b) Dephasing: quadruple sign-vector sum vs the Fock circuit (d <= 3).
    let mut dephasing_dev: f64 = 0.0;
    let mut dephasing_count = 0;
    for t in 0..trials.min(6) {
        let d = 1 + t % 3;
        let kappa = 0.2 + 0.05 * (t % 3) as f64;
        let angles = random_angles(&mut rng, d);
        let gammas: Vec<f64> = (0..d).map(|_| rng.random_range(-0.3..0.3)).collect();
        let sched = DephasingSchedule::new(gammas.clone())?;
        let beta: f64 = rng.random_range(-0.4 * PI / kappa..0.4 * PI / kappa);
        let analytic = dephasing_response_analytic(&angles, kappa, beta, &sched)?;
        let oracle =
            fock_oracle_response_many(&angles, kappa, &[beta], &fock_cfg, Some(&gammas))?[0];
        dephasing_dev = dephasing_dev.max((analytic - oracle).abs());
        dephasing_count += 1;
    }

    // (c) Gaussian-prior closed form vs quadrature.
    let mut gaussian_dev: f64 = 0.0;
    let mut gaussian_count = 0;
    for t in 0..trials {
        let d = degrees[t % degrees.len()].min(5);
        let kappa = 0.25;
        let half = 0.5 * PI / kappa;
        let angles = random_angles(&mut rng, d);
        let spec = response_coefficients(&gqsp_build(&angles)?, kappa)?;
        let lo = rng.random_range(-0.8 * half..0.3 * half);
        let hi = rng.random_range(lo + 0.1 * half..0.9 * half);
        let thr = ThresholdSpec::single(lo, hi, kappa)?;
        let prior = GaussianPrior::new(
            rng.random_range(-0.3 * half..0.3 * half),
            rng.random_range(0.02..0.15) * half,
        )?;
        let analytic = p_err_gaussian(&spec, &thr, &prior)?;
        let quad = p_err_quadrature(&spec, &thr, Some(&PriorDensity::Gaussian(prior)))?;
        gaussian_dev = gaussian_dev.max((analytic - quad).abs());
        gaussian_count += 1;
    }

    println!("oracle-check report (seed {}, degrees {:?})", cfg.seed, degrees);
    println!("  response  : {response_count} comparisons, max |analytic - oracle| = {response_dev:.3e} (tol 1e-6)");
    println!("  dephasing : {dephasing_count} comparisons, max |analytic - oracle| = {dephasing_dev:.3e} (tol 1e-5)");
    println!("  gaussian  : {gaussian_count} comparisons, max |closed form - quadrature| = {gaussian_dev:.3e} (tol 1e-6)");

    if response_dev < 1e-6 && dephasing_dev < 1e-5 && gaussian_dev < 1e-6 {
        println!("  all checks within tolerance");
        Ok(())
    } else {
        Err(CliError::numeric("oracle-check deviations exceed tolerance".into()))
    }
}

fn inject_fault(spec: &ResponseSpectrum) -> Result<ResponseSpectrum, CliError> {
    let mut c = spec.coefficients().to_vec();
    let mid = c.len() / 2;
    c[mid] += Complex64::new(1e-3, 0.0);
    ResponseSpectrum::from_raw(spec.kappa(), spec.degree(), c).map_err(CliError::from)
}

pub fn cmd_dephasing_sweep(
    cfg: &RunConfig,
    out: &Option<std::path::PathBuf>,
) -> Result<(), CliError> {
    let kappa = require_kappa(cfg)?;
    let out = require_out(out)?;
    let angles = load_angles(cfg)?;
    let mut gammas = if cfg.gammas.is_empty() {
        vec![0.04, 0.02, 0.01, 0.005]
    } else {
        cfg.gammas.clone()
    };
    gammas.sort_by(|a, b| b.total_cmp(a));
    let betas = if cfg.betas.is_empty() {
        let half = 0.5 * PI / kappa;
        vec![0.0, 0.1 * half, 0.25 * half, 0.4 * half]
    } else {
        cfg.betas.clone()
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut comments = Vec::new();
    for &beta in &betas {
        let check = dephasing_order_check(&angles, kappa, beta, &gammas)?;
        rows.push(vec![0.0, beta, check.p_noiseless, 0.0]);
        for &(g, dl) in &check.deltas {
            rows.push(vec![g, beta, check.p_noiseless - dl, dl]);
        }
        match (check.indeterminate, check.slope, check.omega1) {
            (true, _, _) => comments.push(format!(
                "order: beta = {beta} indeterminate (all deltas below the numerical floor)"
            )),
            (false, Some(s), Some(o)) => {
                comments.push(format!("order: beta = {beta} slope = {s} omega1 = {o}"))
            }
            _ => {}
        }
    }
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));

    match cfg.format {
        Format::Csv => write_file(
            out,
            &render_csv(cfg, &comments, "gamma,beta,probability,delta", &rows),
        ),
        Format::Json => {
            let data: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "gamma": r[0], "beta": r[1], "probability": r[2], "delta": r[3],
                    })
                })
                .collect();
            let payload = serde_json::json!({
                "rows": data,
                "fits": comments,
            });
            write_file(out, &render_json(cfg, payload))
        }
    }
}
