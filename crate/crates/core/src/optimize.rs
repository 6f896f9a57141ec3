//! Phase-angle search.
//!
//! The loss is the exact analytic decision-error density (single band,
//! multiple bands, or Gaussian prior) as a function of the phase angles,
//! evaluated through the coefficient recursion and the response spectrum.
//! It is smooth and 2*pi-periodic in every angle, so a multi-start
//! quasi-Newton descent with central finite differences is enough: random
//! restarts (counter-seeded, bitwise reproducible), BFGS updates with
//! backtracking line search, and a deterministic lowest-loss reduction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::decision::{p_err_gaussian, p_err_multi, p_err_single, GaussianPrior, ThresholdSpec};
use crate::error::{Error, Result};
use crate::gqsp::{gqsp_build, PhaseAngles};
use crate::response::response_coefficients;

/// Which decision-error density the optimizer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Single,
    Multi,
    Gaussian,
}

#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    pub degree: usize,
    pub thresholds: ThresholdSpec,
    pub prior: Option<GaussianPrior>,
    pub objective: Objective,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Convergence threshold on the gradient norm.
    pub tolerance: f64,
    /// Optional known solution of degree `d` or `d - 2k`; padded up and run
    /// as restart 0, which guarantees the degree-nesting property.
    pub warm_start: Option<PhaseAngles>,
}

impl OptimizationProblem {
    pub fn new(degree: usize, thresholds: ThresholdSpec, objective: Objective) -> Self {
        Self {
            degree,
            thresholds,
            prior: None,
            objective,
            restarts: 8,
            max_iters: 150,
            seed: 0,
            tolerance: 1e-8,
            warm_start: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        match self.objective {
            Objective::Single if self.thresholds.bands().len() != 1 => {
                return Err(Error::InvalidArgument(
                    "single-band objective needs exactly one band".into(),
                ))
            }
            Objective::Gaussian if self.prior.is_none() => {
                return Err(Error::InvalidArgument(
                    "gaussian objective needs a prior".into(),
                ))
            }
            Objective::Gaussian if self.thresholds.bands().len() != 1 => {
                return Err(Error::InvalidArgument(
                    "gaussian objective needs exactly one band".into(),
                ))
            }
            _ => {}
        }
        if let Some(w) = &self.warm_start {
            let (dw, d) = (w.degree(), self.degree);
            if dw > d || (d - dw) % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "warm start degree {dw} cannot be padded to {d} (even gap required)"
                )));
            }
        }
        Ok(())
    }

    fn loss(&self, angles: &PhaseAngles) -> Result<f64> {
        let spec = response_coefficients(&gqsp_build(angles)?, self.thresholds.kappa())?;
        match self.objective {
            Objective::Single => p_err_single(&spec, &self.thresholds),
            Objective::Multi => p_err_multi(&spec, &self.thresholds),
            Objective::Gaussian => p_err_gaussian(
                &spec,
                &self.thresholds,
                self.prior.as_ref().expect("validated prior"),
            ),
        }
    }

    fn loss_flat(&self, flat: &[f64]) -> Result<f64> {
        self.loss(&PhaseAngles::from_flat(flat)?)
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_angles: PhaseAngles,
    pub best_p_err: f64,
    /// (iteration, loss) history of the winning restart.
    pub trace: Vec<(usize, f64)>,
    pub restart_index: usize,
    pub converged: bool,
}

const FD_STEP: f64 = 1e-6;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

struct RestartOutcome {
    x: Vec<f64>,
    loss: f64,
    trace: Vec<(usize, f64)>,
    converged: bool,
}

fn gradient(problem: &OptimizationProblem, x: &mut [f64]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let saved = x[i];
        x[i] = saved + FD_STEP;
        let fp = problem.loss_flat(x)?;
        x[i] = saved - FD_STEP;
        let fm = problem.loss_flat(x)?;
        x[i] = saved;
        g[i] = (fp - fm) / (2.0 * FD_STEP);
    }
    Ok(g)
}

fn bfgs(problem: &OptimizationProblem, mut x: Vec<f64>) -> Result<RestartOutcome> {
    let n = x.len();
    let mut h = vec![0.0; n * n];
    let reset = |h: &mut [f64]| {
        h.fill(0.0);
        for i in 0..n {
            h[i * n + i] = 1.0;
        }
    };
    reset(&mut h);

    let mut f = problem.loss_flat(&x)?;
    let mut g = gradient(problem, &mut x)?;
    let mut trace = vec![(0, f)];
    let mut converged = false;

    for iter in 1..=problem.max_iters {
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < problem.tolerance {
            converged = true;
            break;
        }
        // p = -H g
        let mut p = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += h[i * n + j] * g[j];
            }
            p[i] = -acc;
        }
        let mut slope: f64 = p.iter().zip(&g).map(|(pi, gi)| pi * gi).sum();
        if slope >= 0.0 {
            // Lost positive-definiteness; restart from steepest descent.
            reset(&mut h);
            for (pi, gi) in p.iter_mut().zip(&g) {
                *pi = -gi;
            }
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        // Keep the first trial step within a sane angular range.
        let pmax = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if pmax > PI {
            let scale = PI / pmax;
            for v in p.iter_mut() {
                *v *= scale;
            }
            slope *= scale;
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let xt: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + t * pi).collect();
            let ft = problem.loss_flat(&xt)?;
            if ft <= f + ARMIJO_C1 * t * slope {
                accepted = Some((xt, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // No downhill step representable: treat as converged to noise level.
            converged = true;
            break;
        };

        let mut x_new = x_new;
        let g_new = gradient(problem, &mut x_new)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let snorm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > 1e-12 * snorm * ynorm {
            // H <- (I - r s y^T) H (I - r y s^T) + r s s^T
            let r = 1.0 / sy;
            let mut hy = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += h[i * n + j] * y[j];
                }
                hy[i] = acc;
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -r * (s[i] * hy[j] + hy[i] * s[j])
                        + r * r * yhy * s[i] * s[j]
                        + r * s[i] * s[j];
                }
            }
        }
        x = x_new;
        f = f_new;
        g = g_new;
        trace.push((iter, f));
    }

    Ok(RestartOutcome {
        x,
        loss: f,
        trace,
        converged,
    })
}

fn pad_to_degree(angles: &PhaseAngles, degree: usize) -> PhaseAngles {
    let mut a = angles.clone();
    while a.degree() < degree {
        a = a.pad_two();
    }
    a
}

/// Minimize the configured objective; deterministic for a fixed problem and
/// seed (restarts derive independent ChaCha streams and the reduction picks
/// the lowest loss, ties broken by restart index).
pub fn optimize_angles(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    problem.validate()?;
    let dim = 2 * problem.degree + 3;

    let starts: Vec<(usize, Vec<f64>)> = (0..problem.restarts)
        .map(|r| {
            if r == 0 {
                if let Some(w) = &problem.warm_start {
                    return (r, pad_to_degree(w, problem.degree).to_flat());
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
            rng.set_stream(r as u64);
            (r, (0..dim).map(|_| rng.random_range(-PI..PI)).collect())
        })
        .collect();

    let outcomes: Vec<(usize, Result<RestartOutcome>)> = crate::pool().install(|| {
        starts
            .into_par_iter()
            .map(|(r, x0)| (r, bfgs(problem, x0)))
            .collect()
    });

    let mut best: Option<(usize, RestartOutcome)> = None;
    for (r, outcome) in outcomes {
        let outcome = outcome.map_err(|e| Error::Optimization {
            restart: r,
            iteration: 0,
            source: Box::new(e),
        })?;
        let better = match &best {
            None => true,
            Some((_, b)) => outcome.loss < b.loss,
        };
        if better {
            best = Some((r, outcome));
        }
    }
    let (restart_index, outcome) = best.expect("at least one restart");

    // Canonicalize and re-evaluate so the reported loss matches the reported
    // angles exactly (no stale cache).
    let best_angles = PhaseAngles::from_flat(&outcome.x)?;
    let best_p_err = problem.loss(&best_angles)?;
    Ok(OptimizationResult {
        best_angles,
        best_p_err,
        trace: outcome.trace,
        restart_index,
        converged: outcome.converged,
    })
}

/// One-coefficient trend fit `p_err = a log(d) / d` (log-space residuals).
#[derive(Debug, Clone, Copy)]
pub struct ScalingFit {
    pub amplitude: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingStudy {
    /// (degree, achieved p_err) per requested degree.
    pub rows: Vec<(usize, f64)>,
    /// Present when at least three degrees were fitted.
    pub fit: Option<ScalingFit>,
    pub results: Vec<OptimizationResult>,
}

/// Optimize across a list of degrees with shared configuration, warm-starting
/// each degree from the best same-parity predecessor, and fit the
/// `a log(d)/d` trend when three or more degrees are available.
pub fn scaling_study(
    thresholds: &ThresholdSpec,
    degrees: &[usize],
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<ScalingStudy> {
    if degrees.is_empty() {
        return Err(Error::InvalidArgument("need at least one degree".into()));
    }
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("degrees must be ascending".into()));
    }
    let objective = if thresholds.bands().len() == 1 {
        Objective::Single
    } else {
        Objective::Multi
    };

    let mut rows = Vec::new();
    let mut results: Vec<OptimizationResult> = Vec::new();
    for &d in degrees {
        let warm = results
            .iter()
            .rev()
            .find(|r| {
                let prev = r.best_angles.degree();
                prev <= d && (d - prev) % 2 == 0
            })
            .map(|r| r.best_angles.clone());
        let mut problem = OptimizationProblem::new(d, thresholds.clone(), objective);
        problem.restarts = restarts;
        problem.max_iters = max_iters;
        problem.seed = seed.wrapping_add(d as u64);
        problem.warm_start = warm;
        let result = optimize_angles(&problem)?;
        rows.push((d, result.best_p_err));
        results.push(result);
    }

    let fit = fit_log_trend(&rows);
    Ok(ScalingStudy { rows, fit, results })
}

/// Least-squares amplitude for `p_err = a log(d)/d` with the residual taken
/// in log space (slope pinned to 1 against `log(log d / d)`).
pub fn fit_log_trend(rows: &[(usize, f64)]) -> Option<ScalingFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|&&(d, p)| d >= 2 && p > 0.0)
        .map(|&(d, p)| (((d as f64).ln() / d as f64).ln(), p.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let log_a = pts.iter().map(|(m, y)| y - m).sum::<f64>() / n;
    let mean_y = pts.iter().map(|(_, y)| y).sum::<f64>() / n;
    let ss_res: f64 = pts.iter().map(|(m, y)| (y - (m + log_a)).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    if ss_tot == 0.0 {
        return None;
    }
    Some(ScalingFit {
        amplitude: log_a.exp(),
        r_squared: 1.0 - ss_res / ss_tot,
    })
}
