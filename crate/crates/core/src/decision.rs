//! Decision-error objectives.
//!
//! The detector declares "inside" when the qubit is measured in its ground
//! state, so the ideal response is the indicator of the decision band(s) and
//! the error density is the period-averaged deviation from it:
//!
//! ```text
//! p_err = (kappa / pi) * integral over one period of |P_ideal - P(down|beta)| dbeta
//! ```
//!
//! Because `P` is a trigonometric polynomial with values in `[0, 1]`, the
//! absolute values resolve and the integral has an exact closed form in the
//! spectrum `c_s`, including multi-band and Gaussian-prior variants. The
//! closed forms are cross-checked against adaptive quadrature of the same
//! integrand ([`p_err_quadrature`]).

use errorfunctions::RealErrorFunctions;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::cerf::erf_scaled;
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::response::{response_eval, ResponseCurve, ResponseSpectrum};

/// One or more disjoint decision bands `[lo, hi]` inside the principal
/// period `(-pi/(2 kappa), pi/(2 kappa))`, stored sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSpec {
    bands: Vec<(f64, f64)>,
    kappa: f64,
}

impl ThresholdSpec {
    pub fn new(mut bands: Vec<(f64, f64)>, kappa: f64) -> Result<Self> {
        if kappa <= 0.0 || !kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa must be > 0, got {kappa}")));
        }
        if bands.is_empty() {
            return Err(Error::InvalidArgument("need at least one band".into()));
        }
        let half = 0.5 * PI / kappa;
        for &(lo, hi) in &bands {
            if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
                return Err(Error::InvalidArgument(format!(
                    "band ({lo}, {hi}) is not an increasing finite pair"
                )));
            }
            if lo <= -half || hi >= half {
                return Err(Error::InvalidArgument(format!(
                    "band ({lo}, {hi}) outside the principal period (-{half}, {half})"
                )));
            }
        }
        bands.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in bands.windows(2) {
            if w[0].1 >= w[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "bands ({}, {}) and ({}, {}) overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(Self { bands, kappa })
    }

    pub fn single(lo: f64, hi: f64, kappa: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)], kappa)
    }

    pub fn bands(&self) -> &[(f64, f64)] {
        &self.bands
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Total band width `sum_j (hi_j - lo_j)`.
    pub fn total_width(&self) -> f64 {
        self.bands.iter().map(|(lo, hi)| hi - lo).sum()
    }

    /// Indicator of the band union.
    pub fn ideal(&self, beta: f64) -> f64 {
        if self.bands.iter().any(|&(lo, hi)| (lo..=hi).contains(&beta)) {
            1.0
        } else {
            0.0
        }
    }

    /// Whether `beta = 0` (where the response is pinned to 1) lies outside
    /// the band union; an unavoidable point of exception for such targets.
    pub fn zero_is_exceptional(&self) -> bool {
        self.ideal(0.0) == 0.0
    }
}

/// Gaussian prior on the signal amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrior {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianPrior {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Gaussian prior needs finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    pub fn density(&self, beta: f64) -> f64 {
        let z = (beta - self.mu) / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * PI).sqrt())
    }

    /// Prior mass lying outside the principal period `(-pi/2k, pi/2k)`.
    /// Mass out there aliases back into the period through the response's
    /// periodicity, so it is reported as a diagnostic.
    pub fn mass_outside_period(&self, kappa: f64) -> f64 {
        let half = 0.5 * PI / kappa;
        let upper = RealErrorFunctions::erf((half - self.mu) / (std::f64::consts::SQRT_2 * self.sigma));
        let lower = RealErrorFunctions::erf((-half - self.mu) / (std::f64::consts::SQRT_2 * self.sigma));
        (1.0 - 0.5 * (upper - lower)).max(0.0)
    }
}

/// Prior density for the quadrature path. The Gaussian variant mirrors
/// [`p_err_gaussian`]; tabulated densities (linear interpolation, zero
/// outside the table) cover non-Gaussian priors, for which no closed form
/// exists.
#[derive(Debug, Clone)]
pub enum PriorDensity {
    Gaussian(GaussianPrior),
    Tabulated { beta: Vec<f64>, density: Vec<f64> },
}

impl PriorDensity {
    pub fn eval(&self, beta: f64) -> f64 {
        match self {
            PriorDensity::Gaussian(g) => g.density(beta),
            PriorDensity::Tabulated { beta: xs, density: ys } => {
                if xs.len() < 2 || beta < xs[0] || beta > *xs.last().unwrap() {
                    return 0.0;
                }
                let idx = xs.partition_point(|&x| x <= beta).min(xs.len() - 1);
                let (i0, i1) = (idx - 1, idx);
                let t = (beta - xs[i0]) / (xs[i1] - xs[i0]);
                ys[i0] + t * (ys[i1] - ys[i0])
            }
        }
    }
}

/// Flat-tolerance / transition-width decomposition of an achieved response
/// curve (a diagnostic fit, not an input).
#[derive(Debug, Clone, Copy)]
pub struct ErrorBudget {
    /// Flat error level outside the transition regions.
    pub epsilon: f64,
    /// Width of the transition region around each threshold.
    pub sigma_width: f64,
    /// `epsilon * (pi/kappa - 2 sigma) + sigma / 2` evaluated from the fit.
    pub p_err_total: f64,
    /// Set when no transition could be located (e.g. a constant response).
    pub degenerate: bool,
}

const BOUND_SAMPLES: usize = 256;
const BOUND_SLACK: f64 = 1e-9;

/// `H_s` for `s != 0` against a set of band edges:
/// `sinc(pi s) + (i / (pi s)) * sum_j (e^{i 2 kappa hi_j s} - e^{i 2 kappa lo_j s})`.
/// At integer `s != 0` the sinc vanishes.
fn h_factor(s: i64, thr: &ThresholdSpec) -> Complex64 {
    debug_assert!(s != 0);
    let k2 = 2.0 * thr.kappa * s as f64;
    let mut acc = Complex64::ZERO;
    for &(lo, hi) in &thr.bands {
        acc += Complex64::from_polar(1.0, k2 * hi) - Complex64::from_polar(1.0, k2 * lo);
    }
    Complex64::i() * acc / (PI * s as f64)
}

fn analytic_p_err(spec: &ResponseSpectrum, thr: &ThresholdSpec) -> Result<f64> {
    let kappa = thr.kappa;
    let width = thr.total_width();
    let d = spec.degree() as i64;
    // s = 0 term by its limit: sinc contributes 1, the band term -2k width/pi.
    let mut acc = spec.coeff(0) * (1.0 - 2.0 * kappa * width / PI);
    for s in -d..=d {
        if s == 0 {
            continue;
        }
        acc += spec.coeff(s) * h_factor(s, thr);
    }
    let total = kappa * width / PI + acc.re;
    if acc.im.abs() >= 1e-9 {
        return Err(Error::Consistency(format!(
            "decision error has imaginary residue {:.3e}",
            acc.im
        )));
    }
    Ok(total.clamp(0.0, 1.0))
}

fn check_kappa_match(spec: &ResponseSpectrum, thr: &ThresholdSpec) -> Result<()> {
    if (spec.kappa() - thr.kappa).abs() > 1e-12 * spec.kappa().abs() {
        return Err(Error::InvalidArgument(format!(
            "spectrum kappa {} does not match threshold kappa {}",
            spec.kappa(),
            thr.kappa
        )));
    }
    Ok(())
}

/// The closed forms assume `P in [0, 1]`; violations beyond rounding mean
/// the spectrum is numerically corrupted, in which case the caller falls
/// back to quadrature of the literal integrand.
fn bounds_ok(spec: &ResponseSpectrum) -> Result<bool> {
    let (lo, hi) = spec.sample_bounds(BOUND_SAMPLES)?;
    Ok(lo >= -BOUND_SLACK && hi <= 1.0 + BOUND_SLACK)
}

/// Single-band decision error density (exact closed form).
pub fn p_err_single(spec: &ResponseSpectrum, thr: &ThresholdSpec) -> Result<f64> {
    if thr.bands.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "p_err_single requires exactly one band, got {}",
            thr.bands.len()
        )));
    }
    p_err_multi(spec, thr)
}

/// Multi-band decision error density (exact closed form; reduces to the
/// single-band expression for one band).
pub fn p_err_multi(spec: &ResponseSpectrum, thr: &ThresholdSpec) -> Result<f64> {
    check_kappa_match(spec, thr)?;
    if !bounds_ok(spec)? {
        log::warn!("response out of [0,1] beyond tolerance; falling back to quadrature");
        return p_err_quadrature(spec, thr, None);
    }
    analytic_p_err(spec, thr)
}

/// Decision error density averaged over a Gaussian prior on `beta`
/// (closed form via the complex error function).
///
/// Follows the convention where the prior weights the response but the band
/// indicator keeps unit weight, i.e. the integrand is
/// `P_ideal (1 - P f) + (1 - P_ideal) P f`; [`p_err_quadrature`] uses the
/// same convention when given a prior, so the two agree exactly. The result
/// is not confined to `[0, 1]`.
pub fn p_err_gaussian(
    spec: &ResponseSpectrum,
    thr: &ThresholdSpec,
    prior: &GaussianPrior,
) -> Result<f64> {
    check_kappa_match(spec, thr)?;
    if thr.bands.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "p_err_gaussian requires exactly one band, got {}",
            thr.bands.len()
        )));
    }
    let kappa = thr.kappa;
    let mass_out = prior.mass_outside_period(kappa);
    if mass_out > 0.5 {
        return Err(Error::InvalidArgument(format!(
            "prior has {:.1}% of its mass outside the principal period; the \
             periodic response aliases it",
            100.0 * mass_out
        )));
    }
    if mass_out > 1e-3 {
        log::warn!(
            "prior mass outside the principal period is {mass_out:.3e}; the result aliases"
        );
    }

    let (lo, hi) = thr.bands[0];
    let half = 0.5 * PI / kappa;
    let s2s = std::f64::consts::SQRT_2 * prior.sigma;
    let x_lo = (lo - prior.mu) / s2s;
    let x_hi = (hi - prior.mu) / s2s;
    let x_per_lo = (-half - prior.mu) / s2s;
    let x_per_hi = (half - prior.mu) / s2s;

    let d = spec.degree() as i64;
    let mut acc = Complex64::ZERO;
    for s in -d..=d {
        // y_s = sqrt(2) kappa s sigma; erf_scaled carries the e^{-y^2} damping.
        let y = std::f64::consts::SQRT_2 * kappa * s as f64 * prior.sigma;
        let band = erf_scaled(x_hi, y) - erf_scaled(x_lo, y);
        let period = erf_scaled(x_per_hi, y) - erf_scaled(x_per_lo, y);
        let term = spec.coeff(s)
            * Complex64::from_polar(1.0, 2.0 * kappa * s as f64 * prior.mu)
            * (0.5 * period - band);
        if !term.re.is_finite() || !term.im.is_finite() {
            return Err(Error::NumericRange(format!(
                "complex erf evaluation overflowed at s = {s}"
            )));
        }
        acc += term;
    }
    let total = kappa * (hi - lo) / PI + kappa / PI * acc.re;
    if (kappa / PI * acc.im).abs() >= 1e-8 {
        return Err(Error::Consistency(format!(
            "Gaussian decision error has imaginary residue {:.3e}",
            kappa / PI * acc.im
        )));
    }
    Ok(total)
}

/// Numerical-quadrature oracle for the decision error density.
///
/// Without a prior this is `(kappa/pi) * integral |P_ideal - P| dbeta` over
/// the principal period, split at the band edges (the only non-smooth
/// points, since `0 <= P <= 1` resolves the absolute value inside each
/// piece). With a prior the integrand follows the same resolved convention
/// as the closed forms: `P f` outside the bands and `1 - P f` inside.
pub fn p_err_quadrature(
    spec: &ResponseSpectrum,
    thr: &ThresholdSpec,
    prior: Option<&PriorDensity>,
) -> Result<f64> {
    check_kappa_match(spec, thr)?;
    let kappa = thr.kappa;
    let half = 0.5 * PI / kappa;

    // Validate the spectrum once; inside the closure use the raw evaluation.
    response_eval(spec, 0.0)?;

    let mut edges: Vec<f64> = vec![-half];
    for &(lo, hi) in &thr.bands {
        edges.push(lo);
        edges.push(hi);
    }
    // Seed extra breakpoints where a narrow prior concentrates so the
    // adaptive refinement cannot step over the spike.
    if let Some(PriorDensity::Gaussian(g)) = prior {
        for j in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
            let x = g.mu + j * g.sigma;
            if x > -half && x < half {
                edges.push(x);
            }
        }
    }
    edges.push(half);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    // The ideal response is constant on each piece (pieces split exactly at
    // the band edges), so each piece gets its own smooth integrand.
    let period = PI / kappa;
    let mut integral = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let ideal = thr.ideal(0.5 * (a + b));
        let piece = |beta: f64| {
            let raw = eval_raw(spec, beta);
            match prior {
                None => (ideal - raw).abs(),
                Some(f) => {
                    let pf = raw * f.eval(beta);
                    if ideal == 1.0 {
                        1.0 - pf
                    } else {
                        pf
                    }
                }
            }
        };
        integral += integrate(&piece, a, b, 2e-9 * (b - a) / period)?;
    }
    Ok(kappa / PI * integral)
}

fn eval_raw(spec: &ResponseSpectrum, beta: f64) -> f64 {
    let d = spec.degree() as i64;
    let step = Complex64::from_polar(1.0, 2.0 * spec.kappa() * beta);
    let mut w = Complex64::from_polar(1.0, -2.0 * spec.kappa() * beta * d as f64);
    let mut acc = Complex64::ZERO;
    for c in spec.coefficients() {
        acc += c * w;
        w *= step;
    }
    acc.re
}

/// Decompose an achieved response curve into a flat error level `epsilon`
/// and a per-threshold transition width `sigma`, then evaluate the
/// approximate total error `epsilon (pi/kappa - 2 sigma) + sigma / 2`.
///
/// `epsilon` is the largest deviation from the ideal response outside the
/// threshold neighborhoods, found as the fixpoint of: neighborhoods are the
/// contiguous runs around each band edge where the deviation exceeds
/// `epsilon`, and `epsilon` is the maximum deviation outside them.
/// `sigma` is the total width where the deviation lies strictly between
/// `epsilon` and `1 - epsilon`, split evenly across the edges.
pub fn fit_error_budget(curve: &ResponseCurve, thr: &ThresholdSpec) -> Result<ErrorBudget> {
    let n = curve.values().len();
    if n < 8 {
        return Err(Error::InvalidArgument("curve too coarse to fit".into()));
    }
    let period = curve.response_period();
    let grid = curve.beta_grid();
    let dx = grid[1] - grid[0];
    let span = grid[n - 1] - grid[0] + dx;
    if (span - period).abs() > 1e-6 * period {
        return Err(Error::InvalidArgument(format!(
            "curve spans {span}, need one full period {period}"
        )));
    }

    let dev: Vec<f64> = grid
        .iter()
        .zip(curve.values())
        .map(|(&b, &v)| (thr.ideal(b) - v).abs())
        .collect();

    // A usable transition requires the response to cross 1/2 somewhere.
    let crossings = curve
        .values()
        .windows(2)
        .filter(|w| (w[0] - 0.5) * (w[1] - 0.5) < 0.0)
        .count();
    let max_dev = dev.iter().cloned().fold(0.0, f64::max);
    if crossings == 0 {
        return Ok(ErrorBudget {
            epsilon: max_dev,
            sigma_width: 0.0,
            p_err_total: max_dev,
            degenerate: true,
        });
    }

    let edge_indices: Vec<usize> = thr
        .bands
        .iter()
        .flat_map(|&(lo, hi)| [lo, hi])
        .map(|t| {
            grid.iter()
                .enumerate()
                .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
                .map(|(i, _)| i)
                .unwrap()
        })
        .collect();

    // Descend epsilon from 1/2 until it stabilizes on the plateau level.
    let mut eps = 0.5;
    for _ in 0..n {
        let mut in_run = vec![false; n];
        for &e in &edge_indices {
            in_run[e] = true;
            let mut i = e;
            while i > 0 && dev[i - 1] >= eps {
                i -= 1;
                in_run[i] = true;
            }
            let mut i = e;
            while i + 1 < n && dev[i + 1] >= eps {
                i += 1;
                in_run[i] = true;
            }
        }
        let eps_new = dev
            .iter()
            .zip(&in_run)
            .filter(|(_, &m)| !m)
            .map(|(&d, _)| d)
            .fold(0.0, f64::max);
        // Stop at the fixpoint, taking the outside maximum as the level.
        if eps_new >= eps {
            eps = eps_new;
            break;
        }
        eps = eps_new;
    }

    // Per-threshold transition width; the total elevated measure is split
    // across all band edges.
    let k_edges = edge_indices.len() as f64;
    let sigma_total = dx * dev.iter().filter(|&&d| d > eps && d < 1.0 - eps).count() as f64;
    let sigma = sigma_total / k_edges;
    // Period-normalized so the value is commensurate with p_err_single: the
    // plateaus contribute eps, each transition roughly sigma/4 of integrated
    // deviation.
    let p_err_total =
        thr.kappa / PI * (eps * (period - k_edges * sigma) + k_edges * sigma / 4.0);
    Ok(ErrorBudget {
        epsilon: eps,
        sigma_width: sigma,
        p_err_total,
        degenerate: false,
    })
}
