//! Qubit decision-response function.
//!
//! Sandwiching the displacement signal between a GQSP sequence and its
//! inverse makes the probability of measuring the qubit back in its ground
//! state a trigonometric polynomial of the signal amplitude `beta`:
//!
//! ```text
//! P(down | beta) = sum_{s=-d}^{d} c_s e^{i 2 kappa beta s}
//! ```
//!
//! with the spectrum `c_s` a fourth-order contraction of the Laurent
//! coefficients damped by vacuum overlap factors. Note that `s` runs over
//! *all* integers in `[-d, d]`: it is half the difference of two
//! equal-parity exponents, so the parity restriction on `n` does not apply.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gqsp::LaurentPoly;

/// Fourier spectrum of the response function for one kick strength `kappa`.
#[derive(Debug, Clone)]
pub struct ResponseSpectrum {
    kappa: f64,
    degree: usize,
    /// `c_s` stored at index `s + degree`, `s = -d..=d`.
    c: Vec<Complex64>,
}

impl ResponseSpectrum {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient `c_s`; zero outside `[-d, d]`.
    pub fn coeff(&self, s: i64) -> Complex64 {
        let d = self.degree as i64;
        if s < -d || s > d {
            Complex64::ZERO
        } else {
            self.c[(s + d) as usize]
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.c
    }

    /// `sum_s c_s`, which must equal 1: at `beta = 0` the sequence and its
    /// inverse cancel and the qubit returns to its initial state.
    pub fn coefficient_sum(&self) -> Complex64 {
        self.c.iter().sum()
    }

    /// Period of the response function in `beta`.
    pub fn response_period(&self) -> f64 {
        PI / self.kappa
    }

    /// Build a spectrum from raw coefficients (used by fault-injection tests
    /// and the oracle-check harness).
    pub fn from_raw(kappa: f64, degree: usize, c: Vec<Complex64>) -> Result<Self> {
        if kappa <= 0.0 || !kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa must be > 0, got {kappa}")));
        }
        if c.len() != 2 * degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "degree {} requires {} coefficients, got {}",
                degree,
                2 * degree + 1,
                c.len()
            )));
        }
        Ok(Self { kappa, degree, c })
    }

    /// Sample the response on `n` uniform points over one period and return
    /// the (min, max) values seen. Used to validate the probability bound
    /// before trusting analytic error formulas.
    pub fn sample_bounds(&self, n: usize) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let period = self.response_period();
        for j in 0..n.max(2) {
            let beta = -0.5 * period + period * j as f64 / n.max(2) as f64;
            let v = response_eval(self, beta)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok((lo, hi))
    }
}

/// Response values sampled on a uniform `beta` grid.
#[derive(Debug, Clone)]
pub struct ResponseCurve {
    kappa: f64,
    beta_grid: Vec<f64>,
    values: Vec<f64>,
}

impl ResponseCurve {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta_grid(&self) -> &[f64] {
        &self.beta_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Response period `T_P = pi / kappa`.
    pub fn response_period(&self) -> f64 {
        PI / self.kappa
    }

    /// Period of the underlying conditional displacement in phase space,
    /// `T_D = 2 pi / kappa` (twice the response period; recorded here for
    /// reference, nothing downstream depends on it).
    pub fn displacement_period(&self) -> f64 {
        2.0 * PI / self.kappa
    }
}

/// Contract a Laurent pair into the response spectrum:
///
/// ```text
/// c_s = sum_{n,m,r} (p_n p*_m + q_n q*_m)(p*_{n+2s} p_{m+2r} + q*_{n+2s} q_{m+2r}) e^{-kappa^2 (r-s)^2}
/// ```
///
/// `n, m` over the parity-restricted exponents, `r, s` over all integers in
/// `[-d, d]`; out-of-range coefficient reads are zero. Cost `O(d^4)`.
pub fn response_coefficients(poly: &LaurentPoly, kappa: f64) -> Result<ResponseSpectrum> {
    if kappa <= 0.0 || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa must be > 0, got {kappa}")));
    }
    let d = poly.degree();
    let di = d as i64;
    let len = d + 1;

    // T[k][l] = p_n p*_m + q_n q*_m with n = -d + 2k, m = -d + 2l.
    let p = poly.p_stored();
    let q = poly.q_stored();
    let mut t = vec![Complex64::ZERO; len * len];
    for k in 0..len {
        for l in 0..len {
            t[k * len + l] = p[k] * p[l].conj() + q[k] * q[l].conj();
        }
    }

    let mut c = vec![Complex64::ZERO; 2 * d + 1];
    for s in -di..=di {
        let mut acc = Complex64::ZERO;
        for r in -di..=di {
            let gauss = (-kappa * kappa * ((r - s) as f64).powi(2)).exp();
            if gauss == 0.0 {
                continue;
            }
            // W(s, r) = sum_{k,l} T[k][l] conj(T[k+s][l+r]) over valid shifts.
            let k_lo = 0.max(-s) as usize;
            let k_hi = di.min(di - s) as usize;
            let l_lo = 0.max(-r) as usize;
            let l_hi = di.min(di - r) as usize;
            let mut w = Complex64::ZERO;
            for k in k_lo..=k_hi {
                let row = k * len;
                let row_shift = (k as i64 + s) as usize * len;
                for l in l_lo..=l_hi {
                    w += t[row + l] * t[row_shift + (l as i64 + r) as usize].conj();
                }
            }
            acc += gauss * w;
        }
        c[(s + di) as usize] = acc;
    }

    ResponseSpectrum::from_raw(kappa, d, c)
}

/// Evaluate `P(down | beta)` from the spectrum. The imaginary part of the
/// sum must vanish; a residue above `1e-9` means the spectrum lost Hermitian
/// symmetry and is reported as a consistency error rather than silently
/// truncated.
pub fn response_eval(spec: &ResponseSpectrum, beta: f64) -> Result<f64> {
    let d = spec.degree as i64;
    let step = Complex64::from_polar(1.0, 2.0 * spec.kappa * beta);
    let mut w = Complex64::from_polar(1.0, -2.0 * spec.kappa * beta * d as f64);
    let mut acc = Complex64::ZERO;
    for c in &spec.c {
        acc += c * w;
        w *= step;
    }
    if acc.im.abs() >= 1e-9 {
        return Err(Error::Consistency(format!(
            "response at beta={beta} has imaginary residue {:.3e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Sample the response on `n_points` uniform points over the principal
/// period `[-pi/(2 kappa), pi/(2 kappa))`.
pub fn response_curve(spec: &ResponseSpectrum, n_points: usize) -> Result<ResponseCurve> {
    if n_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 grid points, got {n_points}"
        )));
    }
    let period = spec.response_period();
    let start = -0.5 * period;
    let dx = period / n_points as f64;
    let mut beta_grid = Vec::with_capacity(n_points);
    let mut values = Vec::with_capacity(n_points);
    for j in 0..n_points {
        let beta = start + dx * j as f64;
        let v = response_eval(spec, beta)?;
        if !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(Error::Consistency(format!(
                "response value {v} at beta={beta} outside [0, 1]"
            )));
        }
        beta_grid.push(beta);
        values.push(v);
    }
    Ok(ResponseCurve {
        kappa: spec.kappa,
        beta_grid,
        values,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::gqsp::{gqsp_build, PhaseAngles};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn random_angles(rng: &mut impl Rng, d: usize) -> PhaseAngles {
        let theta: Vec<f64> = (0..=d).map(|_| rng.random_range(-PI..PI)).collect();
        let phi: Vec<f64> = (0..=d).map(|_| rng.random_range(-PI..PI)).collect();
        PhaseAngles::new(theta, phi, rng.random_range(-PI..PI)).unwrap()
    }

    fn spectrum(rng: &mut impl Rng, d: usize, kappa: f64) -> ResponseSpectrum {
        response_coefficients(&gqsp_build(&random_angles(rng, d)).unwrap(), kappa).unwrap()
    }

    #[test]
    fn degree0_spectrum_is_constant_one() {
        let a = PhaseAngles::new(vec![0.4], vec![-0.9], 0.3).unwrap();
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), 0.25).unwrap();
        assert_abs_diff_eq!(spec.coeff(0).re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.coeff(0).im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_nonpositive_kappa() {
        let a = PhaseAngles::new(vec![0.4], vec![0.0], 0.0).unwrap();
        let poly = gqsp_build(&a).unwrap();
        assert!(response_coefficients(&poly, 0.0).is_err());
        assert!(response_coefficients(&poly, -0.1).is_err());
    }

    #[test]
    fn degree1_closed_form_coefficients() {
        // For d = 1 the spectrum depends only on theta0:
        // c_0 = cos^4 + sin^4, c_{+-1} = cos^2 sin^2.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t0: f64 = rng.random_range(-PI..PI);
            let a = PhaseAngles::new(vec![t0, PI / 2.0], vec![0.0, 0.0], 0.0).unwrap();
            let spec = response_coefficients(&gqsp_build(&a).unwrap(), 0.2).unwrap();
            let (c, s) = (t0.cos(), t0.sin());
            assert_abs_diff_eq!(spec.coeff(0).re, c.powi(4) + s.powi(4), epsilon = 1e-13);
            assert_abs_diff_eq!(spec.coeff(1).re, c * c * s * s, epsilon = 1e-13);
            assert_abs_diff_eq!(spec.coeff(-1).re, c * c * s * s, epsilon = 1e-13);
        }
    }

    #[test]
    fn degree1_symmetry_for_all_angles() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let kappa = rng.random_range(0.05..0.4);
            let spec = spectrum(&mut rng, 1, kappa);
            assert!((spec.coeff(1) - spec.coeff(-1)).norm() < 1e-12);
        }
    }

    #[test]
    fn asymmetry_achievable_from_degree2() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for d in 2..=5usize {
            let found = (0..50).any(|_| {
                let spec = spectrum(&mut rng, d, 0.25);
                (spec.coeff(1) - spec.coeff(-1)).norm() > 1e-3
            });
            assert!(found, "no asymmetric spectrum found at degree {d}");
        }
    }

    #[test]
    fn hermitian_symmetry_and_normalization() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for d in 0..=8usize {
            let spec = spectrum(&mut rng, d, 0.17);
            for s in 0..=(d as i64) {
                assert!((spec.coeff(-s) - spec.coeff(s).conj()).norm() < 1e-12);
            }
            assert!((spec.coefficient_sum() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn eval_at_zero_is_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for d in 0..=6usize {
            let spec = spectrum(&mut rng, d, 0.21);
            assert_abs_diff_eq!(response_eval(&spec, 0.0).unwrap(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn degree1_quarter_angle_zero_crossing() {
        // theta0 = pi/4: P = 1/2 + cos(2 kappa beta)/2, zero at beta = pi/(2 kappa).
        let kappa = 0.25;
        let a = PhaseAngles::new(vec![PI / 4.0, PI / 2.0], vec![0.0, 0.0], 0.0).unwrap();
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), kappa).unwrap();
        assert_abs_diff_eq!(spec.coeff(0).re, 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(spec.coeff(1).re, 0.25, epsilon = 1e-13);
        let v = response_eval(&spec, PI / (2.0 * kappa)).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn periodicity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        let spec = spectrum(&mut rng, 4, 0.3);
        let period = spec.response_period();
        for _ in 0..20 {
            let beta: f64 = rng.random_range(-10.0..10.0);
            let a = response_eval(&spec, beta).unwrap();
            let b = response_eval(&spec, beta + period).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn eval_rejects_corrupted_spectrum() {
        let c = vec![
            Complex64::new(0.2, 0.1),
            Complex64::new(0.6, 0.0),
            Complex64::new(0.2, 0.0),
        ];
        let spec = ResponseSpectrum::from_raw(0.25, 1, c).unwrap();
        assert!(matches!(
            response_eval(&spec, 1.0),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn curve_degree0_all_ones() {
        let a = PhaseAngles::new(vec![1.1], vec![0.2], -0.4).unwrap();
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), 0.5).unwrap();
        let curve = response_curve(&spec, 5).unwrap();
        assert_eq!(curve.values().len(), 5);
        for v in curve.values() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn curve_degree1_four_point_grid() {
        // Grid starts at -T_P/2 (phase -pi of 2 kappa beta), so the sampled
        // values of 1/2 + cos(2 kappa beta)/2 are (0, 1/2, 1, 1/2).
        let a = PhaseAngles::new(vec![PI / 4.0, 0.3], vec![0.0, 0.0], 0.0).unwrap();
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), 0.25).unwrap();
        let curve = response_curve(&spec, 4).unwrap();
        let expect = [0.0, 0.5, 1.0, 0.5];
        for (v, e) in curve.values().iter().zip(expect) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn curve_rejects_single_point() {
        let a = PhaseAngles::new(vec![0.4], vec![0.0], 0.0).unwrap();
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), 0.5).unwrap();
        assert!(response_curve(&spec, 1).is_err());
    }

    #[test]
    fn bounds_sampling_stays_in_unit_interval() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for d in 1..=6usize {
            let spec = spectrum(&mut rng, d, 0.25);
            let (lo, hi) = spec.sample_bounds(512).unwrap();
            assert!(lo >= -1e-9, "lo = {lo}");
            assert!(hi <= 1.0 + 1e-9, "hi = {hi}");
        }
    }
}
