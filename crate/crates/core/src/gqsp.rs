//! GQSP sequences as Laurent polynomial pairs.
//!
//! A degree-`d` GQSP sequence interleaves single-qubit rotations
//! `R(theta, phi, lambda)` with a qubit-conditioned signal unitary. The
//! resulting operator block-encodes a pair of complex Laurent polynomials
//! `(P_d, Q_d)` over the signal variable `w = e^{i kappa x}`:
//!
//! ```text
//! P_d(w) = sum_n p_n w^n,   Q_d(w) = sum_n q_n w^n,
//! n in {-d, -d+2, ..., d-2, d},   |P_d|^2 + |Q_d|^2 = 1 on |w| = 1.
//! ```
//!
//! This module builds the coefficient pair from phase angles via the degree
//! recursion and checks the unitarity invariant in coefficient form.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Wrap an angle into `[-pi, pi)`.
fn canonical_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can return exactly 2*pi for inputs just below -pi due to
    // rounding; fold the boundary back.
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// The phase-angle set defining one GQSP sequence of degree `d`:
/// `theta[0..=d]`, `phi[0..=d]` and the extra phase `lambda0` on the first
/// rotation. Angles are canonicalized into `[-pi, pi)` on construction; every
/// downstream quantity is 2*pi-periodic in each angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAngles {
    theta: Vec<f64>,
    phi: Vec<f64>,
    lambda0: f64,
}

impl PhaseAngles {
    pub fn new(theta: Vec<f64>, phi: Vec<f64>, lambda0: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one rotation (degree 0)".into(),
            ));
        }
        if theta.len() != phi.len() {
            return Err(Error::InvalidArgument(format!(
                "theta and phi must have equal length, got {} and {}",
                theta.len(),
                phi.len()
            )));
        }
        if theta
            .iter()
            .chain(phi.iter())
            .chain(std::iter::once(&lambda0))
            .any(|a| !a.is_finite())
        {
            return Err(Error::InvalidArgument("angles must be finite".into()));
        }
        Ok(Self {
            theta: theta.into_iter().map(canonical_angle).collect(),
            phi: phi.into_iter().map(canonical_angle).collect(),
            lambda0: canonical_angle(lambda0),
        })
    }

    /// Polynomial degree `d`; the sequence holds `d + 1` rotations.
    pub fn degree(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Flatten to `[theta..., phi..., lambda0]` (the optimizer's parameter
    /// vector layout).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.theta.len() + 1);
        v.extend_from_slice(&self.theta);
        v.extend_from_slice(&self.phi);
        v.push(self.lambda0);
        v
    }

    /// Inverse of [`to_flat`](Self::to_flat) for a vector of length `2d + 3`.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() < 3 || flat.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "flat angle vector must have odd length >= 3, got {}",
                flat.len()
            )));
        }
        let n = (flat.len() - 1) / 2;
        Self::new(flat[..n].to_vec(), flat[n..2 * n].to_vec(), flat[2 * n])
    }

    /// Extend to degree `d + 2` without changing the realized operator: a
    /// `(theta = pi/2, phi = 0)` pair of iterations composes to the identity,
    /// so the new coefficient arrays are the old ones zero-padded at the
    /// extreme exponents.
    pub fn pad_two(&self) -> Self {
        let mut theta = self.theta.clone();
        let mut phi = self.phi.clone();
        theta.push(PI / 2.0);
        theta.push(PI / 2.0);
        phi.push(0.0);
        phi.push(0.0);
        Self {
            theta,
            phi,
            lambda0: self.lambda0,
        }
    }
}

/// Coefficient pair `(p_n, q_n)` of the degree-`d` block-encoded polynomials.
///
/// Only exponents with `n = d (mod 2)` exist; they are stored densely at
/// index `k = (n + d) / 2`. Reads outside the stored range yield zero, which
/// is exactly what the boundary cases of the degree recursion and all
/// spectral sums require.
#[derive(Debug, Clone)]
pub struct LaurentPoly {
    degree: usize,
    p: Vec<Complex64>,
    q: Vec<Complex64>,
}

impl LaurentPoly {
    pub fn from_coefficients(degree: usize, p: Vec<Complex64>, q: Vec<Complex64>) -> Result<Self> {
        if p.len() != degree + 1 || q.len() != degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "degree {} requires {} stored coefficients, got p: {}, q: {}",
                degree,
                degree + 1,
                p.len(),
                q.len()
            )));
        }
        Ok(Self { degree, p, q })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Stored coefficients indexed by `k = (n + d) / 2`.
    pub fn p_stored(&self) -> &[Complex64] {
        &self.p
    }

    pub fn q_stored(&self) -> &[Complex64] {
        &self.q
    }

    /// Coefficient `p_n`; zero for out-of-range or parity-mismatched `n`.
    pub fn p_coeff(&self, n: i64) -> Complex64 {
        self.coeff(&self.p, n)
    }

    /// Coefficient `q_n`; zero for out-of-range or parity-mismatched `n`.
    pub fn q_coeff(&self, n: i64) -> Complex64 {
        self.coeff(&self.q, n)
    }

    fn coeff(&self, v: &[Complex64], n: i64) -> Complex64 {
        let d = self.degree as i64;
        if n < -d || n > d || (n + d) % 2 != 0 {
            return Complex64::ZERO;
        }
        v[((n + d) / 2) as usize]
    }

    /// Evaluate `P_d` at phase `u`, i.e. `sum_n p_n e^{i n u}`.
    pub fn eval_p(&self, u: f64) -> Complex64 {
        self.eval(&self.p, u)
    }

    /// Evaluate `Q_d` at phase `u`.
    pub fn eval_q(&self, u: f64) -> Complex64 {
        self.eval(&self.q, u)
    }

    fn eval(&self, v: &[Complex64], u: f64) -> Complex64 {
        let d = self.degree as i64;
        let step = Complex64::from_polar(1.0, 2.0 * u);
        let mut w = Complex64::from_polar(1.0, -(d as f64) * u);
        let mut acc = Complex64::ZERO;
        for c in v {
            acc += c * w;
            w *= step;
        }
        acc
    }
}

/// Closed-form degree-1 coefficients.
///
/// Product of a single iteration: the signal unitary sandwiched between
/// `R(theta0, phi0, lambda0)` and `R(theta1, phi1, 0)` gives
///
/// ```text
/// p_{+1} = e^{i(phi1 + lambda0)} e^{i phi0} cos(theta1) cos(theta0)
/// p_{-1} = e^{i(phi1 + lambda0)} sin(theta1) sin(theta0)
/// q_{+1} = e^{i lambda0} e^{i phi0} sin(theta1) cos(theta0)
/// q_{-1} = -e^{i lambda0} cos(theta1) sin(theta0)
/// ```
pub fn gqsp_degree1(angles: &PhaseAngles) -> Result<LaurentPoly> {
    if angles.degree() != 1 {
        return Err(Error::InvalidArgument(format!(
            "gqsp_degree1 requires degree 1, got {}",
            angles.degree()
        )));
    }
    let (t0, t1) = (angles.theta[0], angles.theta[1]);
    let (f0, f1) = (angles.phi[0], angles.phi[1]);
    let l0 = angles.lambda0;

    let e_f1l0 = Complex64::from_polar(1.0, f1 + l0);
    let e_f0 = Complex64::from_polar(1.0, f0);
    let e_l0 = Complex64::from_polar(1.0, l0);

    let p_plus = e_f1l0 * e_f0 * (t1.cos() * t0.cos());
    let p_minus = e_f1l0 * (t1.sin() * t0.sin());
    let q_plus = e_l0 * e_f0 * (t1.sin() * t0.cos());
    let q_minus = -e_l0 * (t1.cos() * t0.sin());

    LaurentPoly::from_coefficients(1, vec![p_minus, p_plus], vec![q_minus, q_plus])
}

/// Build the degree-`d` coefficient pair by applying the degree recursion
/// `d` times to the degree-0 base case `p_0 = e^{i(lambda0 + phi0)} cos(theta0)`,
/// `q_0 = e^{i lambda0} sin(theta0)` (the constant block of the first
/// rotation).
pub fn gqsp_build(angles: &PhaseAngles) -> Result<LaurentPoly> {
    let d = angles.degree();
    let mut p = vec![Complex64::from_polar(1.0, angles.lambda0 + angles.phi[0]) * angles.theta[0].cos()];
    let mut q = vec![Complex64::from_polar(1.0, angles.lambda0) * angles.theta[0].sin()];

    for i in 1..=d {
        let (ct, st) = (angles.theta[i].cos(), angles.theta[i].sin());
        let e_phi = Complex64::from_polar(1.0, angles.phi[i]);
        let len = i + 1;
        let mut p_next = vec![Complex64::ZERO; len];
        let mut q_next = vec![Complex64::ZERO; len];
        // New exponent r = -i + 2k maps to old exponents r - 1 (index k - 1)
        // and r + 1 (index k); out-of-range terms are zero.
        for k in 0..len {
            let p_lo = if k >= 1 && k - 1 < p.len() {
                p[k - 1]
            } else {
                Complex64::ZERO
            };
            let q_hi = if k < q.len() { q[k] } else { Complex64::ZERO };
            p_next[k] = e_phi * (ct * p_lo + st * q_hi);
            q_next[k] = st * p_lo - ct * q_hi;
        }
        p = p_next;
        q = q_next;
    }

    LaurentPoly::from_coefficients(d, p, q)
}

/// Maximum deviation of the coefficient-form unitarity sums from the
/// Kronecker delta:
///
/// ```text
/// max over |s| <= d of | sum_n (p_n p*_{n+2s} + q_n q*_{n+2s}) - delta_{s0} |
/// ```
///
/// Zero (up to rounding) exactly when `|P_d|^2 + |Q_d|^2 = 1` on the unit
/// circle.
pub fn verify_unitarity(poly: &LaurentPoly) -> f64 {
    let d = poly.degree() as i64;
    let mut worst: f64 = 0.0;
    for s in -d..=d {
        let mut acc = Complex64::ZERO;
        for k in 0..=d {
            let ks = k + s;
            if ks < 0 || ks > d {
                continue;
            }
            let (k, ks) = (k as usize, ks as usize);
            acc += poly.p[k] * poly.p[ks].conj() + poly.q[k] * poly.q[ks].conj();
        }
        let target = if s == 0 { 1.0 } else { 0.0 };
        worst = worst.max((acc - target).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn random_angles(rng: &mut impl Rng, d: usize) -> PhaseAngles {
        let theta: Vec<f64> = (0..=d).map(|_| rng.random_range(-PI..PI)).collect();
        let phi: Vec<f64> = (0..=d).map(|_| rng.random_range(-PI..PI)).collect();
        PhaseAngles::new(theta, phi, rng.random_range(-PI..PI)).unwrap()
    }

    #[test]
    fn canonicalization_wraps_into_half_open_interval() {
        let a = PhaseAngles::new(vec![3.0 * PI, -PI], vec![PI, 5.0 * PI / 2.0], -3.0 * PI).unwrap();
        for &t in a.theta().iter().chain(a.phi()) {
            assert!((-PI..PI).contains(&t), "angle {t} not canonical");
        }
        assert_abs_diff_eq!(a.theta()[0], -PI, epsilon = 1e-12);
        assert_abs_diff_eq!(a.phi()[1], PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.lambda0(), -PI, epsilon = 1e-12);
    }

    #[test]
    fn rejects_mismatched_lengths_and_nonfinite() {
        assert!(PhaseAngles::new(vec![0.0, 0.0], vec![0.0], 0.0).is_err());
        assert!(PhaseAngles::new(vec![f64::NAN], vec![0.0], 0.0).is_err());
        assert!(PhaseAngles::new(vec![], vec![], 0.0).is_err());
    }

    #[test]
    fn degree1_identity_angles() {
        // theta = (0, 0), phi = (0, 0), lambda0 = 0: all cosines 1, sines 0.
        let a = PhaseAngles::new(vec![0.0, 0.0], vec![0.0, 0.0], 0.0).unwrap();
        let poly = gqsp_degree1(&a).unwrap();
        assert_abs_diff_eq!(poly.p_coeff(1).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.p_coeff(-1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.q_coeff(1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.q_coeff(-1).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn degree1_quarter_rotations() {
        // theta = (pi/4, pi/4): p_{+-1} = 1/2, q_{+1} = 1/2, q_{-1} = -1/2.
        let a = PhaseAngles::new(vec![PI / 4.0, PI / 4.0], vec![0.0, 0.0], 0.0).unwrap();
        let poly = gqsp_degree1(&a).unwrap();
        assert_abs_diff_eq!(poly.p_coeff(1).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.p_coeff(-1).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.q_coeff(1).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.q_coeff(-1).re, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn degree1_half_pi_then_zero() {
        // theta0 = pi/2, theta1 = 0: only q_{-1} = -1 survives.
        let a = PhaseAngles::new(vec![PI / 2.0, 0.0], vec![0.0, 0.0], 0.0).unwrap();
        let poly = gqsp_degree1(&a).unwrap();
        assert_abs_diff_eq!(poly.p_coeff(1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.p_coeff(-1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.q_coeff(1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.q_coeff(-1).re, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn degree1_rejects_other_degrees() {
        let a = PhaseAngles::new(vec![0.0], vec![0.0], 0.0).unwrap();
        assert!(matches!(gqsp_degree1(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn build_degree0_identity() {
        let a = PhaseAngles::new(vec![0.0], vec![0.0], 0.0).unwrap();
        let poly = gqsp_build(&a).unwrap();
        assert_abs_diff_eq!(poly.p_coeff(0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.q_coeff(0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn build_matches_closed_form_at_degree1() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = random_angles(&mut rng, 1);
            let built = gqsp_build(&a).unwrap();
            let closed = gqsp_degree1(&a).unwrap();
            for n in [-1i64, 1] {
                assert!((built.p_coeff(n) - closed.p_coeff(n)).norm() < 1e-14);
                assert!((built.q_coeff(n) - closed.q_coeff(n)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn build_degree3_is_unitary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_angles(&mut rng, 3);
            let poly = gqsp_build(&a).unwrap();
            assert!(verify_unitarity(&poly) < 1e-12);
        }
    }

    #[test]
    fn unitarity_detects_bad_coefficients() {
        let poly = LaurentPoly::from_coefficients(
            1,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0)],
            vec![Complex64::ZERO, Complex64::ZERO],
        )
        .unwrap();
        assert!(verify_unitarity(&poly) > 0.0);

        let exact = LaurentPoly::from_coefficients(
            0,
            vec![Complex64::new(1.0, 0.0)],
            vec![Complex64::ZERO],
        )
        .unwrap();
        assert_eq!(verify_unitarity(&exact), 0.0);
    }

    #[test]
    fn unitarity_at_degree8() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let a = random_angles(&mut rng, 8);
        assert!(verify_unitarity(&gqsp_build(&a).unwrap()) < 1e-12);
    }

    #[test]
    fn parity_exponents_never_populated() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for d in 0..6usize {
            let poly = gqsp_build(&random_angles(&mut rng, d)).unwrap();
            for n in -(d as i64)..=(d as i64) {
                if (n + d as i64) % 2 != 0 {
                    assert_eq!(poly.p_coeff(n), Complex64::ZERO);
                    assert_eq!(poly.q_coeff(n), Complex64::ZERO);
                }
            }
        }
    }

    #[test]
    fn padding_preserves_coefficients() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let a = random_angles(&mut rng, 4);
        let padded = a.pad_two();
        assert_eq!(padded.degree(), 6);
        let poly = gqsp_build(&a).unwrap();
        let poly_padded = gqsp_build(&padded).unwrap();
        for n in -6i64..=6 {
            assert!((poly.p_coeff(n) - poly_padded.p_coeff(n)).norm() < 1e-14);
            assert!((poly.q_coeff(n) - poly_padded.q_coeff(n)).norm() < 1e-14);
        }
    }

    #[test]
    fn eval_matches_coefficient_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let poly = gqsp_build(&random_angles(&mut rng, 5)).unwrap();
        let u = 0.37;
        let mut direct = Complex64::ZERO;
        for n in (-5i64..=5).step_by(2) {
            direct += poly.p_coeff(n) * Complex64::from_polar(1.0, n as f64 * u);
        }
        assert!((poly.eval_p(u) - direct).norm() < 1e-13);
        // |P|^2 + |Q|^2 = 1 pointwise on the unit circle.
        let mag = poly.eval_p(u).norm_sqr() + poly.eval_q(u).norm_sqr();
        assert_abs_diff_eq!(mag, 1.0, epsilon = 1e-12);
    }
}
