//! Brute-force circuit simulator in a truncated number basis.
//!
//! This is the independent ground truth for every analytic formula in the
//! crate: it applies the literal gate sequence (qubit rotations, conditional
//! momentum kicks, the displacement signal, optional per-kick oscillator
//! dephasing, then the daggered sequence in reverse) to `|down>|0>` and
//! reads off the ground-state probability.
//!
//! Every oscillator gate used here is a displacement- or rotation-type
//! exponential, which reduces to diagonal number-phase conjugations of
//! `e^{i t x}`:
//!
//! ```text
//! e^{i b p}    = e^{i pi n/2} e^{i b x} e^{-i pi n/2}
//! D(r e^{i(pi/2 + chi)}) = e^{i chi n} e^{i sqrt(2) r x} e^{-i chi n}
//! ```
//!
//! so a single eigendecomposition of the tridiagonal `x` per truncation size
//! (cached process-wide) powers every matrix exponential exactly, up to the
//! truncation itself. Truncation quality is monitored as the population of
//! the topmost Fock levels after each oscillator gate.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gqsp::PhaseAngles;
use crate::xeig;

/// Truncation configuration for the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    /// Number states `0..n_max`.
    pub n_max: usize,
    /// Convergence rule: doubling `n_max` must change any reported
    /// probability by less than this, and boundary leakage must stay below
    /// it throughout.
    pub convergence_tol: f64,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            n_max: 64,
            convergence_tol: 1e-9,
        }
    }
}

impl FockConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidArgument(format!(
                "n_max must be >= 2, got {}",
                self.n_max
            )));
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "convergence_tol must be positive, got {}",
                self.convergence_tol
            )));
        }
        Ok(())
    }
}

/// Joint qubit-oscillator state: amplitudes ordered as
/// `(down ⊗ |0..N-1>, up ⊗ |0..N-1>)`.
#[derive(Debug, Clone)]
pub struct FockState {
    n: usize,
    amp: Vec<Complex64>,
}

impl FockState {
    /// `|down>|0>`.
    pub fn ground(n: usize) -> Self {
        let mut amp = vec![Complex64::ZERO; 2 * n];
        amp[0] = Complex64::new(1.0, 0.0);
        Self { n, amp }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability of measuring the qubit in `|down>`.
    pub fn down_probability(&self) -> f64 {
        self.amp[..self.n].iter().map(|z| z.norm_sqr()).sum()
    }

    /// Position expectation of the oscillator (traced over the qubit).
    pub fn expect_x(&self) -> f64 {
        let mut acc = 0.0;
        for block in [&self.amp[..self.n], &self.amp[self.n..]] {
            for j in 0..self.n - 1 {
                let b = ((j + 1) as f64 / 2.0).sqrt();
                acc += 2.0 * b * (block[j].conj() * block[j + 1]).re;
            }
        }
        acc
    }

    /// Population of the top `tail` Fock levels (both qubit branches): the
    /// truncation-leakage monitor.
    pub fn boundary_occupancy(&self, tail: usize) -> f64 {
        let tail = tail.min(self.n);
        let mut acc = 0.0;
        for block in [&self.amp[..self.n], &self.amp[self.n..]] {
            acc += block[self.n - tail..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        acc
    }
}

/// Gate vocabulary of the simulator.
#[derive(Debug, Clone, Copy)]
pub enum Gate {
    /// `R(theta, phi, lambda) ⊗ I`.
    QubitRotation { theta: f64, phi: f64, lambda: f64 },
    /// Conditional momentum kick `e^{i kappa x sigma_z}`.
    ConditionalDisplacement { kappa: f64 },
    /// Displacement signal `I ⊗ e^{i beta p}`.
    Signal { beta: f64 },
    /// Oscillator dephasing `I ⊗ e^{-i gamma n}`.
    OscillatorRotation { gamma: f64 },
}

/// Dense N x N operator matrices for inspection and cross-checks.
pub struct Operators {
    pub x: nalgebra::DMatrix<Complex64>,
    pub p: nalgebra::DMatrix<Complex64>,
    pub n: nalgebra::DMatrix<Complex64>,
}

/// Build the truncated `x`, `p`, `n` matrices (`a = (x + i p)/sqrt(2)`).
pub fn build_operators(cfg: &FockConfig) -> Result<Operators> {
    cfg.validate()?;
    let n = cfg.n_max;
    let mut x = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    let mut p = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    let mut nn = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        nn[(j, j)] = Complex64::new(j as f64, 0.0);
        if j + 1 < n {
            let b = ((j + 1) as f64 / 2.0).sqrt();
            x[(j, j + 1)] = Complex64::new(b, 0.0);
            x[(j + 1, j)] = Complex64::new(b, 0.0);
            // p = -i (a - a^dag)/sqrt(2): p[j, j+1] = -i b, p[j+1, j] = i b.
            p[(j, j + 1)] = Complex64::new(0.0, -b);
            p[(j + 1, j)] = Complex64::new(0.0, b);
        }
    }
    Ok(Operators { x, p, n: nn })
}

/// Gate-level simulator bound to one truncation size.
pub struct FockSim {
    n: usize,
    tol: f64,
    eig: Arc<xeig::XEig>,
    /// Worst boundary occupancy seen after any oscillator gate.
    max_leakage: f64,
}

const LEAK_TAIL: usize = 8;

impl FockSim {
    pub fn new(cfg: &FockConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            n: cfg.n_max,
            tol: cfg.convergence_tol,
            eig: xeig::cached(cfg.n_max),
            max_leakage: 0.0,
        })
    }

    pub fn max_leakage(&self) -> f64 {
        self.max_leakage
    }

    pub fn apply_gate(&mut self, state: &mut FockState, gate: Gate) -> Result<()> {
        match gate {
            Gate::QubitRotation { theta, phi, lambda } => {
                self.qubit_rotation(state, theta, phi, lambda);
                Ok(())
            }
            Gate::ConditionalDisplacement { kappa } => self.conditional_kick(state, kappa),
            Gate::Signal { beta } => self.signal(state, beta),
            Gate::OscillatorRotation { gamma } => {
                self.oscillator_rotation(state, gamma);
                Ok(())
            }
        }
    }

    /// `R(theta, phi, lambda) ⊗ I` with
    /// `R = [[e^{i(lambda+phi)} cos, e^{i phi} sin], [e^{i lambda} sin, -cos]]`.
    pub fn qubit_rotation(&self, state: &mut FockState, theta: f64, phi: f64, lambda: f64) {
        let r00 = Complex64::from_polar(theta.cos(), lambda + phi);
        let r01 = Complex64::from_polar(theta.sin(), phi);
        let r10 = Complex64::from_polar(theta.sin(), lambda);
        let r11 = Complex64::new(-theta.cos(), 0.0);
        let n = state.n;
        for j in 0..n {
            let down = state.amp[j];
            let up = state.amp[n + j];
            state.amp[j] = r00 * down + r01 * up;
            state.amp[n + j] = r10 * down + r11 * up;
        }
    }

    /// Inverse rotation `R(theta, phi, lambda)^dag`.
    pub fn qubit_rotation_dagger(&self, state: &mut FockState, theta: f64, phi: f64, lambda: f64) {
        let r00 = Complex64::from_polar(theta.cos(), -(lambda + phi));
        let r01 = Complex64::from_polar(theta.sin(), -lambda);
        let r10 = Complex64::from_polar(theta.sin(), -phi);
        let r11 = Complex64::new(-theta.cos(), 0.0);
        let n = state.n;
        for j in 0..n {
            let down = state.amp[j];
            let up = state.amp[n + j];
            state.amp[j] = r00 * down + r01 * up;
            state.amp[n + j] = r10 * down + r11 * up;
        }
    }

    /// Momentum kick `+kappa` on the down branch, `-kappa` on up.
    pub fn conditional_kick(&mut self, state: &mut FockState, kappa: f64) -> Result<()> {
        let n = state.n;
        self.eig.apply_phase_of_x(kappa, &mut state.amp[..n], 1);
        self.eig.apply_phase_of_x(-kappa, &mut state.amp[n..], 1);
        self.check_leakage(state)
    }

    /// Generalized conditional displacement `D(alpha)` on down, `D(-alpha)`
    /// on up (the dephasing-rotated kick).
    pub fn conditional_displacement_alpha(
        &mut self,
        state: &mut FockState,
        alpha: Complex64,
    ) -> Result<()> {
        let n = state.n;
        self.displace_block(&mut state.amp[..n], alpha);
        self.displace_block(&mut state.amp[n..], -alpha);
        self.check_leakage(state)
    }

    /// `I ⊗ D(alpha)` on both branches.
    pub fn displacement(&mut self, state: &mut FockState, alpha: Complex64) -> Result<()> {
        let n = state.n;
        self.displace_block(&mut state.amp[..n], alpha);
        self.displace_block(&mut state.amp[n..], alpha);
        self.check_leakage(state)
    }

    /// Displacement signal `e^{i beta p} = D(-beta/sqrt(2))` on both branches.
    pub fn signal(&mut self, state: &mut FockState, beta: f64) -> Result<()> {
        self.displacement(state, Complex64::new(-beta / std::f64::consts::SQRT_2, 0.0))
    }

    /// Oscillator dephasing `e^{-i gamma n}` (diagonal, no truncation error).
    pub fn oscillator_rotation(&self, state: &mut FockState, gamma: f64) {
        let n = state.n;
        for j in 0..n {
            let ph = Complex64::from_polar(1.0, -gamma * j as f64);
            state.amp[j] *= ph;
            state.amp[n + j] *= ph;
        }
    }

    /// `D(alpha)` on one oscillator block via
    /// `D(r e^{i(pi/2 + chi)}) = e^{i chi n} e^{i sqrt(2) r x} e^{-i chi n}`.
    fn displace_block(&self, block: &mut [Complex64], alpha: Complex64) {
        let r = alpha.norm();
        if r == 0.0 {
            return;
        }
        let chi = alpha.arg() - FRAC_PI_2;
        self.number_phase(block, -chi);
        self.eig
            .apply_phase_of_x(std::f64::consts::SQRT_2 * r, block, 1);
        self.number_phase(block, chi);
    }

    fn number_phase(&self, block: &mut [Complex64], t: f64) {
        // e^{i t n}
        for (j, z) in block.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, t * j as f64);
        }
    }

    fn check_leakage(&mut self, state: &FockState) -> Result<()> {
        let leak = state.boundary_occupancy(LEAK_TAIL);
        self.max_leakage = self.max_leakage.max(leak);
        if leak > self.tol {
            return Err(Error::Truncation {
                n_max: self.n,
                leakage: leak,
            });
        }
        Ok(())
    }

    /// Apply the forward sequence: first rotation, then per iteration the
    /// optional dephasing, the kick, and the iteration's rotation.
    fn apply_forward(
        &mut self,
        state: &mut FockState,
        angles: &PhaseAngles,
        kappa: f64,
        gammas: Option<&[f64]>,
    ) -> Result<()> {
        let d = angles.degree();
        self.qubit_rotation(state, angles.theta()[0], angles.phi()[0], angles.lambda0());
        for i in 1..=d {
            if let Some(g) = gammas {
                self.oscillator_rotation(state, g[i - 1]);
            }
            self.conditional_kick(state, kappa)?;
            self.qubit_rotation(state, angles.theta()[i], angles.phi()[i], 0.0);
        }
        Ok(())
    }

}

/// Starting truncation for the auto-converging oracle: generous bound on the
/// occupied levels from total displacement `kappa d + |beta|`, rounded up so
/// nearby calls share one eigendecomposition.
fn starting_dimension(kappa: f64, degree: usize, beta_max: f64) -> usize {
    let reach = kappa * degree as f64 + beta_max.abs();
    let base = (8.0 * reach * reach + 32.0).ceil() as usize;
    let n = base.max(32);
    n.div_ceil(256).max(1) * 256
}

/// All signal amplitudes share the prepared state, so the signal and the
/// inverse sequence run on a column batch (one position-eigenbasis pass
/// serves every column).
struct BatchState {
    n: usize,
    b: usize,
    /// Column-major: columns `0..b` are down blocks, `b..2b` up blocks.
    amp: Vec<Complex64>,
}

impl BatchState {
    fn replicate(state: &FockState, b: usize) -> Self {
        let n = state.n;
        let mut amp = vec![Complex64::ZERO; 2 * b * n];
        for c in 0..b {
            amp[c * n..(c + 1) * n].copy_from_slice(&state.amp[..n]);
            amp[(b + c) * n..(b + c + 1) * n].copy_from_slice(&state.amp[n..]);
        }
        Self { n, b, amp }
    }

    fn down_probability(&self, c: usize) -> f64 {
        self.amp[c * self.n..(c + 1) * self.n]
            .iter()
            .map(|z| z.norm_sqr())
            .sum()
    }

    fn boundary_occupancy(&self, tail: usize) -> f64 {
        let (n, tail) = (self.n, tail.min(self.n));
        (0..2 * self.b)
            .map(|c| {
                self.amp[c * n + n - tail..(c + 1) * n]
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn qubit_rotation_dagger(&mut self, theta: f64, phi: f64, lambda: f64) {
        let r00 = Complex64::from_polar(theta.cos(), -(lambda + phi));
        let r01 = Complex64::from_polar(theta.sin(), -lambda);
        let r10 = Complex64::from_polar(theta.sin(), -phi);
        let r11 = Complex64::new(-theta.cos(), 0.0);
        let n = self.n;
        for c in 0..self.b {
            for j in 0..n {
                let down = self.amp[c * n + j];
                let up = self.amp[(self.b + c) * n + j];
                self.amp[c * n + j] = r00 * down + r01 * up;
                self.amp[(self.b + c) * n + j] = r10 * down + r11 * up;
            }
        }
    }

    fn number_phase(&mut self, t: f64) {
        let n = self.n;
        for c in 0..2 * self.b {
            for j in 0..n {
                self.amp[c * n + j] *= Complex64::from_polar(1.0, t * j as f64);
            }
        }
    }
}

fn run_circuit(
    angles: &PhaseAngles,
    kappa: f64,
    betas: &[f64],
    n: usize,
    tol: f64,
    gammas: Option<&[f64]>,
) -> Result<(Vec<f64>, f64)> {
    let cfg = FockConfig {
        n_max: n,
        convergence_tol: tol,
    };
    let mut sim = FockSim::new(&cfg)?;
    let mut prepared = FockState::ground(n);
    sim.apply_forward(&mut prepared, angles, kappa, gammas)?;

    let b = betas.len();
    let mut batch = BatchState::replicate(&prepared, b);
    let mut leak = sim.max_leakage();
    let check = |batch: &BatchState, leak: &mut f64| -> Result<()> {
        let l = batch.boundary_occupancy(LEAK_TAIL);
        *leak = leak.max(l);
        if l > tol {
            return Err(Error::Truncation { n_max: n, leakage: l });
        }
        Ok(())
    };

    // Signal: e^{i beta p} = e^{i pi n/2} e^{i beta x} e^{-i pi n/2}, one
    // phase per column.
    batch.number_phase(-FRAC_PI_2);
    let ts: Vec<f64> = betas.iter().chain(betas.iter()).cloned().collect();
    sim.eig.apply_phases_of_x(&ts, &mut batch.amp, 2 * b);
    batch.number_phase(FRAC_PI_2);
    check(&batch, &mut leak)?;

    // Inverse sequence on the whole batch.
    let d = angles.degree();
    let kick_ts: Vec<f64> = std::iter::repeat_n(-kappa, b)
        .chain(std::iter::repeat_n(kappa, b))
        .collect();
    for i in (1..=d).rev() {
        batch.qubit_rotation_dagger(angles.theta()[i], angles.phi()[i], 0.0);
        sim.eig.apply_phases_of_x(&kick_ts, &mut batch.amp, 2 * b);
        check(&batch, &mut leak)?;
        if let Some(g) = gammas {
            batch.number_phase(g[i - 1]);
        }
    }
    batch.qubit_rotation_dagger(angles.theta()[0], angles.phi()[0], angles.lambda0());

    let probs = (0..b).map(|c| batch.down_probability(c)).collect();
    Ok((probs, leak))
}

/// Ground-state probability after the full interferometry circuit, for a
/// batch of signal amplitudes sharing one prepared state. The truncation is
/// doubled until doubling changes no reported probability by more than
/// `cfg.convergence_tol`; failure to converge by `n_max = 4096` is an error.
pub fn fock_oracle_response_many(
    angles: &PhaseAngles,
    kappa: f64,
    betas: &[f64],
    cfg: &FockConfig,
    gammas: Option<&[f64]>,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if kappa <= 0.0 || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa must be > 0, got {kappa}")));
    }
    if let Some(g) = gammas {
        if g.len() != angles.degree() {
            return Err(Error::InvalidArgument(format!(
                "need one dephasing angle per iteration: got {} for degree {}",
                g.len(),
                angles.degree()
            )));
        }
    }
    let beta_max = betas.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let mut n = starting_dimension(kappa, angles.degree(), beta_max).max(cfg.n_max);
    const N_CAP: usize = 4096;
    if n > N_CAP {
        return Err(Error::OracleNonConvergence {
            n_max: n,
            delta: f64::INFINITY,
            leakage: f64::INFINITY,
        });
    }

    let mut current = run_circuit(angles, kappa, betas, n, cfg.convergence_tol, gammas);
    loop {
        let doubled = run_circuit(angles, kappa, betas, 2 * n, cfg.convergence_tol, gammas);
        match (&current, &doubled) {
            (Ok((probs, _)), Ok((probs2, leak2))) => {
                let delta = probs
                    .iter()
                    .zip(probs2)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                if delta < cfg.convergence_tol {
                    return Ok(probs2.clone());
                }
                if n >= N_CAP {
                    return Err(Error::OracleNonConvergence {
                        n_max: n,
                        delta,
                        leakage: *leak2,
                    });
                }
            }
            (_, Ok(_)) | (Err(_), Err(_)) => {
                // Truncation error at the smaller size (or both): keep doubling.
                if n >= N_CAP {
                    let leakage = match &doubled {
                        Ok((_, l)) => *l,
                        Err(Error::Truncation { leakage, .. }) => *leakage,
                        _ => f64::NAN,
                    };
                    return Err(Error::OracleNonConvergence {
                        n_max: n,
                        delta: f64::NAN,
                        leakage,
                    });
                }
            }
            (Ok(_), Err(e)) => {
                return Err(Error::Consistency(format!(
                    "truncation error appeared on doubling n_max: {e}"
                )))
            }
        }
        n *= 2;
        current = doubled;
    }
}

/// Single-amplitude convenience wrapper around
/// [`fock_oracle_response_many`].
pub fn fock_oracle_response(
    angles: &PhaseAngles,
    kappa: f64,
    beta: f64,
    cfg: &FockConfig,
    gammas: Option<&[f64]>,
) -> Result<f64> {
    Ok(fock_oracle_response_many(angles, kappa, &[beta], cfg, gammas)?[0])
}
