//! Binary decision-making on bosonic displacement signals with generalized
//! quantum signal processing interferometry (GQSPI).
//!
//! A GQSP sequence of qubit rotations and conditional momentum kicks
//! block-encodes a complex Laurent polynomial pair; wrapping a displacement
//! signal `e^{i beta p}` between the sequence and its inverse turns the
//! qubit ground-state probability into a trigonometric polynomial of `beta`
//! that can approximate the indicator of arbitrary decision bands. This
//! crate provides:
//!
//! * [`gqsp`] — Laurent coefficient pairs from phase angles, with the
//!   unitarity check in coefficient form;
//! * [`response`] — the response spectrum `c_s` and the probability curve
//!   `P(down | beta)`;
//! * [`decision`] — analytic decision-error densities (single band, multiple
//!   bands, Gaussian prior) plus an adaptive-quadrature oracle and a
//!   flat-error/transition-width curve fit;
//! * [`optimize`] — deterministic multi-start quasi-Newton search for phase
//!   angles minimizing a chosen error objective;
//! * [`fock`] — a truncated number-basis simulator of the full circuit, the
//!   independent ground truth for every analytic formula;
//! * [`dephasing`] — sign-vector expansions and response evaluation under
//!   per-kick oscillator dephasing, with small-noise order diagnostics.

pub mod decision;
pub mod dephasing;
pub mod error;
pub mod fock;
pub mod gqsp;
pub mod optimize;
pub mod response;

mod cerf;
mod quad;
mod xeig;

pub use decision::{
    fit_error_budget, p_err_gaussian, p_err_multi, p_err_quadrature, p_err_single, ErrorBudget,
    GaussianPrior, PriorDensity, ThresholdSpec,
};
pub use dephasing::{
    dephasing_expansion, dephasing_omega_fit, dephasing_order_check,
    dephasing_order_check_symmetrized, dephasing_response_analytic, DephasingSchedule, OrderCheck,
    SignVectorExpansion,
};
pub use error::{Error, Result};
pub use fock::{fock_oracle_response, fock_oracle_response_many, FockConfig, FockSim, FockState};
pub use gqsp::{gqsp_build, gqsp_degree1, verify_unitarity, LaurentPoly, PhaseAngles};
pub use optimize::{
    optimize_angles, scaling_study, Objective, OptimizationProblem, OptimizationResult,
    ScalingFit, ScalingStudy,
};
pub use response::{
    response_coefficients, response_curve, response_eval, ResponseCurve, ResponseSpectrum,
};

/// Number of worker threads honoring the `GQSPI_THREADS` cap.
pub(crate) fn worker_threads() -> usize {
    std::env::var("GQSPI_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Process-wide worker pool sized by [`worker_threads`]. All internal
/// parallelism (optimizer restarts, oracle batches) runs here so the
/// `GQSPI_THREADS` cap applies uniformly.
pub(crate) fn pool() -> &'static rayon::ThreadPool {
    static POOL: std::sync::OnceLock<rayon::ThreadPool> = std::sync::OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(worker_threads())
            .build()
            .expect("worker pool")
    })
}
