//! Driven qubit dispersively coupled to two acoustic modes.
//!
//! The crate propagates the full three-body Lindblad equation on a truncated
//! Fock space, the effective two-mode-squeezing model, and the equivalent
//! Gaussian Lyapunov equation, and reports the logarithmic negativity of the
//! two modes. See `examples/` for end-to-end usage.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod gaussian;
pub mod lindblad;
pub mod model;
pub mod validation;

pub use error::{Error, Result};
pub use fock::{DensityState, HilbertSpace, OperatorMatrix};
pub use gaussian::{log_negativity, lyapunov_evolve, CovarianceState, GaussianModel};
pub use lindblad::{evolve, EvolutionReport, HamiltonianModel, MasterEquation, StepperConfig};
pub use model::{laboratory_parameters, SystemParams};

/// `t0, t0 + dt, …` up to and including `t_end` (the last step may be short).
pub fn output_grid(t0: f64, t_end: f64, dt_out: f64) -> Result<Vec<f64>> {
    if !(dt_out > 0.0) || !dt_out.is_finite() {
        return Err(Error::InvalidArgument(format!("output step must be positive, got {dt_out}")));
    }
    if !(t_end >= t0) || !t_end.is_finite() || !t0.is_finite() {
        return Err(Error::InvalidArgument(format!("bad time window [{t0}, {t_end}]")));
    }
    let n = ((t_end - t0) / dt_out + 1e-9).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * dt_out).collect();
    if t_end - v[n] > 1e-9 * dt_out {
        v.push(t_end);
    } else {
        v[n] = t_end;
    }
    Ok(v)
}
