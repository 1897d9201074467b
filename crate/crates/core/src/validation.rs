//! Oracle suite run by `cqad validate`.
//!
//! Each oracle compares a solver against something known independently:
//! a closed form, the other solver, or the same physics in another frame.
//! The report carries no timings so that two runs print identical bytes.

use std::fmt::Write as _;

use crate::error::Result;
use crate::experiments::{desk_scale_params, Profile};
use crate::fock::{dressed_ket, embed, expectation, number, DensityState, HilbertSpace, Slot};
use crate::gaussian::{log_negativity, lyapunov_evolve, CovarianceState, DriftVariant, GaussianModel};
use crate::lindblad::{evolve, evolve_params, HamiltonianModel, MasterEquation, Stepper, StepperConfig};
use crate::model::{dressing_unitary, laboratory_parameters, SystemParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Applied to every Gaussian model built by the suite.
    pub drift_variant: DriftVariant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub name: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl OracleResult {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub results: Vec<OracleResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(OracleResult::passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let _ = writeln!(
                out,
                "{} {:<24} deviation={:.3e} tolerance={:.1e}  {}",
                if r.passed() { "PASS" } else { "FAIL" },
                r.name,
                r.deviation,
                r.tolerance,
                r.detail
            );
        }
        let failed = self.results.iter().filter(|r| !r.passed()).count();
        let _ = writeln!(out, "{} of {} oracles passed", self.results.len() - failed, self.results.len());
        out
    }
}

pub fn run_validation(opts: ValidationOptions) -> Result<ValidationReport> {
    Ok(ValidationReport {
        results: vec![
            squeezed_vacuum_closed_form(opts)?,
            squeezed_vacuum_lyapunov(opts)?,
            fock_squeezed_vacuum()?,
            damped_mode()?,
            frame_equivalence()?,
            lyapunov_vs_fock(opts)?,
        ],
    })
}

fn lossless(p: SystemParams) -> SystemParams {
    SystemParams {
        gamma_a: 0.0,
        gamma_b: 0.0,
        kappa_q: 0.0,
        temperature: 0.0,
        ..p
    }
}

fn gaussian(p: &SystemParams, opts: ValidationOptions) -> Result<GaussianModel> {
    let mut m = GaussianModel::from_params(p)?;
    m.drift_variant = opts.drift_variant;
    Ok(m)
}

/// E_N of the two-mode squeezed vacuum is 2r.
fn squeezed_vacuum_closed_form(_: ValidationOptions) -> Result<OracleResult> {
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.1, 0.5, 1.0, 2.5] {
        let e = log_negativity(&CovarianceState::two_mode_squeezed(r))?.log_negativity;
        worst = worst.max((e - 2.0 * r).abs());
    }
    Ok(OracleResult {
        name: "tmsv_closed_form",
        deviation: worst,
        tolerance: 1e-10,
        detail: "max |E_N - 2r|, r in {0, 0.1, 0.5, 1, 2.5}".into(),
    })
}

/// Lossless Lyapunov evolution from vacuum: E_N(t) = 2Gt.
fn squeezed_vacuum_lyapunov(opts: ValidationOptions) -> Result<OracleResult> {
    let p = lossless(laboratory_parameters());
    let model = gaussian(&p, opts)?;
    let states = lyapunov_evolve(&model, &CovarianceState::vacuum(), 100.0, 5.0)?;
    let mut worst: f64 = 0.0;
    for s in states.iter().skip(1) {
        let exact = 2.0 * model.coupling * s.time;
        worst = worst.max((log_negativity(s)?.log_negativity - exact).abs() / exact);
    }
    let last = log_negativity(states.last().expect("grid"))?.log_negativity;
    Ok(OracleResult {
        name: "lyapunov_squeezing",
        deviation: worst,
        tolerance: 1e-6,
        detail: format!("max rel |E_N - 2Gt| over 100 us; E_N(100) = {last:.4}"),
    })
}

/// Effective Fock run from vacuum, lossless: E_N(t) = 2Gt while the
/// truncation is harmless.
fn fock_squeezed_vacuum() -> Result<OracleResult> {
    let space = HilbertSpace::new(12, 12)?;
    let p = lossless(laboratory_parameters());
    let g = p.effective_coupling()?;
    let vac = DensityState::product(&space, dressed_ket(1), 0, 0)?;
    let cfg = StepperConfig {
        leakage_bound: None,
        positivity_checks: 0,
        ..Default::default()
    };
    let report = evolve_params(&vac, &p, &space, HamiltonianModel::Effective, 40.0, 4.0, &cfg)?;
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for s in report.samples.iter().skip(1).filter(|s| s.leakage < 1e-4) {
        let exact = 2.0 * g * s.time;
        worst = worst.max((s.log_negativity() - exact).abs() / exact);
        used += 1;
    }
    Ok(OracleResult {
        name: "fock_squeezing",
        deviation: worst,
        tolerance: 1e-3,
        detail: format!("max rel |E_N - 2Gt|, cutoff 12, {used} samples with leakage < 1e-4"),
    })
}

/// A single damped mode at zero temperature: ⟨n⟩ = n0 e^{-γt}.
fn damped_mode() -> Result<OracleResult> {
    let space = HilbertSpace::new(6, 2)?;
    let gamma = 0.5;
    let p = SystemParams {
        g_a: 0.0,
        g_b: 0.0,
        drive_amplitude: 0.0,
        delta_d: 0.0,
        gamma_a: gamma,
        ..lossless(laboratory_parameters())
    };
    let na = embed(&number(6)?, Slot::ModeA, &space)?;
    let rho0 = DensityState::product(&space, dressed_ket(1), 3, 0)?;
    let cfg = StepperConfig {
        leakage_bound: None,
        store_states: true,
        ..Default::default()
    };
    let report = evolve_params(&rho0, &p, &space, HamiltonianModel::Rotating, 5.0 / gamma, 0.5, &cfg)?;
    let mut worst: f64 = 0.0;
    for s in &report.states {
        let n = expectation(s, &na)?.re;
        let exact = 3.0 * (-gamma * s.time).exp();
        worst = worst.max((n - exact).abs() / exact);
    }
    Ok(OracleResult {
        name: "damped_mode",
        deviation: worst,
        tolerance: 1e-6,
        detail: "max rel |<n_a> - 3 exp(-gamma t)|, gamma = 0.5/us".into(),
    })
}

/// Rotating frame against the dressed basis on the CI parameters.
fn frame_equivalence() -> Result<OracleResult> {
    let d = desk_scale_params(Profile::CiFast);
    let p = SystemParams {
        kappa_q: 0.5,
        ..d.params
    };
    let space = HilbertSpace::new(5, 5)?;
    let g = p.effective_coupling()?;
    let times = crate::output_grid(0.0, 0.5 / g, 0.05 / g)?;
    // both frames on one step grid, so only rounding separates them
    let cfg = StepperConfig {
        max_dt: Some(1e-3),
        leakage_bound: None,
        positivity_checks: 0,
        ..Default::default()
    };
    let rho0 = DensityState::thermal(&space, dressed_ket(1), p.nbar_a(), p.nbar_b())?;
    let rotating = evolve(&rho0, &MasterEquation::for_model(&p, &space, HamiltonianModel::Rotating)?, &times, &cfg)?;
    let w = dressing_unitary(&space)?;
    let dressed = evolve(
        &rho0.conjugate_by(&w)?,
        &MasterEquation::for_model(&p, &space, HamiltonianModel::Dressed)?,
        &times,
        &cfg,
    )?;
    let worst = rotating
        .log_negativity()
        .iter()
        .zip(dressed.log_negativity())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let peak = rotating.log_negativity().into_iter().fold(0.0, f64::max);
    Ok(OracleResult {
        name: "frame_equivalence",
        deviation: worst,
        tolerance: 1e-8,
        detail: format!("max |dE_N|, cutoffs 5, kappa_q = 0.5/us, Gt <= 0.5, peak E_N = {peak:.4}"),
    })
}

/// Gaussian Lyapunov solution against the effective master equation with
/// damping and thermal noise.
fn lyapunov_vs_fock(opts: ValidationOptions) -> Result<OracleResult> {
    let base = desk_scale_params(Profile::CiFast).params;
    let g = base.effective_coupling()?;
    let p = SystemParams {
        gamma_a: 0.3 * g,
        gamma_b: 0.2 * g,
        kappa_q: 0.0,
        temperature: 0.1,
        ..base
    };
    let t_end = 0.5 / g;
    let dt = 0.1 / g;
    let space = HilbertSpace::new(12, 12)?;
    let rho0 = DensityState::thermal(&space, dressed_ket(1), p.nbar_a(), p.nbar_b())?;
    let cfg = StepperConfig {
        stepper: Stepper::Rk4 { steps_per_period: 20.0 },
        leakage_bound: None,
        positivity_checks: 0,
        ..Default::default()
    };
    let fock = evolve_params(&rho0, &p, &space, HamiltonianModel::Effective, t_end, dt, &cfg)?;
    let model = gaussian(&p, opts)?;
    let cov = lyapunov_evolve(&model, &CovarianceState::thermal(p.nbar_a(), p.nbar_b()), t_end, dt)?;
    let mut worst: f64 = 0.0;
    for (s, c) in fock.samples.iter().zip(&cov) {
        let fock_cov = s.covariance.as_ref().expect("samples carry covariances");
        let scale = c.sigma.abs().max().max(1.0);
        worst = worst.max((fock_cov.sigma - c.sigma).abs().max() / scale);
        worst = worst.max((s.log_negativity() - log_negativity(c)?.log_negativity).abs());
    }
    Ok(OracleResult {
        name: "lyapunov_vs_fock",
        deviation: worst,
        tolerance: 1e-3,
        detail: format!(
            "max |dsigma|/|sigma| and |dE_N|, cutoffs 12, gamma = (0.3, 0.2) G, 100 mK, Gt <= 0.5, leakage {:.1e}",
            fock.leakage
        ),
    })
}
