//! The same open dynamics in the bare and the dressed qubit basis.
//!
//! Both frames are integrated on a common step, so the two E_N curves
//! agree to rounding.

use cqad::experiments::{desk_scale_params, Profile};
use cqad::fock::{dressed_ket, DensityState, HilbertSpace};
use cqad::lindblad::{evolve, HamiltonianModel, MasterEquation, StepperConfig};
use cqad::model::dressing_unitary;
use cqad::{output_grid, SystemParams};

fn main() -> cqad::Result<()> {
    let d = desk_scale_params(Profile::CiFast);
    let p = SystemParams { kappa_q: 1.5, ..d.params };
    let space = HilbertSpace::new(6, 6)?;
    let g = p.effective_coupling()?;
    let times = output_grid(0.0, 1.0 / g, 0.1 / g)?;
    let cfg = StepperConfig {
        max_dt: Some(1.5e-3),
        leakage_bound: None,
        ..Default::default()
    };
    let rho0 = DensityState::thermal(&space, dressed_ket(1), p.nbar_a(), p.nbar_b())?;
    let bare = evolve(&rho0, &MasterEquation::for_model(&p, &space, HamiltonianModel::Rotating)?, &times, &cfg)?;
    let w = dressing_unitary(&space)?;
    let dressed = evolve(
        &rho0.conjugate_by(&w)?,
        &MasterEquation::for_model(&p, &space, HamiltonianModel::Dressed)?,
        &times,
        &cfg,
    )?;
    for ((t, a), b) in times.iter().zip(bare.log_negativity()).zip(dressed.log_negativity()) {
        println!("Gt = {:.1}: bare {a:.6} dressed {b:.6} |diff| {:.1e}", g * t, (a - b).abs());
    }
    Ok(())
}
