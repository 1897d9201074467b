//! Lossless two-mode squeezing at laboratory parameters: E_N(t) = 2Gt.
//!
//! Integrates the Gaussian Lyapunov equation from vacuum with all losses
//! off and prints the log-negativity next to the closed form.

use cqad::{log_negativity, lyapunov_evolve, laboratory_parameters, CovarianceState, GaussianModel, SystemParams};

fn main() -> cqad::Result<()> {
    let p = SystemParams {
        gamma_a: 0.0,
        gamma_b: 0.0,
        kappa_q: 0.0,
        ..laboratory_parameters()
    };
    let model = GaussianModel::from_params(&p)?;
    println!("G = {:.8} rad/us", model.coupling);
    println!("{:>8} {:>10} {:>10}", "t_us", "E_N", "2Gt");
    for s in lyapunov_evolve(&model, &CovarianceState::vacuum(), 100.0, 10.0)? {
        let en = log_negativity(&s)?.log_negativity;
        println!("{:>8.1} {:>10.5} {:>10.5}", s.time, en, 2.0 * model.coupling * s.time);
    }
    Ok(())
}
