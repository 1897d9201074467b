//! How qubit relaxation destroys the squeezing.
//!
//! Runs `fig3a` (three qubit decay rates) and prints the peak and final
//! E_N of each trajectory. Pass `--gamma` for the `fig3b` grid instead,
//! which also varies the phonon loss; it takes several minutes.

use cqad::experiments::{max_entanglement, run_point, run_sweep, Profile, Scenario};

fn main() -> cqad::Result<()> {
    if std::env::args().any(|a| a == "--gamma") {
        let s = Scenario::builtin("fig3b", Profile::CiFast)?;
        print!("{}", run_sweep(&s)?.to_csv());
        return Ok(());
    }
    let s = Scenario::builtin("fig3a", Profile::CiFast)?;
    for point in s.grid() {
        let p = s.params_at(&point)?;
        let traj = run_point(&s, &p)?;
        let peak = max_entanglement(&traj.times, &traj.en_full)?;
        println!(
            "kappa_q = {:>5.2}/us: max E_N {:.3} at t = {:.2} us, final {:.3}",
            p.kappa_q,
            peak.value,
            peak.t_star,
            traj.en_full.last().unwrap()
        );
    }
    Ok(())
}
