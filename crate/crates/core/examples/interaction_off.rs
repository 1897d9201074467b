//! Switch the coupling and drive off mid-run and watch the modes relax.
//!
//! After the switch only phonon loss and thermal noise act, and the Fock and
//! Gaussian solvers give the same decay of E_N.

use cqad::experiments::{fit_decay_rate, run_point, Profile, Scenario};

fn main() -> cqad::Result<()> {
    let mut s = Scenario::builtin("fig2a", Profile::CiFast)?;
    let p = s.params_at(&[])?;
    let g = p.effective_coupling()?;
    let gamma = 0.5 * (p.gamma_a + p.gamma_b);
    let t_off = 0.5 / g;
    s.interaction_off_time = Some(t_off);
    s.t_end = t_off + 20.0 / gamma;
    s.dt_out = 0.25 / gamma;
    let traj = run_point(&s, &p)?;
    let after: Vec<usize> = (0..traj.times.len()).filter(|&i| traj.times[i] >= t_off).collect();
    let pick = |v: &[f64]| after.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let t = pick(&traj.times);
    for (i, ti) in t.iter().enumerate().take(24).step_by(2) {
        println!("t = {ti:>7.1} us: fock {:.4} gaussian {:.4}", traj.en_full[after[i]], traj.en_eff[after[i]]);
    }
    println!(
        "decay rate: fock {:.4}/us, gaussian {:.4}/us, mean phonon loss {gamma:.4}/us",
        fit_decay_rate(&t, &pick(&traj.en_full))?,
        fit_decay_rate(&t, &pick(&traj.en_eff))?
    );
    Ok(())
}
