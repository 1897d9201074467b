//! Steady-state entanglement against temperature and phonon loss.
//!
//! Gaussian model only, so the whole `fig5a` grid runs in well under a
//! second. Also locates the temperature where entanglement ends for the
//! default loss rates.

use cqad::experiments::{run_sweep, ParamPath, Profile, Scenario, Solver};

fn main() -> cqad::Result<()> {
    let s = Scenario::builtin("fig5a", Profile::PaperFaithful)?;
    print!("{}", run_sweep(&s)?.to_csv());

    let mut base = Scenario::base("threshold", Profile::PaperFaithful, Solver::GaussianEffective);
    base.t_end = 400.0;
    base.dt_out = 5.0;
    let entangled = |temp: f64| -> cqad::Result<bool> {
        let mut p = base.params;
        ParamPath::Temperature.set(&mut p, temp);
        let traj = cqad::experiments::run_point(&base, &p)?;
        Ok(traj.en_eff.iter().any(|e| *e > 0.0))
    };
    let (mut lo, mut hi) = (0.01, 1.0);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    println!("entanglement ends near T = {:.0} mK", 1e3 * lo);
    Ok(())
}
