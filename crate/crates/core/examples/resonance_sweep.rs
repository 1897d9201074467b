//! E_N at t = 1/G as the drive detuning moves across the resonance.
//!
//! A coarse version of the `fig2b` sweep: nine points instead of 21, so it
//! finishes in about 20 s on one core.

use cqad::experiments::{run_sweep, Profile, Scenario};

fn main() -> cqad::Result<()> {
    let mut s = Scenario::builtin("fig2b", Profile::CiFast)?;
    let star = s.params_at(&[])?.effective_coupling()?;
    s.axes[0].values = (-4..=4).map(|k| k as f64 * star).collect();
    let table = run_sweep(&s)?;
    let dd = table.column("delta_d_rad_per_us").unwrap();
    let en = table.column("EN_at_t").unwrap();
    println!("resonant detuning = {star:.4} rad/us");
    for (d, e) in dd.iter().zip(&en) {
        println!("{:>6.2} x  {:>8.4}  {}", d / star, e, "#".repeat((e * 40.0) as usize));
    }
    Ok(())
}
