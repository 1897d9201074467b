//! Named scenarios, desk-scale profiles and parameter sweeps.

mod analysis;
mod table;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fock::{dressed_ket, DensityState, HilbertSpace};
use crate::gaussian::{log_negativity, lyapunov_evolve, CovarianceState, GaussianModel};
use crate::lindblad::{evolve_schedule, HamiltonianModel, MasterEquation, Schedule, StepperConfig};
use crate::model::{laboratory_parameters, resonant_detuning, units, SystemParams};

pub use analysis::{fit_decay_rate, max_entanglement, Peak};
pub use table::{Cell, ResultTable};

pub const SCENARIO_NAMES: [&str; 8] = ["fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b"];

pub const TIMESERIES_COLUMNS: [&str; 5] = ["t_us", "EN_full", "EN_eff", "trace_drift", "leakage"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    CiFast,
    PaperFaithful,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci_fast" => Ok(Profile::CiFast),
            "paper_faithful" => Ok(Profile::PaperFaithful),
            _ => Err(Error::Config(format!("unknown profile {s:?} (expected ci_fast or paper_faithful)"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::CiFast => "ci_fast",
            Profile::PaperFaithful => "paper_faithful",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Master equation with the full rotating-frame Hamiltonian.
    FockFull,
    /// Master equation with `G(ab + a†b†)`.
    FockEffective,
    /// Lyapunov equation of the effective model; no qubit.
    GaussianEffective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitState {
    Plus,
    Minus,
}

impl QubitState {
    pub fn sign(self) -> i8 {
        match self {
            QubitState::Plus => 1,
            QubitState::Minus => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialModes {
    Vacuum,
    /// Both modes thermal at the bath temperature.
    Thermal,
}

/// A sweepable parameter. `G` and `Gamma` set both modes at once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamPath {
    OmegaA,
    OmegaB,
    G,
    GA,
    GB,
    DriveAmplitude,
    DeltaD,
    Gamma,
    GammaA,
    GammaB,
    KappaQ,
    Temperature,
}

impl ParamPath {
    pub const ALL: [ParamPath; 12] = [
        ParamPath::OmegaA,
        ParamPath::OmegaB,
        ParamPath::G,
        ParamPath::GA,
        ParamPath::GB,
        ParamPath::DriveAmplitude,
        ParamPath::DeltaD,
        ParamPath::Gamma,
        ParamPath::GammaA,
        ParamPath::GammaB,
        ParamPath::KappaQ,
        ParamPath::Temperature,
    ];

    /// Parameter name without unit.
    pub fn stem(self) -> &'static str {
        match self {
            ParamPath::OmegaA => "omega_a",
            ParamPath::OmegaB => "omega_b",
            ParamPath::G => "g",
            ParamPath::GA => "g_a",
            ParamPath::GB => "g_b",
            ParamPath::DriveAmplitude => "omega_d",
            ParamPath::DeltaD => "delta_d",
            ParamPath::Gamma => "gamma",
            ParamPath::GammaA => "gamma_a",
            ParamPath::GammaB => "gamma_b",
            ParamPath::KappaQ => "kappa_q",
            ParamPath::Temperature => "temperature",
        }
    }

    /// CSV column name, always in internal units.
    pub fn column(self) -> String {
        match self {
            ParamPath::Temperature => "temperature_K".to_string(),
            p => format!("{}_rad_per_us", p.stem()),
        }
    }

    pub fn from_stem(stem: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.stem() == stem)
    }

    pub fn get(self, p: &SystemParams) -> f64 {
        match self {
            ParamPath::OmegaA => p.omega_a,
            ParamPath::OmegaB => p.omega_b,
            ParamPath::G | ParamPath::GA => p.g_a,
            ParamPath::GB => p.g_b,
            ParamPath::DriveAmplitude => p.drive_amplitude,
            ParamPath::DeltaD => p.delta_d,
            ParamPath::Gamma | ParamPath::GammaA => p.gamma_a,
            ParamPath::GammaB => p.gamma_b,
            ParamPath::KappaQ => p.kappa_q,
            ParamPath::Temperature => p.temperature,
        }
    }

    pub fn set(self, p: &mut SystemParams, v: f64) {
        match self {
            ParamPath::OmegaA => p.omega_a = v,
            ParamPath::OmegaB => p.omega_b = v,
            ParamPath::G => {
                p.g_a = v;
                p.g_b = v;
            }
            ParamPath::GA => p.g_a = v,
            ParamPath::GB => p.g_b = v,
            ParamPath::DriveAmplitude => p.drive_amplitude = v,
            ParamPath::DeltaD => p.delta_d = v,
            ParamPath::Gamma => {
                p.gamma_a = v;
                p.gamma_b = v;
            }
            ParamPath::GammaA => p.gamma_a = v,
            ParamPath::GammaB => p.gamma_b = v,
            ParamPath::KappaQ => p.kappa_q = v,
            ParamPath::Temperature => p.temperature = v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub path: ParamPath,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Peak E_N over the run and the time it occurs.
    MaxEntanglement,
    /// E_N at `t_end`.
    EntanglementAtEnd,
}

/// Parameters and numerics sized for a profile.
#[derive(Clone, Debug, PartialEq)]
pub struct DeskScale {
    pub params: SystemParams,
    pub cutoffs: (usize, usize),
    pub t_end: f64,
    pub dt_out: f64,
    pub leakage_bound: Option<f64>,
}

/// `ci_fast` keeps the device frequencies, losses and temperature but raises
/// the couplings to g = 0.1 δ at Ω_d = 0.3158 δ, so that 1/G is a couple of
/// microseconds. `paper_faithful` is the device itself over the first 25 µs.
pub fn desk_scale_params(profile: Profile) -> DeskScale {
    match profile {
        Profile::CiFast => {
            let base = laboratory_parameters();
            let delta = base.delta();
            let p = SystemParams {
                g_a: 0.1 * delta,
                g_b: 0.1 * delta,
                drive_amplitude: 0.3158 * delta,
                kappa_q: 0.0,
                ..base
            }
            .with_resonant_detuning(1)
            .expect("ci_fast is off the pole");
            let t_end = 1.0 / p.effective_coupling().expect("checked");
            DeskScale {
                params: p,
                cutoffs: (8, 8),
                t_end,
                dt_out: t_end / 40.0,
                // cutoff 8 cannot hold 1e-3 beyond Gt ~ 0.6
                leakage_bound: Some(0.1),
            }
        }
        Profile::PaperFaithful => DeskScale {
            params: laboratory_parameters(),
            cutoffs: (12, 12),
            t_end: 25.0,
            dt_out: 0.5,
            leakage_bound: Some(1e-3),
        },
    }
}

/// Finer output and cutoff 10 for the CI scenarios that include decay.
/// Lossless trajectories reach leakage ~1e-2 at cutoff 8 by Gt = 1, and
/// covariance-based E_N is already distorted there.
fn fine_grid(s: &mut Scenario) {
    s.dt_out = s.t_end / 60.0;
    s.cutoffs = Some((10, 10));
}

/// Factor mapping device qubit decay rates onto a profile so that κ_q/G is
/// preserved.
pub fn kappa_scale(profile: Profile) -> f64 {
    let g = |p: Profile| desk_scale_params(p).params.effective_coupling().expect("checked");
    g(profile) / g(Profile::PaperFaithful)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub profile: Option<Profile>,
    pub params: SystemParams,
    pub solver: Solver,
    /// Also run the Gaussian effective model for the `EN_eff` column.
    pub compare_effective: bool,
    pub cutoffs: Option<(usize, usize)>,
    pub t_end: f64,
    pub dt_out: f64,
    pub axes: Vec<SweepAxis>,
    pub interaction_off_time: Option<f64>,
    pub initial_qubit: QubitState,
    pub initial_modes: InitialModes,
    /// Recompute δ_d from the resonance condition at every grid point.
    pub resonant_detuning: bool,
    pub metric: Metric,
    pub stepper: StepperConfig,
}

impl Scenario {
    /// A scenario without axes on the profile's parameters.
    pub fn base(name: &str, profile: Profile, solver: Solver) -> Self {
        let d = desk_scale_params(profile);
        Scenario {
            name: name.to_string(),
            profile: Some(profile),
            params: d.params,
            solver,
            compare_effective: solver == Solver::FockFull,
            cutoffs: match solver {
                Solver::GaussianEffective => None,
                _ => Some(d.cutoffs),
            },
            t_end: d.t_end,
            dt_out: d.dt_out,
            axes: Vec::new(),
            interaction_off_time: None,
            initial_qubit: QubitState::Plus,
            initial_modes: InitialModes::Thermal,
            resonant_detuning: true,
            metric: Metric::MaxEntanglement,
            stepper: StepperConfig {
                leakage_bound: d.leakage_bound,
                ..StepperConfig::default()
            },
        }
    }

    /// Built-in scenario reproducing one figure panel.
    pub fn builtin(name: &str, profile: Profile) -> Result<Self> {
        let ci = profile == Profile::CiFast;
        let ks = kappa_scale(profile);
        let kappa = |khz: f64| units::khz(khz) * ks;
        let mut s = Scenario::base(name, profile, Solver::FockFull);
        let delta = s.params.delta();
        match name {
            "fig2a" => {
                if !ci {
                    s.axes.push(SweepAxis {
                        path: ParamPath::DriveAmplitude,
                        values: vec![15.0, 25.0],
                    });
                }
            }
            "fig2b" => {
                let star = resonant_detuning(&s.params, 1)?;
                s.resonant_detuning = false;
                s.compare_effective = false;
                s.metric = Metric::EntanglementAtEnd;
                s.axes.push(SweepAxis {
                    path: ParamPath::DeltaD,
                    values: (-10..=10).map(|k| f64::from(k) * star).collect(),
                });
                if !ci {
                    s.t_end = 100.0;
                    s.dt_out = 100.0;
                }
            }
            "fig3a" => {
                s.compare_effective = false;
                s.axes.push(SweepAxis {
                    path: ParamPath::KappaQ,
                    values: vec![0.0, kappa(10.0), kappa(30.0)],
                });
                if ci {
                    fine_grid(&mut s);
                }
            }
            "fig3b" => {
                s.compare_effective = false;
                s.axes.push(SweepAxis {
                    path: ParamPath::KappaQ,
                    values: [0.0, 10.0, 20.0, 30.0].map(kappa).to_vec(),
                });
                s.axes.push(SweepAxis {
                    path: ParamPath::Gamma,
                    values: [2.0, 4.0, 6.0, 8.0].map(units::khz).to_vec(),
                });
                if ci {
                    fine_grid(&mut s);
                }
            }
            "fig4a" => {
                s.compare_effective = false;
                s.params.kappa_q = kappa(10.0);
                let values = if ci {
                    vec![0.08 * delta, 0.09 * delta, 0.1 * delta]
                } else {
                    [200.0, 257.0, 300.0].map(units::khz).to_vec()
                };
                s.axes.push(SweepAxis {
                    path: ParamPath::G,
                    values,
                });
                if ci {
                    fine_grid(&mut s);
                }
            }
            "fig4b" => {
                s.compare_effective = false;
                s.params.kappa_q = kappa(10.0);
                let (g, w) = if ci {
                    (vec![0.08 * delta, 0.09 * delta, 0.1 * delta], vec![0.25 * delta, 0.3158 * delta])
                } else {
                    ([150.0, 200.0, 250.0, 300.0].map(units::khz).to_vec(), vec![10.0, 15.0, 20.0, 25.0, 30.0])
                };
                s.axes.push(SweepAxis {
                    path: ParamPath::G,
                    values: g,
                });
                s.axes.push(SweepAxis {
                    path: ParamPath::DriveAmplitude,
                    values: w,
                });
                if ci {
                    fine_grid(&mut s);
                }
            }
            "fig5a" => {
                s = Scenario::base(name, profile, Solver::GaussianEffective);
                s.axes.push(SweepAxis {
                    path: ParamPath::Gamma,
                    values: [1.0, 2.5, 4.0, 5.5, 7.0, 8.5, 10.0].map(units::khz).to_vec(),
                });
                s.axes.push(SweepAxis {
                    path: ParamPath::Temperature,
                    values: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35],
                });
                if !ci {
                    s.t_end = 100.0;
                    s.dt_out = 1.0;
                }
            }
            "fig5b" => {
                s.compare_effective = false;
                s.axes.push(SweepAxis {
                    path: ParamPath::Temperature,
                    values: vec![0.05, 0.15, 0.25, 0.35],
                });
                s.axes.push(SweepAxis {
                    path: ParamPath::KappaQ,
                    values: vec![0.0, kappa(10.0), kappa(30.0)],
                });
                if ci {
                    fine_grid(&mut s);
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "unknown scenario {name:?}; expected one of {}",
                    SCENARIO_NAMES.join(", ")
                )))
            }
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.dt_out > 0.0 && self.dt_out.is_finite()) {
            return bad(format!("dt_out must be positive, got {}", self.dt_out));
        }
        if self.axes.len() > 2 {
            return bad(format!("at most two sweep axes, got {}", self.axes.len()));
        }
        for (i, axis) in self.axes.iter().enumerate() {
            if axis.values.is_empty() || axis.values.iter().any(|v| !v.is_finite()) {
                return bad(format!("axis {} needs finite values", axis.path.column()));
            }
            if self.axes[..i].iter().any(|a| a.path == axis.path) {
                return bad(format!("axis {} given twice", axis.path.column()));
            }
        }
        match self.solver {
            Solver::FockFull | Solver::FockEffective => {
                let Some((ca, cb)) = self.cutoffs else {
                    return bad("Fock solvers need cutoffs".into());
                };
                HilbertSpace::new(ca, cb)?;
            }
            Solver::GaussianEffective => {
                if self.axes.iter().any(|a| a.path == ParamPath::DeltaD) {
                    return bad("the effective model does not depend on delta_d; sweep it with a Fock solver".into());
                }
            }
        }
        if self.solver == Solver::GaussianEffective || self.compare_effective {
            let kappa_nonzero = self.params.kappa_q != 0.0
                || self
                    .axes
                    .iter()
                    .any(|a| a.path == ParamPath::KappaQ && a.values.iter().any(|v| *v != 0.0));
            if self.solver == Solver::GaussianEffective && kappa_nonzero {
                return bad("the Gaussian solver has no qubit; kappa_q must be 0".into());
            }
        }
        if let Some(off) = self.interaction_off_time {
            if !(off > 0.0 && off < self.t_end) {
                return bad(format!("interaction_off_time {off} outside (0, t_end)"));
            }
        }
        for point in self.grid() {
            self.params_at(&point)?;
        }
        Ok(())
    }

    /// Cartesian product of the axis values, lexicographically sorted.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.axes {
            let mut values = axis.values.clone();
            values.sort_by(f64::total_cmp);
            grid = grid
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        grid
    }

    /// Resolved parameters at one grid point.
    pub fn params_at(&self, point: &[f64]) -> Result<SystemParams> {
        let mut p = self.params;
        for (axis, v) in self.axes.iter().zip(point) {
            axis.path.set(&mut p, *v);
        }
        p.omega_q = (p.omega_a + p.omega_b) / 2.0;
        p.validate()?;
        if self.resonant_detuning {
            p.delta_d = resonant_detuning(&p, self.initial_qubit.sign())?;
        }
        p.effective_coupling()?;
        Ok(p)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn axis_columns(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.path.column()).collect()
    }
}

/// Solver summaries for one trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Monitors {
    pub trace_drift: Option<f64>,
    pub hermiticity_drift: Option<f64>,
    pub leakage: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub steps: Option<usize>,
    /// Samples where the discriminant of the negativity formula was clamped.
    pub clamped_samples: usize,
}

/// E_N on the output grid for one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub en_full: Vec<f64>,
    pub en_eff: Vec<f64>,
    pub trace_drift: Vec<f64>,
    pub leakage: Vec<f64>,
    pub monitors: Monitors,
}

impl Trajectory {
    /// The column the scenario's solver produces.
    pub fn primary(&self, solver: Solver) -> &[f64] {
        match solver {
            Solver::FockFull => &self.en_full,
            _ => &self.en_eff,
        }
    }
}

pub fn run_point(s: &Scenario, params: &SystemParams) -> Result<Trajectory> {
    let times = crate::output_grid(0.0, s.t_end, s.dt_out)?;
    let n = times.len();
    let mut traj = Trajectory {
        times: times.clone(),
        en_full: vec![f64::NAN; n],
        en_eff: vec![f64::NAN; n],
        trace_drift: vec![f64::NAN; n],
        leakage: vec![f64::NAN; n],
        monitors: Monitors::default(),
    };
    match s.solver {
        Solver::FockFull | Solver::FockEffective => {
            let (ca, cb) = s.cutoffs.ok_or_else(|| Error::invalid("Fock solvers need cutoffs"))?;
            let space = HilbertSpace::new(ca, cb)?;
            let model = match s.solver {
                Solver::FockFull => HamiltonianModel::Rotating,
                _ => HamiltonianModel::Effective,
            };
            let qubit = dressed_ket(s.initial_qubit.sign());
            let rho0 = match s.initial_modes {
                InitialModes::Vacuum => DensityState::product(&space, qubit, 0, 0)?,
                InitialModes::Thermal => DensityState::thermal(&space, qubit, params.nbar_a(), params.nbar_b())?,
            };
            let on = MasterEquation::for_model(params, &space, model)?;
            let schedule = match s.interaction_off_time {
                Some(off) => Schedule::switched(on, off, MasterEquation::decoupled(params, &space, model)?)?,
                None => Schedule::single(on),
            };
            let report = evolve_schedule(&rho0, &schedule, &times, &s.stepper)?;
            let mut en = Vec::with_capacity(n);
            for sample in &report.samples {
                let e = sample.entanglement.ok_or_else(|| {
                    Error::UnphysicalCovariance(format!("no valid covariance at t = {}", sample.time))
                })?;
                traj.monitors.clamped_samples += usize::from(e.clamped);
                en.push(e.log_negativity);
            }
            traj.trace_drift = report.samples.iter().map(|x| x.trace_deviation).collect();
            traj.leakage = report.samples.iter().map(|x| x.leakage).collect();
            traj.monitors.trace_drift = Some(report.trace_drift);
            traj.monitors.hermiticity_drift = Some(report.hermiticity_drift);
            traj.monitors.leakage = Some(report.leakage);
            traj.monitors.min_eigenvalue = report.min_eigenvalue.is_finite().then_some(report.min_eigenvalue);
            traj.monitors.steps = Some(report.steps);
            match s.solver {
                Solver::FockFull => traj.en_full = en,
                _ => traj.en_eff = en,
            }
            if s.solver == Solver::FockFull && s.compare_effective {
                traj.en_eff = gaussian_trajectory(s, params)?.0;
            }
        }
        Solver::GaussianEffective => {
            let (en, clamped) = gaussian_trajectory(s, params)?;
            traj.en_eff = en;
            traj.monitors.clamped_samples = clamped;
        }
    }
    Ok(traj)
}

fn gaussian_trajectory(s: &Scenario, params: &SystemParams) -> Result<(Vec<f64>, usize)> {
    let mut model = GaussianModel::from_params(params)?;
    model.coupling_off_time = s.interaction_off_time;
    let initial = match s.initial_modes {
        InitialModes::Vacuum => CovarianceState::vacuum(),
        InitialModes::Thermal => CovarianceState::thermal(params.nbar_a(), params.nbar_b()),
    };
    let states = lyapunov_evolve(&model, &initial, s.t_end, s.dt_out)?;
    let mut clamped = 0;
    let en = states
        .iter()
        .map(|c| {
            let e = log_negativity(c)?;
            clamped += usize::from(e.clamped);
            Ok(e.log_negativity)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((en, clamped))
}

fn base_metadata(s: &Scenario, kind: &str) -> Result<Map<String, Value>> {
    let mut m = Map::new();
    m.insert("scenario".into(), json!(s.name));
    m.insert("kind".into(), json!(kind));
    m.insert("profile".into(), json!(s.profile.map(|p| p.to_string())));
    m.insert("solver".into(), serde_json::to_value(s.solver).expect("enum"));
    m.insert("config_hash".into(), json!(s.config_hash()));
    let p = s.params_at(&s.grid()[0])?;
    m.insert(
        "derived".into(),
        json!({
            "delta_rad_per_us": p.delta(),
            "G_rad_per_us": p.effective_coupling()?,
            "delta_d_star_rad_per_us": resonant_detuning(&p, s.initial_qubit.sign())?,
            "nbar_a": p.nbar_a(),
            "nbar_b": p.nbar_b(),
            "nbar_q": p.nbar_q(),
            "advisories": p.advisories(),
        }),
    );
    Ok(m)
}

/// Time series: one block of rows per grid point (axis columns first, then
/// `t_us, EN_full, EN_eff, trace_drift, leakage`). Any failure aborts.
pub fn run_scenario(s: &Scenario) -> Result<ResultTable> {
    s.validate()?;
    let grid = s.grid();
    let results: Vec<Result<Trajectory>> = grid
        .par_iter()
        .map(|point| run_point(s, &s.params_at(point)?))
        .collect();
    let mut columns = s.axis_columns();
    columns.extend(TIMESERIES_COLUMNS.iter().map(|c| c.to_string()));
    let mut table = ResultTable::new(columns);
    table.metadata = base_metadata(s, "timeseries")?;
    let mut monitors = Vec::new();
    for (point, result) in grid.iter().zip(results) {
        let traj = result?;
        for k in 0..traj.times.len() {
            let mut row: Vec<Cell> = point.iter().map(|v| Cell::Num(*v)).collect();
            row.extend(
                [traj.times[k], traj.en_full[k], traj.en_eff[k], traj.trace_drift[k], traj.leakage[k]].map(Cell::Num),
            );
            table.push_row(row)?;
        }
        let peak = max_entanglement(&traj.times, traj.primary(s.solver))?;
        monitors.push(json!({ "point": point, "monitors": traj.monitors, "peak": peak }));
    }
    table.metadata.insert("points".into(), Value::Array(monitors));
    Ok(table)
}

/// One row per grid point: axis values, then `EN_max, t_star_us` (or
/// `EN_at_t`), then `error_tag`. Failed points are kept as NaN.
pub fn run_sweep(s: &Scenario) -> Result<ResultTable> {
    if s.axes.is_empty() {
        return Err(Error::invalid("a sweep needs one or two axes"));
    }
    s.validate()?;
    let grid = s.grid();
    let results: Vec<Result<Trajectory>> = grid
        .par_iter()
        .map(|point| run_point(s, &s.params_at(point)?))
        .collect();
    let mut columns = s.axis_columns();
    match s.metric {
        Metric::MaxEntanglement => columns.extend(["EN_max".to_string(), "t_star_us".to_string()]),
        Metric::EntanglementAtEnd => columns.push("EN_at_t".to_string()),
    }
    columns.push("error_tag".to_string());
    let mut table = ResultTable::new(columns);
    table.metadata = base_metadata(s, "grid")?;
    table
        .metadata
        .insert("refinement".into(), json!("3-point parabolic through the grid argmax; raw argmax under points"));
    let mut points = Vec::new();
    for (point, result) in grid.iter().zip(results) {
        let mut row: Vec<Cell> = point.iter().map(|v| Cell::Num(*v)).collect();
        match result.and_then(|traj| {
            let peak = max_entanglement(&traj.times, traj.primary(s.solver))?;
            Ok((traj, peak))
        }) {
            Ok((traj, peak)) => {
                match s.metric {
                    Metric::MaxEntanglement => row.extend([Cell::Num(peak.value), Cell::Num(peak.t_star)]),
                    Metric::EntanglementAtEnd => {
                        row.push(Cell::Num(*traj.primary(s.solver).last().expect("non-empty grid")))
                    }
                }
                row.push(Cell::Text(String::new()));
                points.push(json!({ "point": point, "monitors": traj.monitors, "peak": peak }));
            }
            Err(e) => {
                log::warn!("sweep point {point:?} failed: {e}");
                let width = if s.metric == Metric::MaxEntanglement { 2 } else { 1 };
                row.extend(std::iter::repeat(Cell::Num(f64::NAN)).take(width));
                row.push(Cell::Text(e.tag().to_string()));
                points.push(json!({ "point": point, "error": e.to_string() }));
            }
        }
        table.push_row(row)?;
    }
    table.metadata.insert("points".into(), Value::Array(points));
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_fast_ratios() {
        let d = desk_scale_params(Profile::CiFast);
        let p = d.params;
        let delta = p.delta();
        let g = p.effective_coupling().unwrap();
        assert!((delta / g - 190.336).abs() < 1e-3);
        assert!((p.g_a / delta - 0.1).abs() < 1e-15);
        assert!(p.drive_amplitude < delta / 2.0);
        assert!((p.nbar_a() - 3.4055e-3).abs() < 1e-6);
        assert_eq!(d.cutoffs, (8, 8));
    }

    #[test]
    fn paper_faithful_ratio() {
        let d = desk_scale_params(Profile::PaperFaithful);
        let p = d.params;
        assert!((p.delta() / p.effective_coupling().unwrap() - 4575.6).abs() < 0.1);
        assert!(p.drive_amplitude < p.delta() / 2.0);
        assert!(d.cutoffs.0 >= 12 && d.cutoffs.1 >= 12);
    }

    #[test]
    fn kappa_scaling_preserves_ratio() {
        let s = kappa_scale(Profile::CiFast);
        assert!((s - 0.415939 / 0.0173022).abs() < 1e-3);
        assert_eq!(kappa_scale(Profile::PaperFaithful), 1.0);
    }

    #[test]
    fn builtins_validate() {
        for profile in [Profile::CiFast, Profile::PaperFaithful] {
            for name in SCENARIO_NAMES {
                let s = Scenario::builtin(name, profile).unwrap();
                s.validate().unwrap_or_else(|e| panic!("{name}/{profile}: {e}"));
            }
        }
        assert!(matches!(Scenario::builtin("fig9", Profile::CiFast), Err(Error::Config(_))));
    }

    #[test]
    fn grid_is_lexicographic() {
        let mut s = Scenario::base("custom", Profile::CiFast, Solver::GaussianEffective);
        s.axes = vec![
            SweepAxis {
                path: ParamPath::Temperature,
                values: vec![0.2, 0.1],
            },
            SweepAxis {
                path: ParamPath::Gamma,
                values: vec![3.0, 1.0, 2.0],
            },
        ];
        let g = s.grid();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![0.1, 1.0]);
        assert_eq!(g[2], vec![0.1, 3.0]);
        assert_eq!(g[3], vec![0.2, 1.0]);
    }

    #[test]
    fn gaussian_rejects_qubit_decay_and_detuning_axes() {
        let mut s = Scenario::base("custom", Profile::CiFast, Solver::GaussianEffective);
        s.params.kappa_q = 0.1;
        assert!(s.validate().is_err());
        s.params.kappa_q = 0.0;
        s.axes.push(SweepAxis {
            path: ParamPath::DeltaD,
            values: vec![0.0],
        });
        assert!(s.validate().is_err());
    }

    #[test]
    fn fock_requires_cutoffs() {
        let mut s = Scenario::base("custom", Profile::CiFast, Solver::FockFull);
        s.cutoffs = None;
        assert!(s.validate().is_err());
    }

    #[test]
    fn resonant_detuning_tracks_axes() {
        let mut s = Scenario::base("custom", Profile::CiFast, Solver::FockFull);
        s.axes.push(SweepAxis {
            path: ParamPath::G,
            values: vec![5.0],
        });
        let p = s.params_at(&[5.0]).unwrap();
        assert!((p.delta_d - resonant_detuning(&p, 1).unwrap()).abs() < 1e-15);
        assert!((p.delta_d - p.effective_coupling().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = Scenario::builtin("fig2a", Profile::CiFast).unwrap();
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.t_end *= 1.0 + 1e-15;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn lossless_effective_column_is_two_g_t() {
        let mut s = Scenario::base("custom", Profile::CiFast, Solver::GaussianEffective);
        s.params.gamma_a = 0.0;
        s.params.gamma_b = 0.0;
        s.initial_modes = InitialModes::Vacuum;
        let t = run_scenario(&s).unwrap();
        let g = s.params.effective_coupling().unwrap();
        for (time, en) in t.column("t_us").unwrap().iter().zip(t.column("EN_eff").unwrap()) {
            assert!((en - 2.0 * g * time).abs() <= 1e-3 * 2.0 * g * time);
        }
        assert!(t.column("EN_full").unwrap().iter().all(|x| x.is_nan()));
    }

    #[test]
    fn one_point_sweep_matches_scenario() {
        let mut s = Scenario::base("custom", Profile::CiFast, Solver::GaussianEffective);
        s.axes.push(SweepAxis {
            path: ParamPath::Temperature,
            values: vec![0.1],
        });
        let sweep = run_sweep(&s).unwrap();
        let series = run_scenario(&s).unwrap();
        let peak = series.max_entanglement("EN_eff").unwrap();
        assert_eq!(sweep.rows.len(), 1);
        assert_eq!(sweep.column("EN_max").unwrap()[0], peak.value);
        assert_eq!(sweep.column("t_star_us").unwrap()[0], peak.t_star);
    }

    #[test]
    fn failed_points_become_nan_with_tag() {
        let mut s = Scenario::base("custom", Profile::CiFast, Solver::FockEffective);
        s.cutoffs = Some((3, 3));
        s.stepper.leakage_bound = Some(1e-3);
        s.axes.push(SweepAxis {
            path: ParamPath::Temperature,
            values: vec![0.0, 0.05],
        });
        let t = run_sweep(&s).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.column("EN_max").unwrap().iter().all(|x| x.is_nan()));
        assert!(t.text_column("error_tag").unwrap().iter().all(|x| x == "truncation-failure"));
    }
}
