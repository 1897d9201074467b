//! JSON run configs and manifests.
//!
//! Every physical quantity in a config carries its unit in the key
//! (`g_kHz`, `omega_a_GHz`, `omega_d_rad_per_us`, `temperature_mK`, ...).
//! Frequencies given in GHz/MHz/kHz are cyclic and are multiplied by 2π;
//! `_rad_per_us` values are taken as is.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::{
    InitialModes, Metric, ParamPath, Profile, QubitState, ResultTable, Scenario, Solver, SweepAxis,
};
use crate::lindblad::Stepper;
use crate::model::units;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Built-in scenario to start from; `custom` (the default) starts from
    /// the bare profile.
    pub scenario: Option<String>,
    /// Fully resolved scenario in internal units, as written to manifests.
    /// Excludes every other physics key.
    pub scenario_body: Option<Scenario>,
    /// Output file stem; defaults to the scenario name.
    pub name: Option<String>,
    pub profile: Option<Profile>,
    pub solver: Option<Solver>,
    pub compare_effective: Option<bool>,
    pub cutoffs: Option<[usize; 2]>,
    pub t_end_us: Option<f64>,
    pub dt_out_us: Option<f64>,
    pub interaction_off_time_us: Option<f64>,
    pub initial_qubit: Option<QubitState>,
    pub initial_modes: Option<InitialModes>,
    pub resonant_detuning: Option<bool>,
    pub metric: Option<Metric>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Replaces the scenario's axes.
    pub axes: Option<Vec<AxisConfig>>,
    pub stepper: Option<StepperOverrides>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    /// Unit-suffixed parameter key, e.g. `temperature_mK`.
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperOverrides {
    pub steps_per_period: Option<f64>,
    /// Switch to Dormand–Prince with these tolerances.
    pub adaptive: Option<AdaptiveTolerances>,
    pub max_dt_us: Option<f64>,
    pub trace_tolerance: Option<f64>,
    /// `null` disables the leakage check.
    #[serde(default, deserialize_with = "explicit_option")]
    pub leakage_bound: Option<Option<f64>>,
    pub positivity_checks: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveTolerances {
    pub rtol: f64,
    pub atol: f64,
}

fn explicit_option<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Option<f64>>, D::Error> {
    Option::<f64>::deserialize(d).map(Some)
}

/// A parsed config together with its source text, for line-level messages.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    source: String,
}

impl LoadedConfig {
    pub fn parse(source: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(source)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        Ok(Self {
            config,
            source: source.to_string(),
        })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    fn error_at(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        let needle = format!("\"{key}\"");
        match self.source.lines().position(|l| l.contains(&needle)) {
            Some(i) => Error::Config(format!("line {}: {key}: {msg}", i + 1)),
            None => Error::Config(format!("{key}: {msg}")),
        }
    }

    /// Builds the scenario. Command-line values for `scenario` and `profile`
    /// take precedence over the file.
    pub fn resolve(&self, scenario: Option<&str>, profile: Option<Profile>) -> Result<Scenario> {
        let c = &self.config;
        if let Some(body) = &c.scenario_body {
            let others = c.scenario.is_some()
                || c.profile.is_some()
                || c.solver.is_some()
                || c.cutoffs.is_some()
                || c.t_end_us.is_some()
                || c.dt_out_us.is_some()
                || !c.params.is_empty()
                || c.axes.is_some()
                || c.stepper.is_some();
            if others {
                return Err(self.error_at("scenario_body", "cannot be combined with other physics keys"));
            }
            let mut s = body.clone();
            if let Some(n) = &c.name {
                s.name.clone_from(n);
            }
            s.validate().map_err(|e| self.error_at("scenario_body", e))?;
            return Ok(s);
        }
        let profile = profile.or(c.profile).unwrap_or(Profile::CiFast);
        let name = scenario.or(c.scenario.as_deref()).unwrap_or("custom");
        let mut s = if name == "custom" {
            Scenario::base("custom", profile, c.solver.unwrap_or(Solver::FockFull))
        } else {
            Scenario::builtin(name, profile)?
        };
        if let Some(solver) = c.solver {
            s.solver = solver;
            if solver == Solver::GaussianEffective {
                s.cutoffs = None;
                s.compare_effective = false;
            }
        }
        if let Some(v) = c.compare_effective {
            s.compare_effective = v;
        }
        if let Some([a, b]) = c.cutoffs {
            s.cutoffs = Some((a, b));
        }
        if let Some(t) = c.t_end_us {
            s.t_end = t;
        }
        if let Some(t) = c.dt_out_us {
            s.dt_out = t;
        }
        if c.interaction_off_time_us.is_some() {
            s.interaction_off_time = c.interaction_off_time_us;
        }
        if let Some(q) = c.initial_qubit {
            s.initial_qubit = q;
        }
        if let Some(m) = c.initial_modes {
            s.initial_modes = m;
        }
        if let Some(m) = c.metric {
            s.metric = m;
        }
        for (key, value) in &c.params {
            let (path, v) = parse_quantity(key, *value).map_err(|m| self.error_at(key, m))?;
            path.set(&mut s.params, v);
            if path == ParamPath::DeltaD {
                s.resonant_detuning = false;
            }
        }
        s.params.omega_q = (s.params.omega_a + s.params.omega_b) / 2.0;
        if let Some(r) = c.resonant_detuning {
            s.resonant_detuning = r;
        }
        if let Some(axes) = &c.axes {
            s.axes = axes
                .iter()
                .map(|a| {
                    let (path, _) = parse_quantity(&a.param, 0.0).map_err(|m| self.error_at("param", m))?;
                    let values = a
                        .values
                        .iter()
                        .map(|v| parse_quantity(&a.param, *v).map(|x| x.1))
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|m| self.error_at("values", m))?;
                    Ok(SweepAxis { path, values })
                })
                .collect::<Result<_>>()?;
        }
        if let Some(st) = &c.stepper {
            if let Some(spp) = st.steps_per_period {
                s.stepper.stepper = Stepper::Rk4 { steps_per_period: spp };
            }
            if let Some(t) = st.adaptive {
                if st.steps_per_period.is_some() {
                    return Err(self.error_at("adaptive", "conflicts with steps_per_period"));
                }
                s.stepper.stepper = Stepper::DormandPrince {
                    rtol: t.rtol,
                    atol: t.atol,
                };
            }
            if st.max_dt_us.is_some() {
                s.stepper.max_dt = st.max_dt_us;
            }
            if let Some(t) = st.trace_tolerance {
                s.stepper.trace_tolerance = t;
            }
            if let Some(b) = st.leakage_bound {
                s.stepper.leakage_bound = b;
            }
            if let Some(n) = st.positivity_checks {
                s.stepper.positivity_checks = n;
            }
        }
        if let Some(n) = &c.name {
            s.name.clone_from(n);
        }
        if s.name.is_empty() || s.name.contains(['/', '\\']) {
            return Err(self.error_at("name", "must be a plain file stem"));
        }
        s.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(s)
    }
}

/// Splits a unit-suffixed key and converts its value to rad/µs or kelvin.
pub fn parse_quantity(key: &str, value: f64) -> std::result::Result<(ParamPath, f64), String> {
    if !value.is_finite() {
        return Err(format!("value {value} is not finite"));
    }
    if let Some(stem) = key.strip_suffix("_mK") {
        return match stem {
            "temperature" => Ok((ParamPath::Temperature, value / 1000.0)),
            _ => Err(format!("unit mK only applies to temperature, not {stem}")),
        };
    }
    if let Some(stem) = key.strip_suffix("_K") {
        return match stem {
            "temperature" => Ok((ParamPath::Temperature, value)),
            _ => Err(format!("unit K only applies to temperature, not {stem}")),
        };
    }
    let conversions: [(&str, fn(f64) -> f64); 4] = [
        ("_rad_per_us", |x| x),
        ("_GHz", units::ghz),
        ("_MHz", units::mhz),
        ("_kHz", units::khz),
    ];
    for (suffix, convert) in conversions {
        if let Some(stem) = key.strip_suffix(suffix) {
            let path = ParamPath::from_stem(stem).ok_or_else(|| unknown_key(key))?;
            if path == ParamPath::Temperature {
                return Err("temperature takes _mK or _K".into());
            }
            if path == ParamPath::DriveAmplitude && suffix != "_rad_per_us" {
                return Err("the drive amplitude is only accepted as omega_d_rad_per_us".into());
            }
            return Ok((path, convert(value)));
        }
    }
    Err(unknown_key(key))
}

fn unknown_key(key: &str) -> String {
    if key.starts_with("omega_q") {
        return "omega_q is derived as the midpoint of omega_a and omega_b".into();
    }
    let stems: Vec<&str> = ParamPath::ALL.iter().map(|p| p.stem()).collect();
    format!(
        "unknown parameter key; expected <name>_<unit> with name in {{{}}} and unit in {{GHz, MHz, kHz, rad_per_us}} (temperature: mK or K)",
        stems.join(", ")
    )
}

/// Everything needed to reproduce an output file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub crate_version: String,
    /// `simulate` or `sweep`.
    pub command: String,
    pub csv: String,
    /// Resolved scenario in rad/µs, µs and K.
    pub scenario: Scenario,
    pub config_hash: String,
    /// δ, G, δ_d*, n̄ at the first grid point.
    pub derived: Value,
    /// Per-point peaks and solver monitors.
    pub points: Value,
    pub refinement: Option<String>,
    pub wall_time_s: f64,
    pub threads: usize,
}

impl Manifest {
    pub fn new(command: &str, csv: &str, scenario: &Scenario, table: &ResultTable, wall_time_s: f64, threads: usize) -> Self {
        let get = |k: &str| table.metadata.get(k).cloned().unwrap_or(Value::Null);
        Manifest {
            manifest_version: MANIFEST_VERSION,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            csv: csv.to_string(),
            scenario: scenario.clone(),
            config_hash: scenario.config_hash(),
            derived: get("derived"),
            points: get("points"),
            refinement: table.metadata.get("refinement").and_then(Value::as_str).map(str::to_string),
            wall_time_s,
            threads,
        }
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| {
            Error::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
        })?;
        if m.manifest_version != MANIFEST_VERSION {
            return Err(Error::Config(format!("unsupported manifest version {}", m.manifest_version)));
        }
        m.scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
