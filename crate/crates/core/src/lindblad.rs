//! Time-dependent Lindblad master equation on the truncated Fock space.
//!
//! The Liouvillian is never materialized: each evaluation does one sparse ×
//! dense product with the non-Hermitian operator `H(t) − (i/2) Σ r_k o_k† o_k`
//! plus one gather per jump channel. States handed to the generator are
//! assumed Hermitian; the output is Hermitian by construction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{spmm_acc, spmm_adj_right_acc, CsrRef, DensityState, Dense, FullOperators, HilbertSpace, OperatorMatrix, SpaceTag, C64, I, ONE, ZERO};
use crate::gaussian::{extract_covariance, log_negativity, CovarianceState, EntanglementValue};
use crate::model::{build_effective_hamiltonian, dressed_hamiltonian, dressing_unitary, rotating_hamiltonian, Hamiltonian, SystemParams};

/// One Lindblad channel `rate · (oρo† − ½{o†o, ρ})`.
#[derive(Clone, Debug)]
pub struct DissipatorSpec {
    pub operator: OperatorMatrix,
    pub rate: f64,
}

impl DissipatorSpec {
    pub fn new(operator: OperatorMatrix, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::invalid(format!("dissipator rate must be >= 0, got {rate}")));
        }
        Ok(Self { operator, rate })
    }
}

/// The six thermal channels: qubit relaxation/excitation and the
/// damping/heating of each mode.
pub fn thermal_dissipators(params: &SystemParams, space: &HilbertSpace) -> Result<Vec<DissipatorSpec>> {
    params.validate()?;
    let o = FullOperators::new(space)?;
    let (nq, na, nb) = (params.nbar_q(), params.nbar_a(), params.nbar_b());
    vec![
        DissipatorSpec::new(o.sigma_ge.clone(), params.kappa_q * (nq + 1.0)),
        DissipatorSpec::new(o.sigma_eg.clone(), params.kappa_q * nq),
        DissipatorSpec::new(o.a.clone(), params.gamma_a * (na + 1.0)),
        DissipatorSpec::new(o.a.adjoint(), params.gamma_a * na),
        DissipatorSpec::new(o.b.clone(), params.gamma_b * (nb + 1.0)),
        DissipatorSpec::new(o.b.adjoint(), params.gamma_b * nb),
    ]
    .into_iter()
    .collect()
}

/// `rate · (oρo† − ½ o†oρ − ½ ρo†o)` for any square `ρ`.
pub fn dissipator_apply(spec: &DissipatorSpec, rho: &DensityState) -> Result<Dense> {
    if spec.operator.tag() != rho.tag() {
        return Err(Error::SpaceMismatch {
            left: spec.operator.tag().to_string(),
            right: rho.tag().to_string(),
        });
    }
    let o = &spec.operator;
    let m = rho.matrix();
    // (o (oρ)†)† = oρo†
    let jump = o.apply(&o.apply(m).adjoint()).adjoint();
    let odo = o.adjoint().mul(o)?;
    let anti = odo.apply(m) + odo.apply_right(m);
    Ok((jump - anti * C64::new(0.5, 0.0)) * C64::new(spec.rate, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianModel {
    /// Full rotating-frame Hamiltonian in the `{|e>, |g>}` basis.
    Rotating,
    /// Same Hamiltonian expressed in the dressed `{|+>, |->}` basis.
    Dressed,
    /// Effective two-mode-squeezing Hamiltonian `G(ab + a†b†)`.
    Effective,
}

/// Hamiltonian plus dissipators; one segment of a run.
#[derive(Clone, Debug)]
pub struct MasterEquation {
    pub hamiltonian: Hamiltonian,
    pub dissipators: Vec<DissipatorSpec>,
}

impl MasterEquation {
    pub fn new(hamiltonian: Hamiltonian, dissipators: Vec<DissipatorSpec>) -> Result<Self> {
        let tag = hamiltonian.tag();
        for d in &dissipators {
            if d.operator.tag() != tag {
                return Err(Error::SpaceMismatch {
                    left: tag.to_string(),
                    right: d.operator.tag().to_string(),
                });
            }
        }
        Ok(Self {
            hamiltonian,
            dissipators,
        })
    }

    pub fn for_model(params: &SystemParams, space: &HilbertSpace, model: HamiltonianModel) -> Result<Self> {
        let dissipators = thermal_dissipators(params, space)?;
        match model {
            HamiltonianModel::Rotating => Self::new(rotating_hamiltonian(params, space)?, dissipators),
            HamiltonianModel::Effective => Self::new(
                Hamiltonian::constant(build_effective_hamiltonian(params, space)?),
                dissipators,
            ),
            HamiltonianModel::Dressed => {
                let w = dressing_unitary(space)?;
                let dissipators = dissipators
                    .into_iter()
                    .map(|d| DissipatorSpec::new(d.operator.conjugate_by(&w)?, d.rate))
                    .collect::<Result<_>>()?;
                Self::new(dressed_hamiltonian(params, space)?, dissipators)
            }
        }
    }

    /// The same channels with the qubit–mode couplings and the drive off.
    pub fn decoupled(params: &SystemParams, space: &HilbertSpace, model: HamiltonianModel) -> Result<Self> {
        let off = SystemParams {
            g_a: 0.0,
            g_b: 0.0,
            drive_amplitude: 0.0,
            ..*params
        };
        Self::for_model(&off, space, model)
    }

    pub fn tag(&self) -> SpaceTag {
        self.hamiltonian.tag()
    }

    pub fn conjugate_by(&self, u: &OperatorMatrix) -> Result<Self> {
        Self::new(
            self.hamiltonian.conjugate_by(u)?,
            self.dissipators
                .iter()
                .map(|d| DissipatorSpec::new(d.operator.conjugate_by(u)?, d.rate))
                .collect::<Result<_>>()?,
        )
    }

    /// `dρ/dt` at time `t`.
    pub fn rhs(&self, t: f64, rho: &DensityState) -> Result<Dense> {
        if rho.tag() != self.tag() {
            return Err(Error::SpaceMismatch {
                left: self.tag().to_string(),
                right: rho.tag().to_string(),
            });
        }
        let g = Generator::compile(self);
        let mut ws = Workspace::new(g.n, g.values_len());
        let mut out = Dense::zeros(g.n, g.n);
        g.rhs(t, rho.matrix(), &mut out, &mut ws);
        Ok(out)
    }
}

/// `−i[H(t), ρ] + Σ dissipators` for the chosen Hamiltonian.
pub fn master_rhs(
    params: &SystemParams,
    space: &HilbertSpace,
    model: HamiltonianModel,
    t: f64,
    rho: &DensityState,
) -> Result<Dense> {
    MasterEquation::for_model(params, space, model)?.rhs(t, rho)
}

/// `MasterEquation` flattened onto one CSR pattern for repeated evaluation.
struct Generator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// Static Hamiltonian minus (i/2)·Σ r o†o.
    base: Vec<C64>,
    /// (ω, values of O, values of O†) with coefficients e^{iωt}, e^{−iωt}.
    modulated: Vec<(f64, Vec<C64>, Vec<C64>)>,
    jumps: Vec<Jump>,
}

enum Jump {
    /// At most one nonzero per row: `(row → (column, value))`, with
    /// `usize::MAX` marking empty rows.
    Ladder { rate: f64, col: Vec<usize>, val: Vec<C64> },
    General { rate: f64, op: OperatorMatrix },
}

impl Jump {
    fn new(rate: f64, op: &OperatorMatrix) -> Self {
        let (row_ptr, col_idx) = op.structure();
        if row_ptr.windows(2).all(|w| w[1] - w[0] <= 1) {
            let n = op.dim();
            let mut col = vec![usize::MAX; n];
            let mut val = vec![ZERO; n];
            for (r, c, v) in op.iter() {
                col[r] = c;
                val[r] = v;
            }
            let _ = col_idx;
            Jump::Ladder { rate, col, val }
        } else {
            Jump::General { rate, op: op.clone() }
        }
    }

    fn rate(&self) -> f64 {
        match self {
            Jump::Ladder { rate, .. } | Jump::General { rate, .. } => *rate,
        }
    }

    fn op_row_norm(&self) -> f64 {
        match self {
            Jump::Ladder { val, .. } => val.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Jump::General { op, .. } => (0..op.dim())
                .map(|r| op.iter().filter(|(rr, _, _)| *rr == r).map(|(_, _, v)| v.norm()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// `out += rate · o ρ o†`
    fn apply(&self, rho: &[C64], out: &mut [C64], n: usize, scratch: &mut [C64]) {
        match self {
            Jump::Ladder { rate, col, val } => {
                for c in 0..n {
                    let kc = col[c];
                    if kc == usize::MAX {
                        continue;
                    }
                    let wc = val[c].conj() * *rate;
                    let src = &rho[kc * n..(kc + 1) * n];
                    let dst = &mut out[c * n..(c + 1) * n];
                    for r in 0..n {
                        let kr = col[r];
                        if kr != usize::MAX {
                            dst[r] += val[r] * wc * src[kr];
                        }
                    }
                }
            }
            Jump::General { rate, op } => {
                scratch.fill(ZERO);
                spmm_acc(op.csr(), rho, scratch, n, ONE);
                spmm_adj_right_acc(op.csr(), scratch, out, n, C64::new(*rate, 0.0));
            }
        }
    }
}

impl Generator {
    fn compile(eq: &MasterEquation) -> Self {
        let tag = eq.tag();
        let n = tag.dim();
        let mut decay = OperatorMatrix::zeros(tag);
        let mut jumps = Vec::new();
        for d in eq.dissipators.iter().filter(|d| d.rate > 0.0) {
            let odo = d.operator.adjoint().mul(&d.operator).expect("tag checked");
            decay = decay.add(&odo.scale_real(d.rate)).expect("tag checked");
            jumps.push(Jump::new(d.rate, &d.operator));
        }
        let base_op = eq
            .hamiltonian
            .static_part
            .add(&decay.scale(C64::new(0.0, -0.5)))
            .expect("tag checked");

        let mod_ops: Vec<(f64, OperatorMatrix, OperatorMatrix)> = eq
            .hamiltonian
            .modulated
            .iter()
            .filter(|m| m.op.nnz() > 0)
            .map(|m| (m.frequency, m.op.clone(), m.op.adjoint()))
            .collect();

        // union pattern
        let mut pattern: Vec<(usize, usize, C64)> = base_op.iter().map(|(r, c, _)| (r, c, ONE)).collect();
        for (_, p, m) in &mod_ops {
            pattern.extend(p.iter().chain(m.iter()).map(|(r, c, _)| (r, c, ONE)));
        }
        let union = OperatorMatrix::from_triplets(tag, pattern);
        let (row_ptr, col_idx) = union.structure();
        let (row_ptr, col_idx) = (row_ptr.to_vec(), col_idx.to_vec());

        let scatter = |op: &OperatorMatrix| {
            let mut v = vec![ZERO; col_idx.len()];
            for (r, c, x) in op.iter() {
                let k = row_ptr[r] + col_idx[row_ptr[r]..row_ptr[r + 1]].binary_search(&c).expect("in union");
                v[k] += x;
            }
            v
        };
        let base = scatter(&base_op);
        let modulated = mod_ops.iter().map(|(w, p, m)| (*w, scatter(p), scatter(m))).collect();
        Self {
            n,
            row_ptr,
            col_idx,
            base,
            modulated,
            jumps,
        }
    }

    fn values_len(&self) -> usize {
        self.base.len()
    }

    /// Rough bound on the fastest rate in the generator, used for the step size.
    fn frequency_bound(&self) -> f64 {
        let mut row_max: f64 = 0.0;
        for r in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.base[k].norm();
                for (_, p, m) in &self.modulated {
                    s += p[k].norm() + m[k].norm();
                }
            }
            row_max = row_max.max(s);
        }
        let jump_bound: f64 = self.jumps.iter().map(|j| j.rate() * j.op_row_norm().powi(2)).sum();
        let phases = self.modulated.iter().map(|(w, _, _)| w.abs()).fold(0.0, f64::max);
        phases + row_max + jump_bound
    }

    fn rhs(&self, t: f64, rho: &Dense, out: &mut Dense, ws: &mut Workspace) {
        let n = self.n;
        let values = &mut ws.values[..self.base.len()];
        values.copy_from_slice(&self.base);
        for (w, p, m) in &self.modulated {
            let e = C64::from_polar(1.0, w * t);
            let ec = e.conj();
            for ((v, x), y) in values.iter_mut().zip(p).zip(m) {
                *v += e * x + ec * y;
            }
        }
        let csr = CsrRef {
            row_ptr: &self.row_ptr,
            col_idx: &self.col_idx,
            values: &ws.values[..self.base.len()],
        };
        // X + X† with X = −i H_eff ρ, then the jump terms
        out.fill(ZERO);
        spmm_acc(csr, rho.as_slice(), out.as_mut_slice(), n, -I);
        let o = out.as_mut_slice();
        for c in 0..n {
            o[c + c * n] = C64::new(2.0 * o[c + c * n].re, 0.0);
            for r in c + 1..n {
                let s = o[r + c * n] + o[c + r * n].conj();
                o[r + c * n] = s;
                o[c + r * n] = s.conj();
            }
        }
        for j in &self.jumps {
            j.apply(rho.as_slice(), out.as_mut_slice(), n, ws.z.as_mut_slice());
        }
    }
}

struct Workspace {
    values: Vec<C64>,
    z: Dense,
}

impl Workspace {
    fn new(n: usize, nnz: usize) -> Self {
        Self {
            values: vec![ZERO; nnz],
            z: Dense::zeros(n, n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Stepper {
    /// Classical RK4 with `dt = (2π / ω_max) / steps_per_period`.
    Rk4 { steps_per_period: f64 },
    /// Dormand–Prince 5(4) with mixed absolute/relative tolerance.
    DormandPrince { rtol: f64, atol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub stepper: Stepper,
    /// Upper bound on the step, µs.
    pub max_dt: Option<f64>,
    /// `|tr ρ − 1|` above this aborts with an integration failure.
    pub trace_tolerance: f64,
    /// Population of the top two Fock levels of either mode above this
    /// aborts with a truncation failure; `None` only records it.
    pub leakage_bound: Option<f64>,
    /// Number of output samples (evenly spread, always including the last)
    /// at which the smallest eigenvalue of ρ is computed.
    pub positivity_checks: usize,
    pub store_states: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            stepper: Stepper::Rk4 { steps_per_period: 20.0 },
            max_dt: None,
            trace_tolerance: 1e-6,
            leakage_bound: Some(1e-3),
            positivity_checks: 4,
            store_states: false,
        }
    }
}

/// Reduced statistics recorded at one output time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub leakage: f64,
    pub covariance: Option<CovarianceState>,
    pub entanglement: Option<EntanglementValue>,
    pub min_eigenvalue: Option<f64>,
}

impl Sample {
    pub fn log_negativity(&self) -> f64 {
        self.entanglement.map_or(f64::NAN, |e| e.log_negativity)
    }
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub samples: Vec<Sample>,
    /// Max `|tr ρ − 1|` over the samples.
    pub trace_drift: f64,
    /// Max `|ρ − ρ†|` over the samples.
    pub hermiticity_drift: f64,
    pub leakage: f64,
    /// Smallest eigenvalue seen at the checked samples (`+∞` if none).
    pub min_eigenvalue: f64,
    pub steps: usize,
    #[serde(skip)]
    pub states: Vec<DensityState>,
    #[serde(skip)]
    pub final_state: Option<DensityState>,
}

impl std::fmt::Debug for EvolutionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvolutionReport")
            .field("samples", &self.samples.len())
            .field("trace_drift", &self.trace_drift)
            .field("hermiticity_drift", &self.hermiticity_drift)
            .field("leakage", &self.leakage)
            .field("min_eigenvalue", &self.min_eigenvalue)
            .field("steps", &self.steps)
            .finish_non_exhaustive()
    }
}

impl EvolutionReport {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn log_negativity(&self) -> Vec<f64> {
        self.samples.iter().map(Sample::log_negativity).collect()
    }
}

/// Partial trace over the qubit (the outermost factor).
pub fn partial_trace_qubit(rho: &DensityState) -> Result<DensityState> {
    let SpaceTag::Full(space) = rho.tag() else {
        return Err(Error::invalid(format!("partial trace needs a full-space state, got {}", rho.tag())));
    };
    let m = space.mode_dim();
    let full = rho.matrix();
    let reduced = Dense::from_fn(m, m, |r, c| full[(r, c)] + full[(r + m, c + m)]);
    Ok(DensityState::from_parts(space.two_mode_tag(), reduced, rho.time))
}

/// Largest population of the top two Fock levels of either mode.
pub fn leakage(rho: &DensityState) -> f64 {
    let SpaceTag::Full(space) = rho.tag() else {
        return f64::NAN;
    };
    let m = rho.matrix();
    let (mut la, mut lb) = (0.0, 0.0);
    for i in 0..space.dim() {
        let (_, na, nb) = space.decompose(i);
        let p = m[(i, i)].re;
        if na + 2 >= space.cutoff_a() {
            la += p;
        }
        if nb + 2 >= space.cutoff_b() {
            lb += p;
        }
    }
    f64::max(la, lb)
}

/// Piecewise-constant schedule: segment `k` applies from `starts[k]` on.
#[derive(Clone, Debug)]
pub struct Schedule {
    segments: Vec<(f64, MasterEquation)>,
}

impl Schedule {
    pub fn single(eq: MasterEquation) -> Self {
        Self {
            segments: vec![(f64::NEG_INFINITY, eq)],
        }
    }

    /// `first` until `switch_time`, `second` afterwards.
    pub fn switched(first: MasterEquation, switch_time: f64, second: MasterEquation) -> Result<Self> {
        if first.tag() != second.tag() {
            return Err(Error::SpaceMismatch {
                left: first.tag().to_string(),
                right: second.tag().to_string(),
            });
        }
        Ok(Self {
            segments: vec![(f64::NEG_INFINITY, first), (switch_time, second)],
        })
    }

    fn segment_at(&self, t: f64) -> usize {
        self.segments.iter().rposition(|(s, _)| t >= *s).unwrap_or(0)
    }

    pub fn tag(&self) -> SpaceTag {
        self.segments[0].1.tag()
    }
}

/// Integrates `ρ0` over the output grid `times` (first entry = start time).
pub fn evolve(rho0: &DensityState, equation: &MasterEquation, times: &[f64], config: &StepperConfig) -> Result<EvolutionReport> {
    evolve_schedule(rho0, &Schedule::single(equation.clone()), times, config)
}

/// Convenience wrapper building the master equation from parameters and an
/// evenly spaced output grid.
pub fn evolve_params(
    rho0: &DensityState,
    params: &SystemParams,
    space: &HilbertSpace,
    model: HamiltonianModel,
    t_end: f64,
    dt_out: f64,
    config: &StepperConfig,
) -> Result<EvolutionReport> {
    let eq = MasterEquation::for_model(params, space, model)?;
    let times = crate::output_grid(rho0.time, t_end, dt_out)?;
    evolve(rho0, &eq, &times, config)
}

pub fn evolve_schedule(
    rho0: &DensityState,
    schedule: &Schedule,
    times: &[f64],
    config: &StepperConfig,
) -> Result<EvolutionReport> {
    if rho0.tag() != schedule.tag() {
        return Err(Error::SpaceMismatch {
            left: schedule.tag().to_string(),
            right: rho0.tag().to_string(),
        });
    }
    if times.is_empty() || times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::invalid("output times must be non-empty and non-decreasing"));
    }
    if (times[0] - rho0.time).abs() > 1e-12 * times[0].abs().max(1.0) {
        return Err(Error::invalid("first output time must equal the initial state time"));
    }

    let generators: Vec<Generator> = schedule.segments.iter().map(|(_, eq)| Generator::compile(eq)).collect();
    let n = rho0.dim();
    let mut ws = Workspace::new(n, generators.iter().map(Generator::values_len).max().unwrap_or(0));
    let mut bufs = StageBuffers::new(n);

    // breakpoints = output times ∪ segment starts inside the window
    let mut breaks: Vec<(f64, bool)> = times.iter().map(|&t| (t, true)).collect();
    for (s, _) in schedule.segments.iter().skip(1) {
        if *s > times[0] && *s < *times.last().unwrap() && !times.contains(s) {
            breaks.push((*s, false));
        }
    }
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));

    let check_at = positivity_indices(times.len(), config.positivity_checks);
    let mut report = EvolutionReport {
        samples: Vec::with_capacity(times.len()),
        trace_drift: 0.0,
        hermiticity_drift: 0.0,
        leakage: 0.0,
        min_eigenvalue: f64::INFINITY,
        steps: 0,
        states: Vec::new(),
        final_state: None,
    };
    let mut rho = rho0.matrix().clone();
    let mut t = times[0];
    let mut sample_index = 0;

    for (k, &(t_next, is_output)) in breaks.iter().enumerate() {
        if k > 0 && t_next > t {
            let seg = schedule.segment_at(t);
            let g = &generators[seg];
            report.steps += match config.stepper {
                Stepper::Rk4 { steps_per_period } => {
                    let dt = fixed_step(g, steps_per_period, config.max_dt);
                    let steps = ((t_next - t) / dt).ceil().max(1.0) as usize;
                    let h = (t_next - t) / steps as f64;
                    for i in 0..steps {
                        rk4_step(g, t + i as f64 * h, h, &mut rho, &mut bufs, &mut ws);
                    }
                    steps
                }
                Stepper::DormandPrince { rtol, atol } => {
                    let h0 = fixed_step(g, 40.0, config.max_dt);
                    dopri_integrate(g, t, t_next, h0, rtol, atol, config.max_dt, &mut rho, &mut bufs, &mut ws)?
                }
            };
            t = t_next;
        }
        if !is_output {
            continue;
        }
        let state = DensityState::from_parts(rho0.tag(), rho.clone(), t);
        let min_eig = check_at.contains(&sample_index).then(|| state.min_eigenvalue());
        let sample = sample_stats(&state, min_eig);
        report.trace_drift = report.trace_drift.max(sample.trace_deviation);
        report.hermiticity_drift = report.hermiticity_drift.max(sample.hermiticity_deviation);
        if sample.leakage.is_finite() {
            report.leakage = report.leakage.max(sample.leakage);
        }
        if let Some(e) = min_eig {
            report.min_eigenvalue = report.min_eigenvalue.min(e);
        }
        let (trace_dev, leak) = (sample.trace_deviation, sample.leakage);
        report.samples.push(sample);
        if config.store_states {
            report.states.push(state.clone());
        }
        sample_index += 1;

        if !(trace_dev <= config.trace_tolerance) {
            report.final_state = Some(state);
            return Err(Error::IntegrationFailure {
                time: t,
                trace_drift: trace_dev,
                threshold: config.trace_tolerance,
                report: Box::new(report),
            });
        }
        if let Some(bound) = config.leakage_bound {
            if leak > bound {
                report.final_state = Some(state);
                return Err(Error::TruncationFailure {
                    time: t,
                    leakage: leak,
                    bound,
                    report: Box::new(report),
                });
            }
        }
    }
    report.final_state = Some(DensityState::from_parts(rho0.tag(), rho, t));
    Ok(report)
}

fn positivity_indices(len: usize, checks: usize) -> Vec<usize> {
    if checks == 0 || len == 0 {
        return Vec::new();
    }
    let mut v: Vec<usize> = (1..=checks).map(|k| (k * (len - 1)) / checks).collect();
    v.dedup();
    v
}

fn sample_stats(state: &DensityState, min_eigenvalue: Option<f64>) -> Sample {
    let (covariance, entanglement, leak) = match state.tag() {
        SpaceTag::Full(_) => {
            let reduced = partial_trace_qubit(state).expect("full-space state");
            let cov = extract_covariance(&reduced).ok();
            (cov, cov.and_then(|c| log_negativity(&c).ok()), leakage(state))
        }
        SpaceTag::TwoMode { .. } => {
            let cov = extract_covariance(state).ok();
            (cov, cov.and_then(|c| log_negativity(&c).ok()), f64::NAN)
        }
        _ => (None, None, f64::NAN),
    };
    Sample {
        time: state.time,
        trace_deviation: (state.trace() - ONE).norm(),
        hermiticity_deviation: state.hermiticity_deviation(),
        leakage: leak,
        covariance,
        entanglement,
        min_eigenvalue,
    }
}

fn fixed_step(g: &Generator, steps_per_period: f64, max_dt: Option<f64>) -> f64 {
    let w = g.frequency_bound();
    let mut dt = if w > 0.0 { 2.0 * PI / w / steps_per_period } else { f64::INFINITY };
    // never coarser than 20 steps per period of the fastest phase
    let phase = g.modulated.iter().map(|(w, _, _)| w.abs()).fold(0.0, f64::max);
    if phase > 0.0 {
        dt = dt.min(2.0 * PI / phase / 20.0);
    }
    max_dt.map_or(dt, |m| dt.min(m))
}

struct StageBuffers {
    k: [Dense; 7],
    tmp: Dense,
    next: Dense,
}

impl StageBuffers {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| Dense::zeros(n, n)),
            tmp: Dense::zeros(n, n),
            next: Dense::zeros(n, n),
        }
    }
}

/// `out = base + Σ c_i k_i`
fn combine(out: &mut Dense, base: &Dense, terms: &[(f64, &Dense)]) {
    let o = out.as_mut_slice();
    o.copy_from_slice(base.as_slice());
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for (x, y) in o.iter_mut().zip(k.as_slice()) {
            *x += y * *c;
        }
    }
}

fn rk4_step(g: &Generator, t: f64, h: f64, rho: &mut Dense, b: &mut StageBuffers, ws: &mut Workspace) {
    let [k1, k2, k3, k4, ..] = &mut b.k;
    g.rhs(t, rho, k1, ws);
    combine(&mut b.tmp, rho, &[(h / 2.0, k1)]);
    g.rhs(t + h / 2.0, &b.tmp, k2, ws);
    combine(&mut b.tmp, rho, &[(h / 2.0, k2)]);
    g.rhs(t + h / 2.0, &b.tmp, k3, ws);
    combine(&mut b.tmp, rho, &[(h, k3)]);
    g.rhs(t + h, &b.tmp, k4, ws);
    let r = rho.as_mut_slice();
    let s = h / 6.0;
    for i in 0..r.len() {
        r[i] += (k1.as_slice()[i] + (k2.as_slice()[i] + k3.as_slice()[i]) * 2.0 + k4.as_slice()[i]) * s;
    }
    hermitize(rho);
}

/// `ρ ← (ρ + ρ†)/2`. The generator treats its input as Hermitian, so a
/// rounding-level anti-Hermitian part is not damped and grows over long runs.
fn hermitize(rho: &mut Dense) {
    let n = rho.nrows();
    let r = rho.as_mut_slice();
    for c in 0..n {
        r[c + c * n].im = 0.0;
        for i in c + 1..n {
            let s = (r[i + c * n] + r[c + i * n].conj()) * 0.5;
            r[i + c * n] = s;
            r[c + i * n] = s.conj();
        }
    }
}

// Dormand–Prince 5(4) tableau
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[allow(clippy::too_many_arguments)]
fn dopri_integrate(
    g: &Generator,
    t0: f64,
    t1: f64,
    h0: f64,
    rtol: f64,
    atol: f64,
    max_dt: Option<f64>,
    rho: &mut Dense,
    b: &mut StageBuffers,
    ws: &mut Workspace,
) -> Result<usize> {
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(Error::invalid("adaptive tolerances must be positive"));
    }
    let mut t = t0;
    let mut h = h0.min(t1 - t0);
    let mut accepted = 0;
    let mut attempts = 0usize;
    while t < t1 {
        attempts += 1;
        if attempts > 10_000_000 {
            return Err(Error::invalid("adaptive stepper made no progress"));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 0..7 {
            let terms: Vec<(f64, &Dense)> = (0..s).map(|j| (h * DP_A[s][j], &b.k[j])).collect();
            combine(&mut b.tmp, rho, &terms);
            let (done, rest) = b.k.split_at_mut(s);
            let _ = done;
            g.rhs(t + DP_C[s] * h, &b.tmp, &mut rest[0], ws);
        }
        let terms5: Vec<(f64, &Dense)> = (0..7).map(|j| (h * DP_B5[j], &b.k[j])).collect();
        combine(&mut b.next, rho, &terms5);
        let mut err: f64 = 0.0;
        {
            let y = rho.as_slice();
            let y5 = b.next.as_slice();
            for i in 0..y.len() {
                let mut e = ZERO;
                for j in 0..7 {
                    e += b.k[j].as_slice()[i] * (h * (DP_B5[j] - DP_B4[j]));
                }
                let scale = atol + rtol * y[i].norm().max(y5[i].norm());
                err = err.max(e.norm() / scale);
            }
        }
        if err <= 1.0 {
            std::mem::swap(rho, &mut b.next);
            hermitize(rho);
            t = if last { t1 } else { t + h };
            accepted += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if let Some(m) = max_dt {
            h = h.min(m);
        }
    }
    Ok(accepted)
}
