//! Physical parameters and the Hamiltonians built from them.
//!
//! Every angular frequency and rate is in rad/µs and time is in µs.
//! Quantities quoted as ordinary frequencies (GHz, kHz) are multiplied by
//! 2π on ingest; the drive amplitude is already angular.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FullOperators, HilbertSpace, OperatorMatrix, Slot, SpaceTag, C64, ONE};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

pub mod units {
    use std::f64::consts::PI;

    pub fn ghz(f: f64) -> f64 {
        2.0 * PI * f * 1e3
    }

    pub fn mhz(f: f64) -> f64 {
        2.0 * PI * f
    }

    pub fn khz(f: f64) -> f64 {
        2.0 * PI * f * 1e-3
    }

    pub fn to_khz(w: f64) -> f64 {
        w / (2.0 * PI * 1e-3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_q: f64,
    pub g_a: f64,
    pub g_b: f64,
    /// Drive amplitude Ω_d.
    pub drive_amplitude: f64,
    /// Drive detuning δ_d = ω_q − ω_d.
    pub delta_d: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub kappa_q: f64,
    /// Bath temperature in kelvin.
    pub temperature: f64,
}

/// Relative tolerance of the Ω_d = |δ|/2 pole.
const SINGULAR_RTOL: f64 = 1e-6;
/// ω_q must sit at the mode midpoint to this relative precision.
const MIDPOINT_RTOL: f64 = 1e-12;

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega_a", self.omega_a), ("omega_b", self.omega_b), ("omega_q", self.omega_q)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("kappa_q", self.kappa_q),
            ("temperature", self.temperature),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be non-negative and finite, got {v}")));
            }
        }
        for (name, v) in [
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("drive_amplitude", self.drive_amplitude),
            ("delta_d", self.delta_d),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// δ = (ω_b − ω_a)/2.
    pub fn delta(&self) -> f64 {
        (self.omega_b - self.omega_a) / 2.0
    }

    pub fn drive_frequency(&self) -> f64 {
        self.omega_q - self.delta_d
    }

    /// Requires ω_q at the midpoint of the two modes.
    pub fn check_rotating_frame(&self) -> Result<()> {
        let mid = (self.omega_a + self.omega_b) / 2.0;
        if (self.omega_q - mid).abs() > MIDPOINT_RTOL * mid.abs() {
            return Err(Error::invalid(format!(
                "rotating frame requires omega_q = (omega_a + omega_b)/2 = {mid}, got {}",
                self.omega_q
            )));
        }
        Ok(())
    }

    fn check_pole(&self) -> Result<f64> {
        let half = self.delta().abs() / 2.0;
        let denom = self.delta().powi(2) - 4.0 * self.drive_amplitude.powi(2);
        if (self.drive_amplitude.abs() - half).abs() <= SINGULAR_RTOL * half || denom == 0.0 {
            return Err(Error::SingularParameter(format!(
                "drive amplitude {} sits on the pole |delta|/2 = {half}",
                self.drive_amplitude
            )));
        }
        Ok(denom)
    }

    /// G = Ω_d g_a g_b / (δ² − 4Ω_d²), the two-mode-squeezing rate.
    pub fn effective_coupling(&self) -> Result<f64> {
        let denom = self.check_pole()?;
        Ok(self.drive_amplitude * self.g_a * self.g_b / denom)
    }

    pub fn nbar_a(&self) -> f64 {
        thermal_occupation(self.omega_a, self.temperature).unwrap_or(f64::NAN)
    }

    pub fn nbar_b(&self) -> f64 {
        thermal_occupation(self.omega_b, self.temperature).unwrap_or(f64::NAN)
    }

    pub fn nbar_q(&self) -> f64 {
        thermal_occupation(self.omega_q, self.temperature).unwrap_or(f64::NAN)
    }

    /// Warnings for parameters outside the dispersive regime where the qubit
    /// can be eliminated. Also logged.
    pub fn advisories(&self) -> Vec<String> {
        let mut out = Vec::new();
        let scale = self.delta().abs().min(self.drive_amplitude.abs());
        for (name, g) in [("g_a", self.g_a), ("g_b", self.g_b)] {
            if g.abs() / 2.0 >= 0.2 * scale {
                out.push(format!(
                    "{name}/2 = {:.4} rad/us is not small against min(|delta|, |Omega_d|) = {scale:.4}; \
                     coupling terms are no longer fast-oscillating",
                    g.abs() / 2.0
                ));
            }
        }
        if self.delta_d.abs() >= 0.1 * self.drive_amplitude.abs() {
            out.push(format!(
                "|delta_d| = {:.4} is not small against Omega_d = {:.4}",
                self.delta_d.abs(),
                self.drive_amplitude
            ));
        }
        for w in &out {
            log::warn!("{w}");
        }
        out
    }

    pub fn with_resonant_detuning(mut self, qubit_sign: i8) -> Result<Self> {
        self.delta_d = resonant_detuning(&self, qubit_sign)?;
        Ok(self)
    }
}

/// Device parameters of the two-mode HBAR experiment with the drive at
/// Ω_d = 25 rad/µs, κ_q = 0 and δ_d on resonance for the `|+>` branch.
pub fn laboratory_parameters() -> SystemParams {
    let omega_a = units::ghz(5.9236);
    let omega_b = units::ghz(5.9488);
    let p = SystemParams {
        omega_a,
        omega_b,
        omega_q: (omega_a + omega_b) / 2.0,
        g_a: units::khz(257.0),
        g_b: units::khz(257.0),
        drive_amplitude: 25.0,
        delta_d: 0.0,
        gamma_a: units::khz(4.7),
        gamma_b: units::khz(3.3),
        kappa_q: 0.0,
        temperature: 0.050,
    };
    p.with_resonant_detuning(1).expect("laboratory parameters are off the pole")
}

/// Quantities derived from the parameters for a given initial dressed state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedFrame {
    pub delta: f64,
    pub g_eff: f64,
    pub delta_d_star: f64,
    pub qubit_sign: i8,
}

impl DerivedFrame {
    pub fn new(params: &SystemParams, qubit_sign: i8) -> Result<Self> {
        Ok(Self {
            delta: params.delta(),
            g_eff: params.effective_coupling()?,
            delta_d_star: resonant_detuning(params, qubit_sign)?,
            qubit_sign: sign_of(qubit_sign)?,
        })
    }
}

fn sign_of(s: i8) -> Result<i8> {
    match s {
        1 | -1 => Ok(s),
        _ => Err(Error::invalid(format!("qubit sign must be +1 or -1, got {s}"))),
    }
}

/// Drive detuning that cancels the phonon Stark shift:
/// δ_d* = ± Ω_d (g_a² + g_b²) / (2(δ² − 4Ω_d²)).
pub fn resonant_detuning(params: &SystemParams, qubit_sign: i8) -> Result<f64> {
    let s = f64::from(sign_of(qubit_sign)?);
    let denom = params.check_pole()?;
    Ok(s * params.drive_amplitude * (params.g_a.powi(2) + params.g_b.powi(2)) / (2.0 * denom))
}

/// Bose–Einstein occupation at angular frequency `omega` (rad/µs) and
/// temperature `temperature` (K).
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::invalid(format!("frequency must be positive, got {omega}")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::invalid(format!("temperature must be >= 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega * 1e6 / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}

/// A modulated term contributes `e^{iωt} op + e^{-iωt} op†`.
#[derive(Clone, Debug)]
pub struct Modulated {
    pub frequency: f64,
    pub op: OperatorMatrix,
}

/// `H(t) = static + Σ (e^{iω_k t} O_k + h.c.)`, Hermitian at every t.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub static_part: OperatorMatrix,
    pub modulated: Vec<Modulated>,
}

impl Hamiltonian {
    pub fn constant(op: OperatorMatrix) -> Self {
        Self {
            static_part: op,
            modulated: Vec::new(),
        }
    }

    pub fn tag(&self) -> SpaceTag {
        self.static_part.tag()
    }

    pub fn at(&self, t: f64) -> OperatorMatrix {
        let mut h = self.static_part.clone();
        for m in &self.modulated {
            let phase = C64::from_polar(1.0, m.frequency * t);
            let term = m.op.scale(phase);
            h = h.add(&term).and_then(|x| x.add(&term.adjoint())).expect("same space");
        }
        h
    }

    /// Largest |ω_k| among the modulated terms.
    pub fn max_frequency(&self) -> f64 {
        self.modulated.iter().map(|m| m.frequency.abs()).fold(0.0, f64::max)
    }

    /// `U† H U` applied to every piece; `U` constant in time.
    pub fn conjugate_by(&self, u: &OperatorMatrix) -> Result<Self> {
        Ok(Self {
            static_part: self.static_part.conjugate_by(u)?,
            modulated: self
                .modulated
                .iter()
                .map(|m| {
                    Ok(Modulated {
                        frequency: m.frequency,
                        op: m.op.conjugate_by(u)?,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Lab-frame Hamiltonian at time `t` with the drive in rotating-wave form.
pub fn build_lab_hamiltonian(params: &SystemParams, space: &HilbertSpace, t: f64) -> Result<OperatorMatrix> {
    params.validate()?;
    let o = FullOperators::new(space)?;
    let na = o.a.adjoint().mul(&o.a)?;
    let nb = o.b.adjoint().mul(&o.b)?;
    let wd = params.drive_frequency();
    let drive = o.sigma_eg.scale(C64::from_polar(params.drive_amplitude, -wd * t));
    let terms = [
        na.scale_real(params.omega_a),
        nb.scale_real(params.omega_b),
        o.sigma_z.scale_real(params.omega_q / 2.0),
        o.sigma_eg.mul(&o.a)?.scale_real(params.g_a),
        o.sigma_ge.mul(&o.a.adjoint())?.scale_real(params.g_a),
        o.sigma_eg.mul(&o.b)?.scale_real(params.g_b),
        o.sigma_ge.mul(&o.b.adjoint())?.scale_real(params.g_b),
        drive.adjoint(),
        drive,
    ];
    sum(space.full_tag(), &terms)
}

fn sum(tag: SpaceTag, terms: &[OperatorMatrix]) -> Result<OperatorMatrix> {
    terms.iter().try_fold(OperatorMatrix::zeros(tag), |acc, t| acc.add(t))
}

/// Full Hamiltonian in the frame co-rotating with the modes and the drive:
/// `(δ_d/2)σ_z + Ω_d σ_x + g_a[σ_eg a e^{i(δ−δ_d)t} + h.c.] + g_b[σ_eg b e^{−i(δ+δ_d)t} + h.c.]`.
pub fn rotating_hamiltonian(params: &SystemParams, space: &HilbertSpace) -> Result<Hamiltonian> {
    params.validate()?;
    params.check_rotating_frame()?;
    let o = FullOperators::new(space)?;
    let delta = params.delta();
    let h0 = o
        .sigma_z
        .scale_real(params.delta_d / 2.0)
        .add(&o.sigma_eg.add(&o.sigma_ge)?.scale_real(params.drive_amplitude))?;
    Ok(Hamiltonian {
        static_part: h0,
        modulated: vec![
            Modulated {
                frequency: delta - params.delta_d,
                op: o.sigma_eg.mul(&o.a)?.scale_real(params.g_a),
            },
            Modulated {
                frequency: -(delta + params.delta_d),
                op: o.sigma_eg.mul(&o.b)?.scale_real(params.g_b),
            },
        ],
    })
}

pub fn build_rotating_hamiltonian(params: &SystemParams, space: &HilbertSpace, t: f64) -> Result<OperatorMatrix> {
    Ok(rotating_hamiltonian(params, space)?.at(t))
}

/// The rotating-frame Hamiltonian written directly in the dressed basis
/// `{|+> = index 0, |-> = index 1}` of the qubit.
///
/// The static part keeps the δ_d/2 (σ_{+-} + σ_{-+}) term so this is the
/// exact image of [`rotating_hamiltonian`] under [`dressing_unitary`].
pub fn dressed_hamiltonian(params: &SystemParams, space: &HilbertSpace) -> Result<Hamiltonian> {
    params.validate()?;
    params.check_rotating_frame()?;
    let o = FullOperators::new(space)?;
    let q = |r: usize, c: usize| {
        crate::fock::embed(
            &OperatorMatrix::from_triplets(SpaceTag::Qubit, [(r, c, ONE)]),
            Slot::Qubit,
            space,
        )
    };
    let (spp, smm, spm, smp) = (q(0, 0)?, q(1, 1)?, q(0, 1)?, q(1, 0)?);
    let sx_dressed = spp.sub(&smm)?;
    let static_part = sx_dressed
        .scale_real(params.drive_amplitude)
        .add(&spm.add(&smp)?.scale_real(params.delta_d / 2.0))?;
    // ½(σ++ − σ−− − σ+− + σ−+) is σ_eg in the dressed basis
    let raising = sx_dressed.sub(&spm)?.add(&smp)?.scale_real(0.5);
    let delta = params.delta();
    Ok(Hamiltonian {
        static_part,
        modulated: vec![
            Modulated {
                frequency: delta - params.delta_d,
                op: raising.mul(&o.a)?.scale_real(params.g_a),
            },
            Modulated {
                frequency: -(delta + params.delta_d),
                op: raising.mul(&o.b)?.scale_real(params.g_b),
            },
        ],
    })
}

/// Constant unitary whose columns are `|+>`, `|->` in the `{|e>, |g>}`
/// basis, tensored with the mode identities. It is real symmetric and its
/// own inverse.
pub fn dressing_unitary(space: &HilbertSpace) -> Result<OperatorMatrix> {
    let s = re(std::f64::consts::FRAC_1_SQRT_2);
    let w = OperatorMatrix::from_triplets(SpaceTag::Qubit, [(0, 0, s), (0, 1, s), (1, 0, s), (1, 1, -s)]);
    crate::fock::embed(&w, Slot::Qubit, space)
}

/// `G (ab + a†b†)` acting on the two modes, identity on the qubit.
pub fn build_effective_hamiltonian(params: &SystemParams, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let g = params.effective_coupling()?;
    let o = FullOperators::new(space)?;
    let ab = o.a.mul(&o.b)?;
    ab.add(&ab.adjoint()).map(|h| h.scale_real(g))
}

/// Period of the mode-a coupling phase in the rotating frame.
pub fn mode_a_period(params: &SystemParams) -> f64 {
    2.0 * PI / (params.delta() - params.delta_d).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{qubit_operators, Dense, EXCITED, GROUND};

    fn small_space() -> HilbertSpace {
        HilbertSpace::new(4, 3).unwrap()
    }

    #[test]
    fn laboratory_values() {
        let p = laboratory_parameters();
        assert!((p.omega_a - 2.0 * PI * 5923.6).abs() < 1e-9);
        assert!((p.omega_a - 37219.0).abs() < 0.1);
        assert!((p.delta() - 2.0 * PI * 12.6).abs() < 1e-9);
        assert!((p.delta() - 79.168).abs() < 1e-3);
        assert!((p.g_a - 1.6147).abs() < 1e-4);
        assert_eq!(p.g_a, p.g_b);
        assert!((p.gamma_a - 2.0 * PI * 4.7e-3).abs() < 1e-12);
        assert!((p.gamma_b - 2.0 * PI * 3.3e-3).abs() < 1e-12);
        assert_eq!(p.temperature, 0.05);
        assert!(p.check_rotating_frame().is_ok());
        assert!(p.advisories().is_empty());
    }

    #[test]
    fn effective_coupling_laboratory() {
        let p = laboratory_parameters();
        let g = p.effective_coupling().unwrap();
        // 25 * 1.61478^2 / (79.1681^2 - 2500)
        assert!((g - 0.017302).abs() < 1e-6, "{g}");
        let zero = SystemParams { g_a: 0.0, ..p };
        assert_eq!(build_effective_hamiltonian(&zero, &small_space()).unwrap().nnz(), 0);
        let above = SystemParams {
            drive_amplitude: 50.0,
            ..p
        };
        assert!(above.effective_coupling().unwrap() < 0.0);
    }

    #[test]
    fn pole_is_an_error() {
        let p = laboratory_parameters();
        let on = SystemParams {
            drive_amplitude: p.delta() / 2.0 * (1.0 + 1e-7),
            ..p
        };
        assert!(matches!(on.effective_coupling(), Err(Error::SingularParameter(_))));
        assert!(matches!(resonant_detuning(&on, 1), Err(Error::SingularParameter(_))));
        assert!(build_effective_hamiltonian(&on, &small_space()).is_err());
    }

    #[test]
    fn resonance_condition() {
        let p = laboratory_parameters();
        let plus = resonant_detuning(&p, 1).unwrap();
        assert!((plus - 0.017302).abs() < 1e-6);
        assert!((plus / (2.0 * PI) - 2.75e-3).abs() < 2e-5);
        assert_eq!(resonant_detuning(&p, -1).unwrap(), -plus);
        assert!((plus / p.drive_amplitude - 6.9e-4).abs() < 1e-5);
        assert!(resonant_detuning(&p, 0).is_err());
        let frame = DerivedFrame::new(&p, 1).unwrap();
        assert!((frame.delta_d_star - frame.qubit_sign as f64 * frame.g_eff).abs() <= 1e-15 * frame.g_eff);
        assert!(frame.delta > 0.0);
    }

    #[test]
    fn resonance_equals_coupling_for_equal_g() {
        for omega in [3.0, 10.0, 25.0, 35.0, 60.0] {
            for g in [0.3, 1.6, 7.0] {
                let p = SystemParams {
                    drive_amplitude: omega,
                    g_a: g,
                    g_b: g,
                    ..laboratory_parameters()
                };
                let geff = p.effective_coupling().unwrap();
                let rel = (resonant_detuning(&p, 1).unwrap() - geff).abs() / geff.abs();
                assert!(rel < 4.0 * f64::EPSILON, "{omega} {g}: {rel}");
                let rel = (resonant_detuning(&p, -1).unwrap() + geff).abs() / geff.abs();
                assert!(rel < 4.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn thermal_occupation_values() {
        let wa = laboratory_parameters().omega_a;
        let n50 = thermal_occupation(wa, 0.05).unwrap();
        assert!((n50 - 3.41e-3).abs() < 1e-5, "{n50}");
        let n350 = thermal_occupation(wa, 0.35).unwrap();
        assert!((n350 - 0.80).abs() < 5e-3, "{n350}");
        assert_eq!(thermal_occupation(wa, 0.0).unwrap(), 0.0);
        assert!(thermal_occupation(0.0, 0.05).is_err());
        assert!(thermal_occupation(-1.0, 0.05).is_err());
    }

    #[test]
    fn thermal_occupation_monotone() {
        let temps: Vec<f64> = (1..40).map(|k| k as f64 * 0.01).collect();
        let freqs: Vec<f64> = (1..40).map(|k| units::ghz(0.5 * k as f64)).collect();
        for w in &freqs {
            for pair in temps.windows(2) {
                assert!(thermal_occupation(*w, pair[1]).unwrap() > thermal_occupation(*w, pair[0]).unwrap());
            }
        }
        for t in &temps {
            for pair in freqs.windows(2) {
                assert!(thermal_occupation(pair[1], *t).unwrap() < thermal_occupation(pair[0], *t).unwrap());
            }
        }
    }

    #[test]
    fn lab_hamiltonian_free_part() {
        let space = small_space();
        let p = SystemParams {
            g_a: 0.0,
            g_b: 0.0,
            drive_amplitude: 0.0,
            ..laboratory_parameters()
        };
        let h = build_lab_hamiltonian(&p, &space, 0.0).unwrap();
        for (r, c, v) in h.iter() {
            assert_eq!(r, c);
            let (q, na, nb) = space.decompose(r);
            let s = if q == EXCITED { 0.5 } else { -0.5 };
            let expected = p.omega_a * na as f64 + p.omega_b * nb as f64 + s * p.omega_q;
            assert!((v.re - expected).abs() < 1e-9 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn lab_hamiltonian_coupling_element_and_hermiticity() {
        let space = small_space();
        let p = laboratory_parameters();
        for t in [0.0, 0.37, 12.5] {
            let h = build_lab_hamiltonian(&p, &space, t).unwrap();
            assert_eq!(h.hermiticity_deviation(), 0.0);
        }
        let h = build_lab_hamiltonian(&p, &space, 0.0).unwrap();
        for na in 1..4 {
            for nb in 0..3 {
                let v = h.get(space.index(EXCITED, na - 1, nb), space.index(GROUND, na, nb));
                assert!((v.re - p.g_a * (na as f64).sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rotating_hamiltonian_structure() {
        let space = small_space();
        let p = laboratory_parameters();
        let h = rotating_hamiltonian(&p, &space).unwrap();
        let o = FullOperators::new(&space).unwrap();
        // t = 0: phases are unity
        let h0 = h.at(0.0);
        let expected = h
            .static_part
            .add(&o.sigma_eg.mul(&o.a).unwrap().add(&o.sigma_ge.mul(&o.a.adjoint()).unwrap()).unwrap().scale_real(p.g_a))
            .unwrap()
            .add(&o.sigma_eg.mul(&o.b).unwrap().add(&o.sigma_ge.mul(&o.b.adjoint()).unwrap()).unwrap().scale_real(p.g_b))
            .unwrap();
        assert!(h0.sub(&expected).unwrap().max_abs() < 1e-15);
        for t in [0.0, 0.013, 1.7, 99.0] {
            assert_eq!(h.at(t).hermiticity_deviation(), 0.0);
        }
        // mode-a phase returns after one period
        let period = mode_a_period(&p);
        let m = &h.modulated[0];
        let phase = C64::from_polar(1.0, m.frequency * (3.3 + period)) - C64::from_polar(1.0, m.frequency * 3.3);
        assert!(phase.norm() < 1e-10);
    }

    #[test]
    fn rotating_frame_requires_midpoint() {
        let p = SystemParams {
            omega_q: laboratory_parameters().omega_q + 1.0,
            ..laboratory_parameters()
        };
        assert!(matches!(rotating_hamiltonian(&p, &small_space()), Err(Error::InvalidArgument(_))));
        assert!(build_lab_hamiltonian(&p, &small_space(), 0.0).is_ok());
    }

    #[test]
    fn drive_spectrum() {
        let p = SystemParams {
            delta_d: 3.0,
            ..laboratory_parameters()
        };
        let q = qubit_operators();
        let h0 = q
            .sigma_z
            .scale_real(p.delta_d / 2.0)
            .add(&q.sigma_eg.add(&q.sigma_ge).unwrap().scale_real(p.drive_amplitude))
            .unwrap();
        let d: Dense = h0.to_dense();
        let mut ev: Vec<f64> = d.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let w = (p.drive_amplitude.powi(2) + p.delta_d.powi(2) / 4.0).sqrt();
        assert!((ev[0] + w).abs() < 1e-12 && (ev[1] - w).abs() < 1e-12);
    }

    #[test]
    fn dressed_form_is_conjugate_of_rotating_form() {
        let space = small_space();
        let p = SystemParams {
            delta_d: 0.8,
            g_a: 2.1,
            g_b: 1.3,
            ..laboratory_parameters()
        };
        let w = dressing_unitary(&space).unwrap();
        let lab = rotating_hamiltonian(&p, &space).unwrap();
        let dressed = dressed_hamiltonian(&p, &space).unwrap();
        let mut t = 0.123;
        for _ in 0..10 {
            t = (t * 7.31 + 0.917) % 50.0;
            let conj = lab.at(t).conjugate_by(&w).unwrap();
            let diff = conj.sub(&dressed.at(t)).unwrap().max_abs();
            assert!(diff < 1e-12, "t = {t}: {diff}");
        }
    }
}
