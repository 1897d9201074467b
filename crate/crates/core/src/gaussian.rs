//! Two-mode Gaussian description: covariance matrices over the quadratures
//! `R = [X_a, Y_a, X_b, Y_b]` with `X = (a + a†)/√2`, `Y = (a − a†)/(i√2)`,
//! logarithmic negativity, and direct Lyapunov evolution of the covariance
//! matrix under the effective squeezing Hamiltonian with thermal damping.
//!
//! Vacuum has `σ = I/2` in this normalization.

use nalgebra::{Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{destroy, embed_two_mode, expectation, DensityState, HilbertSpace, Slot, SpaceTag, C64};
use crate::model::SystemParams;

/// Tolerance on `Σ² − 4 det σ` below which the covariance is rejected.
pub const DISCRIMINANT_FAIL: f64 = -1e-9;
/// Negative discriminants down to this size are pure roundoff.
pub const DISCRIMINANT_ROUNDOFF: f64 = -1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceState {
    pub sigma: Matrix4<f64>,
    pub mean: Vector4<f64>,
    /// Microseconds.
    pub time: f64,
}

impl CovarianceState {
    pub fn new(sigma: Matrix4<f64>, mean: Vector4<f64>, time: f64) -> Self {
        Self { sigma, mean, time }
    }

    pub fn vacuum() -> Self {
        Self::thermal(0.0, 0.0)
    }

    /// Uncorrelated thermal modes.
    pub fn thermal(nbar_a: f64, nbar_b: f64) -> Self {
        let (va, vb) = (nbar_a + 0.5, nbar_b + 0.5);
        Self::new(Matrix4::from_diagonal(&Vector4::new(va, va, vb, vb)), Vector4::zeros(), 0.0)
    }

    /// State reached from vacuum after `exp(-i r (ab + a†b†))`, i.e. after
    /// time `r / G` under `G (ab + a†b†)`. The correlations sit between
    /// `X_a`–`Y_b` and `Y_a`–`X_b`.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let c = (2.0 * r).cosh() / 2.0;
        let s = (2.0 * r).sinh() / 2.0;
        #[rustfmt::skip]
        let sigma = Matrix4::new(
            c, 0.0, 0.0, -s,
            0.0, c, -s, 0.0,
            0.0, -s, c, 0.0,
            -s, 0.0, 0.0, c,
        );
        Self::new(sigma, Vector4::zeros(), 0.0)
    }

    pub fn block_a(&self) -> Matrix2<f64> {
        self.sigma.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn block_b(&self) -> Matrix2<f64> {
        self.sigma.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn block_ab(&self) -> Matrix2<f64> {
        self.sigma.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Applies independent phase-space rotations to each mode.
    pub fn rotate_local(&self, theta_a: f64, theta_b: f64) -> Self {
        let rot = |t: f64| Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        let mut s = Matrix4::zeros();
        s.fixed_view_mut::<2, 2>(0, 0).copy_from(&rot(theta_a));
        s.fixed_view_mut::<2, 2>(2, 2).copy_from(&rot(theta_b));
        Self::new(s * self.sigma * s.transpose(), s * self.mean, self.time)
    }
}

/// Standard symplectic form for `[X_a, Y_a, X_b, Y_b]`.
pub fn symplectic_form() -> Matrix4<f64> {
    #[rustfmt::skip]
    let j = Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, -1.0, 0.0,
    );
    j
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementValue {
    pub log_negativity: f64,
    pub eta_minus: f64,
    /// `Σ = det V_a + det V_b − 2 det V_ab`.
    pub sigma_invariant: f64,
    /// The discriminant `Σ² − 4 det σ` was slightly negative and set to zero.
    pub clamped: bool,
}

/// Logarithmic negativity `E_N = max(0, −ln 2η⁻)` with
/// `η⁻ = 2^{-1/2} (Σ − (Σ² − 4 det σ)^{1/2})^{1/2}`.
pub fn log_negativity(cov: &CovarianceState) -> Result<EntanglementValue> {
    let sigma_invariant =
        cov.block_a().determinant() + cov.block_b().determinant() - 2.0 * cov.block_ab().determinant();
    let det = cov.sigma.determinant();
    let mut disc = sigma_invariant * sigma_invariant - 4.0 * det;
    let mut clamped = false;
    if disc < 0.0 {
        if disc < DISCRIMINANT_FAIL {
            return Err(Error::UnphysicalCovariance(format!(
                "Sigma^2 - 4 det(sigma) = {disc:.3e} < {DISCRIMINANT_FAIL:.0e}"
            )));
        }
        if disc < DISCRIMINANT_ROUNDOFF {
            log::debug!("clamping discriminant {disc:.3e} beyond roundoff scale");
        }
        disc = 0.0;
        clamped = true;
    }
    // Σ − √disc without cancellation
    let inner = if det > 0.0 && sigma_invariant > 0.0 {
        4.0 * det / (sigma_invariant + disc.sqrt())
    } else {
        sigma_invariant - disc.sqrt()
    };
    if !(inner > 0.0) {
        return Err(Error::UnphysicalCovariance(format!(
            "Sigma - sqrt(disc) = {inner:.3e} is not positive"
        )));
    }
    let eta_minus = std::f64::consts::FRAC_1_SQRT_2 * inner.sqrt();
    Ok(EntanglementValue {
        log_negativity: (-(2.0 * eta_minus).ln()).max(0.0),
        eta_minus,
        sigma_invariant,
        clamped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityReport {
    pub symmetry_deviation: f64,
    /// Smallest eigenvalue of `σ + (i/2) Ω`.
    pub min_eigenvalue: f64,
    pub determinant: f64,
}

impl PhysicalityReport {
    pub const TOLERANCE: f64 = 1e-8;

    pub fn is_physical(&self) -> bool {
        self.symmetry_deviation <= 1e-12 && self.min_eigenvalue > -Self::TOLERANCE
    }
}

pub fn physicality_check(cov: &CovarianceState) -> PhysicalityReport {
    let symmetry_deviation = (cov.sigma - cov.sigma.transpose()).abs().max();
    let j = symplectic_form();
    let h: Matrix4<C64> = Matrix4::from_fn(|r, c| C64::new(cov.sigma[(r, c)], 0.5 * j[(r, c)]));
    let h = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let min_eigenvalue = h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    PhysicalityReport {
        symmetry_deviation,
        min_eigenvalue,
        determinant: cov.sigma.determinant(),
    }
}

/// Covariance matrix (central moments) and mean of a two-mode density matrix.
pub fn extract_covariance(rho: &DensityState) -> Result<CovarianceState> {
    let SpaceTag::TwoMode { cutoff_a, cutoff_b } = rho.tag() else {
        return Err(Error::invalid(format!("expected a two-mode state, got {}", rho.tag())));
    };
    let dev = rho.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(Error::invalid(format!("state not Hermitian (deviation {dev:.3e})")));
    }
    let space = HilbertSpace::new(cutoff_a, cutoff_b)?;
    let a = embed_two_mode(&destroy(cutoff_a)?, Slot::ModeA, &space)?;
    let b = embed_two_mode(&destroy(cutoff_b)?, Slot::ModeB, &space)?;
    let ev = |op: &crate::fock::OperatorMatrix| expectation(rho, op);

    let ma = ev(&a)?;
    let mb = ev(&b)?;
    // normal-ordered products are exact on the truncated ladder
    let aa = ev(&a.mul(&a)?)? - ma * ma;
    let bb = ev(&b.mul(&b)?)? - mb * mb;
    let na = ev(&a.adjoint().mul(&a)?)?.re - ma.norm_sqr();
    let nb = ev(&b.adjoint().mul(&b)?)?.re - mb.norm_sqr();
    let ab = ev(&a.mul(&b)?)? - ma * mb;
    let adb = ev(&a.adjoint().mul(&b)?)? - ma.conj() * mb;

    let mut s = Matrix4::zeros();
    s[(0, 0)] = aa.re + na + 0.5;
    s[(1, 1)] = -aa.re + na + 0.5;
    s[(0, 1)] = aa.im;
    s[(2, 2)] = bb.re + nb + 0.5;
    s[(3, 3)] = -bb.re + nb + 0.5;
    s[(2, 3)] = bb.im;
    s[(0, 2)] = ab.re + adb.re;
    s[(0, 3)] = ab.im + adb.im;
    s[(1, 2)] = ab.im - adb.im;
    s[(1, 3)] = -ab.re + adb.re;
    for r in 0..4 {
        for c in 0..r {
            s[(r, c)] = s[(c, r)];
        }
    }
    let sq2 = std::f64::consts::SQRT_2;
    let mean = Vector4::new(sq2 * ma.re, sq2 * ma.im, sq2 * mb.re, sq2 * mb.im);
    Ok(CovarianceState::new(s, mean, rho.time))
}

/// Perturbations of the drift matrix used to check that the validation
/// suite detects transcription errors.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriftVariant {
    #[default]
    Physical,
    /// Sign of the `Y_a`–`X_b` coupling flipped.
    FlippedCrossSign,
}

/// Quadratic open dynamics of the two modes with the qubit eliminated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    /// Two-mode-squeezing rate G.
    pub coupling: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub nbar_a: f64,
    pub nbar_b: f64,
    /// From this time on the coupling is switched off.
    pub coupling_off_time: Option<f64>,
    #[serde(default)]
    pub drift_variant: DriftVariant,
}

impl GaussianModel {
    pub fn from_params(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            coupling: params.effective_coupling()?,
            gamma_a: params.gamma_a,
            gamma_b: params.gamma_b,
            nbar_a: params.nbar_a(),
            nbar_b: params.nbar_b(),
            coupling_off_time: None,
            drift_variant: DriftVariant::Physical,
        })
    }

    /// Drift matrix `A` of `dR/dt = A R + noise` for `H = G(ab + a†b†)`
    /// plus amplitude damping.
    pub fn drift_matrix(&self, coupling: f64) -> Matrix4<f64> {
        let g = coupling;
        let (ha, hb) = (-self.gamma_a / 2.0, -self.gamma_b / 2.0);
        let cross = match self.drift_variant {
            DriftVariant::Physical => -g,
            DriftVariant::FlippedCrossSign => g,
        };
        #[rustfmt::skip]
        let a = Matrix4::new(
            ha, 0.0, 0.0, -g,
            0.0, ha, -g, 0.0,
            0.0, cross, hb, 0.0,
            -g, 0.0, 0.0, hb,
        );
        a
    }

    pub fn diffusion_matrix(&self) -> Matrix4<f64> {
        let da = self.gamma_a * (self.nbar_a + 0.5);
        let db = self.gamma_b * (self.nbar_b + 0.5);
        Matrix4::from_diagonal(&Vector4::new(da, da, db, db))
    }

    fn coupling_at(&self, t: f64) -> f64 {
        match self.coupling_off_time {
            Some(off) if t >= off => 0.0,
            _ => self.coupling,
        }
    }
}

/// Integrates `dσ/dt = Aσ + σAᵀ + D` (and `d⟨R⟩/dt = A⟨R⟩`) with classical
/// RK4, returning the state on the grid `0, dt_out, 2 dt_out, …, t_end`.
pub fn lyapunov_evolve(
    model: &GaussianModel,
    initial: &CovarianceState,
    t_end: f64,
    dt_out: f64,
) -> Result<Vec<CovarianceState>> {
    let check = physicality_check(initial);
    if !check.is_physical() {
        return Err(Error::invalid(format!(
            "initial covariance is not physical (min eigenvalue {:.3e}, asymmetry {:.3e})",
            check.min_eigenvalue, check.symmetry_deviation
        )));
    }
    let times = crate::output_grid(initial.time, t_end, dt_out)?;
    let diffusion = model.diffusion_matrix();
    let rate = 2.0 * model.coupling.abs() + model.gamma_a.max(model.gamma_b);
    // h * rate <= 5e-3 keeps the RK4 error far below any tolerance used here
    let h_max = if rate > 0.0 { 5e-3 / rate } else { f64::INFINITY };

    let mut out = Vec::with_capacity(times.len());
    let mut sigma = initial.sigma;
    let mut mean = initial.mean;
    out.push(CovarianceState::new(sigma, mean, times[0]));
    let mut breaks: Vec<f64> = times.clone();
    if let Some(off) = model.coupling_off_time {
        if off > times[0] && off < *times.last().unwrap() {
            breaks.push(off);
            breaks.sort_by(f64::total_cmp);
        }
    }
    let mut next_out = 1;
    for w in breaks.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 > t0 {
            let drift = model.drift_matrix(model.coupling_at(t0));
            let steps = ((t1 - t0) / h_max).ceil().max(1.0) as usize;
            let h = (t1 - t0) / steps as f64;
            let f = |s: &Matrix4<f64>| drift * s + s * drift.transpose() + diffusion;
            for _ in 0..steps {
                let k1 = f(&sigma);
                let k2 = f(&(sigma + k1 * (h / 2.0)));
                let k3 = f(&(sigma + k2 * (h / 2.0)));
                let k4 = f(&(sigma + k3 * h));
                sigma += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                let m1 = drift * mean;
                let m2 = drift * (mean + m1 * (h / 2.0));
                let m3 = drift * (mean + m2 * (h / 2.0));
                let m4 = drift * (mean + m3 * h);
                mean += (m1 + m2 * 2.0 + m3 * 2.0 + m4) * (h / 6.0);
            }
            sigma = (sigma + sigma.transpose()) * 0.5;
        }
        if next_out < times.len() && t1 == times[next_out] {
            out.push(CovarianceState::new(sigma, mean, t1));
            next_out += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{DensityState, Dense, ONE, ZERO};
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn space(n: usize) -> HilbertSpace {
        HilbertSpace::new(n, n).unwrap()
    }

    fn two_mode_state(space: &HilbertSpace, m: Dense) -> DensityState {
        DensityState::new(space.two_mode_tag(), m, 0.0).unwrap()
    }

    #[test]
    fn vacuum_entanglement() {
        let v = log_negativity(&CovarianceState::vacuum()).unwrap();
        assert!((v.sigma_invariant - 0.5).abs() < 1e-15);
        assert!((CovarianceState::vacuum().sigma.determinant() - 1.0 / 16.0).abs() < 1e-15);
        assert!((v.eta_minus - 0.5).abs() < 1e-12);
        assert_eq!(v.log_negativity, 0.0);
    }

    #[test]
    fn squeezed_vacuum_master_oracle() {
        for r in [0.01, 0.1, 0.5, 1.0, 1.73, 2.5] {
            let v = log_negativity(&CovarianceState::two_mode_squeezed(r)).unwrap();
            assert!((v.log_negativity - 2.0 * r).abs() < 1e-10 * (1.0 + r), "r = {r}");
            assert!((v.eta_minus - (-2.0 * r).exp() / 2.0).abs() < 1e-12);
            let p = physicality_check(&CovarianceState::two_mode_squeezed(r));
            assert!((p.determinant - 1.0 / 16.0).abs() < 1e-10);
            assert!(p.min_eigenvalue > -1e-8);
        }
    }

    #[test]
    fn vacuum_physicality() {
        let p = physicality_check(&CovarianceState::vacuum());
        assert!(p.min_eigenvalue.abs() < 1e-14);
        assert!((p.determinant - 1.0 / 16.0).abs() < 1e-15);
        assert!(p.is_physical());
    }

    #[test]
    fn thermal_block_determinant() {
        let cov = CovarianceState::thermal(1.0, 0.0);
        assert!((cov.block_a().determinant() - 2.25).abs() < 1e-14);
        assert!((cov.sigma.determinant() - 0.5625).abs() < 1e-14);
    }

    #[test]
    fn unphysical_is_rejected() {
        let mut cov = CovarianceState::two_mode_squeezed(0.5);
        cov.sigma[(0, 3)] *= 3.0;
        cov.sigma[(3, 0)] *= 3.0;
        assert!(!physicality_check(&cov).is_physical());
        let m = GaussianModel {
            coupling: 0.1,
            gamma_a: 0.0,
            gamma_b: 0.0,
            nbar_a: 0.0,
            nbar_b: 0.0,
            coupling_off_time: None,
            drift_variant: DriftVariant::Physical,
        };
        assert!(matches!(lyapunov_evolve(&m, &cov, 1.0, 0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn discriminant_guard() {
        #[rustfmt::skip]
        let indefinite = Matrix4::new(
            -0.1, -0.3, -0.1, 1.0,
            -0.3, 0.9, 0.1, 0.3,
            -0.1, 0.1, -0.9, -1.1,
            1.0, 0.3, -1.1, 0.1,
        );
        let bad = CovarianceState::new(indefinite, Vector4::zeros(), 0.0);
        assert!(matches!(log_negativity(&bad), Err(Error::UnphysicalCovariance(_))));
        // vacuum sits exactly on the clamp boundary
        let v = log_negativity(&CovarianceState::vacuum()).unwrap();
        assert_eq!(v.log_negativity, 0.0);
    }

    #[test]
    fn extract_vacuum() {
        let s = space(6);
        let mut m = Dense::zeros(36, 36);
        m[(0, 0)] = ONE;
        let cov = extract_covariance(&two_mode_state(&s, m)).unwrap();
        assert!((cov.sigma - Matrix4::identity() * 0.5).abs().max() < 1e-15);
        assert_eq!(cov.mean, Vector4::zeros());
    }

    #[test]
    fn extract_thermal_mode() {
        let nbar: f64 = 0.7;
        let s = HilbertSpace::new(40, 2).unwrap();
        let pops = crate::fock::thermal_populations(nbar, 40).unwrap();
        let mut m = Dense::zeros(80, 80);
        for (n, p) in pops.iter().enumerate() {
            m[(n * 2, n * 2)] = C64::new(*p, 0.0);
        }
        let cov = extract_covariance(&two_mode_state(&s, m)).unwrap();
        let va = cov.block_a();
        assert!((va[(0, 0)] - (nbar + 0.5)).abs() < 1e-9);
        assert!((va[(1, 1)] - (nbar + 0.5)).abs() < 1e-9);
        assert!(va[(0, 1)].abs() < 1e-15);
        let v = log_negativity(&cov).unwrap();
        assert_eq!(v.log_negativity, 0.0);
    }

    #[test]
    fn extract_rejects_full_space_and_non_hermitian() {
        let s = space(3);
        let full = DensityState::product(&s, [ONE, ZERO], 0, 0).unwrap();
        assert!(extract_covariance(&full).is_err());
        let mut m = Dense::zeros(9, 9);
        m[(0, 0)] = ONE;
        m[(0, 1)] = C64::new(1e-6, 0.0);
        let bad = DensityState::from_parts(s.two_mode_tag(), m, 0.0);
        assert!(matches!(extract_covariance(&bad), Err(Error::InvalidArgument(_))));
    }

    /// Fock-space oracle: the squeezed vacuum obtained by exponentiating
    /// `-i r (ab + a†b†)` on a large truncated space, then extracting moments.
    fn fock_squeezed(r: f64, n: usize) -> CovarianceState {
        let s = space(n);
        let a = embed_two_mode(&destroy(n).unwrap(), Slot::ModeA, &s).unwrap();
        let b = embed_two_mode(&destroy(n).unwrap(), Slot::ModeB, &s).unwrap();
        let ab = a.mul(&b).unwrap();
        let h = ab.add(&ab.adjoint()).unwrap().to_dense();
        // exp(-i r H) via eigen-decomposition of the real symmetric H
        let hr = h.map(|z| z.re);
        let eig = hr.symmetric_eigen();
        let dim = n * n;
        let mut psi0 = DVector::<C64>::zeros(dim);
        psi0[0] = ONE;
        let vecs = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let coeffs = vecs.adjoint() * &psi0;
        let phased = DVector::from_iterator(
            dim,
            coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, e)| c * C64::from_polar(1.0, -r * e)),
        );
        let psi = &vecs * phased;
        let rho = DensityState::from_ket(s.two_mode_tag(), &psi).unwrap();
        extract_covariance(&rho).unwrap()
    }

    #[test]
    fn squeezed_vacuum_sign_convention_from_fock() {
        for r in [0.05, 0.2, 0.4] {
            let fock = fock_squeezed(r, 24);
            let closed = CovarianceState::two_mode_squeezed(r);
            assert!((fock.sigma - closed.sigma).abs().max() < 1e-9, "r = {r}\n{}\n{}", fock.sigma, closed.sigma);
        }
    }

    fn lossless(g: f64) -> GaussianModel {
        GaussianModel {
            coupling: g,
            gamma_a: 0.0,
            gamma_b: 0.0,
            nbar_a: 0.0,
            nbar_b: 0.0,
            coupling_off_time: None,
            drift_variant: DriftVariant::Physical,
        }
    }

    #[test]
    fn lyapunov_squeezed_vacuum() {
        let g = 0.017302;
        let traj = lyapunov_evolve(&lossless(g), &CovarianceState::vacuum(), 100.0, 1.0).unwrap();
        assert_eq!(traj.len(), 101);
        for s in &traj {
            let e = log_negativity(s).unwrap().log_negativity;
            let exact = 2.0 * g * s.time;
            if s.time > 0.0 {
                assert!((e - exact).abs() / exact < 1e-10, "t = {}: {e} vs {exact}", s.time);
            }
        }
    }

    #[test]
    fn lyapunov_matches_closed_form_covariance() {
        let traj = lyapunov_evolve(&lossless(0.3), &CovarianceState::vacuum(), 4.0, 4.0).unwrap();
        let closed = CovarianceState::two_mode_squeezed(1.2);
        assert!((traj[1].sigma - closed.sigma).abs().max() < 1e-10);
    }

    #[test]
    fn lyapunov_damped_thermalization() {
        let model = GaussianModel {
            coupling: 0.0,
            gamma_a: 0.5,
            gamma_b: 0.2,
            nbar_a: 0.3,
            nbar_b: 1.1,
            coupling_off_time: None,
            drift_variant: DriftVariant::Physical,
        };
        let init = CovarianceState::thermal(2.0, 0.0);
        let traj = lyapunov_evolve(&model, &init, 10.0, 0.5).unwrap();
        for s in &traj {
            let t = s.time;
            let va = 0.8 + (2.5 - 0.8) * (-0.5 * t).exp();
            let vb = 1.6 + (0.5 - 1.6) * (-0.2 * t).exp();
            assert!((s.sigma[(0, 0)] - va).abs() < 1e-11);
            assert!((s.sigma[(1, 1)] - va).abs() < 1e-11);
            assert!((s.sigma[(3, 3)] - vb).abs() < 1e-11);
            assert!(s.sigma[(0, 2)].abs() < 1e-15);
        }
    }

    #[test]
    fn lossless_growth_is_monotone() {
        let traj = lyapunov_evolve(&lossless(0.2), &CovarianceState::vacuum(), 10.0, 0.1).unwrap();
        let e: Vec<f64> = traj.iter().map(|s| log_negativity(s).unwrap().log_negativity).collect();
        assert!(e.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn coupling_switch_off() {
        let mut m = lossless(0.2);
        m.coupling_off_time = Some(2.5);
        let traj = lyapunov_evolve(&m, &CovarianceState::vacuum(), 6.0, 1.0).unwrap();
        let e: Vec<f64> = traj.iter().map(|s| log_negativity(s).unwrap().log_negativity).collect();
        assert!((e[3] - 1.0).abs() < 1e-10);
        assert!((e[6] - 1.0).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn local_rotations_preserve_entanglement(r in 0.0..2.0f64, ta in -3.2..3.2f64, tb in -3.2..3.2f64, n in 0.0..2.0f64) {
            let model = GaussianModel { coupling: 0.4, gamma_a: 0.1, gamma_b: 0.05, nbar_a: n, nbar_b: n / 2.0, coupling_off_time: None, drift_variant: DriftVariant::Physical };
            let cov = lyapunov_evolve(&model, &CovarianceState::vacuum(), r, r.max(1e-3)).unwrap().pop().unwrap();
            let e0 = log_negativity(&cov).unwrap();
            let e1 = log_negativity(&cov.rotate_local(ta, tb)).unwrap();
            prop_assert!((e0.eta_minus - e1.eta_minus).abs() < 1e-10);
            prop_assert!((e0.log_negativity - e1.log_negativity).abs() < 1e-10);
        }

        #[test]
        fn uncorrelated_states_never_entangled(
            na in 0.0..5.0f64, nb in 0.0..5.0f64,
            sa in -1.0..1.0f64, sb in -1.0..1.0f64,
        ) {
            // squeezed-thermal single-mode blocks, no cross correlation
            let mut cov = CovarianceState::thermal(na, nb);
            cov.sigma[(0, 0)] *= sa.exp();
            cov.sigma[(1, 1)] *= (-sa).exp();
            cov.sigma[(2, 2)] *= sb.exp();
            cov.sigma[(3, 3)] *= (-sb).exp();
            let v = log_negativity(&cov).unwrap();
            prop_assert_eq!(v.log_negativity, 0.0);
        }
    }
}
