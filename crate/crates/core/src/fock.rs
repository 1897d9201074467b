//! Truncated Fock spaces, the qubit, and sparse operators on their tensor product.
//!
//! Basis conventions, fixed for the whole crate:
//!
//! * qubit: `|e> = index 0`, `|g> = index 1`;
//! * full space ordering is qubit ⊗ mode a ⊗ mode b, so basis state
//!   `(q, n_a, n_b)` sits at `q * (N_a * N_b) + n_a * N_b + n_b`;
//! * the two-mode space left after tracing out the qubit uses
//!   `n_a * N_b + n_b`.
//!
//! Operators are stored in CSR form with sorted column indices. Density
//! matrices are dense, column-major `nalgebra` matrices.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Dense = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Index of `|e>` in the qubit basis.
pub const EXCITED: usize = 0;
/// Index of `|g>` in the qubit basis.
pub const GROUND: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    cutoff_a: usize,
    cutoff_b: usize,
}

impl HilbertSpace {
    pub const QUBIT_DIM: usize = 2;

    pub fn new(cutoff_a: usize, cutoff_b: usize) -> Result<Self> {
        if cutoff_a < 2 || cutoff_b < 2 {
            return Err(Error::invalid(format!(
                "Fock cutoffs must be >= 2, got ({cutoff_a}, {cutoff_b})"
            )));
        }
        Ok(Self { cutoff_a, cutoff_b })
    }

    pub fn cutoff_a(&self) -> usize {
        self.cutoff_a
    }

    pub fn cutoff_b(&self) -> usize {
        self.cutoff_b
    }

    pub fn dim(&self) -> usize {
        Self::QUBIT_DIM * self.mode_dim()
    }

    /// Dimension of the two-mode factor.
    pub fn mode_dim(&self) -> usize {
        self.cutoff_a * self.cutoff_b
    }

    pub fn index(&self, q: usize, n_a: usize, n_b: usize) -> usize {
        debug_assert!(q < 2 && n_a < self.cutoff_a && n_b < self.cutoff_b);
        q * self.mode_dim() + n_a * self.cutoff_b + n_b
    }

    pub fn decompose(&self, index: usize) -> (usize, usize, usize) {
        let m = self.mode_dim();
        let q = index / m;
        let r = index % m;
        (q, r / self.cutoff_b, r % self.cutoff_b)
    }

    pub fn full_tag(&self) -> SpaceTag {
        SpaceTag::Full(*self)
    }

    pub fn two_mode_tag(&self) -> SpaceTag {
        SpaceTag::TwoMode {
            cutoff_a: self.cutoff_a,
            cutoff_b: self.cutoff_b,
        }
    }
}

/// Identity of the space an operator or state lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceTag {
    Qubit,
    Mode(usize),
    TwoMode { cutoff_a: usize, cutoff_b: usize },
    Full(HilbertSpace),
}

impl SpaceTag {
    pub fn dim(&self) -> usize {
        match *self {
            SpaceTag::Qubit => 2,
            SpaceTag::Mode(n) => n,
            SpaceTag::TwoMode { cutoff_a, cutoff_b } => cutoff_a * cutoff_b,
            SpaceTag::Full(space) => space.dim(),
        }
    }

    fn check(&self, other: &SpaceTag) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceTag::Qubit => write!(f, "qubit"),
            SpaceTag::Mode(n) => write!(f, "mode[{n}]"),
            SpaceTag::TwoMode { cutoff_a, cutoff_b } => write!(f, "two-mode[{cutoff_a}x{cutoff_b}]"),
            SpaceTag::Full(s) => write!(f, "qubit x mode[{}] x mode[{}]", s.cutoff_a, s.cutoff_b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Qubit,
    ModeA,
    ModeB,
}

/// Sparse complex matrix tagged with the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    tag: SpaceTag,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl OperatorMatrix {
    /// Builds an operator from (row, col, value) triplets. Duplicates are
    /// summed and exact zeros dropped, so equal operators compare equal.
    pub fn from_triplets(tag: SpaceTag, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let dim = tag.dim();
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        t.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<C64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), col_idx.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            col_idx.push(c);
            values.push(v);
        }
        // drop exact zeros (including cancellations)
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_cols = Vec::with_capacity(rows.len());
        let mut keep_vals = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != ZERO {
                keep_rows.push(r);
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for &r in &keep_rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            tag,
            row_ptr,
            col_idx: keep_cols,
            values: keep_vals,
        }
    }

    pub fn zeros(tag: SpaceTag) -> Self {
        Self::from_triplets(tag, std::iter::empty())
    }

    pub fn identity(tag: SpaceTag) -> Self {
        Self::from_triplets(tag, (0..tag.dim()).map(|i| (i, i, ONE)))
    }

    pub fn diagonal(tag: SpaceTag, diag: impl IntoIterator<Item = C64>) -> Self {
        Self::from_triplets(tag, diag.into_iter().enumerate().map(|(i, v)| (i, i, v)))
    }

    pub fn from_dense(tag: SpaceTag, m: &Dense) -> Result<Self> {
        if m.nrows() != tag.dim() || m.ncols() != tag.dim() {
            return Err(Error::invalid(format!(
                "dense matrix {}x{} does not match {tag}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut t = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)] != ZERO {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        Ok(Self::from_triplets(tag, t))
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.tag.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.tag, self.iter().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(self.tag, self.iter().map(|(r, c, v)| (r, c, v * s)))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.tag.check(&other.tag)?;
        Ok(Self::from_triplets(self.tag, self.iter().chain(other.iter())))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_real(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.tag.check(&other.tag)?;
        let mut t = Vec::new();
        for (r, k, v) in self.iter() {
            for j in other.row_ptr[k]..other.row_ptr[k + 1] {
                t.push((r, other.col_idx[j], v * other.values[j]));
            }
        }
        Ok(Self::from_triplets(self.tag, t))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute entry of `O - O†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.sub(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    /// Kronecker product; the result carries `tag`.
    pub fn kron(&self, other: &Self, tag: SpaceTag) -> Result<Self> {
        let (d1, d2) = (self.dim(), other.dim());
        if d1 * d2 != tag.dim() {
            return Err(Error::invalid(format!(
                "kron of dims {d1} and {d2} does not fit {tag}"
            )));
        }
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.iter() {
            for (r2, c2, v2) in other.iter() {
                t.push((r1 * d2 + r2, c1 * d2 + c2, v1 * v2));
            }
        }
        Ok(Self::from_triplets(tag, t))
    }

    pub fn to_dense(&self) -> Dense {
        let n = self.dim();
        let mut m = Dense::zeros(n, n);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// `self * m` for a dense matrix.
    pub fn apply(&self, m: &Dense) -> Dense {
        let n = self.dim();
        assert_eq!(m.nrows(), n);
        let mut out = Dense::zeros(n, m.ncols());
        spmm_acc(self.csr(), m.as_slice(), out.as_mut_slice(), n, ONE);
        out
    }

    /// `m * self` for a dense matrix.
    pub fn apply_right(&self, m: &Dense) -> Dense {
        self.adjoint().apply(&m.adjoint()).adjoint()
    }

    /// Conjugation `U† O U`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.adjoint().mul(self)?.mul(u)
    }

    pub(crate) fn csr(&self) -> CsrRef<'_> {
        CsrRef {
            row_ptr: &self.row_ptr,
            col_idx: &self.col_idx,
            values: &self.values,
        }
    }

    pub(crate) fn structure(&self) -> (&[usize], &[usize]) {
        (&self.row_ptr, &self.col_idx)
    }
}

#[derive(Clone, Copy)]
pub(crate) struct CsrRef<'a> {
    pub row_ptr: &'a [usize],
    pub col_idx: &'a [usize],
    pub values: &'a [C64],
}

/// `out += alpha * S * M` with `M`, `out` column-major `n x ncols` slices.
pub(crate) fn spmm_acc(s: CsrRef<'_>, m: &[C64], out: &mut [C64], n: usize, alpha: C64) {
    debug_assert_eq!(m.len(), out.len());
    for (mc, oc) in m.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
        for (r, o) in oc.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in s.row_ptr[r]..s.row_ptr[r + 1] {
                acc += s.values[k] * mc[s.col_idx[k]];
            }
            if acc != ZERO {
                *o += alpha * acc;
            }
        }
    }
}

/// `out += alpha · m · s†` for column-major `m`, `out`.
pub(crate) fn spmm_adj_right_acc(s: CsrRef<'_>, m: &[C64], out: &mut [C64], n: usize, alpha: C64) {
    debug_assert_eq!(m.len(), out.len());
    for (c, oc) in out.chunks_exact_mut(n).enumerate() {
        for k in s.row_ptr[c]..s.row_ptr[c + 1] {
            let w = alpha * s.values[k].conj();
            let mc = &m[s.col_idx[k] * n..(s.col_idx[k] + 1) * n];
            for (o, x) in oc.iter_mut().zip(mc) {
                *o += w * x;
            }
        }
    }
}

/// Annihilation operator on a single mode truncated to `cutoff` levels.
pub fn destroy(cutoff: usize) -> Result<OperatorMatrix> {
    if cutoff < 2 {
        return Err(Error::invalid(format!("Fock cutoff must be >= 2, got {cutoff}")));
    }
    Ok(OperatorMatrix::from_triplets(
        SpaceTag::Mode(cutoff),
        (1..cutoff).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))),
    ))
}

pub fn create(cutoff: usize) -> Result<OperatorMatrix> {
    Ok(destroy(cutoff)?.adjoint())
}

pub fn number(cutoff: usize) -> Result<OperatorMatrix> {
    if cutoff < 2 {
        return Err(Error::invalid(format!("Fock cutoff must be >= 2, got {cutoff}")));
    }
    Ok(OperatorMatrix::diagonal(
        SpaceTag::Mode(cutoff),
        (0..cutoff).map(|n| C64::new(n as f64, 0.0)),
    ))
}

/// Qubit operators in the `{|e>, |g>}` basis.
#[derive(Clone, Debug)]
pub struct QubitOperators {
    pub sigma_z: OperatorMatrix,
    /// `|e><g|`, raising.
    pub sigma_eg: OperatorMatrix,
    /// `|g><e|`, lowering.
    pub sigma_ge: OperatorMatrix,
    /// `|+><+|` with `|±> = (|e> ± |g>)/√2`.
    pub plus_projector: OperatorMatrix,
    pub minus_projector: OperatorMatrix,
}

pub fn qubit_operators() -> QubitOperators {
    let t = SpaceTag::Qubit;
    let h = C64::new(0.5, 0.0);
    QubitOperators {
        sigma_z: OperatorMatrix::diagonal(t, [ONE, -ONE]),
        sigma_eg: OperatorMatrix::from_triplets(t, [(EXCITED, GROUND, ONE)]),
        sigma_ge: OperatorMatrix::from_triplets(t, [(GROUND, EXCITED, ONE)]),
        plus_projector: OperatorMatrix::from_triplets(t, [(0, 0, h), (0, 1, h), (1, 0, h), (1, 1, h)]),
        minus_projector: OperatorMatrix::from_triplets(t, [(0, 0, h), (0, 1, -h), (1, 0, -h), (1, 1, h)]),
    }
}

/// Qubit ket `|+>` (`sign = +1`) or `|->` (`sign = -1`) in the `{|e>, |g>}` basis.
pub fn dressed_ket(sign: i8) -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(s, 0.0), C64::new(s * f64::from(sign.signum()), 0.0)]
}

/// Places a single-factor operator into the full space, identity elsewhere.
pub fn embed(op: &OperatorMatrix, slot: Slot, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let expected = match slot {
        Slot::Qubit => 2,
        Slot::ModeA => space.cutoff_a,
        Slot::ModeB => space.cutoff_b,
    };
    if op.dim() != expected {
        return Err(Error::invalid(format!(
            "operator of dim {} cannot act on {slot:?} of dim {expected}",
            op.dim()
        )));
    }
    let (left, right) = match slot {
        Slot::Qubit => (1, space.mode_dim()),
        Slot::ModeA => (2, space.cutoff_b),
        Slot::ModeB => (2 * space.cutoff_a, 1),
    };
    Ok(sandwich(op, left, right, space.full_tag()))
}

/// Places a single-mode operator into the two-mode space.
pub fn embed_two_mode(op: &OperatorMatrix, slot: Slot, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let (expected, left, right) = match slot {
        Slot::ModeA => (space.cutoff_a, 1, space.cutoff_b),
        Slot::ModeB => (space.cutoff_b, space.cutoff_a, 1),
        Slot::Qubit => return Err(Error::invalid("two-mode space has no qubit slot")),
    };
    if op.dim() != expected {
        return Err(Error::invalid(format!(
            "operator of dim {} cannot act on {slot:?} of dim {expected}",
            op.dim()
        )));
    }
    Ok(sandwich(op, left, right, space.two_mode_tag()))
}

// I_left ⊗ op ⊗ I_right
fn sandwich(op: &OperatorMatrix, left: usize, right: usize, tag: SpaceTag) -> OperatorMatrix {
    let d = op.dim();
    let mut t = Vec::with_capacity(left * right * op.nnz());
    for l in 0..left {
        for (r, c, v) in op.iter() {
            for k in 0..right {
                t.push(((l * d + r) * right + k, (l * d + c) * right + k, v));
            }
        }
    }
    OperatorMatrix::from_triplets(tag, t)
}

/// The embedded operators every Hamiltonian and dissipator is built from.
#[derive(Clone, Debug)]
pub struct FullOperators {
    pub space: HilbertSpace,
    pub a: OperatorMatrix,
    pub b: OperatorMatrix,
    pub sigma_z: OperatorMatrix,
    pub sigma_eg: OperatorMatrix,
    pub sigma_ge: OperatorMatrix,
    pub identity: OperatorMatrix,
}

impl FullOperators {
    pub fn new(space: &HilbertSpace) -> Result<Self> {
        let q = qubit_operators();
        Ok(Self {
            space: *space,
            a: embed(&destroy(space.cutoff_a)?, Slot::ModeA, space)?,
            b: embed(&destroy(space.cutoff_b)?, Slot::ModeB, space)?,
            sigma_z: embed(&q.sigma_z, Slot::Qubit, space)?,
            sigma_eg: embed(&q.sigma_eg, Slot::Qubit, space)?,
            sigma_ge: embed(&q.sigma_ge, Slot::Qubit, space)?,
            identity: OperatorMatrix::identity(space.full_tag()),
        })
    }
}

/// Hermitian, unit-trace density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    matrix: Dense,
    tag: SpaceTag,
    /// Microseconds.
    pub time: f64,
}

impl DensityState {
    pub const HERMITICITY_TOL: f64 = 1e-12;

    pub fn new(tag: SpaceTag, matrix: Dense, time: f64) -> Result<Self> {
        let n = tag.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::invalid(format!(
                "matrix {}x{} does not match {tag}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = hermiticity_deviation(&matrix);
        if dev > Self::HERMITICITY_TOL {
            return Err(Error::invalid(format!(
                "density matrix not Hermitian (deviation {dev:.3e})"
            )));
        }
        Ok(Self { matrix, tag, time })
    }

    /// Skips validation; the engine uses this between steps where the
    /// monitors track deviations instead.
    pub(crate) fn from_parts(tag: SpaceTag, matrix: Dense, time: f64) -> Self {
        Self { matrix, tag, time }
    }

    pub fn from_ket(tag: SpaceTag, ket: &DVector<C64>) -> Result<Self> {
        if ket.len() != tag.dim() {
            return Err(Error::invalid("ket dimension does not match space"));
        }
        let norm = ket.norm();
        if norm == 0.0 {
            return Err(Error::invalid("zero ket"));
        }
        let k = ket / C64::new(norm, 0.0);
        let m = &k * k.adjoint();
        Self::new(tag, symmetrize(m), 0.0)
    }

    /// Product state `|qubit> ⊗ |n_a> ⊗ |n_b>`.
    pub fn product(space: &HilbertSpace, qubit: [C64; 2], n_a: usize, n_b: usize) -> Result<Self> {
        if n_a >= space.cutoff_a || n_b >= space.cutoff_b {
            return Err(Error::invalid("Fock level outside cutoff"));
        }
        let mut ket = DVector::zeros(space.dim());
        for (q, amp) in qubit.iter().enumerate() {
            ket[space.index(q, n_a, n_b)] = *amp;
        }
        Self::from_ket(space.full_tag(), &ket)
    }

    /// Qubit state ⊗ thermal mode a ⊗ thermal mode b, populations normalized
    /// over the truncated ladder.
    pub fn thermal(space: &HilbertSpace, qubit: [C64; 2], nbar_a: f64, nbar_b: f64) -> Result<Self> {
        let pa = thermal_populations(nbar_a, space.cutoff_a)?;
        let pb = thermal_populations(nbar_b, space.cutoff_b)?;
        let n = space.dim();
        let mut m = Dense::zeros(n, n);
        for q1 in 0..2 {
            for q2 in 0..2 {
                let c = qubit[q1] * qubit[q2].conj();
                for (na, &xa) in pa.iter().enumerate() {
                    for (nb, &xb) in pb.iter().enumerate() {
                        m[(space.index(q1, na, nb), space.index(q2, na, nb))] = c * (xa * xb);
                    }
                }
            }
        }
        let norm: f64 = qubit.iter().map(|x| x.norm_sqr()).sum();
        Self::new(space.full_tag(), m / C64::new(norm, 0.0), 0.0)
    }

    pub fn maximally_mixed(tag: SpaceTag) -> Self {
        let n = tag.dim();
        Self {
            matrix: Dense::identity(n, n) / C64::new(n as f64, 0.0),
            tag,
            time: 0.0,
        }
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.tag.dim()
    }

    pub fn matrix(&self) -> &Dense {
        &self.matrix
    }

    pub fn into_matrix(self) -> Dense {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = symmetrize(self.matrix.clone());
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Unitary change of basis `U† ρ U`.
    pub fn conjugate_by(&self, u: &OperatorMatrix) -> Result<Self> {
        self.tag.check(&u.tag)?;
        let m = u.adjoint().apply(&u.apply_right(&self.matrix));
        Ok(Self::from_parts(self.tag, symmetrize(m), self.time))
    }
}

pub(crate) fn thermal_populations(nbar: f64, cutoff: usize) -> Result<Vec<f64>> {
    if !(nbar >= 0.0) {
        return Err(Error::invalid(format!("thermal occupation must be >= 0, got {nbar}")));
    }
    let ratio = nbar / (1.0 + nbar);
    let mut p: Vec<f64> = (0..cutoff).map(|n| ratio.powi(n as i32)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    Ok(p)
}

pub(crate) fn hermiticity_deviation(m: &Dense) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for c in 0..n {
        for r in c..n {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

/// `(M + M†)/2`.
pub(crate) fn symmetrize(m: Dense) -> Dense {
    let adj = m.adjoint();
    (m + adj) * C64::new(0.5, 0.0)
}

/// `tr(ρ · O)`.
pub fn expectation(rho: &DensityState, op: &OperatorMatrix) -> Result<C64> {
    rho.tag.check(&op.tag)?;
    let m = &rho.matrix;
    Ok(op.iter().map(|(r, c, v)| v * m[(c, r)]).sum())
}
