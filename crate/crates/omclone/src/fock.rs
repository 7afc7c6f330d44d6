//! Dense operator algebra on a composite truncated Fock space.
//!
//! Every Hamiltonian and state in the crate lives on a [`ModeLayout`]: an
//! ordered list of bosonic modes with per-mode truncation. Composite indices
//! follow the Kronecker convention with the first mode most significant, so
//! for a qubit-truncated `(a, b_1, b_2)` layout the basis state `|n_a n_1 n_2>`
//! sits at index `4 n_a + 2 n_1 + n_2`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

pub type C64 = Complex64;

/// Mode labels of the five-mode system: the cavity field `a`, the internal
/// membrane modes `b_A1`, `b_A2`, and the external mechanical modes `b_1`,
/// `b_2`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum Mode {
    Cavity,
    Aux1,
    Aux2,
    Mech1,
    Mech2,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Cavity => "a",
            Mode::Aux1 => "b_A1",
            Mode::Aux2 => "b_A2",
            Mode::Mech1 => "b_1",
            Mode::Mech2 => "b_2",
        }
    }

    /// The auxiliary membrane paired with external resonator `j` (0-based).
    pub fn aux(j: usize) -> Mode {
        [Mode::Aux1, Mode::Aux2][j]
    }

    /// External mechanical resonator `j` (0-based).
    pub fn mech(j: usize) -> Mode {
        [Mode::Mech1, Mode::Mech2][j]
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error)]
pub enum FockError {
    #[error("mode {0} is not part of the layout")]
    UnknownMode(Mode),
    #[error("duplicate mode {0} in layout")]
    DuplicateMode(Mode),
    #[error("local dimension must be >= 2, got {0}")]
    BadDimension(usize),
    #[error("layout mismatch between operands")]
    LayoutMismatch,
    #[error("matrix dimension {got} does not match layout dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("state vector norm {0} is not 1 within 1e-10")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("occupation {occ} out of range for mode {mode}")]
    OccupationOutOfRange { mode: Mode, occ: usize },
    #[error("occupation list length {got} does not match mode count {want}")]
    OccupationLength { got: usize, want: usize },
    #[error("partial trace needs a non-empty keep set")]
    EmptyKeep,
    #[error("fidelity between two mixed states is not supported")]
    MixedMixedFidelity,
    #[error("modes {0} and {1} need equal local dimensions for a swap")]
    SwapDimensionMismatch(Mode, Mode),
}

/// Ordered list of `(mode, local dimension)` pairs defining a composite
/// truncated Fock space. The order is fixed for the lifetime of any object
/// built on the layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeLayout {
    modes: Vec<(Mode, usize)>,
}

impl ModeLayout {
    pub fn new(modes: Vec<(Mode, usize)>) -> Result<Self, FockError> {
        for (i, &(m, d)) in modes.iter().enumerate() {
            if d < 2 {
                return Err(FockError::BadDimension(d));
            }
            if modes[..i].iter().any(|&(other, _)| other == m) {
                return Err(FockError::DuplicateMode(m));
            }
        }
        Ok(Self { modes })
    }

    /// Gate-level layout `(a, b_1, b_2)` with a common local dimension.
    pub fn three_mode(dim: usize) -> Self {
        Self::new(vec![
            (Mode::Cavity, dim),
            (Mode::Mech1, dim),
            (Mode::Mech2, dim),
        ])
        .expect("valid layout")
    }

    /// Full-model layout `(a, b_A1, b_A2, b_1, b_2)` with a common local dimension.
    pub fn five_mode(dim: usize) -> Self {
        Self::new(vec![
            (Mode::Cavity, dim),
            (Mode::Aux1, dim),
            (Mode::Aux2, dim),
            (Mode::Mech1, dim),
            (Mode::Mech2, dim),
        ])
        .expect("valid layout")
    }

    pub fn modes(&self) -> &[(Mode, usize)] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Total Hilbert-space dimension (product of local dimensions).
    pub fn dim(&self) -> usize {
        self.modes.iter().map(|&(_, d)| d).product()
    }

    pub fn contains(&self, mode: Mode) -> bool {
        self.position(mode).is_some()
    }

    pub fn position(&self, mode: Mode) -> Option<usize> {
        self.modes.iter().position(|&(m, _)| m == mode)
    }

    pub fn local_dim(&self, mode: Mode) -> Option<usize> {
        self.modes
            .iter()
            .find(|&&(m, _)| m == mode)
            .map(|&(_, d)| d)
    }

    /// Stride of a mode in the composite index (first mode most significant).
    fn stride(&self, pos: usize) -> usize {
        self.modes[pos + 1..].iter().map(|&(_, d)| d).product()
    }

    /// Composite index of the basis state with the given occupations, listed
    /// in layout order.
    pub fn basis_index(&self, occ: &[usize]) -> Result<usize, FockError> {
        if occ.len() != self.modes.len() {
            return Err(FockError::OccupationLength {
                got: occ.len(),
                want: self.modes.len(),
            });
        }
        let mut idx = 0;
        for (&(m, d), &n) in self.modes.iter().zip(occ) {
            if n >= d {
                return Err(FockError::OccupationOutOfRange { mode: m, occ: n });
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    /// Occupations of the basis state at the given composite index.
    pub fn occupations(&self, mut idx: usize) -> Vec<usize> {
        let mut occ = vec![0; self.modes.len()];
        for (pos, &(_, d)) in self.modes.iter().enumerate().rev() {
            occ[pos] = idx % d;
            idx /= d;
        }
        occ
    }
}

/// Primitive factor in an operator product: a lowering or raising operator on
/// one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockOp {
    Lower(Mode),
    Raise(Mode),
}

/// Dense operator on a composite truncated Fock space. Entries are
/// dimensionless (energies in units of the mechanical frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: ModeLayout,
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn new(layout: ModeLayout, mat: DMatrix<C64>) -> Result<Self, FockError> {
        let dim = layout.dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(FockError::DimensionMismatch {
                got: mat.nrows(),
                want: dim,
            });
        }
        Ok(Self { layout, mat })
    }

    pub fn zeros(layout: &ModeLayout) -> Self {
        let dim = layout.dim();
        Self {
            layout: layout.clone(),
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(layout: &ModeLayout) -> Self {
        let dim = layout.dim();
        Self {
            layout: layout.clone(),
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            mat: self.mat.adjoint(),
        }
    }

    /// Largest absolute entry of `H - H^dag`.
    pub fn hermiticity_defect(&self) -> f64 {
        let diff = &self.mat - self.mat.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            layout: self.layout.clone(),
            mat: &self.mat * c,
        }
    }

    fn check_layout(&self, other: &Self) -> Result<(), FockError> {
        if self.layout != other.layout {
            return Err(FockError::LayoutMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FockError> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            mat: &self.mat + &other.mat,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FockError> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            mat: &self.mat * &other.mat,
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self, FockError> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        })
    }

    /// Annihilation operator of `mode`, embedded by tensor product with
    /// identities on the other modes: `<n-1| b |n> = sqrt(n)`.
    pub fn ladder(layout: &ModeLayout, mode: Mode) -> Result<Self, FockError> {
        let pos = layout.position(mode).ok_or(FockError::UnknownMode(mode))?;
        let dim = layout.dim();
        let (_, d) = layout.modes()[pos];
        let stride = layout.stride(pos);
        let block = stride * d;
        let mut mat = DMatrix::<C64>::zeros(dim, dim);
        for base in (0..dim).step_by(block) {
            for n in 1..d {
                let amp = C64::new((n as f64).sqrt(), 0.0);
                for offset in 0..stride {
                    let col = base + n * stride + offset;
                    let row = base + (n - 1) * stride + offset;
                    mat[(row, col)] = amp;
                }
            }
        }
        Ok(Self {
            layout: layout.clone(),
            mat,
        })
    }

    /// Creation operator of `mode` (adjoint of [`Operator::ladder`]).
    pub fn raising(layout: &ModeLayout, mode: Mode) -> Result<Self, FockError> {
        Ok(Self::ladder(layout, mode)?.adjoint())
    }

    /// Number operator `b^dag b` of `mode`.
    pub fn number(layout: &ModeLayout, mode: Mode) -> Result<Self, FockError> {
        let pos = layout.position(mode).ok_or(FockError::UnknownMode(mode))?;
        let dim = layout.dim();
        let (_, d) = layout.modes()[pos];
        let stride = layout.stride(pos);
        let mut mat = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            let n = (i / stride) % d;
            mat[(i, i)] = C64::new(n as f64, 0.0);
        }
        Ok(Self {
            layout: layout.clone(),
            mat,
        })
    }

    /// Embed a single-mode matrix (local dimension of `mode`) into the
    /// composite space.
    pub fn embed_mode_matrix(
        layout: &ModeLayout,
        mode: Mode,
        local: &DMatrix<C64>,
    ) -> Result<Self, FockError> {
        let pos = layout.position(mode).ok_or(FockError::UnknownMode(mode))?;
        let (_, d) = layout.modes()[pos];
        if local.nrows() != d || local.ncols() != d {
            return Err(FockError::DimensionMismatch {
                got: local.nrows(),
                want: d,
            });
        }
        let dim = layout.dim();
        let stride = layout.stride(pos);
        let block = stride * d;
        let mut mat = DMatrix::<C64>::zeros(dim, dim);
        for base in (0..dim).step_by(block) {
            for m in 0..d {
                for n in 0..d {
                    let v = local[(m, n)];
                    if v != C64::new(0.0, 0.0) {
                        for offset in 0..stride {
                            mat[(base + m * stride + offset, base + n * stride + offset)] = v;
                        }
                    }
                }
            }
        }
        Ok(Self {
            layout: layout.clone(),
            mat,
        })
    }

    /// Embed a 2x2 gate into the `{|0>, |1>}` subspace of `mode`, acting as
    /// the identity on any higher truncated levels.
    pub fn embed_qubit_gate(
        layout: &ModeLayout,
        mode: Mode,
        gate: &Matrix2<C64>,
    ) -> Result<Self, FockError> {
        let d = layout.local_dim(mode).ok_or(FockError::UnknownMode(mode))?;
        let mut local = DMatrix::<C64>::identity(d, d);
        for m in 0..2 {
            for n in 0..2 {
                local[(m, n)] = gate[(m, n)];
            }
        }
        Self::embed_mode_matrix(layout, mode, &local)
    }

    /// Diagonal phase `exp(i phi n)` on `mode`.
    pub fn number_phase(layout: &ModeLayout, mode: Mode, phi: f64) -> Result<Self, FockError> {
        let d = layout.local_dim(mode).ok_or(FockError::UnknownMode(mode))?;
        let local = DMatrix::from_diagonal(&DVector::from_fn(d, |n, _| {
            C64::from_polar(1.0, phi * n as f64)
        }));
        Self::embed_mode_matrix(layout, mode, &local)
    }

    /// Controlled phase flip: `-1` on every basis state in which all listed
    /// modes hold exactly one excitation.
    pub fn controlled_phase_flip(layout: &ModeLayout, modes: &[Mode]) -> Result<Self, FockError> {
        let mut positions = Vec::with_capacity(modes.len());
        for &m in modes {
            positions.push(layout.position(m).ok_or(FockError::UnknownMode(m))?);
        }
        let dim = layout.dim();
        let mut mat = DMatrix::<C64>::identity(dim, dim);
        for i in 0..dim {
            let occ = layout.occupations(i);
            if positions.iter().all(|&p| occ[p] == 1) {
                mat[(i, i)] = C64::new(-1.0, 0.0);
            }
        }
        Ok(Self {
            layout: layout.clone(),
            mat,
        })
    }

    /// Exchange the occupations of two modes of equal local dimension.
    pub fn swap(layout: &ModeLayout, m1: Mode, m2: Mode) -> Result<Self, FockError> {
        let p1 = layout.position(m1).ok_or(FockError::UnknownMode(m1))?;
        let p2 = layout.position(m2).ok_or(FockError::UnknownMode(m2))?;
        if layout.modes()[p1].1 != layout.modes()[p2].1 {
            return Err(FockError::SwapDimensionMismatch(m1, m2));
        }
        let dim = layout.dim();
        let mut mat = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            let mut occ = layout.occupations(i);
            occ.swap(p1, p2);
            let j = layout
                .basis_index(&occ)
                .expect("permuted occupations stay in range");
            mat[(j, i)] = C64::new(1.0, 0.0);
        }
        Ok(Self {
            layout: layout.clone(),
            mat,
        })
    }
}

/// Build `sum_i c_i prod_j O_ij` from primitive ladder factors. Products are
/// applied right to left, matching operator notation.
pub fn compose(layout: &ModeLayout, terms: &[(C64, Vec<FockOp>)]) -> Result<Operator, FockError> {
    let mut acc = Operator::zeros(layout);
    for (coeff, factors) in terms {
        let mut term = Operator::identity(layout);
        for &f in factors.iter().rev() {
            let factor = match f {
                FockOp::Lower(m) => Operator::ladder(layout, m)?,
                FockOp::Raise(m) => Operator::raising(layout, m)?,
            };
            term = factor.mul(&term)?;
        }
        acc = acc.add(&term.scale(*coeff))?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
enum StateData {
    Vector(DVector<C64>),
    Density(DMatrix<C64>),
}

/// Pure state vector or density matrix on a [`ModeLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    layout: ModeLayout,
    data: StateData,
}

impl QuantumState {
    /// Basis state with the given occupations (layout order).
    pub fn basis_state(layout: &ModeLayout, occ: &[usize]) -> Result<Self, FockError> {
        let idx = layout.basis_index(occ)?;
        let mut v = DVector::zeros(layout.dim());
        v[idx] = C64::new(1.0, 0.0);
        Ok(Self {
            layout: layout.clone(),
            data: StateData::Vector(v),
        })
    }

    /// Wrap an already-normalized state vector (norm within 1e-10 of 1).
    pub fn from_vector(layout: &ModeLayout, v: DVector<C64>) -> Result<Self, FockError> {
        if v.len() != layout.dim() {
            return Err(FockError::DimensionMismatch {
                got: v.len(),
                want: layout.dim(),
            });
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(FockError::NotNormalized(norm));
        }
        Ok(Self {
            layout: layout.clone(),
            data: StateData::Vector(v),
        })
    }

    /// Normalize arbitrary amplitudes into a state vector.
    pub fn from_amplitudes(layout: &ModeLayout, v: DVector<C64>) -> Result<Self, FockError> {
        if v.len() != layout.dim() {
            return Err(FockError::DimensionMismatch {
                got: v.len(),
                want: layout.dim(),
            });
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(FockError::NotNormalized(0.0));
        }
        Ok(Self {
            layout: layout.clone(),
            data: StateData::Vector(v / C64::new(norm, 0.0)),
        })
    }

    /// Wrap a density matrix; it must be Hermitian, unit trace within 1e-8,
    /// and have no eigenvalue below -1e-8.
    pub fn from_density(layout: &ModeLayout, m: DMatrix<C64>) -> Result<Self, FockError> {
        if m.nrows() != layout.dim() || m.ncols() != layout.dim() {
            return Err(FockError::DimensionMismatch {
                got: m.nrows(),
                want: layout.dim(),
            });
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > 1e-8 || trace.im.abs() > 1e-8 {
            return Err(FockError::InvalidDensity(format!("trace {trace} is not 1")));
        }
        let herm = (&m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > 1e-8 {
            return Err(FockError::InvalidDensity(format!(
                "hermiticity defect {herm:.3e}"
            )));
        }
        let min_eig = m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_eig < -1e-8 {
            return Err(FockError::InvalidDensity(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self {
            layout: layout.clone(),
            data: StateData::Density(m),
        })
    }

    /// Density matrix without the validity checks. For internal use on states
    /// produced by trusted numerics (partial traces, integrator output).
    pub(crate) fn density_unchecked(layout: ModeLayout, m: DMatrix<C64>) -> Self {
        Self {
            layout,
            data: StateData::Density(m),
        }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn is_vector(&self) -> bool {
        matches!(self.data, StateData::Vector(_))
    }

    pub fn vector(&self) -> Option<&DVector<C64>> {
        match &self.data {
            StateData::Vector(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    /// The state as a density matrix (pure states are promoted).
    pub fn density(&self) -> DMatrix<C64> {
        match &self.data {
            StateData::Vector(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        }
    }

    pub fn trace(&self) -> C64 {
        match &self.data {
            StateData::Vector(v) => C64::new(v.norm_squared(), 0.0),
            StateData::Density(m) => m.trace(),
        }
    }

    /// Apply a unitary (or any operator) to the state.
    pub fn apply(&self, op: &Operator) -> Result<Self, FockError> {
        if op.layout() != &self.layout {
            return Err(FockError::LayoutMismatch);
        }
        let data = match &self.data {
            StateData::Vector(v) => StateData::Vector(op.matrix() * v),
            StateData::Density(m) => StateData::Density(op.matrix() * m * op.matrix().adjoint()),
        };
        Ok(Self {
            layout: self.layout.clone(),
            data,
        })
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64, FockError> {
        if op.layout() != &self.layout {
            return Err(FockError::LayoutMismatch);
        }
        Ok(match &self.data {
            StateData::Vector(v) => (v.adjoint() * op.matrix() * v)[(0, 0)],
            StateData::Density(m) => (op.matrix() * m).trace(),
        })
    }

    /// Reduced density matrix on the retained modes (layout order preserved).
    /// Pure states are promoted internally; the trace is preserved exactly up
    /// to rounding.
    pub fn partial_trace(&self, keep: &[Mode]) -> Result<QuantumState, FockError> {
        if keep.is_empty() {
            return Err(FockError::EmptyKeep);
        }
        let mut keep_pos: Vec<usize> = Vec::with_capacity(keep.len());
        for &m in keep {
            let p = self.layout.position(m).ok_or(FockError::UnknownMode(m))?;
            if keep_pos.contains(&p) {
                return Err(FockError::DuplicateMode(m));
            }
            keep_pos.push(p);
        }
        keep_pos.sort_unstable();
        let trace_pos: Vec<usize> = (0..self.layout.n_modes())
            .filter(|p| !keep_pos.contains(p))
            .collect();

        let kept_modes: Vec<(Mode, usize)> =
            keep_pos.iter().map(|&p| self.layout.modes()[p]).collect();
        let red_layout = ModeLayout::new(kept_modes)?;
        let red_dim = red_layout.dim();
        let traced_dim: usize = trace_pos
            .iter()
            .map(|&p| self.layout.modes()[p].1)
            .product();

        let rho = self.density();
        // composite index from (kept multi-index, traced multi-index)
        let full_index = |kept: usize, traced: usize| -> usize {
            let mut occ = vec![0usize; self.layout.n_modes()];
            let mut k = kept;
            for &p in keep_pos.iter().rev() {
                let d = self.layout.modes()[p].1;
                occ[p] = k % d;
                k /= d;
            }
            let mut t = traced;
            for &p in trace_pos.iter().rev() {
                let d = self.layout.modes()[p].1;
                occ[p] = t % d;
                t /= d;
            }
            self.layout.basis_index(&occ).expect("in range")
        };

        let mut red = DMatrix::<C64>::zeros(red_dim, red_dim);
        for i in 0..red_dim {
            for j in 0..red_dim {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..traced_dim {
                    acc += rho[(full_index(i, r), full_index(j, r))];
                }
                red[(i, j)] = acc;
            }
        }
        Ok(QuantumState::density_unchecked(red_layout, red))
    }
}

/// State fidelity. Pure-pure: `|<psi1|psi2>|`; pure-mixed (either order):
/// `sqrt(<psi| rho |psi>)`. Mixed-mixed is not supported.
pub fn fidelity(s1: &QuantumState, s2: &QuantumState) -> Result<f64, FockError> {
    if s1.layout != s2.layout {
        return Err(FockError::LayoutMismatch);
    }
    match (&s1.data, &s2.data) {
        (StateData::Vector(v1), StateData::Vector(v2)) => Ok(v1.dotc(v2).norm()),
        (StateData::Vector(v), StateData::Density(m))
        | (StateData::Density(m), StateData::Vector(v)) => {
            let ev = (v.adjoint() * m * v)[(0, 0)].re;
            Ok(ev.max(0.0).sqrt().min(1.0))
        }
        (StateData::Density(_), StateData::Density(_)) => Err(FockError::MixedMixedFidelity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ladder_qubit_truncation() {
        let layout = ModeLayout::new(vec![(Mode::Cavity, 2)]).unwrap();
        let b = Operator::ladder(&layout, Mode::Cavity).unwrap();
        assert_eq!(b.matrix()[(0, 1)], c(1.0, 0.0));
        assert_eq!(b.matrix()[(0, 0)], c(0.0, 0.0));
        assert_eq!(b.matrix()[(1, 0)], c(0.0, 0.0));
        assert_eq!(b.matrix()[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn ladder_sqrt_matrix_element() {
        let layout = ModeLayout::new(vec![(Mode::Mech1, 3)]).unwrap();
        let b = Operator::ladder(&layout, Mode::Mech1).unwrap();
        assert_abs_diff_eq!(b.matrix()[(1, 2)].re, 2.0_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn ladder_two_mode_embedding() {
        // layout (2,2), ladder on the second mode: <00| B |01> = 1
        let layout = ModeLayout::new(vec![(Mode::Cavity, 2), (Mode::Mech1, 2)]).unwrap();
        let b = Operator::ladder(&layout, Mode::Mech1).unwrap();
        let row = layout.basis_index(&[0, 0]).unwrap();
        let col = layout.basis_index(&[0, 1]).unwrap();
        assert_eq!(b.matrix()[(row, col)], c(1.0, 0.0));
        // hand Kronecker product I (x) b
        let mut expect = DMatrix::<C64>::zeros(4, 4);
        expect[(0, 1)] = c(1.0, 0.0);
        expect[(2, 3)] = c(1.0, 0.0);
        assert_eq!(b.matrix(), &expect);
    }

    #[test]
    fn ladder_unknown_mode_errors() {
        let layout = ModeLayout::new(vec![(Mode::Cavity, 2)]).unwrap();
        assert!(matches!(
            Operator::ladder(&layout, Mode::Mech2),
            Err(FockError::UnknownMode(Mode::Mech2))
        ));
    }

    #[test]
    fn compose_number_operator() {
        for dim in [2usize, 3] {
            let layout = ModeLayout::new(vec![(Mode::Cavity, dim)]).unwrap();
            let n = compose(
                &layout,
                &[(
                    c(1.0, 0.0),
                    vec![FockOp::Raise(Mode::Cavity), FockOp::Lower(Mode::Cavity)],
                )],
            )
            .unwrap();
            for k in 0..dim {
                assert_abs_diff_eq!(n.matrix()[(k, k)].re, k as f64, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn compose_symmetry_combinations() {
        let layout = ModeLayout::new(vec![(Mode::Cavity, 4)]).unwrap();
        // a - a^dag is anti-Hermitian; i(a - a^dag) is the Hermitian
        // momentum quadrature
        let x = compose(
            &layout,
            &[
                (c(1.0, 0.0), vec![FockOp::Lower(Mode::Cavity)]),
                (c(-1.0, 0.0), vec![FockOp::Raise(Mode::Cavity)]),
            ],
        )
        .unwrap();
        let sum = x.add(&x.adjoint()).unwrap();
        assert!(sum.matrix().iter().all(|z| z.norm() == 0.0));
        let p = x.scale(c(0.0, 1.0));
        assert!(p.hermiticity_defect() == 0.0);
    }

    #[test]
    fn commutator_identity_below_truncation() {
        // [b, b^dag] restricted below the top level equals the identity there
        let layout = ModeLayout::new(vec![(Mode::Mech1, 5)]).unwrap();
        let b = Operator::ladder(&layout, Mode::Mech1).unwrap();
        let comm = b.commutator(&b.adjoint()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(comm.matrix()[(i, j)].re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(comm.matrix()[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ladders_commute_across_modes() {
        let layout =
            ModeLayout::new(vec![(Mode::Cavity, 3), (Mode::Mech1, 2), (Mode::Mech2, 2)]).unwrap();
        let b1 = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let b2 = Operator::ladder(&layout, Mode::Mech2).unwrap();
        let c1 = b1.commutator(&b2).unwrap();
        let c2 = b1.commutator(&b2.adjoint()).unwrap();
        let max1 = c1.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let max2 = c2.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(max1 <= 1e-12 && max2 <= 1e-12);
    }

    #[test]
    fn partial_trace_product_state() {
        let layout = ModeLayout::new(vec![(Mode::Cavity, 2), (Mode::Mech1, 2)]).unwrap();
        let psi = QuantumState::basis_state(&layout, &[0, 1]).unwrap();
        let red = psi.partial_trace(&[Mode::Cavity]).unwrap();
        let rho = red.density();
        assert_abs_diff_eq!(rho[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[(1, 1)].re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let layout = ModeLayout::new(vec![(Mode::Cavity, 2), (Mode::Mech1, 2)]).unwrap();
        let mut v = DVector::zeros(4);
        v[layout.basis_index(&[0, 0]).unwrap()] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[layout.basis_index(&[1, 1]).unwrap()] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = QuantumState::from_vector(&layout, v).unwrap();
        let red = bell.partial_trace(&[Mode::Cavity]).unwrap();
        let rho = red.density();
        assert_abs_diff_eq!(rho[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[(1, 1)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[(0, 1)].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_keeps_everything() {
        let layout = ModeLayout::new(vec![(Mode::Cavity, 2), (Mode::Mech1, 3)]).unwrap();
        let mut v = DVector::zeros(6);
        v[0] = c(0.6, 0.0);
        v[4] = c(0.0, 0.8);
        let psi = QuantumState::from_vector(&layout, v).unwrap();
        let full = psi.partial_trace(&[Mode::Cavity, Mode::Mech1]).unwrap();
        let diff = (full.density() - psi.density())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff == 0.0);
        assert_abs_diff_eq!(full.trace().re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn partial_trace_empty_keep_errors() {
        let layout = ModeLayout::new(vec![(Mode::Cavity, 2)]).unwrap();
        let psi = QuantumState::basis_state(&layout, &[0]).unwrap();
        assert!(matches!(psi.partial_trace(&[]), Err(FockError::EmptyKeep)));
    }

    #[test]
    fn fidelity_examples() {
        let layout = ModeLayout::new(vec![(Mode::Cavity, 2)]).unwrap();
        let zero = QuantumState::basis_state(&layout, &[0]).unwrap();
        let one = QuantumState::basis_state(&layout, &[1]).unwrap();
        assert_abs_diff_eq!(fidelity(&zero, &zero).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fidelity(&zero, &one).unwrap(), 0.0, epsilon = 1e-15);
        // |0> against the maximally mixed state: sqrt(1/2)
        let mixed = QuantumState::from_density(
            &layout,
            DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5, 0.0), c(0.5, 0.0)])),
        )
        .unwrap();
        assert_abs_diff_eq!(
            fidelity(&zero, &mixed).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        // symmetric in arguments
        assert_abs_diff_eq!(
            fidelity(&mixed, &zero).unwrap(),
            fidelity(&zero, &mixed).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn fidelity_layout_mismatch_errors() {
        let l1 = ModeLayout::new(vec![(Mode::Cavity, 2)]).unwrap();
        let l2 = ModeLayout::new(vec![(Mode::Mech1, 2)]).unwrap();
        let s1 = QuantumState::basis_state(&l1, &[0]).unwrap();
        let s2 = QuantumState::basis_state(&l2, &[0]).unwrap();
        assert!(matches!(fidelity(&s1, &s2), Err(FockError::LayoutMismatch)));
    }

    #[test]
    fn layout_rejects_duplicates_and_bad_dims() {
        assert!(matches!(
            ModeLayout::new(vec![(Mode::Cavity, 2), (Mode::Cavity, 2)]),
            Err(FockError::DuplicateMode(Mode::Cavity))
        ));
        assert!(matches!(
            ModeLayout::new(vec![(Mode::Cavity, 1)]),
            Err(FockError::BadDimension(1))
        ));
    }

    #[test]
    fn controlled_phase_flip_matches_marker_table() {
        let layout = ModeLayout::three_mode(2);
        let cz = Operator::controlled_phase_flip(&layout, &[Mode::Cavity, Mode::Mech1]).unwrap();
        // -1 exactly on |110> and |111>
        for i in 0..8 {
            let occ = layout.occupations(i);
            let expect = if occ[0] == 1 && occ[1] == 1 {
                -1.0
            } else {
                1.0
            };
            assert_eq!(cz.matrix()[(i, i)].re, expect);
        }
    }

    #[test]
    fn swap_exchanges_occupations() {
        let layout = ModeLayout::three_mode(2);
        let sw = Operator::swap(&layout, Mode::Cavity, Mode::Mech1).unwrap();
        let psi = QuantumState::basis_state(&layout, &[1, 0, 1]).unwrap();
        let out = psi.apply(&sw).unwrap();
        let expect = QuantumState::basis_state(&layout, &[0, 1, 1]).unwrap();
        assert_abs_diff_eq!(fidelity(&out, &expect).unwrap(), 1.0, epsilon = 1e-15);
    }
}
