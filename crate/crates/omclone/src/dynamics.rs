//! Time evolution engines: exact unitary propagation by eigendecomposition,
//! Lindblad master-equation integration with piecewise-constant generators,
//! and the vectorized-Liouvillian steady state used as a test oracle.

use crate::fock::{FockError, ModeLayout, Operator, QuantumState};
use crate::ode::{self, OdeError, OdeStats, Tolerance};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("Hamiltonian is not Hermitian (defect {0:.3e})")]
    NonHermitian(f64),
    #[error("unitary evolution needs a pure state vector")]
    StateNotVector,
    #[error("collapse rate {0} is negative")]
    NegativeRate(f64),
    #[error("record times must be sorted and lie within [0, {total:.6}]")]
    BadRecordTimes { total: f64 },
    #[error("segment duration {0} is negative")]
    NegativeDuration(f64),
    #[error("evolution spec has no segments")]
    EmptySpec,
    #[error("steady-state solver limited to dimension <= {max}, got {got}")]
    SteadyStateTooLarge { got: usize, max: usize },
    #[error("Liouvillian null space is degenerate (second singular value {0:.3e})")]
    DegenerateSteadyState(f64),
    #[error(
        "integration failed: {source} (steps {steps}, rejected {rejected}, rhs evals {rhs_evals})"
    )]
    IntegrationFailure {
        source: OdeError,
        steps: usize,
        rejected: usize,
        rhs_evals: usize,
    },
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// A Lindblad channel: collapse operator and its rate.
#[derive(Debug, Clone)]
pub struct CollapseChannel {
    pub operator: Operator,
    pub rate: f64,
}

impl CollapseChannel {
    pub fn new(operator: Operator, rate: f64) -> Self {
        Self { operator, rate }
    }
}

/// One piecewise-constant stretch of an evolution: a Hamiltonian, its
/// collapse channels, a duration, and ideal unitaries applied instantaneously
/// at the segment end (the model's perfect single-mode gates).
#[derive(Debug, Clone)]
pub struct Segment {
    pub hamiltonian: Operator,
    pub channels: Vec<CollapseChannel>,
    pub duration: f64,
    pub end_unitaries: Vec<Operator>,
}

impl Segment {
    pub fn new(hamiltonian: Operator, channels: Vec<CollapseChannel>, duration: f64) -> Self {
        Self {
            hamiltonian,
            channels,
            duration,
            end_unitaries: Vec::new(),
        }
    }

    pub fn with_end_unitaries(mut self, gates: Vec<Operator>) -> Self {
        self.end_unitaries = gates;
        self
    }
}

/// Master-equation evolution request.
#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub segments: Vec<Segment>,
    pub tolerance: Tolerance,
    /// Absolute times (from the start of the first segment) at which to
    /// record the state. Must be sorted and within the total duration.
    pub record_times: Vec<f64>,
    /// Step budget for the adaptive integrator.
    pub max_steps: usize,
}

impl EvolutionSpec {
    pub fn new(segments: Vec<Segment>, tolerance: Tolerance) -> Self {
        Self {
            segments,
            tolerance,
            record_times: Vec::new(),
            max_steps: 10_000_000,
        }
    }

    /// Single-segment spec with a constant generator.
    pub fn constant(
        hamiltonian: Operator,
        channels: Vec<CollapseChannel>,
        t_end: f64,
        tolerance: Tolerance,
    ) -> Self {
        Self::new(vec![Segment::new(hamiltonian, channels, t_end)], tolerance)
    }

    pub fn with_record_times(mut self, times: Vec<f64>) -> Self {
        self.record_times = times;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    fn validate(&self) -> Result<(), DynamicsError> {
        if self.segments.is_empty() {
            return Err(DynamicsError::EmptySpec);
        }
        for seg in &self.segments {
            if seg.duration < 0.0 {
                return Err(DynamicsError::NegativeDuration(seg.duration));
            }
            for ch in &seg.channels {
                if ch.rate < 0.0 {
                    return Err(DynamicsError::NegativeRate(ch.rate));
                }
            }
        }
        let total = self.total_duration();
        let sorted = self.record_times.windows(2).all(|w| w[0] <= w[1]);
        let in_range = self
            .record_times
            .iter()
            .all(|&t| t >= 0.0 && t <= total + 1e-12 * total.max(1.0));
        if !sorted || !in_range {
            return Err(DynamicsError::BadRecordTimes { total });
        }
        Ok(())
    }
}

/// Integrator and state-quality diagnostics for a finished evolution.
#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    /// Largest |tr rho - 1| seen at recorded times and the final state.
    pub trace_drift: f64,
    /// Hermiticity defect of the final state.
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of the final state (negative values flag, but do
    /// not fail, a run).
    pub min_eigenvalue: f64,
    pub positivity_ok: bool,
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Conservative accumulated local-error estimate from the integrator.
    pub error_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    /// States at the requested record times.
    pub states: Vec<QuantumState>,
    pub final_state: QuantumState,
    pub diagnostics: Diagnostics,
}

/// Exact propagation `exp(-i H t) |psi>` through the eigendecomposition of a
/// time-independent Hermitian `H`.
pub struct UnitaryPropagator {
    layout: ModeLayout,
    eigvals: DVector<f64>,
    eigvecs: DMatrix<C64>,
}

const HERMITICITY_TOL: f64 = 1e-9;

impl UnitaryPropagator {
    pub fn new(h: &Operator) -> Result<Self, DynamicsError> {
        let defect = h.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(DynamicsError::NonHermitian(defect));
        }
        let eig = h.matrix().clone().symmetric_eigen();
        Ok(Self {
            layout: h.layout().clone(),
            eigvals: eig.eigenvalues,
            eigvecs: eig.eigenvectors,
        })
    }

    pub fn propagate(&self, psi0: &QuantumState, t: f64) -> Result<QuantumState, DynamicsError> {
        let v = psi0.vector().ok_or(DynamicsError::StateNotVector)?;
        if psi0.layout() != &self.layout {
            return Err(DynamicsError::Fock(FockError::LayoutMismatch));
        }
        let mut coeffs = self.eigvecs.adjoint() * v;
        for (c, &e) in coeffs.iter_mut().zip(self.eigvals.iter()) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        let out = &self.eigvecs * coeffs;
        Ok(QuantumState::from_amplitudes(&self.layout, out)?)
    }
}

/// One-shot `exp(-i H t) |psi0>`; norm is preserved by construction.
pub fn evolve_unitary(
    h: &Operator,
    psi0: &QuantumState,
    t: f64,
) -> Result<QuantumState, DynamicsError> {
    UnitaryPropagator::new(h)?.propagate(psi0, t)
}

struct PreparedChannel {
    rate: f64,
    l: DMatrix<C64>,
    l_dag: DMatrix<C64>,
    l_dag_l: DMatrix<C64>,
}

struct MasterRhs {
    h: DMatrix<C64>,
    ls: Vec<PreparedChannel>,
    rho: DMatrix<C64>,
    tmp: DMatrix<C64>,
    out: DMatrix<C64>,
}

impl MasterRhs {
    fn new(seg: &Segment) -> Self {
        let dim = seg.hamiltonian.layout().dim();
        let ls = seg
            .channels
            .iter()
            .filter(|c| c.rate > 0.0)
            .map(|c| {
                let l = c.operator.matrix().clone();
                let l_dag = l.adjoint();
                let l_dag_l = &l_dag * &l;
                PreparedChannel {
                    rate: c.rate,
                    l,
                    l_dag,
                    l_dag_l,
                }
            })
            .collect();
        Self {
            h: seg.hamiltonian.matrix().clone(),
            ls,
            rho: DMatrix::zeros(dim, dim),
            tmp: DMatrix::zeros(dim, dim),
            out: DMatrix::zeros(dim, dim),
        }
    }

    /// drho/dt = -i[H, rho] + sum_k r_k (L rho L^dag - {L^dag L, rho}/2)
    fn eval(&mut self, y: &DVector<C64>, dy: &mut DVector<C64>) {
        self.rho.as_mut_slice().copy_from_slice(y.as_slice());
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        self.out.gemm(-i, &self.h, &self.rho, zero);
        self.out.gemm(i, &self.rho, &self.h, one);
        for ch in &self.ls {
            let r = C64::new(ch.rate, 0.0);
            self.tmp.gemm(one, &ch.l, &self.rho, zero);
            self.out.gemm(r, &self.tmp, &ch.l_dag, one);
            let half = C64::new(-ch.rate / 2.0, 0.0);
            self.out.gemm(half, &ch.l_dag_l, &self.rho, one);
            self.out.gemm(half, &self.rho, &ch.l_dag_l, one);
        }
        dy.as_mut_slice().copy_from_slice(self.out.as_slice());
    }
}

/// Integrate the Lindblad master equation over the spec's segments, applying
/// each segment's ideal end unitaries at its boundary with state continuity.
pub fn evolve_master(
    spec: &EvolutionSpec,
    rho0: &QuantumState,
) -> Result<EvolutionResult, DynamicsError> {
    spec.validate()?;
    let layout = rho0.layout().clone();
    for seg in &spec.segments {
        if seg.hamiltonian.layout() != &layout {
            return Err(DynamicsError::Fock(FockError::LayoutMismatch));
        }
        let defect = seg.hamiltonian.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(DynamicsError::NonHermitian(defect));
        }
        for ch in &seg.channels {
            if ch.operator.layout() != &layout {
                return Err(DynamicsError::Fock(FockError::LayoutMismatch));
            }
        }
    }

    let dim = layout.dim();
    let mut rho = rho0.density();
    let mut states: Vec<QuantumState> = Vec::with_capacity(spec.record_times.len());
    let mut trace_drift: f64 = (rho.trace().re - 1.0).abs();
    let mut totals = OdeStats::default();

    let mut t_base = 0.0;
    let mut rec_idx = 0usize;
    let eps = 1e-12 * spec.total_duration().max(1.0);
    for seg in &spec.segments {
        let t_end = t_base + seg.duration;
        // record times inside this segment (boundary times belong to the
        // segment that ends there, after its end gates)
        let mut local: Vec<f64> = Vec::new();
        let mut local_global: Vec<f64> = Vec::new();
        let mut k = rec_idx;
        while k < spec.record_times.len() && spec.record_times[k] < t_end - eps {
            if spec.record_times[k] >= t_base - eps {
                local.push((spec.record_times[k] - t_base).max(0.0));
                local_global.push(spec.record_times[k]);
            }
            k += 1;
        }

        if seg.duration > 0.0 {
            let mut rhs = MasterRhs::new(seg);
            let y0 = DVector::from_column_slice(rho.as_slice());
            let mut recorded: Vec<DVector<C64>> = Vec::with_capacity(local.len());
            let result = ode::integrate(
                |_t, y, dy| rhs.eval(y, dy),
                y0,
                0.0,
                seg.duration,
                spec.tolerance,
                spec.max_steps,
                &local,
                |_t, y| recorded.push(y.clone()),
            );
            let (y_end, stats) = result.map_err(|source| DynamicsError::IntegrationFailure {
                source,
                steps: totals.steps,
                rejected: totals.rejected,
                rhs_evals: totals.rhs_evals,
            })?;
            totals.steps += stats.steps;
            totals.rejected += stats.rejected;
            totals.rhs_evals += stats.rhs_evals;
            totals.error_estimate += stats.error_estimate;
            for y in &recorded {
                let m = DMatrix::from_column_slice(dim, dim, y.as_slice());
                trace_drift = trace_drift.max((m.trace().re - 1.0).abs());
                states.push(QuantumState::density_unchecked(layout.clone(), m));
            }
            rho = DMatrix::from_column_slice(dim, dim, y_end.as_slice());
        } else {
            for _ in &local {
                states.push(QuantumState::density_unchecked(layout.clone(), rho.clone()));
            }
        }
        rec_idx = k;

        for gate in &seg.end_unitaries {
            if gate.layout() != &layout {
                return Err(DynamicsError::Fock(FockError::LayoutMismatch));
            }
            rho = gate.matrix() * rho * gate.matrix().adjoint();
        }
        // boundary record times get the post-gate state
        while rec_idx < spec.record_times.len() && spec.record_times[rec_idx] <= t_end + eps {
            trace_drift = trace_drift.max((rho.trace().re - 1.0).abs());
            states.push(QuantumState::density_unchecked(layout.clone(), rho.clone()));
            rec_idx += 1;
        }
        t_base = t_end;
    }

    trace_drift = trace_drift.max((rho.trace().re - 1.0).abs());
    let herm = (&rho - rho.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let sym = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let min_eig = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let diagnostics = Diagnostics {
        trace_drift,
        hermiticity_defect: herm,
        min_eigenvalue: min_eig,
        positivity_ok: min_eig >= -1e-8,
        steps: totals.steps,
        rejected: totals.rejected,
        rhs_evals: totals.rhs_evals,
        error_estimate: totals.error_estimate,
    };
    Ok(EvolutionResult {
        states,
        final_state: QuantumState::density_unchecked(layout, rho),
        diagnostics,
    })
}

const STEADY_STATE_MAX_DIM: usize = 64;

/// Dense column-stacked Liouvillian matrix of `H` and the channels:
/// `vec(drho/dt) = L vec(rho)`.
pub fn liouvillian_matrix(
    h: &Operator,
    channels: &[CollapseChannel],
) -> Result<DMatrix<C64>, DynamicsError> {
    let dim = h.layout().dim();
    let n2 = dim * dim;
    let id = DMatrix::<C64>::identity(dim, dim);
    let i = C64::new(0.0, 1.0);
    // column-stacking: vec(A X B) = (B^T kron A) vec(X)
    let kron = |a: &DMatrix<C64>, b: &DMatrix<C64>| a.kronecker(b);
    let mut l_mat = kron(&id, h.matrix()) * (-i) + kron(&h.matrix().transpose(), &id) * i;
    for ch in channels {
        if ch.rate < 0.0 {
            return Err(DynamicsError::NegativeRate(ch.rate));
        }
        if ch.operator.layout() != h.layout() {
            return Err(DynamicsError::Fock(FockError::LayoutMismatch));
        }
        let lm = ch.operator.matrix();
        let ldl = lm.adjoint() * lm;
        let r = C64::new(ch.rate, 0.0);
        l_mat += kron(&lm.conjugate(), lm) * r;
        l_mat -= kron(&id, &ldl) * (r * 0.5);
        l_mat -= kron(&ldl.transpose(), &id) * (r * 0.5);
    }
    debug_assert_eq!(l_mat.nrows(), n2);
    Ok(l_mat)
}

/// Trace-one Hermitian null-space solution of the vectorized Liouvillian.
/// Intended as an oracle on small spaces; errors if the null space is
/// degenerate.
pub fn steady_state(
    h: &Operator,
    channels: &[CollapseChannel],
) -> Result<QuantumState, DynamicsError> {
    let dim = h.layout().dim();
    if dim > STEADY_STATE_MAX_DIM {
        return Err(DynamicsError::SteadyStateTooLarge {
            got: dim,
            max: STEADY_STATE_MAX_DIM,
        });
    }
    let l_mat = liouvillian_matrix(h, channels)?;
    let svd = l_mat.svd(false, true);
    let sv = &svd.singular_values;
    let n = sv.len();
    let scale = sv[0].max(1e-300);
    if n >= 2 && sv[n - 2] < 1e-8 * scale {
        return Err(DynamicsError::DegenerateSteadyState(sv[n - 2]));
    }
    let v_t = svd.v_t.expect("requested");
    // null vector = conjugate of the last row of V^H
    let null: DVector<C64> = DVector::from_fn(dim * dim, |k, _| v_t[(n - 1, k)].conj());
    let m = DMatrix::from_column_slice(dim, dim, null.as_slice());
    let mut rho = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(DynamicsError::DegenerateSteadyState(0.0));
    }
    rho /= tr;
    Ok(QuantumState::density_unchecked(h.layout().clone(), rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity, Mode, Operator, QuantumState};
    use crate::model::{build_effective_hamiltonian, effective_params, SystemParams};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn single_mode(dim: usize) -> ModeLayout {
        ModeLayout::new(vec![(Mode::Cavity, dim)]).unwrap()
    }

    #[test]
    fn unitary_identity_at_t_zero() {
        let layout = single_mode(3);
        let h = Operator::number(&layout, Mode::Cavity).unwrap();
        let psi = QuantumState::from_amplitudes(
            &layout,
            DVector::from_vec(vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.5, 0.0),
            ]),
        )
        .unwrap();
        let out = evolve_unitary(&h, &psi, 0.0).unwrap();
        assert_abs_diff_eq!(fidelity(&psi, &out).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unitary_phase_on_effective_diagonal() {
        // |110> under the effective Hamiltonian picks up exp(-i mu_7 t) with
        // mu_7 = Delta_c' + omega_1' - g_1'
        let p = SystemParams::cpfg_working_point();
        let eff = effective_params(&p).unwrap().with_kerr_mask([true, false]);
        let layout = ModeLayout::three_mode(2);
        let h = build_effective_hamiltonian(&eff, &layout).unwrap();
        let psi = QuantumState::basis_state(&layout, &[1, 1, 0]).unwrap();
        let t = 0.77;
        let out = evolve_unitary(&h, &psi, t).unwrap();
        let mu7 = eff.delta_c_prime + eff.omega_eff[0] - eff.g_eff[0];
        let amp = out.vector().unwrap()[layout.basis_index(&[1, 1, 0]).unwrap()];
        let expect = C64::from_polar(1.0, -mu7 * t);
        assert_abs_diff_eq!((amp - expect).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn unitary_preserves_norm() {
        let layout = single_mode(4);
        let x = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let h = x.add(&x.adjoint()).unwrap();
        let psi = QuantumState::from_amplitudes(
            &layout,
            DVector::from_vec(vec![
                C64::new(0.3, 0.1),
                C64::new(-0.2, 0.7),
                C64::new(0.5, 0.0),
                C64::new(0.0, -0.4),
            ]),
        )
        .unwrap();
        let out = evolve_unitary(&h, &psi, 13.7).unwrap();
        assert_abs_diff_eq!(out.vector().unwrap().norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn non_hermitian_rejected() {
        let layout = single_mode(2);
        let a = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let psi = QuantumState::basis_state(&layout, &[0]).unwrap();
        assert!(matches!(
            evolve_unitary(&a, &psi, 1.0),
            Err(DynamicsError::NonHermitian(_))
        ));
    }

    #[test]
    fn master_matches_unitary_without_channels() {
        let p = SystemParams::cpfg_working_point();
        let eff = effective_params(&p).unwrap();
        let layout = ModeLayout::three_mode(2);
        let h = build_effective_hamiltonian(&eff, &layout).unwrap();
        let psi = QuantumState::from_amplitudes(
            &layout,
            DVector::from_fn(8, |k, _| C64::new(1.0 + 0.2 * k as f64, 0.1 * k as f64)),
        )
        .unwrap();
        let t = 10.0;
        let spec = EvolutionSpec::constant(h.clone(), vec![], t, Tolerance::default());
        let res = evolve_master(&spec, &psi).unwrap();
        let exact = evolve_unitary(&h, &psi, t).unwrap();
        let f = fidelity(&exact, &res.final_state).unwrap();
        assert!((1.0 - f).abs() < 1e-6, "fidelity {f}");
        assert!(res.diagnostics.trace_drift <= 1e-8);
    }

    #[test]
    fn master_pure_cavity_decay() {
        let layout = single_mode(2);
        let a = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let n = Operator::number(&layout, Mode::Cavity).unwrap();
        let h = Operator::zeros(&layout);
        let kappa = 0.37;
        let t_end = 4.0;
        let spec = EvolutionSpec::constant(
            h,
            vec![CollapseChannel::new(a, kappa)],
            t_end,
            Tolerance::default(),
        )
        .with_record_times(vec![1.0, 2.5, t_end]);
        let psi = QuantumState::basis_state(&layout, &[1]).unwrap();
        let res = evolve_master(&spec, &psi).unwrap();
        for (state, &t) in res.states.iter().zip(&[1.0, 2.5, t_end]) {
            let pop = state.expectation(&n).unwrap().re;
            assert_abs_diff_eq!(pop, (-kappa * t).exp(), epsilon = 1e-7);
        }
        assert!(res.diagnostics.positivity_ok);
    }

    #[test]
    fn thermal_channel_reaches_truncated_gibbs() {
        // gamma(n+1) D_b + gamma n D_b^dag on a dim-3 mode relaxes to the
        // truncated geometric distribution (1, r, r^2)/(1 + r + r^2) with
        // r = n/(n+1); cross-checked against the null-space oracle.
        let layout = single_mode(3);
        let b = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let h = Operator::zeros(&layout);
        let n_th = 1.0;
        let gamma = 0.8;
        let channels = vec![
            CollapseChannel::new(b.clone(), gamma * (n_th + 1.0)),
            CollapseChannel::new(b.adjoint(), gamma * n_th),
        ];
        let r = n_th / (n_th + 1.0);
        let z = 1.0 + r + r * r;
        let expect = [1.0 / z, r / z, r * r / z];

        let spec = EvolutionSpec::constant(h.clone(), channels.clone(), 80.0, Tolerance::default());
        let psi = QuantumState::basis_state(&layout, &[2]).unwrap();
        let res = evolve_master(&spec, &psi).unwrap();
        let rho = res.final_state.density();
        for k in 0..3 {
            assert_abs_diff_eq!(rho[(k, k)].re, expect[k], epsilon = 1e-6);
        }

        let ss = steady_state(&h, &channels).unwrap();
        let rho_ss = ss.density();
        for k in 0..3 {
            assert_abs_diff_eq!(rho_ss[(k, k)].re, expect[k], epsilon = 1e-10);
        }
        // long-time evolution agrees with the oracle
        let diff = (&rho - &rho_ss)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-6);
    }

    #[test]
    fn steady_state_pure_decay_is_vacuum() {
        let layout = single_mode(3);
        let a = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let h = Operator::number(&layout, Mode::Cavity)
            .unwrap()
            .scale(C64::new(1.3, 0.0));
        let ss = steady_state(&h, &[CollapseChannel::new(a, 0.5)]).unwrap();
        let rho = ss.density();
        assert_abs_diff_eq!(rho[(0, 0)].re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn steady_state_degenerate_errors() {
        // no channels: every density operator commuting with H is stationary
        let layout = single_mode(2);
        let h = Operator::number(&layout, Mode::Cavity).unwrap();
        assert!(matches!(
            steady_state(&h, &[]),
            Err(DynamicsError::DegenerateSteadyState(_))
        ));
    }

    #[test]
    fn segment_boundary_continuity() {
        let layout = single_mode(2);
        let x = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let h = x.add(&x.adjoint()).unwrap().scale(C64::new(0.9, 0.0));
        let a = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let ch = vec![CollapseChannel::new(a, 0.05)];
        let psi = QuantumState::basis_state(&layout, &[1]).unwrap();
        let tol = Tolerance::default();
        let split = EvolutionSpec::new(
            vec![
                Segment::new(h.clone(), ch.clone(), 1.3),
                Segment::new(h.clone(), ch.clone(), 2.7),
            ],
            tol,
        );
        let whole = EvolutionSpec::constant(h, ch, 4.0, tol);
        let r1 = evolve_master(&split, &psi).unwrap();
        let r2 = evolve_master(&whole, &psi).unwrap();
        let diff = (r1.final_state.density() - r2.final_state.density())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(
            diff < 1e-8,
            "segment split changed the result by {diff:.3e}"
        );
    }

    #[test]
    fn tolerance_halving_within_error_estimate() {
        let layout = single_mode(3);
        let x = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let h = x.add(&x.adjoint()).unwrap();
        let a = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let psi = QuantumState::basis_state(&layout, &[1]).unwrap();
        let tol = Tolerance {
            rel: 1e-6,
            abs: 1e-8,
        };
        let half = Tolerance {
            rel: 5e-7,
            abs: 5e-9,
        };
        let mk = |t: Tolerance| {
            EvolutionSpec::constant(
                h.clone(),
                vec![CollapseChannel::new(a.clone(), 0.1)],
                6.0,
                t,
            )
        };
        let r1 = evolve_master(&mk(tol), &psi).unwrap();
        let r2 = evolve_master(&mk(half), &psi).unwrap();
        let diff = (r1.final_state.density() - r2.final_state.density())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(
            diff <= r1.diagnostics.error_estimate.max(1e-9),
            "diff {diff:.3e} vs estimate {:.3e}",
            r1.diagnostics.error_estimate
        );
    }

    #[test]
    fn end_unitaries_are_applied() {
        let layout = single_mode(2);
        let h = Operator::zeros(&layout);
        let flip = Operator::embed_qubit_gate(
            &layout,
            Mode::Cavity,
            &nalgebra::Matrix2::new(
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ),
        )
        .unwrap();
        let seg = Segment::new(h, vec![], 0.5).with_end_unitaries(vec![flip]);
        let spec = EvolutionSpec::new(vec![seg], Tolerance::default());
        let psi = QuantumState::basis_state(&layout, &[0]).unwrap();
        let res = evolve_master(&spec, &psi).unwrap();
        let one = QuantumState::basis_state(&layout, &[1]).unwrap();
        assert_abs_diff_eq!(
            fidelity(&one, &res.final_state).unwrap(),
            1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn integration_failure_carries_diagnostics() {
        let layout = single_mode(2);
        let x = Operator::ladder(&layout, Mode::Cavity).unwrap();
        let h = x.add(&x.adjoint()).unwrap().scale(C64::new(50.0, 0.0));
        let spec = EvolutionSpec::constant(
            h,
            vec![],
            100.0,
            Tolerance {
                rel: 1e-12,
                abs: 1e-14,
            },
        )
        .with_max_steps(25);
        let psi = QuantumState::basis_state(&layout, &[1]).unwrap();
        assert!(matches!(
            evolve_master(&spec, &psi),
            Err(DynamicsError::IntegrationFailure { .. })
        ));
    }
}
