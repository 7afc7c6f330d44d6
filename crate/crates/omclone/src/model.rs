//! System parameters, Hamiltonian builders, and the two elimination regimes.
//!
//! The full model couples a driven cavity to two internal membranes
//! (quadratic coupling `-g_j a^dag a (b_Aj + b_Aj^dag)^2`) and each membrane
//! to an external resonator through a beam-splitter term `V_j`. Under weak
//! driving the membranes are eliminated, dressing the external phonons with
//! effective frequency, Kerr coupling and damping; under strong driving the
//! linearized coupling yields a beam-splitter exchange Hamiltonian between
//! the cavity and the dressed phonons.

use crate::fock::{compose, FockError, FockOp, Mode, ModeLayout, Operator};
use crate::ode::{self, OdeError, Tolerance};
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("layout is missing mode {0}")]
    MissingMode(Mode),
    #[error("expected the three-mode layout (a, b_1, b_2)")]
    NotThreeMode,
    #[error("degenerate elimination: internal and external modes coincide (|A| = 0)")]
    DegenerateElimination,
    #[error("singular detuning for resonator {0}: shifted and bare frequencies coincide")]
    SingularDetuning(usize),
    #[error(
        "mean-field trajectory diverged at t = {t:.3e} (|state| = {norm:.3e}, epsilon = {epsilon})"
    )]
    Unstable { t: f64, norm: f64, epsilon: f64 },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Integration(#[from] OdeError),
}

/// Bare model constants, all in units of the external-resonator frequency.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SystemParams {
    /// Cavity frequency.
    pub omega_c: f64,
    /// Drive frequency (rotating-frame reference).
    pub omega_d: f64,
    /// Drive strength.
    pub epsilon: f64,
    /// Cavity decay rate.
    pub kappa: f64,
    /// Internal membrane frequencies.
    pub omega_a: [f64; 2],
    /// Internal membrane decay rates.
    pub gamma_a: [f64; 2],
    /// External resonator frequencies.
    pub omega_m: [f64; 2],
    /// External resonator decay rates.
    pub gamma_m: [f64; 2],
    /// Quadratic optomechanical couplings.
    pub g: [f64; 2],
    /// Phonon tunneling couplings (real by convention).
    pub v: [f64; 2],
    /// Thermal occupations of the external-resonator baths.
    pub n_th: [f64; 2],
}

impl SystemParams {
    /// Weak-driving working point used for the phase-gate analysis:
    /// `g = 1e-3`, `V = 0.046`, `omega_A = 0.998`, `gamma = 1e-5`,
    /// `gamma_A = 1e-3`, with the rotating-frame cavity detuning set to 2.
    pub fn cpfg_working_point() -> Self {
        let mut p = Self {
            omega_c: 0.0,
            omega_d: 0.0,
            epsilon: 0.0,
            kappa: 0.0,
            omega_a: [0.998; 2],
            gamma_a: [1e-3; 2],
            omega_m: [1.0; 2],
            gamma_m: [1e-5; 2],
            g: [1e-3; 2],
            v: [0.046; 2],
            n_th: [0.0; 2],
        };
        p.set_cavity_detuning(2.0);
        p
    }

    /// Same point with the weaker tunneling used for the elimination
    /// benchmark (`V = 0.03`).
    pub fn elimination_benchmark_point() -> Self {
        let mut p = Self::cpfg_working_point();
        p.v = [0.03; 2];
        p
    }

    /// Fix `omega_c` so that the rotating-frame detuning
    /// `Delta_c' = omega_c - g_1 - g_2 - omega_d` equals `delta`.
    pub fn set_cavity_detuning(&mut self, delta: f64) {
        self.omega_c = delta + self.g[0] + self.g[1] + self.omega_d;
    }

    /// Rotating-frame cavity detuning `Delta_c' = omega_c' - omega_d`.
    pub fn delta_c_prime(&self) -> f64 {
        self.omega_c - self.g[0] - self.g[1] - self.omega_d
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        // rates and thermal occupations must be non-negative
        let ok = self.kappa >= 0.0
            && self.gamma_a.iter().all(|&x| x >= 0.0)
            && self.gamma_m.iter().all(|&x| x >= 0.0)
            && self.n_th.iter().all(|&x| x >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(ModelError::DegenerateElimination)
        }
    }
}

/// Frame in which a Hamiltonian is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Laboratory frame; the drive term is evaluated at its t = 0 phase.
    Lab,
    /// Frame rotating at the drive frequency: the cavity energy becomes the
    /// detuning and the drive is static.
    DriveRotating,
}

/// Dressed parameters of the weak-driving elimination.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EffectiveParams {
    /// Mixing weights `delta_j = |V_j|^2 / |A_j|^2`.
    pub delta: [f64; 2],
    /// Dressed phonon frequencies `omega_j'`.
    pub omega_eff: [f64; 2],
    /// Dressed Kerr couplings `g_j' = 2 delta_j g_j`.
    pub g_eff: [f64; 2],
    /// Dressed phonon damping rates `gamma_j'`.
    pub gamma_eff: [f64; 2],
    /// Rotating-frame cavity detuning `Delta_c'`.
    pub delta_c_prime: f64,
    /// Complex elimination denominators `A_j`.
    pub elim_denom: [(f64, f64); 2],
}

impl EffectiveParams {
    /// Copy with the Kerr coupling zeroed on the masked-out resonators.
    pub fn with_kerr_mask(mut self, mask: [bool; 2]) -> Self {
        for (g, &keep) in self.g_eff.iter_mut().zip(&mask) {
            if !keep {
                *g = 0.0;
            }
        }
        self
    }
}

/// Weak-driving effective parameters:
/// `omega_j' = omega_mj - delta_j (omega_Aj - omega_mj)`, `g_j' = 2 delta_j g_j`,
/// `gamma_j' = gamma_j + delta_j (gamma_Aj - gamma_j)`, with
/// `A_j = i(omega_Aj - omega_mj) + (gamma_Aj - gamma_j)/2`.
pub fn effective_params(p: &SystemParams) -> Result<EffectiveParams, ModelError> {
    let mut delta = [0.0; 2];
    let mut omega_eff = [0.0; 2];
    let mut g_eff = [0.0; 2];
    let mut gamma_eff = [0.0; 2];
    let mut elim_denom = [(0.0, 0.0); 2];
    for j in 0..2 {
        let a = C64::new(
            (p.gamma_a[j] - p.gamma_m[j]) / 2.0,
            p.omega_a[j] - p.omega_m[j],
        );
        let a2 = a.norm_sqr();
        if a2 == 0.0 {
            return Err(ModelError::DegenerateElimination);
        }
        delta[j] = p.v[j] * p.v[j] / a2;
        omega_eff[j] = p.omega_m[j] - delta[j] * (p.omega_a[j] - p.omega_m[j]);
        g_eff[j] = 2.0 * delta[j] * p.g[j];
        gamma_eff[j] = p.gamma_m[j] + delta[j] * (p.gamma_a[j] - p.gamma_m[j]);
        elim_denom[j] = (a.re, a.im);
    }
    Ok(EffectiveParams {
        delta,
        omega_eff,
        g_eff,
        gamma_eff,
        delta_c_prime: p.delta_c_prime(),
        elim_denom,
    })
}

fn cavity_energy(p: &SystemParams, frame: Frame, shifted: bool) -> f64 {
    let base = if shifted {
        p.omega_c - p.g[0] - p.g[1]
    } else {
        p.omega_c
    };
    match frame {
        Frame::Lab => base,
        Frame::DriveRotating => base - p.omega_d,
    }
}

/// Full five-mode Hamiltonian including the quadratic coupling
/// `-g_j a^dag a (b_Aj + b_Aj^dag)^2` and the drive.
///
/// The quadratic factor is normal-ordered before truncation,
/// `(b + b^dag)^2 = 2 b^dag b + b^2 + b^dag^2 + 1`, so the commutator
/// constant survives a qubit-truncated space.
pub fn build_full_hamiltonian(
    p: &SystemParams,
    layout: &ModeLayout,
    frame: Frame,
) -> Result<Operator, ModelError> {
    for m in [
        Mode::Cavity,
        Mode::Aux1,
        Mode::Aux2,
        Mode::Mech1,
        Mode::Mech2,
    ] {
        if !layout.contains(m) {
            return Err(ModelError::MissingMode(m));
        }
    }
    let re = |x: f64| C64::new(x, 0.0);
    let a = Mode::Cavity;
    let mut terms: Vec<(C64, Vec<FockOp>)> = vec![
        (
            re(cavity_energy(p, frame, false)),
            vec![FockOp::Raise(a), FockOp::Lower(a)],
        ),
        (re(p.epsilon), vec![FockOp::Lower(a)]),
        (re(p.epsilon), vec![FockOp::Raise(a)]),
    ];
    for j in 0..2 {
        let ba = Mode::aux(j);
        let b = Mode::mech(j);
        terms.push((re(p.omega_a[j]), vec![FockOp::Raise(ba), FockOp::Lower(ba)]));
        terms.push((re(p.omega_m[j]), vec![FockOp::Raise(b), FockOp::Lower(b)]));
        terms.push((re(p.v[j]), vec![FockOp::Raise(ba), FockOp::Lower(b)]));
        terms.push((re(p.v[j]), vec![FockOp::Raise(b), FockOp::Lower(ba)]));
        let na = vec![FockOp::Raise(a), FockOp::Lower(a)];
        let mut push_quad = |factors: Vec<FockOp>, scale: f64| {
            let mut prod = na.clone();
            prod.extend(factors);
            terms.push((re(-p.g[j] * scale), prod));
        };
        push_quad(vec![FockOp::Raise(ba), FockOp::Lower(ba)], 2.0);
        push_quad(vec![FockOp::Lower(ba), FockOp::Lower(ba)], 1.0);
        push_quad(vec![FockOp::Raise(ba), FockOp::Raise(ba)], 1.0);
        push_quad(vec![], 1.0);
    }
    Ok(compose(layout, &terms)?)
}

/// Rotating-wave Hamiltonian: the `b^2`, `b^dag^2` terms are dropped, leaving
/// the cross-Kerr coupling `-2 g_j a^dag a b_Aj^dag b_Aj` and the shifted
/// cavity frequency `omega_c' = omega_c - g_1 - g_2`.
pub fn build_rwa_hamiltonian(
    p: &SystemParams,
    layout: &ModeLayout,
    frame: Frame,
) -> Result<Operator, ModelError> {
    for m in [
        Mode::Cavity,
        Mode::Aux1,
        Mode::Aux2,
        Mode::Mech1,
        Mode::Mech2,
    ] {
        if !layout.contains(m) {
            return Err(ModelError::MissingMode(m));
        }
    }
    let re = |x: f64| C64::new(x, 0.0);
    let a = Mode::Cavity;
    let mut terms: Vec<(C64, Vec<FockOp>)> = vec![
        (
            re(cavity_energy(p, frame, true)),
            vec![FockOp::Raise(a), FockOp::Lower(a)],
        ),
        (re(p.epsilon), vec![FockOp::Lower(a)]),
        (re(p.epsilon), vec![FockOp::Raise(a)]),
    ];
    for j in 0..2 {
        let ba = Mode::aux(j);
        let b = Mode::mech(j);
        terms.push((re(p.omega_a[j]), vec![FockOp::Raise(ba), FockOp::Lower(ba)]));
        terms.push((re(p.omega_m[j]), vec![FockOp::Raise(b), FockOp::Lower(b)]));
        terms.push((re(p.v[j]), vec![FockOp::Raise(ba), FockOp::Lower(b)]));
        terms.push((re(p.v[j]), vec![FockOp::Raise(b), FockOp::Lower(ba)]));
        terms.push((
            re(-2.0 * p.g[j]),
            vec![
                FockOp::Raise(a),
                FockOp::Lower(a),
                FockOp::Raise(ba),
                FockOp::Lower(ba),
            ],
        ));
    }
    Ok(compose(layout, &terms)?)
}

/// Effective three-mode Hamiltonian of the weak-driving regime:
/// `H = Delta_c' a^dag a + sum_j (omega_j' b_j^dag b_j - g_j' a^dag a b_j^dag b_j)`.
pub fn build_effective_hamiltonian(
    eff: &EffectiveParams,
    layout: &ModeLayout,
) -> Result<Operator, ModelError> {
    let expected = [Mode::Cavity, Mode::Mech1, Mode::Mech2];
    if layout.n_modes() != 3
        || layout
            .modes()
            .iter()
            .map(|&(m, _)| m)
            .ne(expected.iter().copied())
    {
        return Err(ModelError::NotThreeMode);
    }
    let re = |x: f64| C64::new(x, 0.0);
    let a = Mode::Cavity;
    let mut terms: Vec<(C64, Vec<FockOp>)> = vec![(
        re(eff.delta_c_prime),
        vec![FockOp::Raise(a), FockOp::Lower(a)],
    )];
    for j in 0..2 {
        let b = Mode::mech(j);
        terms.push((
            re(eff.omega_eff[j]),
            vec![FockOp::Raise(b), FockOp::Lower(b)],
        ));
        terms.push((
            re(-eff.g_eff[j]),
            vec![
                FockOp::Raise(a),
                FockOp::Lower(a),
                FockOp::Raise(b),
                FockOp::Lower(b),
            ],
        ));
    }
    Ok(compose(layout, &terms)?)
}

/// Strong-driving (linearized) effective parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedParams {
    /// Linearized couplings `G_j = 2 alpha beta_j^* g_j`.
    pub g_lin: [C64; 2],
    /// Exchange couplings `G_j' = G_j V_j / (omega_mj' - omega_mj)`
    /// (dissipative corrections dropped).
    pub g_swap: [C64; 2],
    /// Exact complex form of `G_j'`, kept for diagnostics.
    pub g_swap_exact: [C64; 2],
    /// Effective cavity frequency.
    pub omega_c_eff: f64,
    /// Effective cavity linewidth.
    pub kappa_eff: f64,
    /// Effective phonon frequencies.
    pub omega: [f64; 2],
    /// Effective phonon damping rates.
    pub gamma_eff: [f64; 2],
    /// Mean-field-shifted cavity detuning `Delta_c`.
    pub delta_c: f64,
    /// Shifted membrane frequencies `omega_mj' = omega_Aj - 2 g_j |alpha|^2`.
    pub omega_m_shifted: [f64; 2],
}

/// Eliminate the membranes around a strong-drive working point
/// `(alpha, beta_j)`.
pub fn linearized_params(
    p: &SystemParams,
    alpha: C64,
    beta: [C64; 2],
) -> Result<LinearizedParams, ModelError> {
    let alpha2 = alpha.norm_sqr();
    let delta_c =
        p.delta_c_prime() - 2.0 * (p.g[0] * beta[0].norm_sqr() + p.g[1] * beta[1].norm_sqr());
    let mut g_lin = [C64::new(0.0, 0.0); 2];
    let mut g_swap = [C64::new(0.0, 0.0); 2];
    let mut g_swap_exact = [C64::new(0.0, 0.0); 2];
    let mut omega = [0.0; 2];
    let mut gamma_eff = [0.0; 2];
    let mut omega_m_shifted = [0.0; 2];
    let mut omega_c_eff = delta_c;
    let mut kappa_eff = p.kappa;
    for j in 0..2 {
        let gj = 2.0 * alpha * beta[j].conj() * p.g[j];
        g_lin[j] = gj;
        let w_shift = p.omega_a[j] - 2.0 * p.g[j] * alpha2;
        omega_m_shifted[j] = w_shift;
        let det_c = w_shift - delta_c;
        let den_c = det_c * det_c + (p.gamma_a[j] - p.kappa).powi(2) / 4.0;
        omega_c_eff -= gj.norm_sqr() * det_c / den_c;
        kappa_eff += gj.norm_sqr() * (p.gamma_a[j] - p.kappa) / den_c;
        let det_m = w_shift - p.omega_m[j];
        let den_m = det_m * det_m + (p.gamma_a[j] - p.gamma_m[j]).powi(2) / 4.0;
        omega[j] = p.omega_m[j] + p.v[j] * p.v[j] * det_m / den_m;
        gamma_eff[j] = p.gamma_m[j] - p.v[j] * p.v[j] * (p.gamma_a[j] - p.gamma_m[j]) / den_m;
        if det_m == 0.0 {
            return Err(ModelError::SingularDetuning(j + 1));
        }
        g_swap[j] = gj * p.v[j] / det_m;
        g_swap_exact[j] =
            C64::new(0.0, 1.0) * gj * p.v[j] / C64::new((p.gamma_a[j] - p.gamma_m[j]) / 2.0, det_m);
    }
    Ok(LinearizedParams {
        g_lin,
        g_swap,
        g_swap_exact,
        omega_c_eff,
        kappa_eff,
        omega,
        gamma_eff,
        delta_c,
        omega_m_shifted,
    })
}

/// Classical expectation values tracked by the mean-field equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    /// Cavity amplitude `<a>`.
    pub alpha: C64,
    /// Membrane amplitudes `<b_Aj>`.
    pub beta_aux: [C64; 2],
    /// External-resonator amplitudes `<b_j>`.
    pub beta_mech: [C64; 2],
    pub t: f64,
}

impl MeanFieldState {
    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            alpha: z,
            beta_aux: [z; 2],
            beta_mech: [z; 2],
            t: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeanFieldTrajectory {
    pub samples: Vec<MeanFieldState>,
    /// `|G_j'(t)|` evaluated along the trajectory.
    pub g_swap_abs: Vec<[f64; 2]>,
}

impl MeanFieldTrajectory {
    /// Mean and standard deviation of `|G_1'|` over the last quarter of the
    /// trajectory.
    pub fn late_time_stats(&self) -> (f64, f64) {
        let n = self.g_swap_abs.len();
        let tail = &self.g_swap_abs[(3 * n) / 4..];
        if tail.is_empty() {
            return (0.0, 0.0);
        }
        let mean = tail.iter().map(|g| g[0]).sum::<f64>() / tail.len() as f64;
        let var = tail.iter().map(|g| (g[0] - mean).powi(2)).sum::<f64>() / tail.len() as f64;
        (mean, var.sqrt())
    }

    /// Rolling variance of `|G_1'|` over consecutive windows, as a
    /// convergence diagnostic for the limit cycle.
    pub fn rolling_variance(&self, windows: usize) -> Vec<f64> {
        let n = self.g_swap_abs.len();
        if windows == 0 || n == 0 {
            return Vec::new();
        }
        let w = (n / windows).max(1);
        self.g_swap_abs
            .chunks(w)
            .map(|chunk| {
                let mean = chunk.iter().map(|g| g[0]).sum::<f64>() / chunk.len() as f64;
                chunk.iter().map(|g| (g[0] - mean).powi(2)).sum::<f64>() / chunk.len() as f64
            })
            .collect()
    }
}

const MEAN_FIELD_NORM_LIMIT: f64 = 1e8;

/// Integrate the classical (c-number) reduction of the model:
/// `alpha' = -(i Delta_c' + kappa/2) alpha + 2i sum_j g_j alpha |beta_j|^2 - i epsilon`,
/// `beta_j' = -(i omega_Aj + gamma_Aj/2) beta_j + 2i g_j |alpha|^2 beta_j - i V_j beta_bj`,
/// `beta_bj' = -(i omega_mj + gamma_j/2) beta_bj - i V_j beta_j`,
/// recording every `dt_record` and reporting `|G_j'(t)|` per sample.
pub fn mean_field_trajectory(
    p: &SystemParams,
    initial: &MeanFieldState,
    t_end: f64,
    dt_record: f64,
    tol: Tolerance,
) -> Result<MeanFieldTrajectory, ModelError> {
    assert!(dt_record > 0.0, "dt_record must be positive");
    let delta_c_prime = p.delta_c_prime();
    let pk = *p;
    let rhs = move |_t: f64, y: &DVector<C64>, dy: &mut DVector<C64>| {
        let alpha = y[0];
        let i = C64::new(0.0, 1.0);
        let mut kerr = C64::new(0.0, 0.0);
        for j in 0..2 {
            kerr += 2.0 * i * pk.g[j] * y[1 + j].norm_sqr();
        }
        dy[0] = -(i * delta_c_prime + pk.kappa / 2.0) * alpha + kerr * alpha - i * pk.epsilon;
        for j in 0..2 {
            let ba = y[1 + j];
            let bm = y[3 + j];
            dy[1 + j] = -(i * pk.omega_a[j] + pk.gamma_a[j] / 2.0) * ba
                + 2.0 * i * pk.g[j] * alpha.norm_sqr() * ba
                - i * pk.v[j] * bm;
            dy[3 + j] = -(i * pk.omega_m[j] + pk.gamma_m[j] / 2.0) * bm - i * pk.v[j] * ba;
        }
    };

    let y0 = DVector::from_vec(vec![
        initial.alpha,
        initial.beta_aux[0],
        initial.beta_aux[1],
        initial.beta_mech[0],
        initial.beta_mech[1],
    ]);
    let n_rec = (t_end / dt_record).floor() as usize;
    let record_times: Vec<f64> = (0..=n_rec).map(|k| k as f64 * dt_record).collect();

    let mut samples = Vec::with_capacity(record_times.len());
    let mut g_swap_abs = Vec::with_capacity(record_times.len());
    let mut diverged: Option<(f64, f64)> = None;
    {
        let record = |t: f64, y: &DVector<C64>| {
            let norm = y.norm();
            if norm > MEAN_FIELD_NORM_LIMIT && diverged.is_none() {
                diverged = Some((t, norm));
            }
            let state = MeanFieldState {
                alpha: y[0],
                beta_aux: [y[1], y[2]],
                beta_mech: [y[3], y[4]],
                t,
            };
            let mut g_abs = [0.0; 2];
            for (j, g_out) in g_abs.iter_mut().enumerate() {
                let gj = 2.0 * state.alpha * state.beta_aux[j].conj() * p.g[j];
                let det = p.omega_a[j] - 2.0 * p.g[j] * state.alpha.norm_sqr() - p.omega_m[j];
                *g_out = if det != 0.0 {
                    (gj * p.v[j] / det).norm()
                } else {
                    f64::INFINITY
                };
            }
            samples.push(state);
            g_swap_abs.push(g_abs);
        };
        ode::integrate(rhs, y0, 0.0, t_end, tol, 50_000_000, &record_times, record)?;
    }
    if let Some((t, norm)) = diverged {
        return Err(ModelError::Unstable {
            t,
            norm,
            epsilon: p.epsilon,
        });
    }
    Ok(MeanFieldTrajectory {
        samples,
        g_swap_abs,
    })
}
