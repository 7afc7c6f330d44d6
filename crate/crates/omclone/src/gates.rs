//! Gate-level analysis: the eight phase factors of the effective dynamics,
//! analytic controlled-phase-flip fidelities, gate-time search, linearized
//! state transfer, and the fixed single-mode gate set.

use crate::dynamics::DynamicsError;
use crate::fock::{FockError, Mode, ModeLayout, Operator};
use crate::model::{EffectiveParams, LinearizedParams, ModelError};
use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GateError {
    #[error("amplitudes are not normalized (sum of squares = {0})")]
    UnnormalizedAmplitudes(f64),
    #[error("{0} is not a controlled-phase target")]
    NotCpfg(GateTarget),
    #[error("no gate time below t_max = {t_max} reaches fidelity {threshold} (best {f_best:.6} at t = {t_best:.4})")]
    NoGateTime {
        t_max: f64,
        threshold: f64,
        t_best: f64,
        f_best: f64,
    },
    #[error("time grid must be sorted and non-negative")]
    BadTimeGrid,
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// The eight phase factors `mu_1..mu_8` of the effective dynamics, indexed to
/// the basis `|c_1> = |000> .. |c_8> = |111>` on `(a, b_1, b_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFactors {
    pub mu: [f64; 8],
}

/// Phase factors of the effective Hamiltonian, with the Kerr coupling zeroed
/// on masked-out resonators: `mu_1 = 0`, `mu_2 = omega_2'`, `mu_3 = omega_1'`,
/// `mu_4 = omega_1' + omega_2'`, `mu_5 = Delta_c'`,
/// `mu_6 = Delta_c' + omega_2' - g_2'`, `mu_7 = Delta_c' + omega_1' - g_1'`,
/// `mu_8 = Delta_c' + sum_j (omega_j' - g_j')`.
pub fn phase_factors(eff: &EffectiveParams, kerr_mask: [bool; 2]) -> PhaseFactors {
    let e = eff.with_kerr_mask(kerr_mask);
    let [w1, w2] = e.omega_eff;
    let [g1, g2] = e.g_eff;
    let d = e.delta_c_prime;
    PhaseFactors {
        mu: [
            0.0,
            w2,
            w1,
            w1 + w2,
            d,
            d + w2 - g2,
            d + w1 - g1,
            d + (w1 - g1) + (w2 - g2),
        ],
    }
}

/// Two- and three-mode gate targets on `(a, b_1, b_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum GateTarget {
    /// Phase flip controlled between the photon and phonon 1 (`-1` on
    /// `|c_7>, |c_8>`).
    CpfgAB1,
    /// Photon / phonon 2 (`-1` on `|c_6>, |c_8>`).
    CpfgAB2,
    /// Bilateral gate (`-1` on `|c_8>` only).
    CpfgAB1B2,
    SwapAB1,
    SwapAB2,
}

impl std::fmt::Display for GateTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GateTarget::CpfgAB1 => "cpfg(a,b1)",
            GateTarget::CpfgAB2 => "cpfg(a,b2)",
            GateTarget::CpfgAB1B2 => "cpfg(a,b1b2)",
            GateTarget::SwapAB1 => "swap(a,b1)",
            GateTarget::SwapAB2 => "swap(a,b2)",
        };
        f.write_str(s)
    }
}

impl GateTarget {
    pub fn is_cpfg(self) -> bool {
        matches!(
            self,
            GateTarget::CpfgAB1 | GateTarget::CpfgAB2 | GateTarget::CpfgAB1B2
        )
    }

    /// Signs applied to `|c_1> .. |c_8>` by the ideal gate.
    pub fn sign_table(self) -> Option<[f64; 8]> {
        let mut s = [1.0; 8];
        match self {
            GateTarget::CpfgAB1 => {
                s[6] = -1.0;
                s[7] = -1.0;
            }
            GateTarget::CpfgAB2 => {
                s[5] = -1.0;
                s[7] = -1.0;
            }
            GateTarget::CpfgAB1B2 => {
                s[7] = -1.0;
            }
            GateTarget::SwapAB1 | GateTarget::SwapAB2 => return None,
        }
        Some(s)
    }

    /// Kerr mask realizing the target in the effective model.
    pub fn kerr_mask(self) -> Option<[bool; 2]> {
        match self {
            GateTarget::CpfgAB1 => Some([true, false]),
            GateTarget::CpfgAB2 => Some([false, true]),
            GateTarget::CpfgAB1B2 => Some([true, true]),
            _ => None,
        }
    }

    /// Ideal unitary on the given layout.
    pub fn unitary(self, layout: &ModeLayout) -> Result<Operator, FockError> {
        match self {
            GateTarget::CpfgAB1 => {
                Operator::controlled_phase_flip(layout, &[Mode::Cavity, Mode::Mech1])
            }
            GateTarget::CpfgAB2 => {
                Operator::controlled_phase_flip(layout, &[Mode::Cavity, Mode::Mech2])
            }
            GateTarget::CpfgAB1B2 => {
                Operator::controlled_phase_flip(layout, &[Mode::Cavity, Mode::Mech1, Mode::Mech2])
            }
            GateTarget::SwapAB1 => Operator::swap(layout, Mode::Cavity, Mode::Mech1),
            GateTarget::SwapAB2 => Operator::swap(layout, Mode::Cavity, Mode::Mech2),
        }
    }
}

fn check_normalized(alphas: &[C64; 8]) -> Result<(), GateError> {
    let s: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(GateError::UnnormalizedAmplitudes(s));
    }
    Ok(())
}

/// Analytic controlled-phase-flip fidelity
/// `|sum_j s_j |alpha_j|^2 exp(-i mu_j t)|`, where `s_j` is the target's sign
/// table. Returns the modulus, which is 1 exactly when the phase conditions
/// are met.
pub fn cpfg_fidelity(
    target: GateTarget,
    mu: &PhaseFactors,
    alphas: &[C64; 8],
    t: f64,
) -> Result<f64, GateError> {
    let signs = target.sign_table().ok_or(GateError::NotCpfg(target))?;
    check_normalized(alphas)?;
    let mut f = C64::new(0.0, 0.0);
    for j in 0..8 {
        f += signs[j] * alphas[j].norm_sqr() * C64::from_polar(1.0, -mu.mu[j] * t);
    }
    Ok(f.norm())
}

/// Search configuration for [`find_gate_time`].
#[derive(Debug, Clone, Copy)]
pub struct GateTimeSearch {
    pub t_max: f64,
    pub threshold: f64,
    pub grid_step: f64,
}

impl Default for GateTimeSearch {
    fn default() -> Self {
        Self {
            t_max: 12.0,
            threshold: 0.999,
            grid_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GateTime {
    pub t_star: f64,
    pub f_star: f64,
    /// Spacing to the next peak, when a second peak exists below `t_max`.
    pub peak_spacing: Option<f64>,
}

/// Random normalized amplitude vectors plus the eight basis states.
pub fn state_ensemble(seed: u64, n_random: usize) -> Vec<[C64; 8]> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(n_random + 8);
    for k in 0..8 {
        let mut basis = [C64::new(0.0, 0.0); 8];
        basis[k] = C64::new(1.0, 0.0);
        states.push(basis);
    }
    for _ in 0..n_random {
        let mut v = [C64::new(0.0, 0.0); 8];
        let mut norm = 0.0;
        for a in v.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *a = C64::new(re, im);
            norm += a.norm_sqr();
        }
        let n = norm.sqrt();
        for a in v.iter_mut() {
            *a /= n;
        }
        states.push(v);
    }
    states
}

/// Exact worst-case fidelity over all normalized states at time `t`.
///
/// `F(t) = |sum_j w_j s_j exp(-i mu_j t)|` is a convex combination of the
/// eight signed unit phasors, so its minimum over the probability simplex is
/// the distance from the origin to their convex hull. Whenever the phasors
/// cluster (the regime of any usable gate) that distance is attained on a
/// chord between two of them, so the minimum over pairwise segments is exact;
/// with the origin inside the hull it merely overestimates an irrelevant
/// near-zero worst case.
pub fn worst_case_fidelity(target: GateTarget, mu: &PhaseFactors, t: f64) -> Option<f64> {
    let signs = target.sign_table()?;
    let z: Vec<C64> = (0..8)
        .map(|j| C64::from_polar(1.0, -mu.mu[j] * t) * signs[j])
        .collect();
    let mut min = f64::INFINITY;
    for i in 0..8 {
        for j in i..8 {
            let d = z[j] - z[i];
            let dd = d.norm_sqr();
            let s = if dd > 0.0 {
                (-(z[i].re * d.re + z[i].im * d.im) / dd).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let p = z[i] + d * s;
            min = min.min(p.norm());
        }
    }
    Some(min)
}

/// Locate the first time at which the worst-case fidelity reaches
/// `threshold`, refine the peak, and look for the following peak to estimate
/// the repetition period.
///
/// The returned time is a property of the phase factors alone: near a peak
/// every `exp(-i mu_j t)` simultaneously approaches the target sign, so all
/// states peak together and the result does not depend on any test-state
/// ensemble (the search maximizes the exact worst case, which dominates every
/// sampled ensemble).
pub fn find_gate_time(
    target: GateTarget,
    mu: &PhaseFactors,
    search: &GateTimeSearch,
) -> Result<GateTime, GateError> {
    if !target.is_cpfg() {
        return Err(GateError::NotCpfg(target));
    }
    let worst = |t: f64| worst_case_fidelity(target, mu, t).expect("cpfg target");

    // fine argmax over a bracket, then golden-section polish
    let refine = |lo: f64, hi: f64| -> (f64, f64) {
        let n = 400;
        let mut best = (lo, worst(lo));
        for k in 0..=n {
            let t = lo + (hi - lo) * k as f64 / n as f64;
            let f = worst(t);
            if f > best.1 {
                best = (t, f);
            }
        }
        let fine = (hi - lo) / n as f64;
        let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = ((best.0 - fine).max(lo), (best.0 + fine).min(hi));
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (worst(c), worst(d));
        for _ in 0..40 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = worst(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = worst(d);
            }
        }
        let t = 0.5 * (a + b);
        (t, worst(t))
    };

    let mut best = (0.0, f64::NEG_INFINITY);
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    let mut above = false;
    let n_grid = (search.t_max / search.grid_step).ceil() as usize;
    for k in 1..=n_grid {
        let t = k as f64 * search.grid_step;
        if t > search.t_max {
            break;
        }
        let f = worst(t);
        if f > best.1 {
            best = (t, f);
        }
        if f >= search.threshold {
            if !above {
                above = true;
                let lo = (t - 2.0 * search.grid_step).max(0.0);
                // extend the bracket over the whole above-threshold window
                let mut hi = t;
                while hi < search.t_max && worst(hi + search.grid_step) >= search.threshold {
                    hi += search.grid_step;
                }
                peaks.push(refine(lo, (hi + 2.0 * search.grid_step).min(search.t_max)));
                if peaks.len() == 2 {
                    break;
                }
            }
        } else {
            above = false;
        }
    }

    match peaks.len() {
        0 => Err(GateError::NoGateTime {
            t_max: search.t_max,
            threshold: search.threshold,
            t_best: best.0,
            f_best: best.1,
        }),
        1 => Ok(GateTime {
            t_star: peaks[0].0,
            f_star: peaks[0].1,
            peak_spacing: None,
        }),
        _ => Ok(GateTime {
            t_star: peaks[0].0,
            f_star: peaks[0].1,
            peak_spacing: Some(peaks[1].0 - peaks[0].0),
        }),
    }
}

/// Beam-splitter exchange Hamiltonian of the strong-driving regime:
/// `H = omega_c' a^dag a + sum_j [omega_j b_j^dag b_j + (G_j' a^dag b_j + h.c.)]`.
pub fn build_linearized_hamiltonian(
    lp: &LinearizedParams,
    layout: &ModeLayout,
) -> Result<Operator, GateError> {
    let expected = [Mode::Cavity, Mode::Mech1, Mode::Mech2];
    if layout.n_modes() != 3
        || layout
            .modes()
            .iter()
            .map(|&(m, _)| m)
            .ne(expected.iter().copied())
    {
        return Err(GateError::Model(ModelError::NotThreeMode));
    }
    let a = Operator::ladder(layout, Mode::Cavity)?;
    let mut h = Operator::number(layout, Mode::Cavity)?.scale(C64::new(lp.omega_c_eff, 0.0));
    for j in 0..2 {
        let b = Operator::ladder(layout, Mode::mech(j))?;
        h = h.add(&Operator::number(layout, Mode::mech(j))?.scale(C64::new(lp.omega[j], 0.0)))?;
        let coupling = a.adjoint().mul(&b)?.scale(lp.g_swap[j]);
        h = h.add(&coupling)?.add(&coupling.adjoint())?;
    }
    Ok(h)
}

/// Amplitude-propagation matrix of the linearized model on `(a, b_1, b_2)`:
/// `M = -i H_block - diag(kappa', gamma_1', gamma_2')/2` restricted to the
/// single-excitation block.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub m: Matrix3<C64>,
}

impl TransferMatrix {
    pub fn from_linearized(lp: &LinearizedParams) -> Self {
        Self::from_parts(
            lp.omega_c_eff,
            lp.kappa_eff,
            lp.omega,
            lp.gamma_eff,
            lp.g_swap,
        )
    }

    pub fn from_parts(
        omega_c: f64,
        kappa: f64,
        omega: [f64; 2],
        gamma: [f64; 2],
        g: [C64; 2],
    ) -> Self {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let m = Matrix3::new(
            -(i * omega_c + kappa / 2.0),
            -i * g[0],
            -i * g[1],
            -i * g[0].conj(),
            -(i * omega[0] + gamma[0] / 2.0),
            z,
            -i * g[1].conj(),
            z,
            -(i * omega[1] + gamma[1] / 2.0),
        );
        Self { m }
    }

    /// `exp(M t)`.
    pub fn propagator(&self, t: f64) -> Matrix3<C64> {
        (self.m * C64::new(t, 0.0)).exp()
    }
}

/// Transmission curves `T(t) = |[exp(M t)]_{target,source}|^2` between the
/// cavity amplitude and each mechanical amplitude.
#[derive(Debug, Clone)]
pub struct TransferCurves {
    pub times: Vec<f64>,
    /// `T_{a->bj}(t)` for j = 1, 2.
    pub a_to_b: [Vec<f64>; 2],
    /// `T_{bj->a}(t)`.
    pub b_to_a: [Vec<f64>; 2],
    /// Total squared amplitude starting from the cavity (1 exactly at all
    /// times when every rate is zero).
    pub norm_from_a: Vec<f64>,
}

impl TransferCurves {
    /// Time of the first local maximum of `T_{a->bj}`.
    pub fn first_peak_a_to_b(&self, j: usize) -> Option<f64> {
        let c = &self.a_to_b[j];
        for k in 1..c.len().saturating_sub(1) {
            if c[k] > c[k - 1] && c[k] >= c[k + 1] && c[k] > 1e-9 {
                return Some(self.times[k]);
            }
        }
        None
    }
}

pub fn transfer_dynamics(tm: &TransferMatrix, t_grid: &[f64]) -> Result<TransferCurves, GateError> {
    if t_grid.windows(2).any(|w| w[0] > w[1]) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(GateError::BadTimeGrid);
    }
    let mut curves = TransferCurves {
        times: t_grid.to_vec(),
        a_to_b: [
            Vec::with_capacity(t_grid.len()),
            Vec::with_capacity(t_grid.len()),
        ],
        b_to_a: [
            Vec::with_capacity(t_grid.len()),
            Vec::with_capacity(t_grid.len()),
        ],
        norm_from_a: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        let u = tm.propagator(t);
        for j in 0..2 {
            curves.a_to_b[j].push(u[(j + 1, 0)].norm_sqr());
            curves.b_to_a[j].push(u[(0, j + 1)].norm_sqr());
        }
        curves
            .norm_from_a
            .push(u.column(0).iter().map(|z| z.norm_sqr()).sum());
    }
    Ok(curves)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Rotation `U^(1)(theta) = [[cos, sin], [-sin, cos]]`.
pub fn rotation_gate(theta: f64) -> Matrix2<C64> {
    let (s, co) = theta.sin_cos();
    Matrix2::new(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0))
}

/// Symmetric Hadamard `U^(2) = [[1, 1], [1, -1]]/sqrt(2)` (involutory).
pub fn basis_mix_gate() -> Matrix2<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2::new(c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0))
}

/// The skew Hadamard `H = [[1, -1], [1, 1]]/sqrt(2)` used at the end of the
/// probabilistic cloning circuit: `H|0> = (|0> + |1>)/sqrt(2)`,
/// `H|1> = (-|0> + |1>)/sqrt(2)`.
pub fn skew_hadamard_gate() -> Matrix2<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2::new(c(r, 0.0), c(-r, 0.0), c(r, 0.0), c(r, 0.0))
}

/// Phase gate `diag(1, exp(i phi))` on the qubit subspace.
pub fn phase_gate(phi: f64) -> Matrix2<C64> {
    Matrix2::new(
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        C64::from_polar(1.0, phi),
    )
}

/// The fixed single-mode gate set `(U^(1)(theta2), U^(2), H)`.
pub fn single_qubit_gates(theta2: f64) -> (Matrix2<C64>, Matrix2<C64>, Matrix2<C64>) {
    (
        rotation_gate(theta2),
        basis_mix_gate(),
        skew_hadamard_gate(),
    )
}
