//! The three phonon-to-photon cloning protocols: the probabilistic two-state
//! cloner and the two deterministic machines (real-state and universal), as
//! ideal circuits on the qubit subspace and as pulse schedules for the
//! dissipative engine.
//!
//! The state to be cloned is always stored in phonon `b_1`; phonon `b_2` is
//! the ancilla and the photon `a` carries the copy. The probabilistic
//! protocol post-selects on an ancilla measurement and produces perfect
//! clones with probability `1/(1 + cos 2 theta)`. Both deterministic
//! protocols run the same four-exchange distributor circuit and differ only
//! in the two-qubit reference state loaded into `(a, b_2)`: one choice clones
//! every real input at the optimal fidelity `sqrt(1/2 + sqrt(1/8))`, the
//! other clones arbitrary inputs at the universal overlap `5/6`.

use crate::dynamics::{evolve_master, CollapseChannel, DynamicsError, EvolutionSpec, Segment};
use crate::fock::{fidelity, FockError, Mode, ModeLayout, Operator, QuantumState};
use crate::gates::{basis_mix_gate, rotation_gate, skew_hadamard_gate, GateError};
use crate::model::{build_effective_hamiltonian, effective_params, ModelError, SystemParams};
use crate::ode::Tolerance;
use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_4, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CloneError {
    #[error("to-be-cloned angle theta = {0} outside (0, pi/4]")]
    ThetaOutOfRange(f64),
    #[error("real-state cloning needs real input amplitudes (imaginary norm {0:.3e})")]
    ComplexInput(f64),
    #[error("input amplitudes are not normalized (norm^2 = {0})")]
    UnnormalizedInput(f64),
    #[error("reference weights (s, t) = ({s}, {t}) violate s^2 + t^2 + s t = 1 (got {norm})")]
    BadReference { s: f64, t: f64, norm: f64 },
    #[error("gate times must be positive")]
    BadGateTimes,
    #[error("config is for {got:?}, expected {expected:?}")]
    WrongProtocol { expected: Protocol, got: Protocol },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Gate(#[from] GateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Pqcm,
    RealState,
    Uqcm,
}

/// Protocol selection and preparation angles.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CloneConfig {
    pub protocol: Protocol,
    /// To-be-cloned real-state angle (probabilistic protocol).
    pub theta: f64,
    /// Ancilla preparation angle.
    pub theta1: f64,
    /// Photon preparation / rotation angle.
    pub theta2: f64,
    /// Probe measurement-basis angle, `nu_1 = pi/4 - theta_1`.
    pub nu1: f64,
    /// Photon preparation angle, `nu_2 = pi/4 - theta_2`.
    pub nu2: f64,
    /// Universal-cloner reference weights.
    pub s: f64,
    pub t: f64,
}

impl CloneConfig {
    /// Probabilistic cloner for the two-state set at angle `theta` in
    /// `(0, pi/4]`.
    ///
    /// The preparation angles follow from requiring that the circuit output
    /// factor into two perfect clones: `sin 2 theta_1 = sqrt((1 + tan^4
    /// theta)/2)` and `sin 2 theta_2 = (P + Q)/2`, `cos 2 theta_2 = (P -
    /// Q)/2` with `P = sqrt(2/(1 + tan^4 theta))`, `Q = sqrt(2/(1 + tan^-4
    /// theta))`; `P^2 + Q^2 = 2` makes the pair consistent for every theta in
    /// the domain.
    pub fn pqcm(theta: f64) -> Result<Self, CloneError> {
        if !(theta > 0.0 && theta <= FRAC_PI_4 + 1e-12) {
            return Err(CloneError::ThetaOutOfRange(theta));
        }
        let t4 = theta.tan().powi(4);
        let s2t1 = ((1.0 + t4) / 2.0).sqrt().min(1.0);
        let theta1 = 0.5 * s2t1.asin();
        let p = (2.0 / (1.0 + t4)).sqrt();
        let q = (2.0 / (1.0 + 1.0 / t4)).sqrt();
        let theta2 = 0.5 * f64::atan2((p + q) / 2.0, (p - q) / 2.0);
        Ok(Self {
            protocol: Protocol::Pqcm,
            theta,
            theta1,
            theta2,
            nu1: FRAC_PI_4 - theta1,
            nu2: FRAC_PI_4 - theta2,
            s: 0.0,
            t: 0.0,
        })
    }

    /// Deterministic cloner covariant on real input states; both clones reach
    /// `sqrt(1/2 + sqrt(1/8))` for every real input.
    pub fn real_state() -> Self {
        let theta = (0.5 + 0.125_f64.sqrt()).sqrt().acos();
        Self {
            protocol: Protocol::RealState,
            theta: 0.0,
            theta1: theta,
            theta2: theta,
            nu1: 0.0,
            nu2: 0.0,
            s: 0.0,
            t: 0.0,
        }
    }

    /// Universal deterministic cloner with the optimal reference weights
    /// `s = t = 1/sqrt(3)`.
    pub fn uqcm() -> Self {
        let w = 1.0 / 3.0_f64.sqrt();
        Self::uqcm_with_weights(w, w).expect("optimal weights are normalized")
    }

    /// Universal cloner with custom reference weights; the reference state
    /// `s |Phi+> + t |+>|0>` has squared norm `s^2 + t^2 + s t`, which must
    /// be 1.
    pub fn uqcm_with_weights(s: f64, t: f64) -> Result<Self, CloneError> {
        let norm = s * s + t * t + s * t;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(CloneError::BadReference { s, t, norm });
        }
        Ok(Self {
            protocol: Protocol::Uqcm,
            theta: 0.0,
            theta1: 0.0,
            theta2: 0.0,
            nu1: 0.0,
            nu2: 0.0,
            s,
            t,
        })
    }

    /// The two-state-set input `|phi> = sin theta |0> + cos theta |1>` of the
    /// probabilistic protocol.
    pub fn pqcm_input(&self) -> [C64; 2] {
        [
            C64::new(self.theta.sin(), 0.0),
            C64::new(self.theta.cos(), 0.0),
        ]
    }

    /// Reference amplitudes on `(a, b_2)`, indexed `[n_a][n_b2]`, for the
    /// deterministic protocols.
    pub fn reference_amplitudes(&self) -> Option<[[C64; 2]; 2]> {
        let r = |x: f64| C64::new(x, 0.0);
        match self.protocol {
            Protocol::RealState => {
                // c00 - c10 = 2 c01 and c11 = c01 make the two clones'
                // reduced states identical for every real input; maximizing
                // the constant fidelity then pins c00/c01 = 1 + sqrt(2).
                let w = 1.0 / 8.0_f64.sqrt();
                Some([
                    [r((1.0 + 2.0_f64.sqrt()) * w), r(w)],
                    [r((2.0_f64.sqrt() - 1.0) * w), r(w)],
                ])
            }
            Protocol::Uqcm => {
                let inv = 1.0 / 2.0_f64.sqrt();
                Some([
                    [r((self.s + self.t) * inv), r(self.t * inv)],
                    [r(0.0), r(self.s * inv)],
                ])
            }
            Protocol::Pqcm => None,
        }
    }
}

fn check_input(input: &[C64; 2]) -> Result<(), CloneError> {
    let norm = input[0].norm_sqr() + input[1].norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(CloneError::UnnormalizedInput(norm));
    }
    Ok(())
}

/// Initial three-mode state of a protocol run: input on `b_1`, protocol
/// blanks or reference on `(a, b_2)`. Works on any local dimension >= 2.
fn initial_state(
    cfg: &CloneConfig,
    input: &[C64; 2],
    layout: &ModeLayout,
) -> Result<QuantumState, CloneError> {
    let dim = layout.dim();
    let mut v = DVector::<C64>::zeros(dim);
    match cfg.protocol {
        Protocol::Pqcm => {
            let photon = [C64::new(cfg.nu2.sin(), 0.0), C64::new(cfg.nu2.cos(), 0.0)];
            let probe = [C64::new(cfg.nu1.sin(), 0.0), C64::new(cfg.nu1.cos(), 0.0)];
            for (na, pa) in photon.iter().enumerate() {
                for (nb1, pb1) in input.iter().enumerate() {
                    for (nb2, pb2) in probe.iter().enumerate() {
                        let idx = layout.basis_index(&[na, nb1, nb2])?;
                        v[idx] = pa * pb1 * pb2;
                    }
                }
            }
        }
        Protocol::RealState | Protocol::Uqcm => {
            let c = cfg.reference_amplitudes().expect("deterministic protocol");
            for (na, row) in c.iter().enumerate() {
                for (nb2, amp) in row.iter().enumerate() {
                    for (nb1, pb1) in input.iter().enumerate() {
                        let idx = layout.basis_index(&[na, nb1, nb2])?;
                        v[idx] = amp * pb1;
                    }
                }
            }
        }
    }
    Ok(QuantumState::from_amplitudes(layout, v)?)
}

/// Per-run outcome: post-selection weight and the two clone fidelities
/// `sqrt(<psi_in| rho_clone |psi_in>)`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CloneOutcome {
    pub success_probability: f64,
    pub fidelity_b1: f64,
    pub fidelity_a: f64,
    pub dissipative: bool,
    pub snapshot: OutcomeSnapshot,
}

/// Parameters the outcome was computed with.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct OutcomeSnapshot {
    pub protocol: Protocol,
    pub input: [(f64, f64); 2],
    pub kappa: Option<f64>,
    pub n_th: Option<f64>,
}

fn qubit_state(layout: &ModeLayout, mode: Mode, amps: &[C64; 2]) -> QuantumState {
    let d = layout.local_dim(mode).expect("mode in layout");
    let sub = ModeLayout::new(vec![(mode, d)]).expect("valid");
    let mut v = DVector::<C64>::zeros(d);
    v[0] = amps[0];
    v[1] = amps[1];
    QuantumState::from_amplitudes(&sub, v).expect("normalized input")
}

fn clone_fidelities(state: &QuantumState, input: &[C64; 2]) -> Result<(f64, f64), CloneError> {
    let layout = state.layout();
    let rho_b1 = state.partial_trace(&[Mode::Mech1])?;
    let rho_a = state.partial_trace(&[Mode::Cavity])?;
    let target_b1 = qubit_state(layout, Mode::Mech1, input);
    let target_a = qubit_state(layout, Mode::Cavity, input);
    Ok((fidelity(&target_b1, &rho_b1)?, fidelity(&target_a, &rho_a)?))
}

fn embed(layout: &ModeLayout, mode: Mode, g: &Matrix2<C64>) -> Result<Operator, FockError> {
    Operator::embed_qubit_gate(layout, mode, g)
}

/// Projector onto `sin nu |0> + cos nu |1>` of `mode` (higher truncated
/// levels fall into the complement).
fn probe_projector(layout: &ModeLayout, mode: Mode, nu: f64) -> Result<Operator, FockError> {
    let d = layout.local_dim(mode).ok_or(FockError::UnknownMode(mode))?;
    let mut local = DMatrix::<C64>::zeros(d, d);
    let amps = [nu.sin(), nu.cos()];
    for i in 0..2 {
        for j in 0..2 {
            local[(i, j)] = C64::new(amps[i] * amps[j], 0.0);
        }
    }
    Operator::embed_mode_matrix(layout, mode, &local)
}

/// Ideal probabilistic cloning run. Returns the measured success weight and
/// the success-branch clone fidelities (both 1 up to rounding: the branch
/// factors into `|phi>_b1 (x) |phi>_a`).
pub fn pqcm_ideal(cfg: &CloneConfig) -> Result<CloneOutcome, CloneError> {
    if cfg.protocol != Protocol::Pqcm {
        return Err(CloneError::WrongProtocol {
            expected: Protocol::Pqcm,
            got: cfg.protocol,
        });
    }
    let layout = ModeLayout::three_mode(2);
    let input = cfg.pqcm_input();
    let mut state = initial_state(cfg, &input, &layout)?;

    // phonon-phonon controlled phase flip
    state = state.apply(&Operator::controlled_phase_flip(
        &layout,
        &[Mode::Mech1, Mode::Mech2],
    )?)?;
    // project the probe onto its preparation state
    let p_succ = probe_projector(&layout, Mode::Mech2, cfg.nu1)?;
    let projected = state.apply(&p_succ)?;
    let p = projected.trace().re;
    let v = projected
        .vector()
        .expect("pure state stays pure under projection");
    let success = QuantumState::from_amplitudes(&layout, v.clone())?;
    // photon-phonon gate, local rotations, second gate, final Hadamard
    let cz_b1_a = Operator::controlled_phase_flip(&layout, &[Mode::Mech1, Mode::Cavity])?;
    let mut out = success.apply(&cz_b1_a)?;
    out = out.apply(&embed(&layout, Mode::Cavity, &rotation_gate(cfg.theta2))?)?;
    out = out.apply(&embed(&layout, Mode::Mech1, &basis_mix_gate())?)?;
    out = out.apply(&cz_b1_a)?;
    out = out.apply(&embed(&layout, Mode::Mech1, &skew_hadamard_gate())?)?;

    let (f_b1, f_a) = clone_fidelities(&out, &input)?;
    Ok(CloneOutcome {
        success_probability: p,
        fidelity_b1: f_b1,
        fidelity_a: f_a,
        dissipative: false,
        snapshot: OutcomeSnapshot {
            protocol: Protocol::Pqcm,
            input: [(input[0].re, input[0].im), (input[1].re, input[1].im)],
            kappa: None,
            n_th: None,
        },
    })
}

/// The four-exchange distributor circuit shared by both deterministic
/// protocols: spread the input basis onto the reference pair, then fold the
/// pair back onto the input mode.
fn distributor_circuit(
    layout: &ModeLayout,
    state: QuantumState,
) -> Result<QuantumState, CloneError> {
    let h = basis_mix_gate();
    let cnot = |control: Mode, target: Mode| -> Result<Operator, FockError> {
        let hm = embed(layout, target, &h)?;
        let cz = Operator::controlled_phase_flip(layout, &[control, target])?;
        hm.mul(&cz)?.mul(&hm)
    };
    let mut st = state;
    st = st.apply(&cnot(Mode::Mech1, Mode::Cavity)?)?;
    st = st.apply(&cnot(Mode::Mech1, Mode::Mech2)?)?;
    st = st.apply(&cnot(Mode::Cavity, Mode::Mech1)?)?;
    st = st.apply(&cnot(Mode::Mech2, Mode::Mech1)?)?;
    Ok(st)
}

fn deterministic_ideal(cfg: &CloneConfig, input: [C64; 2]) -> Result<CloneOutcome, CloneError> {
    check_input(&input)?;
    let layout = ModeLayout::three_mode(2);
    let state = initial_state(cfg, &input, &layout)?;
    let out = distributor_circuit(&layout, state)?;
    let (f_b1, f_a) = clone_fidelities(&out, &input)?;
    Ok(CloneOutcome {
        success_probability: 1.0,
        fidelity_b1: f_b1,
        fidelity_a: f_a,
        dissipative: false,
        snapshot: OutcomeSnapshot {
            protocol: cfg.protocol,
            input: [(input[0].re, input[0].im), (input[1].re, input[1].im)],
            kappa: None,
            n_th: None,
        },
    })
}

/// Ideal real-state cloning run; input amplitudes must be real.
pub fn real_state_clone_ideal(
    cfg: &CloneConfig,
    input: [C64; 2],
) -> Result<CloneOutcome, CloneError> {
    if cfg.protocol != Protocol::RealState {
        return Err(CloneError::WrongProtocol {
            expected: Protocol::RealState,
            got: cfg.protocol,
        });
    }
    let im = (input[0].im.powi(2) + input[1].im.powi(2)).sqrt();
    if im > 1e-12 {
        return Err(CloneError::ComplexInput(im));
    }
    deterministic_ideal(cfg, input)
}

/// Ideal universal cloning run on an arbitrary input.
pub fn uqcm_ideal(cfg: &CloneConfig, input: [C64; 2]) -> Result<CloneOutcome, CloneError> {
    if cfg.protocol != Protocol::Uqcm {
        return Err(CloneError::WrongProtocol {
            expected: Protocol::Uqcm,
            got: cfg.protocol,
        });
    }
    deterministic_ideal(cfg, input)
}

/// Ideal instantaneous single-mode gates applied at segment boundaries.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum SingleGate {
    /// `U^(1)(theta)`.
    Rotation(f64),
    /// `U^(2)`, the symmetric Hadamard.
    BasisMix,
    /// The skew Hadamard closing the probabilistic circuit.
    SkewHadamard,
    /// `exp(i phi n)`; `phi = pi/2` turns the beam-splitter exchange into an
    /// exact swap.
    NumberPhase(f64),
}

impl SingleGate {
    fn build(&self, layout: &ModeLayout, mode: Mode) -> Result<Operator, FockError> {
        match *self {
            SingleGate::Rotation(theta) => embed(layout, mode, &rotation_gate(theta)),
            SingleGate::BasisMix => embed(layout, mode, &basis_mix_gate()),
            SingleGate::SkewHadamard => embed(layout, mode, &skew_hadamard_gate()),
            SingleGate::NumberPhase(phi) => Operator::number_phase(layout, mode, phi),
        }
    }
}

/// Physical regime of a pulse segment.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum SegmentRegime {
    /// Weak driving: cross-Kerr phase accumulation with the given Kerr mask.
    WeakDriveCpfg {
        kerr_mask: [bool; 2],
    },
    /// Strong driving: beam-splitter exchange between the cavity and
    /// mechanical mode `mech` (0-based).
    StrongDriveSwap {
        mech: usize,
    },
    Idle,
}

/// One timed stretch of the drive program.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PulseSegment {
    pub duration: f64,
    pub regime: SegmentRegime,
    /// Which tunneling couplings are active.
    pub tunneling: [bool; 2],
    /// Gates applied instantaneously at the segment end.
    pub end_gates: Vec<(Mode, SingleGate)>,
}

/// Probe measurement closing the probabilistic protocol.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProbeMeasurement {
    pub after_segment: usize,
    pub mode: Mode,
    /// Success-basis angle: project onto `sin nu |0> + cos nu |1>`.
    pub nu: f64,
}

/// Deterministic compilation of a protocol circuit into pulse segments.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PulseSchedule {
    pub protocol: Protocol,
    /// Gates applied before the first segment.
    pub initial_gates: Vec<(Mode, SingleGate)>,
    pub segments: Vec<PulseSegment>,
    pub measurement: Option<ProbeMeasurement>,
    pub gate_times: GateTimes,
}

/// Durations of the two physical gate units.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GateTimes {
    /// Weak-driving phase-gate unit.
    pub t_cpfg: f64,
    /// Strong-driving exchange unit (a full transfer takes
    /// `pi/(2 G)`, so this fixes the exchange coupling).
    pub t_swap: f64,
}

impl GateTimes {
    /// Exchange coupling realizing a full transfer in `t_swap`.
    pub fn swap_coupling(&self) -> f64 {
        PI / (2.0 * self.t_swap)
    }
}

impl Default for GateTimes {
    /// Phase-gate unit at its first peak and the exchange unit at the
    /// strong-driving working point `G = 0.05`.
    fn default() -> Self {
        Self {
            t_cpfg: PI,
            t_swap: PI / (2.0 * 0.05),
        }
    }
}

impl PulseSchedule {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Stable textual form used for hashing and the emitted run metadata.
    pub fn canonical_description(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("protocol={:?};", self.protocol));
        for (m, g) in &self.initial_gates {
            out.push_str(&format!("init:{m}:{g:?};"));
        }
        for seg in &self.segments {
            out.push_str(&format!(
                "seg:{:?}:dur={:.12e}:v={:?}",
                seg.regime, seg.duration, seg.tunneling
            ));
            for (m, g) in &seg.end_gates {
                out.push_str(&format!(":{m}:{g:?}"));
            }
            out.push(';');
        }
        if let Some(m) = &self.measurement {
            out.push_str(&format!(
                "measure:{}:{}:nu={:.12e};",
                m.after_segment, m.mode, m.nu
            ));
        }
        out
    }
}

/// Compile a protocol into its pulse schedule.
///
/// The phonon-phonon phase gate expands to exchange / photon-phonon gate /
/// exchange; every exchange ends with the `exp(i pi n/2)` corrections that
/// promote the beam-splitter propagator to an exact swap. The probabilistic
/// circuit costs 5 segments, the deterministic distributor costs 8.
pub fn schedule_from_circuit(
    cfg: &CloneConfig,
    gate_times: &GateTimes,
) -> Result<PulseSchedule, CloneError> {
    if !(gate_times.t_cpfg > 0.0 && gate_times.t_swap > 0.0) {
        return Err(CloneError::BadGateTimes);
    }
    let quarter = SingleGate::NumberPhase(PI / 2.0);
    let swap_seg = |mech: usize, extra: Vec<(Mode, SingleGate)>| {
        let mut end = vec![(Mode::Cavity, quarter), (Mode::mech(mech), quarter)];
        end.extend(extra);
        PulseSegment {
            duration: gate_times.t_swap,
            regime: SegmentRegime::StrongDriveSwap { mech },
            tunneling: [mech == 0, mech == 1],
            end_gates: end,
        }
    };
    let cpfg_seg = |kerr_mask: [bool; 2], end: Vec<(Mode, SingleGate)>| PulseSegment {
        duration: gate_times.t_cpfg,
        regime: SegmentRegime::WeakDriveCpfg { kerr_mask },
        tunneling: [true, true],
        end_gates: end,
    };

    let schedule = match cfg.protocol {
        Protocol::Pqcm => PulseSchedule {
            protocol: Protocol::Pqcm,
            initial_gates: vec![],
            segments: vec![
                // phonon-phonon gate rides b_1 through the cavity
                swap_seg(0, vec![]),
                cpfg_seg([false, true], vec![]),
                swap_seg(0, vec![]),
                // post-measurement stage: two photon-phonon gates with the
                // local rotations between them
                cpfg_seg(
                    [true, false],
                    vec![
                        (Mode::Cavity, SingleGate::Rotation(cfg.theta2)),
                        (Mode::Mech1, SingleGate::BasisMix),
                    ],
                ),
                cpfg_seg([true, false], vec![(Mode::Mech1, SingleGate::SkewHadamard)]),
            ],
            measurement: Some(ProbeMeasurement {
                after_segment: 2,
                mode: Mode::Mech2,
                nu: cfg.nu1,
            }),
            gate_times: *gate_times,
        },
        Protocol::RealState | Protocol::Uqcm => PulseSchedule {
            protocol: cfg.protocol,
            initial_gates: vec![(Mode::Cavity, SingleGate::BasisMix)],
            segments: vec![
                cpfg_seg(
                    [true, false],
                    vec![
                        (Mode::Cavity, SingleGate::BasisMix),
                        (Mode::Mech2, SingleGate::BasisMix),
                    ],
                ),
                swap_seg(0, vec![]),
                cpfg_seg([false, true], vec![]),
                swap_seg(
                    0,
                    vec![
                        (Mode::Mech2, SingleGate::BasisMix),
                        (Mode::Mech1, SingleGate::BasisMix),
                    ],
                ),
                cpfg_seg([true, false], vec![]),
                swap_seg(1, vec![]),
                cpfg_seg([true, false], vec![]),
                swap_seg(1, vec![(Mode::Mech1, SingleGate::BasisMix)]),
            ],
            measurement: None,
            gate_times: *gate_times,
        },
    };
    Ok(schedule)
}

/// Truncation used by the dissipative engine. The exchange of two
/// simultaneously excited modes passes through the two-excitation manifold,
/// so qubit truncation would miss the `-1` it imprints on `|11>`.
const DISSIPATIVE_DIM: usize = 3;

fn build_segment(
    seg: &PulseSegment,
    layout: &ModeLayout,
    params: &SystemParams,
    gate_times: &GateTimes,
) -> Result<Segment, CloneError> {
    // Every segment is realized in the interaction picture of its single-mode
    // energies (a frame alignment absorbed by the ideal local gates), so what
    // remains of a weak segment is the Kerr phase plus its detuning residual,
    // and of a strong segment the bare beam-splitter exchange.
    let mut frame_corrections: Vec<Operator> = Vec::new();
    let h = match seg.regime {
        SegmentRegime::WeakDriveCpfg { kerr_mask } => {
            let eff = effective_params(params)?.with_kerr_mask(kerr_mask);
            for (mode, energy) in [
                (Mode::Cavity, eff.delta_c_prime),
                (Mode::Mech1, eff.omega_eff[0]),
                (Mode::Mech2, eff.omega_eff[1]),
            ] {
                frame_corrections.push(Operator::number_phase(
                    layout,
                    mode,
                    energy * seg.duration,
                )?);
            }
            build_effective_hamiltonian(&eff, layout)?
        }
        SegmentRegime::StrongDriveSwap { mech } => {
            let g = C64::new(gate_times.swap_coupling(), 0.0);
            let a = Operator::ladder(layout, Mode::Cavity)?;
            let b = Operator::ladder(layout, Mode::mech(mech))?;
            let coupling = a.adjoint().mul(&b)?.scale(g);
            coupling.add(&coupling.adjoint())?
        }
        SegmentRegime::Idle => Operator::zeros(layout),
    };
    let mut channels = Vec::new();
    if params.kappa > 0.0 {
        channels.push(CollapseChannel::new(
            Operator::ladder(layout, Mode::Cavity)?,
            params.kappa,
        ));
    }
    for j in 0..2 {
        let b = Operator::ladder(layout, Mode::mech(j))?;
        let down = params.gamma_m[j] * (params.n_th[j] + 1.0);
        let up = params.gamma_m[j] * params.n_th[j];
        if down > 0.0 {
            channels.push(CollapseChannel::new(b.clone(), down));
        }
        if up > 0.0 {
            channels.push(CollapseChannel::new(b.adjoint(), up));
        }
    }
    let mut end = frame_corrections;
    for (mode, gate) in &seg.end_gates {
        end.push(gate.build(layout, *mode)?);
    }
    Ok(Segment::new(h, channels, seg.duration).with_end_unitaries(end))
}

/// Execute a compiled schedule under the master equation with cavity decay
/// `kappa` and thermal occupation `n_th` on both mechanical baths. The
/// probabilistic protocol post-selects the probe measurement; the returned
/// fidelities always refer to the success branch.
pub fn run_dissipative(
    schedule: &PulseSchedule,
    cfg: &CloneConfig,
    input: [C64; 2],
    kappa: f64,
    n_th: f64,
    tol: Tolerance,
) -> Result<CloneOutcome, CloneError> {
    check_input(&input)?;
    if schedule.protocol != cfg.protocol {
        return Err(CloneError::WrongProtocol {
            expected: schedule.protocol,
            got: cfg.protocol,
        });
    }
    let mut params = SystemParams::cpfg_working_point();
    params.kappa = kappa;
    params.n_th = [n_th; 2];
    let layout = ModeLayout::three_mode(DISSIPATIVE_DIM);

    let mut state = initial_state(cfg, &input, &layout)?;
    for (mode, gate) in &schedule.initial_gates {
        state = state.apply(&gate.build(&layout, *mode)?)?;
    }
    let mut rho = state.density();

    let run = |segments: &[PulseSegment], rho: DMatrix<C64>| -> Result<DMatrix<C64>, CloneError> {
        if segments.is_empty() {
            return Ok(rho);
        }
        let built: Result<Vec<Segment>, CloneError> = segments
            .iter()
            .map(|s| build_segment(s, &layout, &params, &schedule.gate_times))
            .collect();
        let spec = EvolutionSpec::new(built?, tol);
        let state = QuantumState::density_unchecked(layout.clone(), rho);
        let result = evolve_master(&spec, &state)?;
        Ok(result.final_state.density())
    };

    let mut success_probability = 1.0;
    if let Some(m) = &schedule.measurement {
        let cut = m.after_segment + 1;
        rho = run(&schedule.segments[..cut], rho)?;
        let proj = probe_projector(&layout, m.mode, m.nu)?;
        let projected = proj.matrix() * &rho * proj.matrix().adjoint();
        let p = projected.trace().re;
        success_probability = p.clamp(0.0, 1.0);
        rho = projected / C64::new(p.max(1e-300), 0.0);
        rho = run(&schedule.segments[cut..], rho)?;
    } else {
        rho = run(&schedule.segments, rho)?;
    }

    let final_state = QuantumState::density_unchecked(layout.clone(), rho);
    let (f_b1, f_a) = clone_fidelities(&final_state, &input)?;
    Ok(CloneOutcome {
        success_probability,
        fidelity_b1: f_b1,
        fidelity_a: f_a,
        dissipative: true,
        snapshot: OutcomeSnapshot {
            protocol: cfg.protocol,
            input: [(input[0].re, input[0].im), (input[1].re, input[1].im)],
            kappa: Some(kappa),
            n_th: Some(n_th),
        },
    })
}
