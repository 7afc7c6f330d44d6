//! Simulator for a five-mode optomechanical system that clones quantum states
//! between a stored phonon and a flying photon.
//!
//! An optical cavity couples quadratically to two internal membranes, each of
//! which tunnel-couples to an external mechanical resonator. Eliminating the
//! lossy membranes dresses the external phonons and rescales the cross-Kerr
//! interaction, which drives controlled phase-flip gates between the cavity
//! field and the phonons; a strong drive linearizes the coupling and yields
//! beam-splitter state transfer. On top of those two gate primitives the
//! crate implements one probabilistic and two deterministic cloning
//! protocols, both as ideal circuits and as pulse schedules integrated under
//! a Lindblad master equation.
//!
//! All energies, rates and times are dimensionless, expressed in units of the
//! external-resonator frequency (nominally 2e6 Hz; recorded only as output
//! metadata by the CLI).

pub mod cloning;
pub mod dynamics;
pub mod fock;
pub mod gates;
pub mod model;
pub mod ode;
pub mod sweep;

pub use cloning::{CloneConfig, CloneOutcome, GateTimes, Protocol, PulseSchedule};
pub use dynamics::{CollapseChannel, EvolutionSpec, Segment};
pub use fock::{fidelity, FockError, Mode, ModeLayout, Operator, QuantumState, C64};
pub use gates::{GateTarget, GateTimeSearch, PhaseFactors, TransferMatrix};
pub use model::{EffectiveParams, Frame, LinearizedParams, MeanFieldState, SystemParams};
pub use ode::Tolerance;
