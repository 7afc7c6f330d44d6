//! Run configuration: a schema-validated JSON document with caption-exact
//! defaults for every command. Unknown keys are rejected so a typo cannot
//! silently fall back to a default.

use omclone::cloning::Protocol;
use omclone::Tolerance;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn default_seed() -> u64 {
    0
}

fn default_max_steps() -> usize {
    10_000_000
}

/// One sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: AxisScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

impl Axis {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Self {
            min,
            max,
            points,
            scale: AxisScale::Linear,
        }
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        Self {
            min,
            max,
            points,
            scale: AxisScale::Log,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 0 {
            return Vec::new();
        }
        if self.points == 1 {
            return vec![self.min];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let f = k as f64 / n;
                match self.scale {
                    AxisScale::Linear => self.min + (self.max - self.min) * f,
                    AxisScale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .collect()
    }

    pub fn validate(&self, name: &str) -> Result<(), String> {
        if self.points == 0 {
            return Err(format!("{name}: points must be positive"));
        }
        if self.scale == AxisScale::Log && (self.min <= 0.0 || self.max <= 0.0) {
            return Err(format!("{name}: log axis needs positive bounds"));
        }
        Ok(())
    }
}

/// Bare model constants; the symmetric convention (both resonator pairs
/// identical) of the gate analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub omega_a: f64,
    pub omega_m: f64,
    pub g: f64,
    pub v: f64,
    pub gamma_a: f64,
    pub gamma_m: f64,
    pub delta_c_prime: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            omega_a: 0.998,
            omega_m: 1.0,
            g: 1e-3,
            v: 0.046,
            gamma_a: 1e-3,
            gamma_m: 1e-5,
            delta_c_prime: 2.0,
        }
    }
}

impl ParamsConfig {
    pub fn system_params(&self) -> omclone::SystemParams {
        let mut p = omclone::SystemParams {
            omega_c: 0.0,
            omega_d: 0.0,
            epsilon: 0.0,
            kappa: 0.0,
            omega_a: [self.omega_a; 2],
            gamma_a: [self.gamma_a; 2],
            omega_m: [self.omega_m; 2],
            gamma_m: [self.gamma_m; 2],
            g: [self.g; 2],
            v: [self.v; 2],
            n_th: [0.0; 2],
        };
        p.set_cavity_detuning(self.delta_c_prime);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EffparamsConfig {
    pub v_axis: Axis,
    pub omega_a_axis: Axis,
}

impl Default for EffparamsConfig {
    fn default() -> Self {
        Self {
            v_axis: Axis::linear(0.0, 0.05, 61),
            omega_a_axis: Axis::linear(0.99, 1.01, 61),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityTarget {
    F1,
    F2,
    F3,
}

impl FidelityTarget {
    pub fn gate_target(&self) -> omclone::GateTarget {
        match self {
            FidelityTarget::F1 => omclone::GateTarget::CpfgAB1,
            FidelityTarget::F2 => omclone::GateTarget::CpfgAB2,
            FidelityTarget::F3 => omclone::GateTarget::CpfgAB1B2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateFidelityConfig {
    pub target: FidelityTarget,
    pub t_max: f64,
    pub dt: f64,
    pub n_states: usize,
    /// Every n-th grid point also gets a numerically simulated marker.
    pub marker_stride: usize,
}

impl Default for GateFidelityConfig {
    fn default() -> Self {
        Self {
            target: FidelityTarget::F1,
            t_max: 12.0,
            dt: 0.01,
            n_states: 6,
            marker_stride: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepKappaNthConfig {
    pub kappa_axis: Axis,
    pub n_th_axis: Axis,
    pub n_random_states: usize,
    /// Gate time; defaults to the first phase-gate peak.
    pub gate_time: Option<f64>,
}

impl Default for SweepKappaNthConfig {
    fn default() -> Self {
        Self {
            kappa_axis: Axis::log(1e-4, 1e-1, 31),
            n_th_axis: Axis::linear(0.0, 10.0, 31),
            n_random_states: 8,
            gate_time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmissionConfig {
    pub g_values: Vec<f64>,
    pub t_max: f64,
    pub dt: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub omega_c: f64,
    /// Couple the second resonator with the same strength instead of leaving
    /// it idle.
    pub second_mode: bool,
}

impl Default for TransmissionConfig {
    fn default() -> Self {
        Self {
            g_values: vec![0.05, 0.1, 0.15, 0.2],
            t_max: 40.0,
            dt: 0.02,
            kappa: 0.1,
            gamma: 1e-5,
            omega_c: 1.0,
            second_mode: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CloneCommandConfig {
    pub protocol: Protocol,
    /// Two-state-set angle for the probabilistic cloner.
    pub theta: f64,
    /// Input amplitudes for the deterministic cloners, `(re, im)` pairs.
    pub input: [(f64, f64); 2],
    pub kappa_values: Vec<f64>,
    pub n_th_values: Vec<f64>,
    pub t_cpfg: f64,
    /// Exchange-unit duration; `pi/(2 t_swap)` is the exchange coupling.
    pub t_swap: f64,
}

impl Default for CloneCommandConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::Pqcm,
            theta: std::f64::consts::FRAC_PI_4,
            input: [(1.0, 0.0), (0.0, 0.0)],
            kappa_values: vec![0.0, 1e-3, 1e-2],
            n_th_values: vec![0.0, 1.0],
            t_cpfg: PI,
            t_swap: PI / (2.0 * 0.05),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareWomConfig {
    pub t_max: f64,
    pub dt: f64,
    pub kappa: f64,
    /// Tunneling strength of the dressed model in the comparison.
    pub v: f64,
    pub n_states: usize,
    /// Also damp the membranes at `gamma_a` (the reference master equation
    /// carries no membrane channel; this is a sensitivity switch).
    pub membrane_damping: bool,
}

impl Default for CompareWomConfig {
    fn default() -> Self {
        Self {
            t_max: 150.0,
            dt: 0.25,
            kappa: 1e-2,
            v: 0.03,
            n_states: 4,
            membrane_damping: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeanFieldConfig {
    pub epsilon: f64,
    pub kappa: f64,
    pub t_end: f64,
    pub dt_record: f64,
    /// Prepared coherent amplitude of the membranes. The quadratic coupling
    /// exerts no static force on them, so the drive alone cannot build up
    /// membrane amplitude; the exchange working point assumes pre-excited
    /// membranes.
    pub beta_initial: f64,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        Self {
            epsilon: 10.0,
            kappa: 0.1,
            t_end: 600.0,
            dt_record: 0.25,
            beta_initial: 9.0,
        }
    }
}

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub tolerance: Option<Tolerance>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    pub params: ParamsConfig,
    pub effparams: EffparamsConfig,
    pub gate_fidelity: GateFidelityConfig,
    pub sweep_kappa_nth: SweepKappaNthConfig,
    pub transmission: TransmissionConfig,
    pub clone: CloneCommandConfig,
    pub compare_wom: CompareWomConfig,
    pub mean_field: MeanFieldConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            tolerance: None,
            max_steps: default_max_steps(),
            params: ParamsConfig::default(),
            effparams: EffparamsConfig::default(),
            gate_fidelity: GateFidelityConfig::default(),
            sweep_kappa_nth: SweepKappaNthConfig::default(),
            transmission: TransmissionConfig::default(),
            clone: CloneCommandConfig::default(),
            compare_wom: CompareWomConfig::default(),
            mean_field: MeanFieldConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn tolerance(&self) -> Tolerance {
        self.tolerance.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), String> {
        self.effparams.v_axis.validate("effparams.v_axis")?;
        self.effparams
            .omega_a_axis
            .validate("effparams.omega_a_axis")?;
        self.sweep_kappa_nth
            .kappa_axis
            .validate("sweep_kappa_nth.kappa_axis")?;
        self.sweep_kappa_nth
            .n_th_axis
            .validate("sweep_kappa_nth.n_th_axis")?;
        if self.gate_fidelity.dt <= 0.0 || self.gate_fidelity.t_max <= 0.0 {
            return Err("gate_fidelity: dt and t_max must be positive".into());
        }
        if self.gate_fidelity.marker_stride == 0 {
            return Err("gate_fidelity: marker_stride must be positive".into());
        }
        if self.transmission.dt <= 0.0 || self.transmission.t_max <= 0.0 {
            return Err("transmission: dt and t_max must be positive".into());
        }
        if self.clone.t_cpfg <= 0.0 || self.clone.t_swap <= 0.0 {
            return Err("clone: gate times must be positive".into());
        }
        if self.compare_wom.dt <= 0.0 || self.compare_wom.t_max <= 0.0 {
            return Err("compare_wom: dt and t_max must be positive".into());
        }
        if self.mean_field.dt_record <= 0.0 || self.mean_field.t_end <= 0.0 {
            return Err("mean_field: dt_record and t_end must be positive".into());
        }
        Ok(())
    }
}
