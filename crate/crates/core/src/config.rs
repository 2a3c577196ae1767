//! Experiment configuration: TOML with one table per subsystem. Keys carry
//! their unit as a suffix (`_mhz` for ω/2π, `_us`, `_ns`, `_ms`, `_hz`,
//! `_per_ms`); unsuffixed values are dimensionless. Unknown keys are
//! rejected and missing keys take the built-in value.

use serde::{Deserialize, Serialize};

use crate::detection::{DetectionConfig, ScanSettings, WaveplateMode};
use crate::dynamics::IntegratorOptions;
use crate::error::ConfigError;
use crate::model::cavity::CavityConfig;
use crate::model::levels::{LevelScheme, SchemeKind, SchemeOptions};
use crate::model::units::{mhz_to_rad, zeeman_splitting};
use crate::source::{InitialState, PulseProgram, SourceModel, TransitMode, TransitModel};

pub const DEFAULT_PRESET: &str = "paper-defaults";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scheme: SchemeSection,
    pub cavity: CavitySection,
    pub atom: AtomSection,
    pub field: FieldSection,
    pub pulses: PulseSection,
    pub transit: TransitSection,
    pub initial: InitialSection,
    pub detection: DetectionSection,
    pub integrator: IntegratorSection,
    pub run: RunSection,
    pub scan: ScanSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub kind: SchemeKind,
    pub lost_level: bool,
    pub f0_offset_mhz: f64,
    pub sign_sigma_plus: f64,
    pub sign_sigma_minus: f64,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            kind: SchemeKind::Minimal,
            lost_level: false,
            f0_offset_mhz: crate::model::levels::F0_OFFSET_MHZ,
            sign_sigma_plus: 1.0,
            sign_sigma_minus: -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavitySection {
    pub g_max_mhz: f64,
    pub kappa_mhz: f64,
    pub kappa_out_fraction: f64,
    pub n_max: usize,
    pub detuning_c_mhz: f64,
}

impl Default for CavitySection {
    fn default() -> Self {
        Self {
            g_max_mhz: 3.1,
            kappa_mhz: 1.25,
            kappa_out_fraction: 0.93,
            n_max: 2,
            detuning_c_mhz: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomSection {
    /// Field decay rate γ/2π.
    pub gamma_mhz: f64,
}

impl Default for AtomSection {
    fn default() -> Self {
        Self { gamma_mhz: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSection {
    pub b_gauss: f64,
    pub g_factor: f64,
}

impl Default for FieldSection {
    fn default() -> Self {
        Self {
            b_gauss: 20.0,
            g_factor: -0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub omega0_mhz: f64,
    pub tp_us: f64,
    pub period_us: f64,
    /// ω₊/ω₋ pairs per sequence.
    pub pairs: usize,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            omega0_mhz: 24.0,
            tp_us: 1.42,
            period_us: 1.42,
            pairs: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransitSection {
    pub mode: TransitMode,
    pub g_scale: f64,
    pub duration_us: f64,
    pub arrival_rate_per_ms: f64,
    /// Average envelopes over transverse coupling scales.
    pub position_average: bool,
}

impl Default for TransitSection {
    fn default() -> Self {
        Self {
            mode: TransitMode::Constant,
            g_scale: 1.0,
            duration_us: 50.0,
            arrival_rate_per_ms: 2.0,
            position_average: false,
        }
    }
}

/// Ground-state populations on entry; normalized on use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub minus_one: f64,
    pub zero: f64,
    pub plus_one: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            minus_one: 0.5,
            zero: 0.0,
            plus_one: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    pub waveplate: WaveplateMode,
    pub delay_long_us: f64,
    pub long_fiber_open: bool,
    pub bs_overlap: f64,
    pub efficiency: f64,
    pub dark_rate_hz: f64,
    pub bin_width_ns: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let d = DetectionConfig::default();
        Self {
            waveplate: d.waveplate_mode,
            delay_long_us: d.delay_long * 1e6,
            long_fiber_open: d.long_fiber_open,
            bs_overlap: d.bs_overlap,
            efficiency: d.detector_efficiency,
            dark_rate_hz: d.dark_rate,
            bin_width_ns: d.bin_width * 1e9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub max_step_ns: f64,
    pub step_safety: f64,
    pub drift_tolerance: f64,
    pub samples_per_pulse: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let o = IntegratorOptions::default();
        Self {
            max_step_ns: o.max_step * 1e9,
            step_safety: o.step_safety,
            drift_tolerance: o.drift_tolerance,
            samples_per_pulse: 142,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub trajectories: usize,
    pub seed: u64,
    pub output_dir: String,
    /// Observation window of the atom stream for `hbt`.
    pub stream_window_ms: f64,
    pub tau_max_us: f64,
    pub hom_grid_points: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            trajectories: 1000,
            seed: 1,
            output_dir: "polsource-out".into(),
            stream_window_ms: 40.0,
            tau_max_us: 12.0,
            hom_grid_points: crate::detection::HOM_GRID_POINTS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub omega0_mhz: Vec<f64>,
    pub tp_us: Vec<f64>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            omega0_mhz: vec![12.0, 18.0, 24.0],
            tp_us: vec![0.71, 1.42],
        }
    }
}

fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            key,
            reason: format!("must be > 0, got {v}"),
        })
    }
}

fn non_negative(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            key,
            reason: format!("must be >= 0, got {v}"),
        })
    }
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        match name {
            DEFAULT_PRESET => Ok(Self::default()),
            other => Err(ConfigError::Preset(other.to_string())),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every section and builds each domain object once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("cavity.kappa_mhz", self.cavity.kappa_mhz)?;
        positive("cavity.g_max_mhz", self.cavity.g_max_mhz)?;
        non_negative("atom.gamma_mhz", self.atom.gamma_mhz)?;
        non_negative("pulses.omega0_mhz", self.pulses.omega0_mhz)?;
        positive("pulses.tp_us", self.pulses.tp_us)?;
        positive("pulses.period_us", self.pulses.period_us)?;
        if self.pulses.pairs == 0 {
            return Err(ConfigError::Invalid {
                key: "pulses.pairs",
                reason: "must be >= 1".into(),
            });
        }
        positive("transit.duration_us", self.transit.duration_us)?;
        non_negative("transit.arrival_rate_per_ms", self.transit.arrival_rate_per_ms)?;
        positive("integrator.max_step_ns", self.integrator.max_step_ns)?;
        positive("integrator.step_safety", self.integrator.step_safety)?;
        positive("integrator.drift_tolerance", self.integrator.drift_tolerance)?;
        positive("run.stream_window_ms", self.run.stream_window_ms)?;
        positive("run.tau_max_us", self.run.tau_max_us)?;
        if self.run.hom_grid_points < 2 {
            return Err(ConfigError::Invalid {
                key: "run.hom_grid_points",
                reason: "must be >= 2".into(),
            });
        }
        if self.scan.omega0_mhz.is_empty() || self.scan.tp_us.is_empty() {
            return Err(ConfigError::Invalid {
                key: "scan",
                reason: "grid must be nonempty".into(),
            });
        }
        for &w in &self.scan.omega0_mhz {
            non_negative("scan.omega0_mhz", w)?;
        }
        for &t in &self.scan.tp_us {
            positive("scan.tp_us", t)?;
        }
        let model = self.model()?;
        self.program(&model)?;
        self.transit()?;
        self.initial()?;
        self.detection().validate()?;
        Ok(())
    }

    pub fn zeeman(&self) -> Result<f64, ConfigError> {
        Ok(zeeman_splitting(self.field.b_gauss, self.field.g_factor)?)
    }

    pub fn model(&self) -> Result<SourceModel, ConfigError> {
        let mut opts = SchemeOptions::new(self.scheme.kind, self.zeeman()?);
        opts.lost_level = self.scheme.lost_level;
        opts.f0_offset = mhz_to_rad(self.scheme.f0_offset_mhz);
        opts.sign_sigma_plus = self.scheme.sign_sigma_plus;
        opts.sign_sigma_minus = self.scheme.sign_sigma_minus;
        let scheme = LevelScheme::build(&opts)?;
        let cavity = CavityConfig {
            g_max: mhz_to_rad(self.cavity.g_max_mhz),
            kappa: mhz_to_rad(self.cavity.kappa_mhz),
            kappa_out_fraction: self.cavity.kappa_out_fraction,
            n_max: self.cavity.n_max,
            detuning_c: mhz_to_rad(self.cavity.detuning_c_mhz),
        };
        let mut model = SourceModel::new(scheme, cavity, mhz_to_rad(self.atom.gamma_mhz))?;
        model.integrator = IntegratorOptions {
            max_step: self.integrator.max_step_ns * 1e-9,
            step_safety: self.integrator.step_safety,
            drift_tolerance: self.integrator.drift_tolerance,
            ..IntegratorOptions::default()
        };
        model.samples_per_pulse = self.integrator.samples_per_pulse;
        model.validate()?;
        Ok(model)
    }

    /// Alternating ω₊/ω₋ program with `pulses.pairs` repetitions.
    pub fn program(&self, model: &SourceModel) -> Result<PulseProgram, ConfigError> {
        let base = PulseProgram::alternating(
            mhz_to_rad(self.pulses.omega0_mhz),
            self.pulses.tp_us * 1e-6,
            model.zeeman(),
            self.pulses.pairs,
        );
        let p = PulseProgram::new(base.pulses, self.pulses.period_us * 1e-6, self.pulses.pairs)?;
        Ok(p)
    }

    pub fn transit(&self) -> Result<TransitModel, ConfigError> {
        let t = TransitModel {
            mode: self.transit.mode,
            g_scale: self.transit.g_scale,
            duration: self.transit.duration_us * 1e-6,
            arrival_rate: self.transit.arrival_rate_per_ms * 1e3,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn initial(&self) -> Result<InitialState, ConfigError> {
        let i = &self.initial;
        let weights: Vec<(i32, f64)> = [(-1, i.minus_one), (0, i.zero), (1, i.plus_one)]
            .into_iter()
            .filter(|&(_, w)| w != 0.0)
            .collect();
        let weights = if weights.is_empty() { vec![(-1, 0.0)] } else { weights };
        Ok(InitialState::new(weights)?)
    }

    pub fn detection(&self) -> DetectionConfig {
        let d = &self.detection;
        DetectionConfig {
            waveplate_mode: d.waveplate,
            delay_long: d.delay_long_us * 1e-6,
            long_fiber_open: d.long_fiber_open,
            bs_overlap: d.bs_overlap,
            detector_efficiency: d.efficiency,
            dark_rate: d.dark_rate_hz,
            bin_width: d.bin_width_ns * 1e-9,
        }
    }

    pub fn scan_settings(&self) -> ScanSettings {
        ScanSettings {
            omega0: self.scan.omega0_mhz.iter().map(|&w| mhz_to_rad(w)).collect(),
            t_p: self.scan.tp_us.iter().map(|&t| t * 1e-6).collect(),
            trajectories: self.run.trajectories,
            pulse_pairs: self.pulses.pairs,
            grid_points: self.run.hom_grid_points,
            seed: self.run.seed,
        }
    }
}
