//! JSON configuration: stimulus conditions and parameter sets.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use binmodel_core::experiments::GLOBAL_PARAMS;
use binmodel_core::{
    build_condition, from_db, Condition, DetectionParams, ExperimentId, Family, FixedParams, PhaseSpectrum,
    StimulusSpec, ThresholdVariable,
};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Interaural noise phase as written in condition files. `value` is in
/// radians for `constant` and in seconds for the delays.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum NoisePhaseConfig {
    Constant(f64),
    WaveformItd(f64),
    EnvelopeItd(f64),
}

impl From<NoisePhaseConfig> for PhaseSpectrum {
    fn from(c: NoisePhaseConfig) -> Self {
        match c {
            NoisePhaseConfig::Constant(v) => PhaseSpectrum::Constant(v),
            NoisePhaseConfig::WaveformItd(v) => PhaseSpectrum::WaveformItd(v),
            NoisePhaseConfig::EnvelopeItd(v) => PhaseSpectrum::EnvelopeItd(v),
        }
    }
}

fn default_rho() -> f64 {
    1.0
}

fn default_phase() -> NoisePhaseConfig {
    NoisePhaseConfig::Constant(0.0)
}

/// A stimulus given field by field.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusConfig {
    #[serde(default = "default_phase")]
    pub noise_phase: NoisePhaseConfig,
    #[serde(default = "default_rho")]
    pub rho_n: f64,
    #[serde(default)]
    pub tone_ipd_rad: Option<f64>,
    pub bandwidth_hz: f64,
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub center_hz: Option<f64>,
}

/// A point of one of the built-in stimulus families.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub family: String,
    /// Sweep position: `ρ`, ITD in ms, or bandwidth in Hz.
    pub sweep_value: f64,
    #[serde(default)]
    pub bandwidth_hz: Option<f64>,
    #[serde(default)]
    pub rho_n: Option<f64>,
    #[serde(default)]
    pub tone_ipd_rad: Option<f64>,
    #[serde(default)]
    pub noise_phase_rad: Option<f64>,
    #[serde(default)]
    pub snr_db: Option<f64>,
}

/// Contents of a condition file: a family point (recognized by its
/// `family` key) or an explicit stimulus.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionConfig {
    Family(FamilyConfig),
    Stimulus(StimulusConfig),
}

impl ConditionConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, label: &Path) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::Config {
            path: label.to_path_buf(),
            message: e.to_string(),
        };
        let value: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
        if value.get("family").is_some() {
            serde_json::from_value(value).map(ConditionConfig::Family).map_err(bad)
        } else {
            serde_json::from_value(value)
                .map(ConditionConfig::Stimulus)
                .map_err(bad)
        }
    }

    fn snr_db(&self) -> Option<f64> {
        match self {
            ConditionConfig::Family(f) => f.snr_db,
            ConditionConfig::Stimulus(s) => s.snr_db,
        }
    }

    /// Family of the condition, if it names one.
    pub fn family(&self) -> Result<Option<Family>> {
        match self {
            ConditionConfig::Family(f) => Ok(Some(f.family.parse()?)),
            ConditionConfig::Stimulus(_) => Ok(None),
        }
    }

    /// Reference/target pair for threshold search. An explicit stimulus is
    /// the target; its reference is the same noise without the tone.
    pub fn condition(&self) -> Result<Condition> {
        match self {
            ConditionConfig::Family(f) => {
                let fixed = FixedParams {
                    bandwidth_hz: f.bandwidth_hz,
                    rho_n: f.rho_n,
                    tone_ipd: f.tone_ipd_rad,
                    noise_phase: f.noise_phase_rad,
                };
                Ok(build_condition(f.family.parse()?, f.sweep_value, &fixed)?)
            }
            ConditionConfig::Stimulus(s) => {
                let tone_ipd = s.tone_ipd_rad.ok_or_else(|| {
                    Error::Argument("a threshold needs a tone: set `tone_ipd_rad` in the condition".into())
                })?;
                let mut reference = StimulusSpec::noise(s.noise_phase.into(), s.rho_n, s.bandwidth_hz);
                if let Some(center) = s.center_hz {
                    reference.center_frequency = center;
                }
                reference.validate()?;
                Ok(Condition {
                    reference,
                    target: reference.with_tone(tone_ipd),
                    variable: ThresholdVariable::SnrDb,
                    sweep_value: 0.0,
                })
            }
        }
    }

    /// The stimulus itself, with the tone at `snr_db` (no tone power when
    /// unset).
    pub fn stimulus(&self) -> Result<StimulusSpec> {
        let target = self.condition_target()?;
        let snr = self.snr_db().map_or(0.0, from_db);
        let spec = target.with_snr(snr);
        spec.validate()?;
        Ok(spec)
    }

    fn condition_target(&self) -> Result<StimulusSpec> {
        match self {
            ConditionConfig::Stimulus(s) if s.tone_ipd_rad.is_none() => {
                let mut spec = StimulusSpec::noise(s.noise_phase.into(), s.rho_n, s.bandwidth_hz);
                if let Some(center) = s.center_hz {
                    spec.center_frequency = center;
                }
                Ok(spec)
            }
            _ => Ok(self.condition()?.target),
        }
    }
}

/// Detection parameters as stored in JSON. Extra keys are ignored, so fit
/// output can be read back as a parameter file.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
pub struct ParamsFile {
    pub rho_hat: f64,
    pub sigma_bin: f64,
    #[serde(default)]
    pub sigma_mon: Option<f64>,
    #[serde(default)]
    pub dprime_target: Option<f64>,
}

impl ParamsFile {
    pub fn to_params(&self) -> Result<DetectionParams> {
        Ok(DetectionParams::with_target(
            self.rho_hat,
            self.sigma_bin,
            self.sigma_mon,
            self.dprime_target.unwrap_or(DetectionParams::DEFAULT_DPRIME),
        )?)
    }
}

impl From<&DetectionParams> for ParamsFile {
    fn from(p: &DetectionParams) -> Self {
        Self {
            rho_hat: p.rho_hat(),
            sigma_bin: p.sigma_bin(),
            sigma_mon: p.sigma_mon(),
            dprime_target: Some(p.dprime_target()),
        }
    }
}

/// Where detection parameters come from: `table1` (each experiment's own
/// row), `global`, the row of a named experiment, or a JSON file.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamsSource {
    Table1,
    Global,
    Experiment(ExperimentId),
    File(PathBuf),
}

impl FromStr for ParamsSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table1" => Ok(ParamsSource::Table1),
            "global" => Ok(ParamsSource::Global),
            key => match key.parse::<ExperimentId>() {
                Ok(id) => Ok(ParamsSource::Experiment(id)),
                Err(_) if key.ends_with(".json") || Path::new(s).exists() => Ok(ParamsSource::File(s.into())),
                Err(_) => Err(Error::Argument(format!(
                    "--params must be table1, global, an experiment name or a JSON file, got `{s}`"
                ))),
            },
        }
    }
}

/// A resolved [`ParamsSource`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSet {
    Table1,
    Global,
    Fixed(DetectionParams),
}

impl ParamsSource {
    pub fn load(&self) -> Result<ParamSet> {
        match self {
            ParamsSource::Table1 => Ok(ParamSet::Table1),
            ParamsSource::Global => Ok(ParamSet::Global),
            ParamsSource::Experiment(id) => Ok(ParamSet::Fixed(id.table1_params())),
            ParamsSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let file: ParamsFile = serde_json::from_str(&text).map_err(|e| Error::Config {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                Ok(ParamSet::Fixed(file.to_params()?))
            }
        }
    }
}

impl ParamSet {
    /// Parameters used for experiment `id`.
    pub fn for_experiment(&self, id: ExperimentId) -> DetectionParams {
        match self {
            ParamSet::Table1 => id.table1_params(),
            ParamSet::Global => id.global_params(),
            ParamSet::Fixed(p) => *p,
        }
    }

    /// Parameters for a single condition. Per-study rows are chosen by the
    /// condition's family; explicit stimuli use the global set.
    pub fn for_family(&self, family: Option<Family>) -> Result<DetectionParams> {
        let id = family.map(|f| f.name().parse::<ExperimentId>()).transpose()?;
        Ok(match (self, id) {
            (ParamSet::Fixed(p), _) => *p,
            (set, Some(id)) => set.for_experiment(id),
            (ParamSet::Table1, None) => {
                return Err(Error::Argument(
                    "--params table1 needs a family condition; use global, an experiment name or a file".into(),
                ))
            }
            (ParamSet::Global, None) => {
                let (rho, bin, mon) = GLOBAL_PARAMS;
                DetectionParams::new(rho, bin, Some(mon))?
            }
        })
    }
}

/// Fit result as written by `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub experiment: String,
    pub rho_hat: f64,
    pub sigma_bin: f64,
    pub sigma_mon: Option<f64>,
    pub dprime_target: f64,
    pub r_squared: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub n_points: usize,
}
