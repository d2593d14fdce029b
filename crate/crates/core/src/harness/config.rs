//! Scenario files: TOML with strict key checking.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::channel::ChannelParams;
use crate::equalizer::{EqualizerParams, EqualizerState};
use crate::estimation::Method;
use crate::keyrate::KeyRateParams;
use crate::txrx::{FrameLayout, ModulationParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub master_seed: u64,
    pub trials: usize,
    /// Total slots (training + quantum) per trial.
    pub symbols_per_trial: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Leading frames excluded from estimation while the equalizer converges.
    #[serde(default)]
    pub warmup_frames: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub channel: ChannelParams,
    pub modulation: ModulationParams,
    pub equalizer: EqualizerParams,
    pub frame: FrameLayout,
    pub keyrate: KeyRateParams,
    #[serde(default)]
    pub exports: ExportConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fig4: Option<Fig4Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratecurve: Option<RateCurveConfig>,
    /// Named operating points for the key-rate calculator.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<KeyRatePoint>,
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

/// Optional per-trial artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportConfig {
    /// Per-frame singular values and added-noise entries.
    pub audit: bool,
    /// Tap matrix after every LMS update.
    pub taps: bool,
    /// Alice's symbols for every slot.
    pub symbols: bool,
    /// Received samples for every slot.
    pub received: bool,
    /// Jones matrix every `channel_stride` symbols.
    pub channel: bool,
    pub channel_stride: u64,
    /// Trials whose artifacts are written.
    pub trials: Vec<usize>,
}

impl Default for ExportConfig {
    fn default() -> Self {
        Self {
            audit: true,
            taps: false,
            symbols: false,
            received: false,
            channel: false,
            channel_stride: 1000,
            trials: vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig4Config {
    /// Write every `stride`-th LMS update.
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCurveConfig {
    pub loss_db_per_km: f64,
    pub start_km: f64,
    pub stop_km: f64,
    pub step_km: f64,
    pub curves: Vec<CurveSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    /// Used in the output file name; `[A-Za-z0-9_-]` only.
    pub name: String,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyRatePoint {
    pub name: String,
    /// Defaults to `keyrate.t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub eps: f64,
}

impl RateCurveConfig {
    pub fn distances(&self) -> Vec<f64> {
        let n = ((self.stop_km - self.start_km) / self.step_km + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| self.start_km + k as f64 * self.step_km)
            .collect()
    }
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(m) => invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !valid_name(&self.name) {
            return Err(invalid(format!(
                "scenario name `{}` must match [A-Za-z0-9_-]+",
                self.name
            )));
        }
        self.channel
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        self.modulation
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        self.frame.validate().map_err(|e| invalid(e.to_string()))?;
        EqualizerState::new(self.equalizer.mu).map_err(|e| invalid(e.to_string()))?;
        self.keyrate
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.symbols_per_trial < self.frame.frame_len() {
            return Err(invalid("symbols_per_trial is shorter than one frame"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods must not be empty"));
        }
        if self.exports.channel_stride == 0 {
            return Err(invalid("exports.channel_stride must be >= 1"));
        }
        if let Some(f) = &self.fig4 {
            if f.stride == 0 {
                return Err(invalid("fig4.stride must be >= 1"));
            }
        }
        if let Some(rc) = &self.ratecurve {
            let ok = rc.loss_db_per_km >= 0.0
                && rc.start_km >= 0.0
                && rc.stop_km >= rc.start_km
                && rc.step_km > 0.0
                && [rc.loss_db_per_km, rc.start_km, rc.stop_km, rc.step_km]
                    .iter()
                    .all(|v| v.is_finite());
            if !ok {
                return Err(invalid("ratecurve distances/loss out of range"));
            }
            for c in &rc.curves {
                if !valid_name(&c.name) {
                    return Err(invalid(format!(
                        "curve name `{}` must match [A-Za-z0-9_-]+",
                        c.name
                    )));
                }
            }
        }
        for p in &self.points {
            if !valid_name(&p.name) {
                return Err(invalid(format!(
                    "point name `{}` must match [A-Za-z0-9_-]+",
                    p.name
                )));
            }
        }
        Ok(())
    }

    pub fn frames_per_trial(&self) -> usize {
        self.symbols_per_trial.div_ceil(self.frame.frame_len())
    }

    pub fn uses(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }
}
