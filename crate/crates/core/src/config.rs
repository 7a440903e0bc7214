//! Pipeline configuration file (TOML).
//!
//! One file covers every stage plus the subject profiles used by the
//! evaluation harness. The shipped file lives at `config/default.toml` in the
//! repository root and is compiled in as [`SHIPPED_CONFIG`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analog_frontend::FrontEndConfig;
use crate::decision::{AdcConfig, DetectorConfig};
use crate::error::{Error, Result};
use crate::filter::SallenKeyParams;
use crate::harness::TrialProtocol;
use crate::motor::MotorConfig;
use crate::signal_model::{Polarity, SubjectProfile, DEFAULT_SAMPLE_RATE_HZ, MIN_SAMPLE_RATE_HZ};

pub const SHIPPED_CONFIG: &str = include_str!("../../../config/default.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    pub sample_rate_hz: f64,
    pub polarity: Polarity,
}

impl Default for SignalConfig {
    fn default() -> Self {
        SignalConfig {
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            polarity: Polarity::RightPositive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdcSettings {
    pub bits: u32,
    pub full_scale_v: f64,
}

impl Default for AdcSettings {
    fn default() -> Self {
        AdcSettings {
            bits: 8,
            full_scale_v: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub signal: SignalConfig,
    pub frontend: FrontEndConfig,
    pub filter: SallenKeyParams,
    pub adc: AdcSettings,
    pub detector: DetectorConfig,
    pub motor: MotorConfig,
    pub trial: TrialProtocol,
    pub subjects: Vec<SubjectProfile>,
}

impl PipelineConfig {
    /// The shipped configuration, including the calibrated subject profiles.
    pub fn shipped() -> Self {
        Self::from_toml_str(SHIPPED_CONFIG).expect("shipped config is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn adc_config(&self) -> AdcConfig {
        AdcConfig {
            bits: self.adc.bits,
            full_scale_v: self.adc.full_scale_v,
            fs_hz: self.signal.sample_rate_hz,
        }
    }

    pub fn subject(&self, id: u8) -> Option<&SubjectProfile> {
        self.subjects.iter().find(|s| s.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        let fs = self.signal.sample_rate_hz;
        if !(fs.is_finite() && fs >= MIN_SAMPLE_RATE_HZ) {
            return Err(Error::param(
                "sample_rate_hz",
                format!("must be at least {MIN_SAMPLE_RATE_HZ} Hz, got {fs}"),
            ));
        }
        self.frontend.validate()?;
        self.filter.validate()?;
        if fs <= 2.0 * self.filter.cutoff_hz {
            return Err(Error::CutoffAboveNyquist {
                cutoff_hz: self.filter.cutoff_hz,
                fs_hz: fs,
            });
        }
        self.adc_config().validate()?;
        self.detector.validate()?;
        self.motor.validate()?;
        self.trial.validate()?;
        for (i, s) in self.subjects.iter().enumerate() {
            s.validate()?;
            if self.subjects[..i].iter().any(|o| o.id == s.id) {
                return Err(Error::Config(format!("duplicate subject id {}", s.id)));
            }
        }
        Ok(())
    }
}
