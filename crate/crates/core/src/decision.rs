//! Micro-controller stage: ADC quantization, hysteresis pulse detection and
//! left/right classification.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analog_frontend::{diff_amplify, AmplifiedTrace, FrontEndConfig};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::filter::{apply_filter, discretize, BiquadCoeffs};
use crate::signal_model::{Direction, Polarity, SampleTrace};

/// Mid-tread converter with two's-complement codes over `+-full_scale_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcConfig {
    pub bits: u32,
    pub full_scale_v: f64,
    pub fs_hz: f64,
}

impl AdcConfig {
    pub fn new(bits: u32, full_scale_v: f64, fs_hz: f64) -> Result<Self> {
        let adc = AdcConfig {
            bits,
            full_scale_v,
            fs_hz,
        };
        adc.validate()?;
        Ok(adc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=24).contains(&self.bits) {
            return Err(Error::param("bits", format!("must lie in [1, 24], got {}", self.bits)));
        }
        if !(self.full_scale_v.is_finite() && self.full_scale_v > 0.0) {
            return Err(Error::param(
                "full_scale_v",
                format!("must be > 0, got {}", self.full_scale_v),
            ));
        }
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(Error::param("fs_hz", format!("must be > 0, got {}", self.fs_hz)));
        }
        Ok(())
    }

    /// Volts per code.
    pub fn step_v(&self) -> f64 {
        2.0 * self.full_scale_v / f64::from(1u32 << self.bits)
    }

    pub fn code_range(&self) -> (i64, i64) {
        let half = 1i64 << (self.bits - 1);
        (-half, half - 1)
    }

    pub fn code_of(&self, v: f64) -> i64 {
        let (lo, hi) = self.code_range();
        ((v / self.step_v()).round() as i64).clamp(lo, hi)
    }

    pub fn quantize_sample(&self, v: f64) -> f64 {
        self.code_of(v) as f64 * self.step_v()
    }
}

pub fn quantize(trace: &AmplifiedTrace, adc: &AdcConfig) -> Result<AmplifiedTrace> {
    adc.validate()?;
    if trace.sample_rate_hz != adc.fs_hz {
        return Err(Error::SampleRateMismatch {
            trace_hz: trace.sample_rate_hz,
            expected_hz: adc.fs_hz,
        });
    }
    Ok(AmplifiedTrace {
        sample_rate_hz: trace.sample_rate_hz,
        v_out_v: trace.v_out_v.iter().map(|&v| adc.quantize_sample(v)).collect(),
        clipped: trace.clipped.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub threshold_v: f64,
    pub release_v: f64,
    pub min_pulse_s: f64,
    pub refractory_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            threshold_v: 0.1,
            release_v: 0.05,
            min_pulse_s: 0.012,
            refractory_s: 0.2,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.release_v > 0.0 && self.release_v < self.threshold_v && self.threshold_v.is_finite()) {
            return Err(Error::param(
                "release_v",
                format!(
                    "need 0 < release_v < threshold_v, got release {} / threshold {}",
                    self.release_v, self.threshold_v
                ),
            ));
        }
        if !(self.min_pulse_s.is_finite() && self.min_pulse_s > 0.0) {
            return Err(Error::param("min_pulse_s", format!("must be > 0, got {}", self.min_pulse_s)));
        }
        if !(self.refractory_s.is_finite() && self.refractory_s >= 0.0) {
            return Err(Error::param(
                "refractory_s",
                format!("must be >= 0, got {}", self.refractory_s),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedPulse {
    pub direction: Direction,
    pub onset_s: f64,
    pub duration_s: f64,
    pub peak_v: f64,
}

impl DetectedPulse {
    pub fn end_s(&self) -> f64 {
        self.onset_s + self.duration_s
    }
}

#[derive(Debug, Clone, Copy)]
enum DetectorState {
    Idle,
    Open { start: usize, peak: f64 },
    Refractory { until_s: f64 },
}

/// Hysteresis detector over a quantized trace.
///
/// A pulse opens on the first sample with `|v| > threshold_v` and closes on
/// the first later sample with `|v| < release_v`. Accepted pulses start a
/// refractory window during which nothing opens.
pub fn detect_pulses(
    trace: &AmplifiedTrace,
    det: &DetectorConfig,
    polarity: Polarity,
) -> Result<Vec<DetectedPulse>> {
    det.validate()?;
    let fs = trace.sample_rate_hz;
    let mut pulses = Vec::new();
    let mut state = DetectorState::Idle;

    let close = |start: usize, end: usize, peak: f64, pulses: &mut Vec<DetectedPulse>| {
        let duration_s = (end - start) as f64 / fs;
        if duration_s >= det.min_pulse_s {
            pulses.push(DetectedPulse {
                direction: polarity.direction_of(peak),
                onset_s: start as f64 / fs,
                duration_s,
                peak_v: peak,
            });
            DetectorState::Refractory {
                until_s: end as f64 / fs + det.refractory_s,
            }
        } else {
            DetectorState::Idle
        }
    };

    for (i, &v) in trace.v_out_v.iter().enumerate() {
        let t = i as f64 / fs;
        if let DetectorState::Refractory { until_s } = state {
            if t >= until_s {
                state = DetectorState::Idle;
            }
        }
        state = match state {
            DetectorState::Idle if v.abs() > det.threshold_v => DetectorState::Open { start: i, peak: v },
            DetectorState::Open { start, peak } => {
                if v.abs() < det.release_v {
                    close(start, i, peak, &mut pulses)
                } else if v.abs() > peak.abs() {
                    DetectorState::Open { start, peak: v }
                } else {
                    state
                }
            }
            other => other,
        };
    }
    if let DetectorState::Open { start, peak } = state {
        close(start, trace.len(), peak, &mut pulses);
    }
    Ok(pulses)
}

/// Motion command issued at a detected pulse onset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub direction: Direction,
    pub time_s: f64,
}

pub fn write_commands_csv<W: Write>(commands: &[Command], mut out: W) -> std::io::Result<()> {
    writeln!(out, "time_s,direction")?;
    for c in commands {
        writeln!(out, "{},{}", c.time_s, c.direction)?;
    }
    Ok(())
}

/// Every stage of the chain after the electrodes, ready to run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub frontend: FrontEndConfig,
    pub coeffs: BiquadCoeffs,
    pub adc: AdcConfig,
    pub detector: DetectorConfig,
    pub polarity: Polarity,
}

impl Pipeline {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Pipeline {
            frontend: cfg.frontend,
            coeffs: discretize(&cfg.filter, cfg.signal.sample_rate_hz)?,
            adc: cfg.adc_config(),
            detector: cfg.detector,
            polarity: cfg.signal.polarity,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.coeffs.fs_hz
    }

    /// Amplified and low-pass filtered trace, before the ADC.
    pub fn filtered(&self, trace: &SampleTrace) -> Result<AmplifiedTrace> {
        let amplified = diff_amplify(trace, &self.frontend)?;
        apply_filter(&amplified, &self.coeffs)
    }

    pub fn pulses(&self, trace: &SampleTrace) -> Result<Vec<DetectedPulse>> {
        let quantized = quantize(&self.filtered(trace)?, &self.adc)?;
        detect_pulses(&quantized, &self.detector, self.polarity)
    }

    pub fn classify(&self, trace: &SampleTrace) -> Result<Vec<Command>> {
        Ok(self
            .pulses(trace)?
            .into_iter()
            .map(|p| Command {
                direction: p.direction,
                time_s: p.onset_s,
            })
            .collect())
    }
}

/// Amplify, filter, quantize and detect; one command per pulse.
pub fn classify(trace: &SampleTrace, cfg: &PipelineConfig) -> Result<Vec<Command>> {
    Pipeline::new(cfg)?.classify(trace)
}
