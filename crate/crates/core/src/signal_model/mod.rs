//! Synthetic EOG traces: gaze scripts, pulse synthesis and noise injection.
//!
//! A trace holds two electrode channels in microvolts, the point of interest
//! `v_p` and the reference `v_ref`. Each scripted gaze event becomes one
//! smooth unipolar pulse on `v_p` whose sign encodes the gaze direction.
//!
//! The pulse is a raised cosine (Hann shape) spanning the event duration,
//! with its apex snapped onto the nearest sample so the sampled peak equals
//! the event amplitude exactly. Durations around 28-36 ms keep at least 95%
//! of the non-DC energy of an isolated pulse inside the 1-50 Hz EOG band;
//! see [`spectrum::band_energy_fraction`].

mod io;
pub mod spectrum;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_script, load_trace_csv, parse_script, save_trace_csv, write_trace_csv};

/// Lower edge of the EOG voltage range, microvolts.
pub const EOG_MIN_UV: f64 = 50.0;
/// Upper edge of the EOG voltage range, microvolts.
pub const EOG_MAX_UV: f64 = 3500.0;
/// EOG frequency band, Hz.
pub const EOG_BAND_HZ: (f64, f64) = (1.0, 50.0);

/// Reference ranges for the other bio-potentials, kept for documentation only.
pub const EEG_RANGE_UV: (f64, f64) = (10.0, 100.0);
pub const EEG_BAND_HZ: (f64, f64) = (0.1, 50.0);
pub const ECG_RANGE_UV: (f64, f64) = (1_000.0, 100_000.0);
pub const ECG_BAND_HZ: (f64, f64) = (0.05, 100.0);

/// Twice the upper band edge.
pub const MIN_SAMPLE_RATE_HZ: f64 = 2.0 * EOG_BAND_HZ.1;
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 250.0;

/// Default saccade pulse width. Sits at the centre of the band-compatible
/// range [`SACCADE_DURATION_RANGE_S`].
pub const DEFAULT_SACCADE_DURATION_S: f64 = 0.032;
/// Hann pulse widths whose isolated spectrum keeps >= 95% of the non-DC
/// energy in the EOG band at 250 Hz sampling.
pub const SACCADE_DURATION_RANGE_S: (f64, f64) = (0.028, 0.036);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "Left",
            Direction::Right => "Right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Direction::Left),
            "right" | "r" => Ok(Direction::Right),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

/// Maps a gaze direction to the sign of its deflection on `v_p`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Right gaze deflects `v_p` positive, left gaze negative.
    #[default]
    RightPositive,
    RightNegative,
}

impl Polarity {
    pub fn sign(self, direction: Direction) -> f64 {
        match (self, direction) {
            (Polarity::RightPositive, Direction::Right)
            | (Polarity::RightNegative, Direction::Left) => 1.0,
            _ => -1.0,
        }
    }

    /// Inverse of [`Polarity::sign`].
    pub fn direction_of(self, value: f64) -> Direction {
        let right_positive = self == Polarity::RightPositive;
        if (value > 0.0) == right_positive {
            Direction::Right
        } else {
            Direction::Left
        }
    }
}

/// Uniformly sampled pair of electrode potentials, microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTrace {
    sample_rate_hz: f64,
    v_p_uv: Vec<f64>,
    v_ref_uv: Vec<f64>,
}

impl SampleTrace {
    pub fn new(sample_rate_hz: f64, v_p_uv: Vec<f64>, v_ref_uv: Vec<f64>) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz >= MIN_SAMPLE_RATE_HZ) {
            return Err(Error::InvalidTrace(format!(
                "sample rate {sample_rate_hz} Hz below {MIN_SAMPLE_RATE_HZ} Hz"
            )));
        }
        if v_p_uv.is_empty() {
            return Err(Error::InvalidTrace("trace has no samples".into()));
        }
        if v_p_uv.len() != v_ref_uv.len() {
            return Err(Error::InvalidTrace(format!(
                "channel lengths differ: v_p has {}, v_ref has {}",
                v_p_uv.len(),
                v_ref_uv.len()
            )));
        }
        Ok(SampleTrace {
            sample_rate_hz,
            v_p_uv,
            v_ref_uv,
        })
    }

    /// Trace whose reference channel is held at zero.
    pub fn single_ended(sample_rate_hz: f64, v_p_uv: Vec<f64>) -> Result<Self> {
        let v_ref_uv = vec![0.0; v_p_uv.len()];
        Self::new(sample_rate_hz, v_p_uv, v_ref_uv)
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn v_p_uv(&self) -> &[f64] {
        &self.v_p_uv
    }

    pub fn v_ref_uv(&self) -> &[f64] {
        &self.v_ref_uv
    }

    pub fn len(&self) -> usize {
        self.v_p_uv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v_p_uv.is_empty()
    }

    pub fn time_s(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    /// Multiplies both channels by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        SampleTrace {
            sample_rate_hz: self.sample_rate_hz,
            v_p_uv: self.v_p_uv.iter().map(|v| v * factor).collect(),
            v_ref_uv: self.v_ref_uv.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn into_channels(self) -> (Vec<f64>, Vec<f64>) {
        (self.v_p_uv, self.v_ref_uv)
    }
}

/// One scripted eye movement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeEvent {
    pub direction: Direction,
    pub onset_s: f64,
    pub duration_s: f64,
    pub amplitude_uv: f64,
}

impl GazeEvent {
    pub fn new(direction: Direction, onset_s: f64, duration_s: f64, amplitude_uv: f64) -> Self {
        GazeEvent {
            direction,
            onset_s,
            duration_s,
            amplitude_uv,
        }
    }

    pub fn end_s(&self) -> f64 {
        self.onset_s + self.duration_s
    }

    /// Same event, gaze mirrored.
    pub fn mirrored(&self) -> Self {
        GazeEvent {
            direction: self.direction.opposite(),
            ..*self
        }
    }
}

/// Checks amplitudes, ordering and window fit of a script.
pub fn validate_script(script: &[GazeEvent], total_s: f64) -> Result<()> {
    for (index, event) in script.iter().enumerate() {
        if !(EOG_MIN_UV..=EOG_MAX_UV).contains(&event.amplitude_uv) {
            return Err(Error::AmplitudeOutOfRange {
                index,
                amplitude_uv: event.amplitude_uv,
            });
        }
        if !(event.onset_s >= 0.0 && event.duration_s > 0.0 && event.end_s() <= total_s) {
            return Err(Error::EventOutOfWindow { index, total_s });
        }
    }
    for (index, pair) in script.windows(2).enumerate() {
        if pair[1].onset_s < pair[0].end_s() {
            return Err(Error::OverlappingEvents {
                first: index,
                second: index + 1,
            });
        }
    }
    Ok(())
}

/// Synthesizes a noiseless trace from a gaze script.
///
/// The trace has `round(total_s * fs_hz)` samples at `t = i / fs_hz`; the end
/// point is excluded. `v_ref` is identically zero.
pub fn synth_trace(
    script: &[GazeEvent],
    total_s: f64,
    fs_hz: f64,
    polarity: Polarity,
) -> Result<SampleTrace> {
    if !(total_s.is_finite() && total_s > 0.0) {
        return Err(Error::param("total_s", format!("must be positive, got {total_s}")));
    }
    if !(fs_hz.is_finite() && fs_hz >= MIN_SAMPLE_RATE_HZ) {
        return Err(Error::param(
            "fs_hz",
            format!("must be at least {MIN_SAMPLE_RATE_HZ} Hz, got {fs_hz}"),
        ));
    }
    validate_script(script, total_s)?;

    let n = ((total_s * fs_hz).round() as usize).max(1);
    let mut v_p = vec![0.0; n];
    for event in script {
        let sign = polarity.sign(event.direction);
        render_pulse(&mut v_p, fs_hz, event, sign);
    }
    SampleTrace::single_ended(fs_hz, v_p)
}

fn render_pulse(out: &mut [f64], fs_hz: f64, event: &GazeEvent, sign: f64) {
    let half = 0.5 * event.duration_s;
    let apex = ((event.onset_s + half) * fs_hz).round() as i64;
    let reach = (half * fs_hz).ceil() as i64;
    let lo = (apex - reach).max(0);
    let hi = (apex + reach).min(out.len() as i64 - 1);
    for i in lo..=hi {
        let dt = (i - apex) as f64 / fs_hz;
        if dt.abs() < half {
            out[i as usize] += sign * event.amplitude_uv * 0.5 * (1.0 + (PI * dt / half).cos());
        }
    }
}

/// Additive disturbances on the point-of-interest channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub white_sigma_uv: f64,
    pub hum_amp_uv: f64,
    pub hum_freq_hz: f64,
    pub drift_amp_uv: f64,
    pub drift_freq_hz: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            white_sigma_uv: 0.0,
            hum_amp_uv: 0.0,
            hum_freq_hz: 50.0,
            drift_amp_uv: 0.0,
            drift_freq_hz: 0.2,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn silent() -> Self {
        Self::default()
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseConfig { seed, ..self }
    }

    pub fn is_silent(&self) -> bool {
        self.white_sigma_uv == 0.0 && self.hum_amp_uv == 0.0 && self.drift_amp_uv == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("white_sigma_uv", self.white_sigma_uv),
            ("hum_amp_uv", self.hum_amp_uv),
            ("drift_amp_uv", self.drift_amp_uv),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::param(name, format!("must be >= 0, got {value}")));
            }
        }
        for (name, value) in [
            ("hum_freq_hz", self.hum_freq_hz),
            ("drift_freq_hz", self.drift_freq_hz),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {value}")));
            }
        }
        Ok(())
    }
}

/// Adds white Gaussian noise, mains hum and baseline drift to `v_p`.
///
/// Deterministic in `cfg.seed`. Components with zero amplitude contribute
/// nothing, so an all-zero config returns the input unchanged.
pub fn add_noise(trace: &SampleTrace, cfg: &NoiseConfig) -> Result<SampleTrace> {
    cfg.validate()?;
    let fs = trace.sample_rate_hz();
    let mut v_p = trace.v_p_uv().to_vec();

    if cfg.white_sigma_uv > 0.0 {
        let normal = Normal::new(0.0, cfg.white_sigma_uv)
            .map_err(|e| Error::param("white_sigma_uv", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for v in &mut v_p {
            *v += normal.sample(&mut rng);
        }
    }
    for (amp, freq) in [
        (cfg.hum_amp_uv, cfg.hum_freq_hz),
        (cfg.drift_amp_uv, cfg.drift_freq_hz),
    ] {
        if amp > 0.0 {
            for (i, v) in v_p.iter_mut().enumerate() {
                *v += amp * (2.0 * PI * freq * i as f64 / fs).sin();
            }
        }
    }
    SampleTrace::new(fs, v_p, trace.v_ref_uv().to_vec())
}

/// Adds the same sinusoid to both electrodes, the way line coupling does.
pub fn add_common_mode(trace: &SampleTrace, amp_uv: f64, freq_hz: f64) -> Result<SampleTrace> {
    if !(amp_uv.is_finite() && freq_hz.is_finite() && freq_hz > 0.0) {
        return Err(Error::param(
            "common_mode",
            format!("bad amplitude {amp_uv} or frequency {freq_hz}"),
        ));
    }
    let fs = trace.sample_rate_hz();
    let hum = |i: usize| amp_uv * (2.0 * PI * freq_hz * i as f64 / fs).sin();
    let v_p = trace.v_p_uv().iter().enumerate().map(|(i, v)| v + hum(i)).collect();
    let v_ref = trace.v_ref_uv().iter().enumerate().map(|(i, v)| v + hum(i)).collect();
    SampleTrace::new(fs, v_p, v_ref)
}

/// Per-subject amplitude and noise characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectProfile {
    pub id: u8,
    pub saccade_amp_mean_uv: f64,
    #[serde(default)]
    pub saccade_amp_jitter_frac: f64,
    #[serde(default)]
    pub noise: NoiseConfig,
}

impl SubjectProfile {
    pub fn noiseless(id: u8, saccade_amp_mean_uv: f64) -> Self {
        SubjectProfile {
            id,
            saccade_amp_mean_uv,
            saccade_amp_jitter_frac: 0.0,
            noise: NoiseConfig::silent(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(EOG_MIN_UV..=EOG_MAX_UV).contains(&self.saccade_amp_mean_uv) {
            return Err(Error::param(
                "saccade_amp_mean_uv",
                format!(
                    "{} outside the EOG range [{EOG_MIN_UV}, {EOG_MAX_UV}] uV",
                    self.saccade_amp_mean_uv
                ),
            ));
        }
        if !(0.0..1.0).contains(&self.saccade_amp_jitter_frac) {
            return Err(Error::param(
                "saccade_amp_jitter_frac",
                format!("must lie in [0, 1), got {}", self.saccade_amp_jitter_frac),
            ));
        }
        self.noise.validate()
    }

    /// Amplitude for a uniform draw `u` in [-1, 1], clamped to the EOG range.
    pub fn amplitude_for(&self, u: f64) -> f64 {
        let raw = self.saccade_amp_mean_uv * (1.0 + self.saccade_amp_jitter_frac * u);
        raw.clamp(EOG_MIN_UV, EOG_MAX_UV)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn right(onset_s: f64, amplitude_uv: f64) -> GazeEvent {
        GazeEvent::new(Direction::Right, onset_s, DEFAULT_SACCADE_DURATION_S, amplitude_uv)
    }

    #[test]
    fn empty_script_gives_zero_trace() {
        let trace = synth_trace(&[], 1.0, 250.0, Polarity::default()).unwrap();
        assert_eq!(trace.len(), 250);
        assert!(trace.v_p_uv().iter().all(|&v| v == 0.0));
        assert!(trace.v_ref_uv().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn peak_matches_upper_eog_bound() {
        let trace = synth_trace(&[right(0.3, 3500.0)], 1.0, 250.0, Polarity::default()).unwrap();
        let peak = trace.v_p_uv().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 3500.0).abs() <= 1.0, "peak {peak}");
        assert!(trace.v_p_uv().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn off_grid_onset_still_hits_peak() {
        let trace = synth_trace(&[right(0.3013, 1200.0)], 1.0, 250.0, Polarity::default()).unwrap();
        let peak = trace.v_p_uv().iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak - 1200.0).abs() <= 1.0);
    }

    #[test]
    fn mirrored_script_negates_trace() {
        let left = [GazeEvent::new(Direction::Left, 0.2, 0.032, 900.0)];
        let right = [left[0].mirrored()];
        let a = synth_trace(&left, 1.0, 250.0, Polarity::default()).unwrap();
        let b = synth_trace(&right, 1.0, 250.0, Polarity::default()).unwrap();
        for (x, y) in a.v_p_uv().iter().zip(b.v_p_uv()) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn polarity_flip_negates_trace() {
        let script = [right(0.2, 700.0)];
        let a = synth_trace(&script, 1.0, 250.0, Polarity::RightPositive).unwrap();
        let b = synth_trace(&script, 1.0, 250.0, Polarity::RightNegative).unwrap();
        assert!(a.v_p_uv().iter().zip(b.v_p_uv()).all(|(x, y)| *x == -*y));
        assert_eq!(Polarity::RightNegative.direction_of(-1.0), Direction::Right);
    }

    #[test]
    fn baseline_is_zero_outside_events() {
        let trace = synth_trace(&[right(0.5, 1000.0)], 1.0, 250.0, Polarity::default()).unwrap();
        for (i, v) in trace.v_p_uv().iter().enumerate() {
            let t = trace.time_s(i);
            if !(0.49..=0.54).contains(&t) {
                assert_eq!(*v, 0.0, "t = {t}");
            }
        }
    }

    #[test]
    fn overlapping_events_are_rejected_with_indices() {
        let script = [right(0.1, 500.0), right(0.12, 500.0)];
        match synth_trace(&script, 1.0, 250.0, Polarity::default()) {
            Err(Error::OverlappingEvents { first: 0, second: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn amplitude_outside_eog_range_is_rejected() {
        for amp in [49.0, 3500.5] {
            let err = synth_trace(&[right(0.1, amp)], 1.0, 250.0, Polarity::default()).unwrap_err();
            assert!(matches!(err, Error::AmplitudeOutOfRange { index: 0, .. }));
            assert!(err.to_string().contains("[50, 3500]"));
        }
    }

    #[test]
    fn event_past_end_is_rejected() {
        let err = synth_trace(&[right(0.99, 500.0)], 1.0, 250.0, Polarity::default()).unwrap_err();
        assert!(matches!(err, Error::EventOutOfWindow { index: 0, .. }));
    }

    #[test]
    fn low_sample_rate_is_rejected() {
        assert!(synth_trace(&[], 1.0, 99.0, Polarity::default()).is_err());
        assert!(SampleTrace::new(99.0, vec![0.0], vec![0.0]).is_err());
        assert!(SampleTrace::new(250.0, vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(SampleTrace::new(250.0, vec![], vec![]).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let trace = synth_trace(&[right(0.2, 800.0)], 1.0, 250.0, Polarity::default()).unwrap();
        let out = add_noise(&trace, &NoiseConfig::silent().with_seed(99)).unwrap();
        assert_eq!(out, trace);
    }

    #[test]
    fn noise_is_seeded() {
        let trace = synth_trace(&[], 2.0, 250.0, Polarity::default()).unwrap();
        let cfg = NoiseConfig {
            white_sigma_uv: 30.0,
            hum_amp_uv: 5.0,
            drift_amp_uv: 10.0,
            seed: 7,
            ..NoiseConfig::default()
        };
        let a = add_noise(&trace, &cfg).unwrap();
        let b = add_noise(&trace, &cfg).unwrap();
        assert_eq!(a, b);
        let c = add_noise(&trace, &cfg.with_seed(8)).unwrap();
        assert_ne!(a, c);
        assert!(a.v_ref_uv().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn white_noise_has_requested_sigma() {
        let trace = SampleTrace::single_ended(250.0, vec![0.0; 100_000]).unwrap();
        let cfg = NoiseConfig {
            white_sigma_uv: 100.0,
            seed: 2024,
            ..NoiseConfig::default()
        };
        let out = add_noise(&trace, &cfg).unwrap();
        let n = out.len() as f64;
        let mean = out.v_p_uv().iter().sum::<f64>() / n;
        let var = out.v_p_uv().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var.sqrt() - 100.0).abs() <= 3.0, "sigma {}", var.sqrt());
    }

    #[test]
    fn hum_and_drift_follow_formula() {
        let trace = SampleTrace::single_ended(250.0, vec![0.0; 500]).unwrap();
        let cfg = NoiseConfig {
            hum_amp_uv: 20.0,
            drift_amp_uv: 40.0,
            ..NoiseConfig::default()
        };
        let out = add_noise(&trace, &cfg).unwrap();
        for (i, v) in out.v_p_uv().iter().enumerate() {
            let t = i as f64 / 250.0;
            let expected = 20.0 * (2.0 * PI * 50.0 * t).sin() + 40.0 * (2.0 * PI * 0.2 * t).sin();
            assert!((v - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_noise_amplitude_is_rejected() {
        let cfg = NoiseConfig {
            hum_amp_uv: -1.0,
            ..NoiseConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = NoiseConfig {
            hum_freq_hz: 0.0,
            ..NoiseConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn common_mode_lands_on_both_channels() {
        let trace = synth_trace(&[], 1.0, 250.0, Polarity::default()).unwrap();
        let cm = add_common_mode(&trace, 1000.0, 50.0).unwrap();
        assert_eq!(cm.v_p_uv(), cm.v_ref_uv());
        assert!(cm.v_p_uv().iter().any(|&v| v.abs() > 500.0));
    }

    #[test]
    fn jittered_amplitude_is_clamped() {
        let p = SubjectProfile {
            saccade_amp_jitter_frac: 0.9,
            ..SubjectProfile::noiseless(1, 3000.0)
        };
        assert_eq!(p.amplitude_for(1.0), EOG_MAX_UV);
        let p = SubjectProfile {
            saccade_amp_jitter_frac: 0.9,
            ..SubjectProfile::noiseless(1, 60.0)
        };
        assert_eq!(p.amplitude_for(-1.0), EOG_MIN_UV);
        assert!(SubjectProfile::noiseless(1, 20.0).validate().is_err());
    }
}
