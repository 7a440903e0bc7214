//! Monte-Carlo evaluation: per-subject trial batches scored for direction
//! accuracy and summarized in a subjects/accuracy/variance table.
//!
//! Every trial draws its randomness from a seed derived from
//! `(master_seed, subject_id, trial_index)` alone, so results do not depend on
//! execution order and the parallel and sequential paths agree bit for bit.

mod calibrate;
mod report;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::decision::Pipeline;
use crate::error::{Error, Result};
use crate::signal_model::{add_noise, synth_trace, Direction, GazeEvent, SubjectProfile, DEFAULT_SACCADE_DURATION_S};

pub use calibrate::{calibrate_white_sigma, CalibrationOutcome};
pub use report::{parse_report_csv, render_report, EvalReport, ReportFormat, SubjectAccuracy};

/// Master seed used when none is given.
pub const DEFAULT_MASTER_SEED: u64 = 1;

/// Default trial count per subject.
pub const DEFAULT_TRIALS: usize = 1000;

/// Number of blocks used for the spread column.
pub const VARIANCE_BLOCKS: usize = 10;

/// Timing of the single gaze event that makes up one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialProtocol {
    pub total_s: f64,
    pub onset_s: f64,
    pub duration_s: f64,
}

impl Default for TrialProtocol {
    fn default() -> Self {
        TrialProtocol {
            total_s: 1.0,
            onset_s: 0.4,
            duration_s: DEFAULT_SACCADE_DURATION_S,
        }
    }
}

impl TrialProtocol {
    pub fn validate(&self) -> Result<()> {
        let fits = self.onset_s >= 0.0
            && self.duration_s > 0.0
            && self.onset_s + self.duration_s <= self.total_s
            && self.total_s.is_finite();
        if !fits {
            return Err(Error::param(
                "trial",
                format!(
                    "event [{}, {}] s must fit inside [0, {}] s",
                    self.onset_s,
                    self.onset_s + self.duration_s,
                    self.total_s
                ),
            ));
        }
        Ok(())
    }

    pub fn event(&self, direction: Direction, amplitude_uv: f64) -> GazeEvent {
        GazeEvent::new(direction, self.onset_s, self.duration_s, amplitude_uv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Uses rayon when the `parallel` feature is enabled, otherwise sequential.
    #[default]
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialResult {
    pub subject_id: u8,
    pub scripted: Direction,
    /// Direction of the first command, if any.
    pub classified: Option<Direction>,
    pub n_commands: usize,
    pub correct: bool,
    pub seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one trial, a pure function of its coordinates.
pub fn derive_seed(master_seed: u64, subject_id: u8, trial_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ u64::from(subject_id)) ^ trial_index)
}

/// Right for even indices, Left for odd: `floor(n/2)` Left and `ceil(n/2)` Right.
pub fn trial_direction(trial_index: u64) -> Direction {
    if trial_index.is_multiple_of(2) {
        Direction::Right
    } else {
        Direction::Left
    }
}

/// Pipeline plus protocol, built once and shared by every trial.
#[derive(Debug, Clone)]
pub struct TrialRunner {
    pipeline: Pipeline,
    protocol: TrialProtocol,
    fs_hz: f64,
}

impl TrialRunner {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        Ok(TrialRunner {
            pipeline: Pipeline::new(cfg)?,
            protocol: cfg.trial,
            fs_hz: cfg.signal.sample_rate_hz,
        })
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn run(&self, profile: &SubjectProfile, direction: Direction, seed: u64) -> Result<TrialResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amplitude = profile.amplitude_for(rng.random_range(-1.0..=1.0));
        let noise = profile.noise.with_seed(rng.next_u64());

        let event = self.protocol.event(direction, amplitude);
        let clean = synth_trace(&[event], self.protocol.total_s, self.fs_hz, self.pipeline.polarity)?;
        let noisy = add_noise(&clean, &noise)?;
        let commands = self.pipeline.classify(&noisy)?;

        let classified = commands.first().map(|c| c.direction);
        Ok(TrialResult {
            subject_id: profile.id,
            scripted: direction,
            classified,
            n_commands: commands.len(),
            correct: commands.len() == 1 && classified == Some(direction),
            seed,
        })
    }

    /// All trials of one subject, in trial order.
    pub fn run_subject(
        &self,
        profile: &SubjectProfile,
        n_trials: usize,
        master_seed: u64,
        exec: Execution,
    ) -> Result<Vec<TrialResult>> {
        let trial = |i: u64| self.run(profile, trial_direction(i), derive_seed(master_seed, profile.id, i));
        match exec {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n_trials as u64).into_par_iter().map(trial).collect()
            }
            _ => (0..n_trials as u64).map(trial).collect(),
        }
    }
}

pub fn run_trial(
    profile: &SubjectProfile,
    direction: Direction,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<TrialResult> {
    profile.validate()?;
    TrialRunner::new(cfg)?.run(profile, direction, seed)
}

/// Runs `n_trials` per profile and tabulates accuracy and block spread.
pub fn evaluate(
    profiles: &[SubjectProfile],
    n_trials: usize,
    cfg: &PipelineConfig,
    master_seed: u64,
    exec: Execution,
) -> Result<EvalReport> {
    if n_trials == 0 {
        return Err(Error::param("n_trials", "must be at least 1"));
    }
    for p in profiles {
        p.validate()?;
    }
    let runner = TrialRunner::new(cfg)?;
    let subjects = profiles
        .iter()
        .map(|p| {
            let trials = runner.run_subject(p, n_trials, master_seed, exec)?;
            Ok(SubjectAccuracy::from_trials(p.id, &trials))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport { subjects })
}

/// Sample standard deviation of per-block accuracy, in percentage points.
pub fn block_spread_percent(correct: &[bool], blocks: usize) -> f64 {
    let n = correct.len();
    let accs: Vec<f64> = (0..blocks)
        .map(|b| &correct[b * n / blocks..(b + 1) * n / blocks])
        .filter(|block| !block.is_empty())
        .map(|block| 100.0 * block.iter().filter(|&&c| c).count() as f64 / block.len() as f64)
        .collect();
    if accs.len() < 2 {
        return 0.0;
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let ss: f64 = accs.iter().map(|a| (a - mean).powi(2)).sum();
    (ss / (accs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::NoiseConfig;

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
        assert_ne!(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
        assert_ne!(derive_seed(1, 2, 3), derive_seed(1, 3, 3));
        assert_ne!(derive_seed(1, 2, 3), derive_seed(2, 2, 3));
    }

    #[test]
    fn directions_are_balanced() {
        for n in [1u64, 2, 7, 1000] {
            let left = (0..n).filter(|&i| trial_direction(i) == Direction::Left).count() as u64;
            assert_eq!(left, n / 2);
            assert_eq!(n - left, n.div_ceil(2));
        }
    }

    #[test]
    fn clean_trial_is_correct() {
        let cfg = PipelineConfig::default();
        let profile = SubjectProfile::noiseless(1, 1000.0);
        let r = run_trial(&profile, Direction::Right, &cfg, 5).unwrap();
        assert!(r.correct);
        assert_eq!(r.n_commands, 1);
        assert_eq!(r, run_trial(&profile, Direction::Right, &cfg, 5).unwrap());
    }

    #[test]
    fn overwhelming_noise_breaks_trials() {
        let cfg = PipelineConfig::default();
        let profile = SubjectProfile {
            noise: NoiseConfig {
                white_sigma_uv: 2000.0,
                ..NoiseConfig::default()
            },
            ..SubjectProfile::noiseless(1, 500.0)
        };
        let runner = TrialRunner::new(&cfg).unwrap();
        let failures = (0..100)
            .filter(|&s| !runner.run(&profile, trial_direction(s), s).unwrap().correct)
            .count();
        assert!(failures > 50, "{failures}");
    }

    #[test]
    fn block_spread() {
        assert_eq!(block_spread_percent(&[true; 100], 10), 0.0);
        let mut v = vec![true; 20];
        v[0] = false;
        // blocks of 2: one at 50%, nine at 100%
        let expected = {
            let accs = [50.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0];
            let m: f64 = accs.iter().sum::<f64>() / 10.0;
            (accs.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / 9.0).sqrt()
        };
        assert!((block_spread_percent(&v, 10) - expected).abs() < 1e-12);
        assert_eq!(block_spread_percent(&[false], 10), 0.0);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = PipelineConfig::default();
        assert!(evaluate(&[], 0, &cfg, 1, Execution::Sequential).is_err());
    }

    #[test]
    fn protocol_must_fit() {
        let p = TrialProtocol {
            onset_s: 0.99,
            ..TrialProtocol::default()
        };
        assert!(p.validate().is_err());
    }
}
