//! Fitting a subject's white-noise level to a target accuracy.
//!
//! Trial seeds are held fixed while sigma varies, so every candidate sees the
//! same underlying Gaussian draws scaled by sigma and the accuracy curve is
//! close to monotone. Bisection then converges on the crossing.

use super::{Execution, SubjectAccuracy, TrialRunner};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::signal_model::SubjectProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOutcome {
    pub white_sigma_uv: f64,
    pub accuracy_percent: f64,
}

/// Bisects `white_sigma_uv` in `[lo, hi]` so that accuracy over `n_trials`
/// lands as close as possible to `target_percent`.
pub fn calibrate_white_sigma(
    profile: &SubjectProfile,
    target_percent: f64,
    cfg: &PipelineConfig,
    n_trials: usize,
    seed: u64,
    (mut lo, mut hi): (f64, f64),
) -> Result<CalibrationOutcome> {
    if !(0.0..=100.0).contains(&target_percent) || !(0.0 <= lo && lo < hi) || n_trials == 0 {
        return Err(Error::param("calibration", "need 0 <= lo < hi, n_trials >= 1, target in [0, 100]"));
    }
    let runner = TrialRunner::new(cfg)?;
    let accuracy = |sigma: f64| -> Result<f64> {
        let mut p = profile.clone();
        p.noise.white_sigma_uv = sigma;
        let trials = runner.run_subject(&p, n_trials, seed, Execution::Parallel)?;
        Ok(SubjectAccuracy::from_trials(p.id, &trials).accuracy_percent)
    };

    let mut best = CalibrationOutcome {
        white_sigma_uv: lo,
        accuracy_percent: accuracy(lo)?,
    };
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        let acc = accuracy(mid)?;
        if (acc - target_percent).abs() < (best.accuracy_percent - target_percent).abs() {
            best = CalibrationOutcome {
                white_sigma_uv: mid,
                accuracy_percent: acc,
            };
        }
        if acc > target_percent {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-3 {
            break;
        }
    }
    Ok(best)
}
