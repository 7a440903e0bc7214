use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere along the simulated chain.
///
/// Everything except [`Error::Io`] is a validation failure: bad parameters,
/// malformed input files, or inputs that break a type invariant.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("gaze events {first} and {second} overlap")]
    OverlappingEvents { first: usize, second: usize },

    #[error("gaze event {index}: amplitude {amplitude_uv} uV outside the EOG range [50, 3500] uV")]
    AmplitudeOutOfRange { index: usize, amplitude_uv: f64 },

    #[error("gaze event {index} does not fit in [0, {total_s}] s")]
    EventOutOfWindow { index: usize, total_s: f64 },

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("sample rate mismatch: trace at {trace_hz} Hz, stage expects {expected_hz} Hz")]
    SampleRateMismatch { trace_hz: f64, expected_hz: f64 },

    #[error("cutoff {cutoff_hz} Hz is at or above Nyquist for fs = {fs_hz} Hz")]
    CutoffAboveNyquist { cutoff_hz: f64, fs_hz: f64 },

    #[error("no positive component values realize q = {q}, k = {k}")]
    Infeasible { q: f64, k: f64 },

    #[error("frequency {f_hz} Hz outside [0, {nyquist_hz}] Hz")]
    FrequencyOutOfRange { f_hz: f64, nyquist_hz: f64 },

    #[error("input is not pure common mode (v_p != v_ref at index {index})")]
    NotCommonMode { index: usize },

    #[error("command at {at_s} s precedes previous command at {previous_s} s")]
    OutOfOrderCommand { at_s: f64, previous_s: f64 },

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("unknown report format `{0}` (expected plain, csv or md)")]
    UnknownFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for filesystem failures, false for every validation error.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
