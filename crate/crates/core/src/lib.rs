//! Simulator of an EOG-driven wheelchair control chain.
//!
//! Stages, in signal order:
//!
//! - [`signal_model`]: synthetic electrode traces from scripted gaze events,
//!   plus noise.
//! - [`analog_frontend`]: differential instrumentation amplifier with rails.
//! - [`filter`]: Sallen-Key low-pass design, discretization and response.
//! - [`decision`]: ADC, hysteresis pulse detector and left/right classifier.
//! - [`motor`]: drive state machine with dead time and auto-stop.
//! - [`harness`]: seeded Monte-Carlo accuracy evaluation and reports.

pub mod analog_frontend;
pub mod config;
pub mod decision;
pub mod error;
pub mod filter;
pub mod harness;
pub mod motor;
pub mod signal_model;

pub use config::PipelineConfig;
pub use error::{Error, Result};
