//! Differential instrumentation amplifier: `v_out = A * (v_p - v_ref)`,
//! followed by clamping at the supply rails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_model::SampleTrace;

const UV_TO_V: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontEndConfig {
    /// Differential gain. The real part sets it with one external resistor.
    pub gain: f64,
    pub rail_pos_v: f64,
    pub rail_neg_v: f64,
    /// Input-referred offset added to the difference, microvolts.
    pub input_offset_uv: f64,
}

impl Default for FrontEndConfig {
    /// Gain 1000 maps the 50-3500 uV EOG span to 0.05-3.5 V, inside +-5 V rails.
    fn default() -> Self {
        FrontEndConfig {
            gain: 1000.0,
            rail_pos_v: 5.0,
            rail_neg_v: -5.0,
            input_offset_uv: 0.0,
        }
    }
}

impl FrontEndConfig {
    pub fn with_gain(gain: f64) -> Self {
        FrontEndConfig {
            gain,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain.is_finite() && self.gain > 0.0) {
            return Err(Error::param("gain", format!("must be > 0, got {}", self.gain)));
        }
        if !(self.rail_neg_v < 0.0 && self.rail_pos_v > 0.0)
            || !self.rail_neg_v.is_finite()
            || !self.rail_pos_v.is_finite()
        {
            return Err(Error::param(
                "rails",
                format!(
                    "need rail_neg_v < 0 < rail_pos_v, got [{}, {}]",
                    self.rail_neg_v, self.rail_pos_v
                ),
            ));
        }
        if !self.input_offset_uv.is_finite() {
            return Err(Error::param("input_offset_uv", "must be finite"));
        }
        Ok(())
    }

    /// Output before clamping for a single differential input in microvolts.
    pub fn ideal_output_v(&self, diff_uv: f64) -> f64 {
        self.gain * ((diff_uv + self.input_offset_uv) * UV_TO_V)
    }
}

/// Amplifier output in volts with per-sample clipping flags.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifiedTrace {
    pub sample_rate_hz: f64,
    pub v_out_v: Vec<f64>,
    pub clipped: Vec<bool>,
}

impl AmplifiedTrace {
    /// Unclipped trace from raw volts.
    pub fn from_volts(sample_rate_hz: f64, v_out_v: Vec<f64>) -> Self {
        let clipped = vec![false; v_out_v.len()];
        AmplifiedTrace {
            sample_rate_hz,
            v_out_v,
            clipped,
        }
    }

    pub fn len(&self) -> usize {
        self.v_out_v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v_out_v.is_empty()
    }

    pub fn any_clipped(&self) -> bool {
        self.clipped.iter().any(|&c| c)
    }

    pub fn peak_abs_v(&self) -> f64 {
        self.v_out_v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn diff_amplify(trace: &SampleTrace, cfg: &FrontEndConfig) -> Result<AmplifiedTrace> {
    cfg.validate()?;
    let n = trace.len();
    let mut v_out_v = Vec::with_capacity(n);
    let mut clipped = Vec::with_capacity(n);
    for (index, (&p, &r)) in trace.v_p_uv().iter().zip(trace.v_ref_uv()).enumerate() {
        if !(p.is_finite() && r.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        let ideal = cfg.ideal_output_v(p - r);
        let out = ideal.clamp(cfg.rail_neg_v, cfg.rail_pos_v);
        v_out_v.push(out);
        clipped.push(out != ideal);
    }
    Ok(AmplifiedTrace {
        sample_rate_hz: trace.sample_rate_hz(),
        v_out_v,
        clipped,
    })
}

/// Largest output magnitude for a purely common-mode input.
///
/// With an ideal differential stage this is `gain * |offset|`, zero when the
/// offset is zero.
pub fn common_mode_rejection_check(common: &SampleTrace, cfg: &FrontEndConfig) -> Result<f64> {
    if let Some(index) = common
        .v_p_uv()
        .iter()
        .zip(common.v_ref_uv())
        .position(|(p, r)| p != r)
    {
        return Err(Error::NotCommonMode { index });
    }
    Ok(diff_amplify(common, cfg)?.peak_abs_v())
}
