//! Second-order Sallen-Key low-pass stage and its digital realization.
//!
//! The analog prototype is
//!
//! ```text
//! H(s) = k * w0^2 / (s^2 + (w0 / q) * s + w0^2),   w0 = 2 * pi * f_c
//! ```
//!
//! It is discretized with the bilinear transform, prewarped so that the
//! digital response at `f_c` matches the analog response there exactly.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analog_frontend::AmplifiedTrace;
use crate::error::{Error, Result};

/// Relative tolerance for the component self-check.
const COMPONENT_TOL: f64 = 1e-4;

/// Validated continuous-time design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SallenKeyParams {
    /// Natural frequency; also the -3 dB point when `q = 1/sqrt(2)`.
    pub cutoff_hz: f64,
    pub q: f64,
    /// Passband gain of the non-inverting amplifier.
    pub gain: f64,
}

impl Default for SallenKeyParams {
    /// Butterworth, unity gain, cutoff at the top of the EOG band.
    fn default() -> Self {
        SallenKeyParams {
            cutoff_hz: 50.0,
            q: FRAC_1_SQRT_2,
            gain: 1.0,
        }
    }
}

impl SallenKeyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff_hz.is_finite() && self.cutoff_hz > 0.0) {
            return Err(Error::param("cutoff_hz", format!("must be > 0, got {}", self.cutoff_hz)));
        }
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(Error::param("q", format!("must be > 0, got {}", self.q)));
        }
        if !(self.gain.is_finite() && self.gain >= 1.0) {
            return Err(Error::param("gain", format!("must be >= 1, got {}", self.gain)));
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI * self.cutoff_hz
    }

    /// Analog transfer function evaluated at `s`.
    pub fn analog_response(&self, s: Complex64) -> Complex64 {
        let w0 = self.omega0();
        self.gain * w0 * w0 / (s * s + s * (w0 / self.q) + w0 * w0)
    }

    pub fn analog_magnitude(&self, f_hz: f64) -> f64 {
        self.analog_response(Complex64::new(0.0, 2.0 * PI * f_hz)).norm()
    }
}

pub fn design_sallen_key(cutoff_hz: f64, q: f64, gain: f64) -> Result<SallenKeyParams> {
    let params = SallenKeyParams { cutoff_hz, q, gain };
    params.validate()?;
    Ok(params)
}

/// Passive parts plus amplifier gain of one Sallen-Key low-pass section.
///
/// `R1` runs from the input to the middle node, `R2` from the middle node to
/// the amplifier input, `C1` feeds back from the output to the middle node and
/// `C2` grounds the amplifier input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SallenKeyComponents {
    pub r1_ohms: f64,
    pub r2_ohms: f64,
    pub c1_farads: f64,
    pub c2_farads: f64,
    pub gain: f64,
}

impl SallenKeyComponents {
    /// Reads `(f_c, q, k)` back off the circuit's transfer function
    /// `K / (1 + s[C2(R1+R2) + R1 C1 (1-K)] + s^2 R1 R2 C1 C2)`.
    pub fn realized(&self) -> SallenKeyParams {
        let Self {
            r1_ohms: r1,
            r2_ohms: r2,
            c1_farads: c1,
            c2_farads: c2,
            gain: k,
        } = *self;
        let tau = (r1 * r2 * c1 * c2).sqrt();
        let damping = c2 * (r1 + r2) + r1 * c1 * (1.0 - k);
        SallenKeyParams {
            cutoff_hz: 1.0 / (2.0 * PI * tau),
            q: tau / damping,
            gain: k,
        }
    }
}

/// Component values for `params` with equal resistors and `C2 = c_farads`.
///
/// With `R1 = R2 = R` and `C1 = m * C2`, the damping condition becomes
/// `(K - 1) m + sqrt(m) / q - 2 = 0`, solved for its positive root in
/// `sqrt(m)`. The result is substituted back and checked to 0.01%.
pub fn component_values(params: &SallenKeyParams, c_farads: f64) -> Result<SallenKeyComponents> {
    params.validate()?;
    if !(c_farads.is_finite() && c_farads > 0.0) {
        return Err(Error::param("c_farads", format!("must be > 0, got {c_farads}")));
    }
    let SallenKeyParams { q, gain: k, .. } = *params;
    let excess = k - 1.0;
    let root = if excess == 0.0 {
        2.0 * q
    } else {
        let b = 1.0 / q;
        // Positive root of excess * u^2 + b * u - 2 = 0, written to avoid cancellation.
        4.0 / (b + (b * b + 8.0 * excess).sqrt())
    };
    let m = root * root;
    let r = 1.0 / (params.omega0() * c_farads * root);
    let parts = SallenKeyComponents {
        r1_ohms: r,
        r2_ohms: r,
        c1_farads: m * c_farads,
        c2_farads: c_farads,
        gain: k,
    };

    let back = parts.realized();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let ok = [r, m].iter().all(|v| v.is_finite() && *v > 0.0)
        && back.q > 0.0
        && rel(back.cutoff_hz, params.cutoff_hz) <= COMPONENT_TOL
        && rel(back.q, q) <= COMPONENT_TOL
        && rel(back.gain, k) <= COMPONENT_TOL;
    if !ok {
        return Err(Error::Infeasible { q, k });
    }
    Ok(parts)
}

/// Normalized two-pole recurrence `H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiquadCoeffs {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
    pub fs_hz: f64,
}

impl BiquadCoeffs {
    /// Roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let disc = Complex64::new(self.a1 * self.a1 - 4.0 * self.a2, 0.0).sqrt();
        [(-self.a1 + disc) / 2.0, (-self.a1 - disc) / 2.0]
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }

    pub fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Transfer function at `z = exp(j * 2 pi f / fs)`.
    pub fn response_at(&self, f_hz: f64) -> Complex64 {
        let zinv = Complex64::from_polar(1.0, -2.0 * PI * f_hz / self.fs_hz);
        let zinv2 = zinv * zinv;
        (self.b0 + self.b1 * zinv + self.b2 * zinv2) / (1.0 + self.a1 * zinv + self.a2 * zinv2)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "b0,b1,b2,a1,a2,fs_hz")?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            self.b0, self.b1, self.b2, self.a1, self.a2, self.fs_hz
        )
    }
}

/// Bilinear transform with prewarping at the cutoff.
pub fn discretize(params: &SallenKeyParams, fs_hz: f64) -> Result<BiquadCoeffs> {
    params.validate()?;
    if !(fs_hz.is_finite() && fs_hz > 2.0 * params.cutoff_hz) {
        return Err(Error::CutoffAboveNyquist {
            cutoff_hz: params.cutoff_hz,
            fs_hz,
        });
    }
    let w0 = params.omega0();
    // s = c (1 - z^-1) / (1 + z^-1), with c chosen so that s(f_c) = j w0.
    let c = w0 / (PI * params.cutoff_hz / fs_hz).tan();
    let c2 = c * c;
    let w02 = w0 * w0;
    let damp = w0 / params.q * c;
    let a0 = c2 + damp + w02;
    let num = params.gain * w02 / a0;
    Ok(BiquadCoeffs {
        b0: num,
        b1: 2.0 * num,
        b2: num,
        a1: 2.0 * (w02 - c2) / a0,
        a2: (c2 - damp + w02) / a0,
        fs_hz,
    })
}

/// Runs the recurrence over `input` from zero state (transposed direct form II).
pub fn filter_samples(input: &[f64], coeffs: &BiquadCoeffs) -> Vec<f64> {
    let (mut s1, mut s2) = (0.0, 0.0);
    input
        .iter()
        .map(|&x| {
            let y = coeffs.b0 * x + s1;
            s1 = coeffs.b1 * x - coeffs.a1 * y + s2;
            s2 = coeffs.b2 * x - coeffs.a2 * y;
            y
        })
        .collect()
}

pub fn apply_filter(trace: &AmplifiedTrace, coeffs: &BiquadCoeffs) -> Result<AmplifiedTrace> {
    if trace.sample_rate_hz != coeffs.fs_hz {
        return Err(Error::SampleRateMismatch {
            trace_hz: trace.sample_rate_hz,
            expected_hz: coeffs.fs_hz,
        });
    }
    Ok(AmplifiedTrace {
        sample_rate_hz: trace.sample_rate_hz,
        v_out_v: filter_samples(&trace.v_out_v, coeffs),
        clipped: trace.clipped.clone(),
    })
}

/// Magnitude and phase (radians) of the digital filter at `f_hz`.
pub fn frequency_response(coeffs: &BiquadCoeffs, f_hz: f64) -> Result<(f64, f64)> {
    let nyquist_hz = coeffs.fs_hz / 2.0;
    if !(0.0..=nyquist_hz).contains(&f_hz) {
        return Err(Error::FrequencyOutOfRange { f_hz, nyquist_hz });
    }
    let h = coeffs.response_at(f_hz);
    Ok((h.norm(), h.arg()))
}

/// `points` evenly spaced frequencies from DC to Nyquist inclusive.
pub fn response_sweep(coeffs: &BiquadCoeffs, points: usize) -> Vec<(f64, f64, f64)> {
    let nyquist = coeffs.fs_hz / 2.0;
    let last = points.saturating_sub(1).max(1) as f64;
    (0..points)
        .map(|i| {
            let f = nyquist * i as f64 / last;
            let h = coeffs.response_at(f);
            // `+ 0.0` folds -0 into 0
            (f, h.norm(), h.arg() + 0.0)
        })
        .collect()
}
