//! Discrete Fourier energy bookkeeping used by the band checks.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Power `|X_k|^2` of every DFT bin of `samples`.
pub fn power_spectrum(samples: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if buf.is_empty() {
        return Vec::new();
    }
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}

/// Absolute frequency of bin `k` for an `n`-point DFT, folding negative bins.
pub fn bin_frequency_hz(k: usize, n: usize, fs_hz: f64) -> f64 {
    k.min(n - k) as f64 * fs_hz / n as f64
}

/// Fraction of non-DC spectral energy whose bin frequency lies in
/// `[lo_hz, hi_hz]`. Returns 1 for a signal with no non-DC energy.
pub fn band_energy_fraction(samples: &[f64], fs_hz: f64, lo_hz: f64, hi_hz: f64) -> f64 {
    let power = power_spectrum(samples);
    let n = power.len();
    let (mut total, mut inside) = (0.0, 0.0);
    for (k, p) in power.iter().enumerate().skip(1) {
        total += p;
        let f = bin_frequency_hz(k, n, fs_hz);
        if (lo_hz..=hi_hz).contains(&f) {
            inside += p;
        }
    }
    if total == 0.0 {
        1.0
    } else {
        inside / total
    }
}

/// Non-DC spectral energy at frequencies strictly above `f_hz`.
pub fn energy_above(samples: &[f64], fs_hz: f64, f_hz: f64) -> f64 {
    let power = power_spectrum(samples);
    let n = power.len();
    power
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(k, _)| bin_frequency_hz(*k, n, fs_hz) > f_hz)
        .map(|(_, p)| p)
        .sum()
}
