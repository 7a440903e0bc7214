//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's own implementations of the quantities it checks.
#![allow(dead_code)]

use std::f64::consts::PI;

/// O(n^2) DFT band fraction: share of non-DC energy with bin frequency in [lo, hi].
pub fn naive_band_fraction(x: &[f64], fs: f64, lo: f64, hi: f64) -> f64 {
    let n = x.len();
    let (mut total, mut inside) = (0.0, 0.0);
    for k in 1..n {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in x.iter().enumerate() {
            let ang = -2.0 * PI * (k * i % n) as f64 / n as f64;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        let p = re * re + im * im;
        total += p;
        let f = k.min(n - k) as f64 * fs / n as f64;
        if f >= lo && f <= hi {
            inside += p;
        }
    }
    if total == 0.0 {
        1.0
    } else {
        inside / total
    }
}

/// Periodogram power summed over bins strictly above `f_hz` (naive DFT).
pub fn naive_energy_above(x: &[f64], fs: f64, f_hz: f64) -> f64 {
    let n = x.len();
    (1..n)
        .filter(|&k| k.min(n - k) as f64 * fs / n as f64 > f_hz)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in x.iter().enumerate() {
                let ang = -2.0 * PI * (k * i % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            re * re + im * im
        })
        .sum()
}

/// Natural frequency, Q and gain of a Sallen-Key low-pass built from parts,
/// read off `K / (R1 R2 C1 C2 s^2 + (R1 C2 + R2 C2 + R1 C1 (1 - K)) s + 1)`.
pub fn sallen_key_rederive(r1: f64, r2: f64, c1: f64, c2: f64, k: f64) -> (f64, f64, f64) {
    let a2 = r1 * r2 * c1 * c2;
    let a1 = r1 * c2 + r2 * c2 + r1 * c1 * (1.0 - k);
    let w0 = 1.0 / a2.sqrt();
    (w0 / (2.0 * PI), 1.0 / (w0 * a1), k)
}

/// Steady-state gain of a filter at `f_hz`, measured by driving it with a
/// sinusoid and least-squares fitting the settled output.
pub fn measured_gain(filter: impl Fn(&[f64]) -> Vec<f64>, f_hz: f64, fs: f64) -> f64 {
    let n = 20_000;
    let w = 2.0 * PI * f_hz / fs;
    let x: Vec<f64> = (0..n).map(|i| (w * i as f64).sin()).collect();
    let y = filter(&x);
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, v) in y.iter().enumerate().skip(n / 2) {
        let (s, c) = (w * i as f64).sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += v * s;
        yc += v * c;
    }
    let det = ss * cc - sc * sc;
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    (a * a + b * b).sqrt()
}

/// Deterministic xorshift stream for test inputs.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform(lo.ln(), hi.ln()).exp()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}
