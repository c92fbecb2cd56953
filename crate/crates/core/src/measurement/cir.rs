//! Channel impulse responses from frequency sweeps, and time gating.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::inference::{partition_chequerboard, EnvelopeSet};
use crate::synth::SPEED_OF_LIGHT;

use super::grid::SpatialGrid;

/// Relative tolerance on the spacing of a uniform frequency axis.
const UNIFORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cir {
    pub taps: Vec<Complex64>,
    /// Delay resolution `1/(N·Δf)` in seconds.
    pub delay_step: f64,
}

impl Cir {
    pub fn delays(&self) -> Vec<f64> {
        (0..self.taps.len()).map(|n| n as f64 * self.delay_step).collect()
    }

    /// Path-length resolution of one tap in metres.
    pub fn distance_step(&self) -> f64 {
        SPEED_OF_LIGHT * self.delay_step
    }

    /// Unambiguous delay span `1/Δf`.
    pub fn span(&self) -> f64 {
        self.delay_step * self.taps.len() as f64
    }
}

/// Spacing of a uniform, increasing frequency axis.
pub fn uniform_spacing(freq_axis: &[f64]) -> Result<f64> {
    if freq_axis.len() < 2 {
        return domain(format!(
            "a CIR needs at least 2 frequency samples, got {}",
            freq_axis.len()
        ));
    }
    let df = (freq_axis[freq_axis.len() - 1] - freq_axis[0]) / (freq_axis.len() - 1) as f64;
    if !(df.is_finite() && df > 0.0) {
        return domain("frequency axis must be increasing");
    }
    for (i, w) in freq_axis.windows(2).enumerate() {
        if ((w[1] - w[0]) - df).abs() > UNIFORM_TOL * df {
            return domain(format!("frequency axis is not uniform at index {}", i + 1));
        }
    }
    Ok(df)
}

/// Inverse DFT of a sampled frequency response, `h[n] = (1/N) Σ H[k] e^{+j2πkn/N}`.
pub fn cir(spectrum: &[Complex64], freq_axis: &[f64]) -> Result<Cir> {
    if spectrum.len() != freq_axis.len() {
        return domain(format!(
            "{} spectrum samples but {} frequencies",
            spectrum.len(),
            freq_axis.len()
        ));
    }
    let df = uniform_spacing(freq_axis)?;
    if spectrum.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
        return domain("spectrum contains non-finite samples");
    }
    let n = spectrum.len();
    let mut taps = spectrum.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut taps);
    let scale = 1.0 / n as f64;
    for t in &mut taps {
        *t *= scale;
    }
    Ok(Cir {
        taps,
        delay_step: 1.0 / (n as f64 * df),
    })
}

/// Path length in excess of the line-of-sight path, `(τ - τ_LOS)·c0`.
pub fn excess_distance(delays: &[f64], los_delay: f64) -> Result<Vec<f64>> {
    let (lo, hi) = delays
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
    if !(los_delay >= lo && los_delay <= hi) {
        return domain(format!("LOS delay {los_delay} lies outside the delay axis"));
    }
    Ok(delays.iter().map(|t| (t - los_delay) * SPEED_OF_LIGHT).collect())
}

/// Magnitude of CIR tap `tap` at every lattice point, labelled with the
/// chequerboard partition.
pub fn tap_envelopes(grid: &SpatialGrid, tap: usize) -> Result<EnvelopeSet> {
    let nfreq = grid.nfreq();
    if tap >= nfreq {
        return domain(format!("tap {tap} is outside a CIR of {nfreq} taps"));
    }
    let freq_axis = grid.freq_axis();
    uniform_spacing(freq_axis)?;
    let shape = grid.shape();
    let ifft = FftPlanner::new().plan_fft_inverse(nfreq);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfreq];
    let values = shape
        .iter()
        .map(|(x, y, z)| {
            for (f, b) in buf.iter_mut().enumerate() {
                *b = grid.get(x, y, z, f);
            }
            ifft.process(&mut buf);
            buf[tap].norm() / nfreq as f64
        })
        .collect();
    EnvelopeSet::new(values, partition_chequerboard(shape))
}
