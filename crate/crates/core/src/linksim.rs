//! Uncoded 4-QAM over flat TWDP fading with zero-forcing equalisation.

use num_complex::Complex64;
use rand_chacha::rand_core::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_finite, Result};
use crate::fading::FadingParams;
use crate::rng::{block_stream, normal_pair, BLOCK_LEN};
use crate::synth::TwdpSampler;

pub const MIN_SYMBOLS: usize = 10_000;
pub const DEFAULT_SYMBOLS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub snr_db: Vec<f64>,
    pub ber: Vec<f64>,
    /// Monte Carlo standard error of each BER, from the per-symbol error
    /// counts.
    pub std_err: Vec<f64>,
    pub params: FadingParams,
    pub n_symbols: usize,
    pub seed: u64,
}

/// Gray-mapped unit-power 4-QAM symbol for bits `(b0, b1)`.
#[inline]
fn modulate(b0: bool, b1: bool) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(if b0 { -s } else { s }, if b1 { -s } else { s })
}

/// Error counts `(Σe, Σe²)` over per-symbol bit errors `e ∈ {0, 1, 2}`.
fn run_block(sampler: &TwdpSampler, noise_sigma: f64, seed: u64, stream: u64, len: usize) -> (u64, u64) {
    let mut rng = block_stream(seed, stream);
    let (mut sum, mut sum_sq) = (0u64, 0u64);
    for _ in 0..len {
        let bits = rng.next_u64();
        let (b0, b1) = (bits & 1 == 1, bits & 2 == 2);
        let s = modulate(b0, b1);
        let mut h = sampler.draw(&mut rng);
        while h.norm_sqr() == 0.0 {
            h = sampler.draw(&mut rng);
        }
        let (nr, ni) = normal_pair(&mut rng);
        let y = h * s + Complex64::new(noise_sigma * nr, noise_sigma * ni);
        let z = y / h;
        let e = ((z.re < 0.0) != b0) as u64 + ((z.im < 0.0) != b1) as u64;
        sum += e;
        sum_sq += e * e;
    }
    (sum, sum_sq)
}

/// Bit error ratio at each SNR (dB, unit symbol power, SNR = 1/N0).
///
/// Point `p` draws block `b` from stream `(p << 32) | b` of `seed`.
pub fn simulate_ber(params: &FadingParams, snr_db: &[f64], n_symbols: usize, seed: u64) -> Result<BerCurve> {
    if n_symbols < MIN_SYMBOLS {
        return domain(format!("need at least {MIN_SYMBOLS} symbols per point, got {n_symbols}"));
    }
    if snr_db.is_empty() {
        return domain("no SNR points");
    }
    for &s in snr_db {
        ensure_finite("SNR", s)?;
    }
    let sampler = TwdpSampler::new(params);
    let blocks = n_symbols.div_ceil(BLOCK_LEN);
    let jobs: Vec<(usize, usize)> = (0..snr_db.len())
        .flat_map(|p| (0..blocks).map(move |b| (p, b)))
        .collect();
    let counts: Vec<(u64, u64)> = jobs
        .par_iter()
        .map(|&(p, b)| {
            let noise_sigma = (0.5 * 10f64.powf(-snr_db[p] / 10.0)).sqrt();
            let len = BLOCK_LEN.min(n_symbols - b * BLOCK_LEN);
            run_block(&sampler, noise_sigma, seed, ((p as u64) << 32) | b as u64, len)
        })
        .collect();
    let n = n_symbols as f64;
    let mut ber = Vec::with_capacity(snr_db.len());
    let mut std_err = Vec::with_capacity(snr_db.len());
    for point in counts.chunks_exact(blocks) {
        let (sum, sum_sq) = point
            .iter()
            .fold((0u64, 0u64), |(a, b), &(s, q)| (a + s, b + q));
        let mean = sum as f64 / n;
        let var = (sum_sq as f64 / n - mean * mean).max(0.0) * n / (n - 1.0);
        ber.push(mean / 2.0);
        std_err.push(0.5 * (var / n).sqrt());
    }
    Ok(BerCurve {
        snr_db: snr_db.to_vec(),
        ber,
        std_err,
        params: *params,
        n_symbols,
        seed,
    })
}

/// Upper bound on the fraction of capacity lost to the two-wave null,
/// `1 - log2(1 + sqrt(1 - Δ²))`.
pub fn capacity_loss(delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return domain(format!("delta must lie in [0, 1], got {delta}"));
    }
    Ok(1.0 - (1.0 + (1.0 - delta * delta).sqrt()).log2())
}
