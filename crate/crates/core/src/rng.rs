//! Reproducible random streams.
//!
//! Every stream is ChaCha8 keyed by the user seed (expanded with the
//! `rand_core` PCG32 seed expander) and selected by a 64-bit stream id, so
//! independent work blocks draw from disjoint counter ranges. Output is
//! identical on every platform.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Samples generated per independently seeded block.
pub const BLOCK_LEN: usize = 1 << 16;

/// Stream `stream` of the generator keyed by `seed`.
pub fn block_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on the open interval (0, 1) with 53 random bits.
#[inline]
pub fn open_uniform(rng: &mut impl Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals by the Box–Muller transform.
#[inline]
pub fn normal_pair(rng: &mut impl Rng) -> (f64, f64) {
    let radius = (-2.0 * open_uniform(rng).ln()).sqrt();
    let angle = std::f64::consts::TAU * open_uniform(rng);
    let (s, c) = angle.sin_cos();
    (radius * c, radius * s)
}
