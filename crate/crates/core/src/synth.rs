//! Ground-truth generators: the TWDP baseband sampler and synthetic
//! plane-wave fields on a spatial lattice.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fading::FadingParams;
use crate::measurement::{Direction, DirectionRecord, DirectionalScan, GridShape, SpatialGrid};
use crate::rng::{block_stream, normal_pair, open_uniform, BLOCK_LEN};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Draws channel coefficients `V1·e^{jφ1} + V2·e^{jφ2} + X + jY`.
#[derive(Debug, Clone, Copy)]
pub struct TwdpSampler {
    v1: f64,
    v2: f64,
    sigma: f64,
}

impl TwdpSampler {
    pub fn new(params: &FadingParams) -> Self {
        let (v1, v2) = params.specular_amplitudes();
        TwdpSampler {
            v1,
            v2,
            sigma: params.sigma2().sqrt(),
        }
    }

    #[inline]
    pub fn draw(&self, rng: &mut impl rand_chacha::rand_core::Rng) -> Complex64 {
        let phi1 = std::f64::consts::TAU * open_uniform(rng);
        let phi2 = std::f64::consts::TAU * open_uniform(rng);
        let (x, y) = normal_pair(rng);
        Complex64::from_polar(self.v1, phi1)
            + Complex64::from_polar(self.v2, phi2)
            + Complex64::new(self.sigma * x, self.sigma * y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSampleSet {
    pub samples: Vec<Complex64>,
    pub seed: u64,
    pub params: FadingParams,
}

impl ComplexSampleSet {
    pub fn envelopes(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.norm()).collect()
    }
}

/// `n` i.i.d. TWDP channel samples. Block `b` of [`BLOCK_LEN`] samples is
/// drawn from stream `b` of the seed, so the output does not depend on how
/// blocks are scheduled.
pub fn sample_twdp(params: &FadingParams, n: usize, seed: u64) -> Result<ComplexSampleSet> {
    if n == 0 {
        return domain("sample count must be at least one");
    }
    let sampler = TwdpSampler::new(params);
    let blocks = n.div_ceil(BLOCK_LEN);
    let samples = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = block_stream(seed, b as u64);
            let len = BLOCK_LEN.min(n - b * BLOCK_LEN);
            (0..len).map(move |_| sampler.draw(&mut rng))
        })
        .collect();
    Ok(ComplexSampleSet {
        samples,
        seed,
        params: *params,
    })
}

/// Envelopes `|r|` of [`sample_twdp`].
pub fn sample_envelopes(params: &FadingParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(sample_twdp(params, n, seed)?.envelopes())
}

/// A plane wave `A·exp(j(k·d·x + φ - 2πfτ))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub amplitude: f64,
    /// Unit propagation direction.
    pub direction: [f64; 3],
    /// Phase at the grid origin, radians.
    pub phase: f64,
    /// Propagation delay in seconds; gives the wave a linear phase across
    /// frequency and places it at a tap of the impulse response.
    #[serde(default)]
    pub delay: f64,
}

impl PlaneWave {
    pub fn new(amplitude: f64, direction: [f64; 3], phase: f64) -> Self {
        PlaneWave {
            amplitude,
            direction,
            phase,
            delay: 0.0,
        }
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }

    /// Direction from azimuth / elevation in degrees, elevation measured from
    /// the +z axis.
    pub fn direction_from_angles(azimuth: f64, elevation: f64) -> [f64; 3] {
        let (az, el) = (azimuth.to_radians(), elevation.to_radians());
        [el.sin() * az.cos(), el.sin() * az.sin(), el.cos()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveScene {
    pub waves: Vec<PlaneWave>,
    /// Reference wavelength in metres; sets the physical lattice spacing.
    pub wavelength: f64,
    pub shape: GridShape,
    /// Lattice spacing in reference wavelengths.
    pub spacing: f64,
    /// Frequencies in Hz. Empty means the single frequency `c0/wavelength`.
    #[serde(default)]
    pub freq_axis: Vec<f64>,
    /// Power of an i.i.d. circular Gaussian term added to every sample.
    #[serde(default)]
    pub diffuse_power: f64,
    /// Half-width of a uniform position error per coordinate, in wavelengths.
    #[serde(default)]
    pub jitter: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub direction: Option<Direction>,
}

impl PlaneWaveScene {
    /// A scene on the 9×9×9, 0.35λ lattice at a single frequency.
    pub fn new(waves: Vec<PlaneWave>, wavelength: f64) -> Self {
        PlaneWaveScene {
            waves,
            wavelength,
            shape: GridShape::cube9(),
            spacing: crate::measurement::DEFAULT_SPACING,
            freq_axis: Vec::new(),
            diffuse_power: 0.0,
            jitter: 0.0,
            seed: 0,
            direction: None,
        }
    }
}

/// Evaluates the scene's superposition at every lattice point and frequency.
pub fn synth_field(scene: &PlaneWaveScene) -> Result<SpatialGrid> {
    if scene.waves.is_empty() {
        return domain("scene needs at least one plane wave");
    }
    if !(scene.wavelength.is_finite() && scene.wavelength > 0.0) {
        return domain("wavelength must be positive");
    }
    if !(scene.diffuse_power >= 0.0 && scene.jitter >= 0.0) {
        return domain("diffuse power and jitter must be nonnegative");
    }
    for w in &scene.waves {
        let norm = w.direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 || w.amplitude < 0.0 {
            return domain("plane-wave directions must be unit vectors with nonnegative amplitude");
        }
    }
    let freq_axis = if scene.freq_axis.is_empty() {
        vec![SPEED_OF_LIGHT / scene.wavelength]
    } else {
        scene.freq_axis.clone()
    };
    let shape = scene.shape;
    let step = scene.spacing * scene.wavelength;

    // Stream 0 draws positions, stream 1 + f draws the diffuse term at
    // frequency index f.
    let mut pos_rng = block_stream(scene.seed, 0);
    let positions: Vec<[f64; 3]> = shape
        .iter()
        .map(|(x, y, z)| {
            let mut p = [x as f64 * step, y as f64 * step, z as f64 * step];
            if scene.jitter > 0.0 {
                for c in &mut p {
                    *c += (2.0 * open_uniform(&mut pos_rng) - 1.0) * scene.jitter * scene.wavelength;
                }
            }
            p
        })
        .collect();

    let diffuse_sigma = (scene.diffuse_power / 2.0).sqrt();
    let h: Vec<Complex64> = freq_axis
        .par_iter()
        .enumerate()
        .flat_map_iter(|(fi, &f)| {
            let k = std::f64::consts::TAU * f / SPEED_OF_LIGHT;
            let mut rng = block_stream(scene.seed, 1 + fi as u64);
            positions
                .iter()
                .map(|p| {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for w in &scene.waves {
                        let proj = w.direction[0] * p[0] + w.direction[1] * p[1] + w.direction[2] * p[2];
                        let phase = k * proj + w.phase - std::f64::consts::TAU * f * w.delay;
                        sum += Complex64::from_polar(w.amplitude, phase);
                    }
                    if diffuse_sigma > 0.0 {
                        let (a, b) = normal_pair(&mut rng);
                        sum += Complex64::new(diffuse_sigma * a, diffuse_sigma * b);
                    }
                    sum
                })
                .collect::<Vec<_>>()
        })
        .collect();
    SpatialGrid::new(shape, scene.spacing, freq_axis, scene.direction, h)
}

/// One direction of a synthetic scan: fading parameters of the received
/// envelope across frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanDirectionSpec {
    pub direction: Direction,
    pub params: FadingParams,
}

/// A directional scan whose per-direction samples are i.i.d. TWDP envelopes
/// plus complex white noise of power `noise_power`. Direction `d` draws from
/// its own sub-stream.
pub fn sample_scan(
    specs: &[ScanDirectionSpec],
    samples_per_direction: usize,
    noise_power: f64,
    seed: u64,
) -> Result<DirectionalScan> {
    if specs.is_empty() || samples_per_direction == 0 {
        return domain("scan needs at least one direction and one sample");
    }
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return domain("noise power must be positive");
    }
    let noise_sigma = (noise_power / 2.0).sqrt();
    let records = specs
        .par_iter()
        .enumerate()
        .map(|(d, spec)| {
            let sampler = TwdpSampler::new(&spec.params);
            let mut rng = block_stream(seed, d as u64);
            let samples = (0..samples_per_direction)
                .map(|_| {
                    let (a, b) = normal_pair(&mut rng);
                    (sampler.draw(&mut rng) + Complex64::new(noise_sigma * a, noise_sigma * b)).norm()
                })
                .collect();
            DirectionRecord {
                direction: spec.direction,
                samples,
                noise_power: Some(noise_power),
            }
        })
        .collect();
    Ok(DirectionalScan { records })
}
