use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Default spatial sample spacing, in wavelengths.
pub const DEFAULT_SPACING: f64 = 0.35;

/// Number of points along x, y, z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl GridShape {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Self {
        GridShape { nx, ny, nz }
    }

    /// The 9×9×9 sampling cube.
    pub fn cube9() -> Self {
        GridShape::new(9, 9, 9)
    }

    pub fn points(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Spatial points in storage order (x fastest, then y, then z).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.nz).flat_map(move |z| {
            (0..self.ny).flat_map(move |y| (0..self.nx).map(move |x| (x, y, z)))
        })
    }
}

/// Antenna pointing direction in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Direction {
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !(0.0..360.0).contains(&azimuth) {
            return domain(format!("azimuth must lie in [0, 360), got {azimuth}"));
        }
        if !(0.0..=180.0).contains(&elevation) {
            return domain(format!("elevation must lie in [0, 180], got {elevation}"));
        }
        Ok(Direction { azimuth, elevation })
    }
}

/// Complex channel samples on a uniform (x, y, z) lattice at a set of
/// frequencies.
///
/// Samples are stored with x varying fastest, then y, z and frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    shape: GridShape,
    /// Lattice spacing in wavelengths.
    spacing: f64,
    /// Frequency of every slice along the last axis, in Hz.
    freq_axis: Vec<f64>,
    direction: Option<Direction>,
    h: Vec<Complex64>,
}

impl SpatialGrid {
    pub fn new(
        shape: GridShape,
        spacing: f64,
        freq_axis: Vec<f64>,
        direction: Option<Direction>,
        h: Vec<Complex64>,
    ) -> Result<Self> {
        if shape.nx == 0 || shape.ny == 0 || shape.nz == 0 || freq_axis.is_empty() {
            return domain("every grid dimension must be at least one");
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return domain(format!("spacing must be positive, got {spacing}"));
        }
        if freq_axis.iter().any(|f| !f.is_finite()) {
            return domain("frequency axis must be finite");
        }
        let expected = shape.points() * freq_axis.len();
        if h.len() != expected {
            return domain(format!(
                "grid holds {} samples, shape and frequency axis require {expected}",
                h.len()
            ));
        }
        if h.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return domain("grid samples must be finite");
        }
        Ok(SpatialGrid {
            shape,
            spacing,
            freq_axis,
            direction,
            h,
        })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn freq_axis(&self) -> &[f64] {
        &self.freq_axis
    }

    pub fn nfreq(&self) -> usize {
        self.freq_axis.len()
    }

    pub fn direction(&self) -> Option<Direction> {
        self.direction
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.h
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize, ifreq: usize) -> usize {
        let s = &self.shape;
        ((ifreq * s.nz + iz) * s.ny + iy) * s.nx + ix
    }

    pub fn get(&self, ix: usize, iy: usize, iz: usize, ifreq: usize) -> Complex64 {
        self.h[self.index(ix, iy, iz, ifreq)]
    }

    /// The x–y plane at height `iz` and frequency `ifreq`, row-major in y.
    pub fn slice_xy(&self, iz: usize, ifreq: usize) -> &[Complex64] {
        let start = self.index(0, 0, iz, ifreq);
        &self.h[start..start + self.shape.nx * self.shape.ny]
    }

    /// Frequency response at one spatial point.
    pub fn spectrum_at(&self, ix: usize, iy: usize, iz: usize) -> Vec<Complex64> {
        (0..self.nfreq()).map(|f| self.get(ix, iy, iz, f)).collect()
    }
}

/// One pointing direction of a directional scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub direction: Direction,
    /// Envelope samples (magnitudes) across frequency.
    pub samples: Vec<f64>,
    /// Noise power in squared-envelope units; `None` if not estimated.
    pub noise_power: Option<f64>,
}

impl DirectionRecord {
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|r| r * r).sum::<f64>() / self.samples.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DirectionalScan {
    pub records: Vec<DirectionRecord>,
}
