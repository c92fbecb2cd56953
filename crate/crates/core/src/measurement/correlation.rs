//! Spatial autocorrelation of the real part of a sampled field.
//!
//! The slice is zero-padded to twice its size in each dimension so that the
//! circular correlation obtained from the power spectrum equals the linear
//! one. Dividing by the identically computed correlation of the all-ones
//! window removes the triangular bias of the finite aperture.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

use super::grid::SpatialGrid;

pub const DEFAULT_INTERP_FACTOR: usize = 20;

/// Window correlations below this are treated as outside the aperture.
const WINDOW_GUARD: f64 = 1e-12;

/// A real 2D correlation over lags `-(nx-1)..=nx-1` by `-(ny-1)..=ny-1`
/// sample steps, `x` fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation2d {
    pub lags_x: usize,
    pub lags_y: usize,
    /// Invalid lags hold NaN.
    pub values: Vec<f64>,
}

impl Correlation2d {
    pub fn get(&self, dx: isize, dy: isize) -> f64 {
        let cx = (self.lags_x / 2) as isize;
        let cy = (self.lags_y / 2) as isize;
        self.values[((dy + cy) as usize) * self.lags_x + (dx + cx) as usize]
    }

    pub fn max_lag(&self) -> (usize, usize) {
        (self.lags_x / 2, self.lags_y / 2)
    }
}

struct Fft2 {
    px: usize,
    py: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(px: usize, py: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            px,
            py,
            row_fwd: planner.plan_fft_forward(px),
            row_inv: planner.plan_fft_inverse(px),
            col_fwd: planner.plan_fft_forward(py),
            col_inv: planner.plan_fft_inverse(py),
        }
    }

    fn transform(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        for row in data.chunks_exact_mut(self.px) {
            rows.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); self.py];
        for x in 0..self.px {
            for y in 0..self.py {
                col[y] = data[y * self.px + x];
            }
            cols.process(&mut col);
            for y in 0..self.py {
                data[y * self.px + x] = col[y];
            }
        }
    }

    /// Unnormalised linear autocorrelation of `field` (`nx` by `ny`),
    /// cropped to lags `±(n-1)`.
    fn raw_autocorr(&self, field: &[f64], nx: usize, ny: usize) -> Vec<f64> {
        let (px, py) = (self.px, self.py);
        let mut buf = vec![Complex64::new(0.0, 0.0); px * py];
        for y in 0..ny {
            for x in 0..nx {
                buf[y * px + x] = Complex64::new(field[y * nx + x], 0.0);
            }
        }
        self.transform(&mut buf, &self.row_fwd, &self.col_fwd);
        for v in &mut buf {
            *v = Complex64::new(v.norm_sqr(), 0.0);
        }
        self.transform(&mut buf, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (px * py) as f64;
        let (lx, ly) = (2 * nx - 1, 2 * ny - 1);
        let mut out = Vec::with_capacity(lx * ly);
        for j in 0..ly {
            let dy = j as isize - (ny as isize - 1);
            let sy = dy.rem_euclid(py as isize) as usize;
            for i in 0..lx {
                let dx = i as isize - (nx as isize - 1);
                let sx = dx.rem_euclid(px as isize) as usize;
                out.push(buf[sy * px + sx].re * scale);
            }
        }
        out
    }
}

fn check_slice(field: &[f64], nx: usize, ny: usize) -> Result<()> {
    if nx < 2 || ny < 2 {
        return domain(format!("correlation needs at least a 2x2 slice, got {nx}x{ny}"));
    }
    if field.len() != nx * ny {
        return domain(format!("slice has {} values, expected {}", field.len(), nx * ny));
    }
    if field.iter().any(|v| !v.is_finite()) {
        return domain("slice contains non-finite values");
    }
    Ok(())
}

/// Window-compensated, unnormalised correlation.
fn compensated(fft: &Fft2, window: &[f64], field: &[f64], nx: usize, ny: usize) -> Vec<f64> {
    fft.raw_autocorr(field, nx, ny)
        .into_iter()
        .zip(window)
        .map(|(c, &w)| if w < WINDOW_GUARD { f64::NAN } else { c / w })
        .collect()
}

fn normalise(values: Vec<f64>, nx: usize, ny: usize) -> Result<Correlation2d> {
    let (lx, ly) = (2 * nx - 1, 2 * ny - 1);
    let zero = values[(ny - 1) * lx + nx - 1];
    if !(zero > 0.0) || !zero.is_finite() {
        return domain("zero-lag correlation vanishes; the field is identically zero");
    }
    Ok(Correlation2d {
        lags_x: lx,
        lags_y: ly,
        values: values.into_iter().map(|v| v / zero).collect(),
    })
}

/// Window-compensated autocorrelation of an `nx` by `ny` real slice (`x`
/// fastest), normalised to one at zero lag.
pub fn autocorr2d(field: &[f64], nx: usize, ny: usize) -> Result<Correlation2d> {
    check_slice(field, nx, ny)?;
    let fft = Fft2::new(2 * nx, 2 * ny);
    let window = fft.raw_autocorr(&vec![1.0; nx * ny], nx, ny);
    normalise(compensated(&fft, &window, field, nx, ny), nx, ny)
}

/// Averaged correlation on the interpolated lag grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    /// Lag step in wavelengths.
    pub step: f64,
    pub interp_factor: usize,
    pub lags_x: usize,
    pub lags_y: usize,
    /// Row-major, `x` fastest; the centre is zero lag.
    pub values: Vec<f64>,
    /// Correlation along `x` at zero `y` lag.
    pub cut_x: Vec<f64>,
    /// Correlation along `y` at zero `x` lag.
    pub cut_y: Vec<f64>,
}

impl CorrelationMap {
    pub fn lag_axis_x(&self) -> Vec<f64> {
        axis(self.lags_x, self.step)
    }

    pub fn lag_axis_y(&self) -> Vec<f64> {
        axis(self.lags_y, self.step)
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.lags_x + ix]
    }
}

fn axis(len: usize, step: f64) -> Vec<f64> {
    let c = (len / 2) as f64;
    (0..len).map(|i| (i as f64 - c) * step).collect()
}

/// Band-limited interpolation of an odd-length sequence by `factor`, keeping
/// the original samples at multiples of `factor`.
fn interpolate_1d(seq: &[f64], factor: usize, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = seq.len();
    if factor == 1 || n == 1 {
        return seq.to_vec();
    }
    let m = n * factor;
    let mut spec: Vec<Complex64> = seq.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);
    let half = n / 2;
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    padded[..=half].copy_from_slice(&spec[..=half]);
    padded[m - half..].copy_from_slice(&spec[n - half..]);
    planner.plan_fft_inverse(m).process(&mut padded);
    let scale = 1.0 / n as f64;
    padded
        .into_iter()
        .take((n - 1) * factor + 1)
        .map(|v| v.re * scale)
        .collect()
}

fn interpolate_2d(corr: &Correlation2d, factor: usize) -> Result<(usize, usize, Vec<f64>)> {
    if corr.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("correlation has invalid lags; cannot interpolate".into()));
    }
    let mut planner = FftPlanner::new();
    let (lx, ly) = (corr.lags_x, corr.lags_y);
    let ox = (lx - 1) * factor + 1;
    let oy = (ly - 1) * factor + 1;
    let rows: Vec<Vec<f64>> = corr
        .values
        .chunks_exact(lx)
        .map(|row| interpolate_1d(row, factor, &mut planner))
        .collect();
    let mut out = vec![0.0; ox * oy];
    let mut col = vec![0.0; ly];
    for x in 0..ox {
        for (y, row) in rows.iter().enumerate() {
            col[y] = row[x];
        }
        for (y, v) in interpolate_1d(&col, factor, &mut planner).into_iter().enumerate() {
            out[y * ox + x] = v;
        }
    }
    Ok((ox, oy, out))
}

/// Mean of the `x`–`y` correlations of `Re h` over every `z` layer and
/// frequency, interpolated onto a lag grid `interp_factor` times finer.
pub fn average_corr(grid: &SpatialGrid, interp_factor: usize) -> Result<CorrelationMap> {
    if interp_factor == 0 {
        return domain("interpolation factor must be at least 1");
    }
    let shape = grid.shape();
    let (nx, ny) = (shape.nx, shape.ny);
    if nx < 2 || ny < 2 {
        return domain(format!("correlation needs at least 2x2 points per layer, got {nx}x{ny}"));
    }
    let fft = Fft2::new(2 * nx, 2 * ny);
    let window = fft.raw_autocorr(&vec![1.0; nx * ny], nx, ny);
    let slices: Vec<(usize, usize)> = (0..grid.nfreq())
        .flat_map(|f| (0..shape.nz).map(move |z| (z, f)))
        .collect();
    let per_slice: Vec<Result<Correlation2d>> = slices
        .par_iter()
        .map(|&(z, f)| {
            let field: Vec<f64> = grid.slice_xy(z, f).iter().map(|h| h.re).collect();
            check_slice(&field, nx, ny)?;
            normalise(compensated(&fft, &window, &field, nx, ny), nx, ny)
        })
        .collect();
    let mut sum = vec![0.0; (2 * nx - 1) * (2 * ny - 1)];
    for c in per_slice {
        for (s, v) in sum.iter_mut().zip(c?.values) {
            *s += v;
        }
    }
    let count = slices.len() as f64;
    let mean = Correlation2d {
        lags_x: 2 * nx - 1,
        lags_y: 2 * ny - 1,
        values: sum.into_iter().map(|v| v / count).collect(),
    };
    let (ox, oy, mut values) = interpolate_2d(&mean, interp_factor)?;
    let zero = values[(oy / 2) * ox + ox / 2];
    for v in &mut values {
        *v /= zero;
    }
    let cut_x = values[(oy / 2) * ox..(oy / 2 + 1) * ox].to_vec();
    let cut_y = (0..oy).map(|y| values[y * ox + ox / 2]).collect();
    Ok(CorrelationMap {
        step: grid.spacing() / interp_factor as f64,
        interp_factor,
        lags_x: ox,
        lags_y: oy,
        values,
        cut_x,
        cut_y,
    })
}
