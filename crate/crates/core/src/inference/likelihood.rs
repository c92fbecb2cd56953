//! Grid-search maximum likelihood for `(K, Δ)`.
//!
//! Envelopes are first normalised by `sqrt(Ω̂)`, so every dataset is scored
//! against the same unit-power pdfs. For each `(K, Δ)` cell the pdf is
//! obtained by central differencing of the TWDP CDF on a fixed radius lattice
//! `r_m = (m + ½)·d`. Between lattice nodes the smooth part `ln(f(r)/r)` is
//! interpolated with Catmull–Rom cubics, which are linear in the node
//! values. Each dataset therefore reduces to a sparse weight vector over the
//! lattice, and its log-likelihood in a cell is one dot product. Cells are
//! streamed, so memory stays independent of the grid size and one pass over
//! the grid serves a whole batch of datasets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fading::{FadingParams, TwdpDistribution, DEFAULT_QUADRATURE_NODES, PDF_STEP};

use super::partition::{EnvelopeSet, Role};

/// The `(K, Δ)` search lattice and its numerical settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub k_step: f64,
    pub delta_step: f64,
    #[serde(default = "default_quadrature_nodes")]
    pub quadrature_nodes: usize,
    /// Spacing of the normalised-radius lattice on which pdfs are tabulated.
    #[serde(default = "default_node_spacing")]
    pub node_spacing: f64,
    /// Largest normalised envelope the lattice covers.
    #[serde(default = "default_r_max")]
    pub r_max: f64,
}

fn default_quadrature_nodes() -> usize {
    DEFAULT_QUADRATURE_NODES
}

fn default_node_spacing() -> f64 {
    1.0 / 256.0
}

fn default_r_max() -> f64 {
    8.0
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            k_min: 0.0,
            k_max: 1000.0,
            k_step: 0.05,
            delta_step: 0.05,
            quadrature_nodes: DEFAULT_QUADRATURE_NODES,
            node_spacing: default_node_spacing(),
            r_max: default_r_max(),
        }
    }
}

impl GridConfig {
    /// Default steps and numerics over `K ∈ [k_min, k_max]`.
    pub fn with_k_range(k_min: f64, k_max: f64) -> Self {
        GridConfig {
            k_min,
            k_max,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.k_min, self.k_max, self.k_step, self.delta_step, self.node_spacing, self.r_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return domain("grid settings must be finite");
        }
        if self.k_step <= 0.0 || self.delta_step <= 0.0 {
            return domain("grid steps must be positive");
        }
        if self.k_min < 0.0 || self.k_max <= self.k_min {
            return domain(format!(
                "need 0 <= k_min < k_max, got [{}, {}]",
                self.k_min, self.k_max
            ));
        }
        if self.k_max > crate::fading::MAX_K {
            return domain(format!("k_max exceeds the supported {}", crate::fading::MAX_K));
        }
        if self.delta_step > 1.0 || self.quadrature_nodes == 0 {
            return domain("delta_step must be at most 1 and quadrature_nodes positive");
        }
        if self.node_spacing <= 0.0 || self.r_max <= 4.0 * self.node_spacing {
            return domain("node_spacing must be positive and well below r_max");
        }
        Ok(())
    }

    /// Grid values of K, ascending; `k_max` is included when it lies on the
    /// lattice.
    pub fn k_values(&self) -> Vec<f64> {
        let count = ((self.k_max - self.k_min) / self.k_step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.k_min + i as f64 * self.k_step).collect()
    }

    /// Grid values of Δ in `[0, 1]`, ascending, starting at 0.
    pub fn delta_values(&self) -> Vec<f64> {
        let count = (1.0 / self.delta_step + 1e-9).floor() as usize;
        (0..=count).map(|j| (j as f64 * self.delta_step).min(1.0)).collect()
    }

    fn node_count(&self) -> usize {
        (self.r_max / self.node_spacing).ceil() as usize + 2
    }

    fn node_radius(&self, m: usize) -> f64 {
        (m as f64 + 0.5) * self.node_spacing
    }
}

/// Best Rice cell (`Δ = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiceFit {
    pub k_hat: f64,
    pub loglik: f64,
    /// `k_hat` sits on the upper edge of the K grid.
    pub at_boundary: bool,
}

/// Best TWDP cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwdpFit {
    pub k_hat: f64,
    pub delta_hat: f64,
    pub loglik: f64,
    pub at_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlFits {
    pub rice: RiceFit,
    pub twdp: TwdpFit,
}

/// One dataset reduced to lattice weights.
#[derive(Debug, Clone)]
struct Prepared {
    /// `(node, weight)` pairs with nonzero weight, sorted by node.
    weights: Vec<(u32, f64)>,
    /// Log-likelihood terms common to every cell: the radial factor and the
    /// Jacobian of the normalisation.
    offset: f64,
}

/// Catmull–Rom weights for the four nodes around fractional position `t`.
#[inline]
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

fn prepare(fit: &[f64], omega_hat: f64, grid: &GridConfig) -> Result<Prepared> {
    if fit.is_empty() {
        return domain("fit class is empty");
    }
    if !(omega_hat.is_finite() && omega_hat > 0.0) {
        return domain(format!("omega_hat must be positive, got {omega_hat}"));
    }
    let scale = omega_hat.sqrt();
    let nodes = grid.node_count();
    let d = grid.node_spacing;
    let mut dense = vec![0.0f64; nodes];
    let mut offset = -(fit.len() as f64) * scale.ln();
    for (i, &r) in fit.iter().enumerate() {
        let u = r / scale;
        if u > grid.r_max {
            return Err(Error::Estimation(format!(
                "fit sample {i} is {u:.3} times sqrt(omega_hat); its density is zero in every grid cell"
            )));
        }
        // The clipped difference stencil behaves like (u + h)/2 below h.
        let radial = if u >= PDF_STEP { u } else { 0.5 * (u + PDF_STEP) };
        offset += radial.ln();
        let pos = u / d - 0.5;
        let base = pos.floor();
        let t = pos - base;
        let base = base as i64;
        for (j, w) in catmull_rom(t).into_iter().enumerate() {
            let mut m = base - 1 + j as i64;
            if m < 0 {
                // ln(f/r) is even in r
                m = -m - 1;
            }
            dense[m as usize] += w;
        }
    }
    let weights = dense
        .into_iter()
        .enumerate()
        .filter(|(_, w)| *w != 0.0)
        .map(|(m, w)| (m as u32, w))
        .collect();
    Ok(Prepared { weights, offset })
}

/// `ln(f(r_m)/r_m)` at the requested lattice nodes of one cell.
fn cell_table(k: f64, delta: f64, grid: &GridConfig, active: &[u32]) -> Result<Vec<f64>> {
    let params = FadingParams::new(k, delta, 1.0)?;
    let dist = TwdpDistribution::with_nodes(params, grid.quadrature_nodes)?;
    Ok(active
        .iter()
        .map(|&m| {
            let r = grid.node_radius(m as usize);
            let pdf = dist.pdf_unchecked(r);
            if pdf > 0.0 {
                pdf.ln() - r.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect())
}

#[inline]
fn score(prep: &Prepared, table: &[f64], slot: &[u32]) -> f64 {
    let mut sum = prep.offset;
    for &(m, w) in &prep.weights {
        let v = table[slot[m as usize] as usize];
        if v == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        sum += w * v;
    }
    sum
}

#[derive(Debug, Clone, Copy)]
struct Best {
    loglik: f64,
    k_index: usize,
    delta_index: usize,
}

impl Best {
    fn none() -> Self {
        Best {
            loglik: f64::NEG_INFINITY,
            k_index: usize::MAX,
            delta_index: usize::MAX,
        }
    }

    /// Keeps the earlier cell unless the candidate is strictly better, which
    /// breaks ties toward smaller K, then smaller Δ.
    fn merge(self, other: Best) -> Best {
        if other.loglik > self.loglik
            || (other.loglik == self.loglik
                && (other.k_index, other.delta_index) < (self.k_index, self.delta_index))
        {
            other
        } else {
            self
        }
    }
}

/// Fits every dataset of a batch in a single pass over the grid.
///
/// Each entry pairs a partitioned envelope set with its `Ω̂`. Results are
/// returned in input order and are identical to fitting each dataset alone.
pub fn ml_fit_batch(
    datasets: &[(&EnvelopeSet, f64)],
    grid: &GridConfig,
) -> Result<Vec<Result<MlFits>>> {
    grid.validate()?;
    let prepared: Vec<Result<Prepared>> = datasets
        .iter()
        .map(|(set, omega)| prepare(&set.fit_values(), *omega, grid))
        .collect();

    let nodes = grid.node_count();
    let mut used = vec![false; nodes];
    for p in prepared.iter().flatten() {
        for &(m, _) in &p.weights {
            used[m as usize] = true;
        }
    }
    let active: Vec<u32> = (0..nodes as u32).filter(|&m| used[m as usize]).collect();
    let mut slot = vec![u32::MAX; nodes];
    for (s, &m) in active.iter().enumerate() {
        slot[m as usize] = s as u32;
    }

    let ok: Vec<(usize, &Prepared)> = prepared
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.as_ref().ok().map(|p| (i, p)))
        .collect();

    let ks = grid.k_values();
    let deltas = grid.delta_values();
    if ok.is_empty() {
        return Ok(prepared
            .into_iter()
            .map(|p| p.and_then(|_| unreachable!("no dataset was prepared")))
            .collect());
    }
    let per_k: Vec<Result<(Vec<Best>, Vec<Best>)>> = ks
        .par_iter()
        .enumerate()
        .map(|(ki, &k)| {
            let mut rice = vec![Best::none(); ok.len()];
            let mut twdp = vec![Best::none(); ok.len()];
            for (di, &delta) in deltas.iter().enumerate() {
                // Δ is irrelevant without specular power; reuse the Δ = 0 scores.
                if k == 0.0 && di > 0 {
                    break;
                }
                let table = cell_table(k, delta, grid, &active)?;
                for (slot_i, (_, prep)) in ok.iter().enumerate() {
                    let cell = Best {
                        loglik: score(prep, &table, &slot),
                        k_index: ki,
                        delta_index: di,
                    };
                    if di == 0 {
                        rice[slot_i] = rice[slot_i].merge(cell);
                    }
                    twdp[slot_i] = twdp[slot_i].merge(cell);
                }
            }
            Ok((rice, twdp))
        })
        .collect();

    let mut rice = vec![Best::none(); ok.len()];
    let mut twdp = vec![Best::none(); ok.len()];
    for result in per_k {
        let (r, t) = result?;
        for i in 0..ok.len() {
            rice[i] = rice[i].merge(r[i]);
            twdp[i] = twdp[i].merge(t[i]);
        }
    }

    let k_top = *ks.last().expect("grid has at least one K");
    let at_boundary = |ki: usize| ks[ki] >= k_top && grid.k_max > grid.k_min;
    let mut ok_iter = ok.iter().map(|(i, _)| *i).enumerate();
    let mut out = Vec::with_capacity(prepared.len());
    for (i, prep) in prepared.iter().enumerate() {
        if let Err(e) = prep {
            out.push(Err(e.clone()));
            continue;
        }
        let (slot_i, idx) = ok_iter.next().expect("prepared datasets are in order");
        debug_assert_eq!(idx, i);
        let (r, t) = (rice[slot_i], twdp[slot_i]);
        out.push(if r.loglik == f64::NEG_INFINITY || t.loglik == f64::NEG_INFINITY {
            Err(Error::Estimation(
                "some fit samples have zero density in every grid cell".into(),
            ))
        } else {
            Ok(MlFits {
                rice: RiceFit {
                    k_hat: ks[r.k_index],
                    loglik: r.loglik,
                    at_boundary: at_boundary(r.k_index),
                },
                twdp: TwdpFit {
                    k_hat: ks[t.k_index],
                    delta_hat: deltas[t.delta_index],
                    loglik: t.loglik,
                    at_boundary: at_boundary(t.k_index),
                },
            })
        });
    }
    Ok(out)
}

/// Rice and TWDP maximum-likelihood fits of the fit class of `set`.
pub fn ml_fit(set: &EnvelopeSet, omega_hat: f64, grid: &GridConfig) -> Result<MlFits> {
    if set.count(Role::Fit) == 0 {
        return domain("fit class is empty");
    }
    ml_fit_batch(&[(set, omega_hat)], grid)?
        .pop()
        .expect("one result per dataset")
}
