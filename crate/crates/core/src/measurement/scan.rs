use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::inference::{estimate_omega, partition_stride};

use super::grid::{Direction, DirectionalScan};

pub const DEFAULT_MARGIN_DB: f64 = 10.0;

/// Partition stride used for per-direction second-moment estimates.
pub const SCAN_STRIDE: usize = 10;

/// `true` for every direction whose mean power is at least `margin_db`
/// above its noise power.
pub fn noise_mask(scan: &DirectionalScan, margin_db: f64) -> Result<Vec<bool>> {
    if !margin_db.is_finite() {
        return domain("noise margin must be finite");
    }
    let factor = 10f64.powf(margin_db / 10.0);
    scan.records
        .iter()
        .enumerate()
        .map(|(i, rec)| match rec.noise_power {
            None => domain(format!("direction {i} has no noise estimate")),
            Some(noise) if !(noise.is_finite() && noise > 0.0) => {
                domain(format!("direction {i} has noise power {noise}"))
            }
            Some(noise) => Ok(rec.mean_power() >= noise * factor),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerMapEntry {
    pub direction: Direction,
    pub omega_hat: f64,
    /// `omega_hat` relative to the strongest evaluated direction.
    pub power_norm: f64,
    pub evaluated: bool,
}

/// Second-moment estimate per direction, normalised to the maximum over the
/// directions that pass the noise mask.
pub fn power_map(scan: &DirectionalScan, margin_db: f64) -> Result<Vec<PowerMapEntry>> {
    if scan.records.is_empty() {
        return domain("scan has no directions");
    }
    let mask = noise_mask(scan, margin_db)?;
    let omegas = scan
        .records
        .iter()
        .map(|rec| estimate_omega(&partition_stride(rec.samples.clone(), SCAN_STRIDE)?))
        .collect::<Result<Vec<f64>>>()?;
    let peak = omegas
        .iter()
        .zip(&mask)
        .filter(|(_, m)| **m)
        .map(|(o, _)| *o)
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return domain("every direction lies below the noise floor");
    }
    Ok(scan
        .records
        .iter()
        .zip(omegas)
        .zip(mask)
        .map(|((rec, omega_hat), evaluated)| PowerMapEntry {
            direction: rec.direction,
            omega_hat,
            power_norm: omega_hat / peak,
            evaluated,
        })
        .collect())
}
