//! Directional-scan and spatial-grid processing: noise masking, power maps,
//! window-compensated spatial autocorrelation and CIR time gating.

mod cir;
mod correlation;
mod grid;
mod scan;

pub use cir::{cir, excess_distance, tap_envelopes, uniform_spacing, Cir};
pub use correlation::{autocorr2d, average_corr, Correlation2d, CorrelationMap, DEFAULT_INTERP_FACTOR};
pub use grid::{Direction, DirectionRecord, DirectionalScan, GridShape, SpatialGrid, DEFAULT_SPACING};
pub use scan::{noise_mask, power_map, PowerMapEntry, DEFAULT_MARGIN_DB, SCAN_STRIDE};
