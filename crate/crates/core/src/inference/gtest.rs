//! Likelihood-ratio goodness-of-fit test on equal-count cells.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Error, Result};
use crate::fading::{FadingParams, TwdpDistribution};

use super::selection::Model;

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_PER_CELL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GTestResult {
    pub g: f64,
    pub dof: usize,
    pub threshold: f64,
    pub cells: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GTestConfig {
    pub alpha: f64,
    pub per_cell: usize,
}

impl Default for GTestConfig {
    fn default() -> Self {
        GTestConfig {
            alpha: DEFAULT_ALPHA,
            per_cell: DEFAULT_PER_CELL,
        }
    }
}

/// `G = 2 Σ O ln(O/E)`; cells with `O = 0` contribute nothing.
pub fn g_statistic(observed: &[f64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() {
        return domain("observed and expected counts differ in length");
    }
    let mut g = 0.0;
    for (i, (&o, &e)) in observed.iter().zip(expected).enumerate() {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::Numerical(format!("expected count of cell {i} is {e}")));
        }
        if o < 0.0 || !o.is_finite() {
            return domain(format!("observed count of cell {i} is {o}"));
        }
        if o > 0.0 {
            g += o * (o / e).ln();
        }
    }
    Ok(2.0 * g)
}

/// Upper `1 - alpha` quantile of the chi-square distribution.
pub fn chi2_quantile(p: f64, dof: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("quantile level must lie in (0, 1), got {p}"));
    }
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::Domain(format!("chi-square with {dof} degrees of freedom: {e}")))?;
    Ok(dist.inverse_cdf(p))
}

/// Tests `values` against the fitted `model` with parameters `params`.
///
/// The sorted sample is cut into cells of exactly `per_cell` observations,
/// the last cell taking the remainder. Cell edges sit halfway between the
/// neighbouring order statistics; expected counts come from the model CDF.
pub fn g_test(
    values: &[f64],
    model: Model,
    params: &FadingParams,
    config: &GTestConfig,
) -> Result<GTestResult> {
    let GTestConfig { alpha, per_cell } = *config;
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if per_cell == 0 {
        return domain("per_cell must be positive");
    }
    let e = model.estimated_parameters();
    let n = values.len();
    if n < per_cell * (e + 2) {
        return domain(format!(
            "g-test of the {model} model needs at least {} samples, got {n}",
            per_cell * (e + 2)
        ));
    }
    if model == Model::Rice && params.delta() != 0.0 {
        return domain("Rice parameters must have delta = 0");
    }
    let mut sorted = values.to_vec();
    if sorted.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return domain("envelopes must be finite and nonnegative");
    }
    sorted.sort_by(f64::total_cmp);

    let cells = n / per_cell;
    let dist = TwdpDistribution::new(*params)?;
    let mut observed = Vec::with_capacity(cells);
    let mut expected = Vec::with_capacity(cells);
    let nf = n as f64;
    let mut lower = (0.0, 1.0);
    for i in 0..cells {
        let upper = if i + 1 == cells {
            (1.0, 0.0)
        } else {
            let j = (i + 1) * per_cell;
            dist.cdf_sf(0.5 * (sorted[j - 1] + sorted[j]))?
        };
        let count = if i + 1 == cells { n - i * per_cell } else { per_cell };
        let mass = if lower.0 <= 0.5 {
            upper.0 - lower.0
        } else {
            lower.1 - upper.1
        };
        observed.push(count as f64);
        expected.push(nf * mass);
        lower = upper;
    }

    let g = g_statistic(&observed, &expected)?;
    let dof = cells - e;
    let threshold = chi2_quantile(1.0 - alpha, dof)?;
    Ok(GTestResult {
        g,
        dof,
        threshold,
        cells,
        verdict: if g > threshold {
            Verdict::Rejected
        } else {
            Verdict::Accepted
        },
    })
}
