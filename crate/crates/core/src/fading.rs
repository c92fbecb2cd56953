//! Rayleigh, Rice and two-wave-with-diffuse-power (TWDP) envelope models.
//!
//! The complex baseband channel is
//!
//! ```text
//! r = V1·exp(jφ1) + V2·exp(jφ2) + X + jY,   X, Y ~ N(0, σ²)
//! ```
//!
//! parametrised by the specular-to-diffuse power ratio `K`, the specular
//! amplitude balance `Δ` and the mean power `Ω = E[|r|²]`. All `K` values are
//! linear power ratios.
//!
//! The TWDP CDF is an average of Rice CDFs over the relative phase of the two
//! specular waves,
//!
//! ```text
//! F(r) = 1 - (1/2π) ∫ Q1( sqrt(2K(1 + Δ cos α)), r/σ ) dα
//! ```
//!
//! evaluated with the composite trapezoid rule (the integrand is smooth and
//! periodic). The pdf is the central difference of the CDF.

use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_finite, Result};
use crate::special::{marcum_q1_pair, walk_poisson};

/// Largest supported K (linear). Distribution functions reject larger values.
pub const MAX_K: f64 = 1e4;

/// Default trapezoid node count over the specular phase difference.
pub const DEFAULT_QUADRATURE_NODES: usize = 2048;

/// Relative step of the numerical derivative: `h = PDF_STEP · sqrt(Ω)`.
pub const PDF_STEP: f64 = 1e-4;

/// Fading model parameters `(K, Δ, Ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct FadingParams {
    k: f64,
    delta: f64,
    omega: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    k: f64,
    delta: f64,
    omega: f64,
}

impl TryFrom<RawParams> for FadingParams {
    type Error = crate::Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        FadingParams::new(raw.k, raw.delta, raw.omega)
    }
}

impl From<FadingParams> for RawParams {
    fn from(p: FadingParams) -> Self {
        RawParams {
            k: p.k,
            delta: p.delta,
            omega: p.omega,
        }
    }
}

impl FadingParams {
    pub fn new(k: f64, delta: f64, omega: f64) -> Result<Self> {
        ensure_finite("k", k)?;
        ensure_finite("delta", delta)?;
        ensure_finite("omega", omega)?;
        if k < 0.0 {
            return domain(format!("k must be nonnegative, got {k}"));
        }
        if !(0.0..=1.0).contains(&delta) {
            return domain(format!("delta must lie in [0, 1], got {delta}"));
        }
        if omega <= 0.0 {
            return domain(format!("omega must be positive, got {omega}"));
        }
        Ok(FadingParams { k, delta, omega })
    }

    pub fn rice(k: f64, omega: f64) -> Result<Self> {
        Self::new(k, 0.0, omega)
    }

    pub fn rayleigh(omega: f64) -> Result<Self> {
        Self::new(0.0, 0.0, omega)
    }

    /// Recovers `(K, Δ, Ω)` from specular amplitudes and the diffuse variance.
    pub fn from_amplitudes(v1: f64, v2: f64, sigma2: f64) -> Result<Self> {
        if v1 < 0.0 || v2 < 0.0 || sigma2 <= 0.0 {
            return domain("amplitudes must be nonnegative and sigma2 positive");
        }
        let specular = v1 * v1 + v2 * v2;
        let delta = if specular > 0.0 {
            2.0 * v1 * v2 / specular
        } else {
            0.0
        };
        Self::new(specular / (2.0 * sigma2), delta, specular + 2.0 * sigma2)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Per-dimension variance of the diffuse component.
    pub fn sigma2(&self) -> f64 {
        self.omega / (2.0 * (1.0 + self.k))
    }

    /// `(V1, V2)` with `V1 >= V2 >= 0`.
    pub fn specular_amplitudes(&self) -> (f64, f64) {
        let scale = 0.5 * (self.omega * self.k / (1.0 + self.k)).sqrt();
        let plus = (1.0 + self.delta).sqrt();
        let minus = (1.0 - self.delta).sqrt();
        (scale * (plus + minus), scale * (plus - minus))
    }

    /// Same `(K, Δ)` at a different mean power.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.k, self.delta, omega)
    }

    fn check_supported(&self) -> Result<()> {
        if self.k > MAX_K {
            return domain(format!(
                "k = {} exceeds the supported maximum {MAX_K}",
                self.k
            ));
        }
        Ok(())
    }
}

pub fn sigma2_from_k(k: f64, omega: f64) -> Result<f64> {
    ensure_finite("k", k)?;
    ensure_finite("omega", omega)?;
    if k < 0.0 {
        return domain(format!("k must be nonnegative, got {k}"));
    }
    if omega <= 0.0 {
        return domain(format!("omega must be positive, got {omega}"));
    }
    Ok(omega / (2.0 * (1.0 + k)))
}

pub fn specular_amplitudes(k: f64, delta: f64, omega: f64) -> Result<(f64, f64)> {
    Ok(FadingParams::new(k, delta, omega)?.specular_amplitudes())
}

pub use crate::special::marcum_q1;

fn check_radius(r: f64) -> Result<()> {
    ensure_finite("r", r)?;
    if r < 0.0 {
        return domain(format!("envelope value must be nonnegative, got {r}"));
    }
    Ok(())
}

pub fn rayleigh_cdf(r: f64, omega: f64) -> Result<f64> {
    check_radius(r)?;
    let p = FadingParams::rayleigh(omega)?;
    Ok(-(-r * r / p.omega).exp_m1())
}

pub fn rice_cdf(r: f64, k: f64, omega: f64) -> Result<f64> {
    check_radius(r)?;
    let p = FadingParams::rice(k, omega)?;
    p.check_supported()?;
    let (_, cdf) = marcum_q1_pair((2.0 * p.k).sqrt(), r / p.sigma2().sqrt())?;
    Ok(cdf)
}

/// Trapezoid nodes over `[0, 2π)` folded onto `[0, π]` by the symmetry of
/// `cos α`: yields `(cos α, weight)` with weights summing to one.
fn folded_nodes(nodes: usize) -> impl Iterator<Item = (f64, f64)> {
    let q = nodes as f64;
    (0..=nodes / 2).map(move |n| {
        let paired = n != 0 && !(nodes.is_multiple_of(2) && n == nodes / 2);
        let weight = if paired { 2.0 / q } else { 1.0 / q };
        ((std::f64::consts::TAU * n as f64 / q).cos(), weight)
    })
}

/// `(F(r), 1 - F(r))` of the TWDP envelope by direct quadrature of the
/// Marcum-Q integral.
pub fn twdp_cdf_sf(r: f64, params: &FadingParams, nodes: usize) -> Result<(f64, f64)> {
    check_radius(r)?;
    params.check_supported()?;
    if nodes == 0 {
        return domain("quadrature needs at least one node");
    }
    let b = r / params.sigma2().sqrt();
    if params.k * params.delta == 0.0 {
        let (q, p) = marcum_q1_pair((2.0 * params.k).sqrt(), b)?;
        return Ok((p, q));
    }
    let (mut cdf, mut sf) = (0.0, 0.0);
    for (cos_alpha, weight) in folded_nodes(nodes) {
        let a = (2.0 * params.k * (1.0 + params.delta * cos_alpha)).max(0.0).sqrt();
        let (q, p) = marcum_q1_pair(a, b)?;
        cdf += weight * p;
        sf += weight * q;
    }
    Ok((cdf.clamp(0.0, 1.0), sf.clamp(0.0, 1.0)))
}

pub fn twdp_cdf_with_nodes(r: f64, params: &FadingParams, nodes: usize) -> Result<f64> {
    twdp_cdf_sf(r, params, nodes).map(|(cdf, _)| cdf)
}

pub fn twdp_cdf(r: f64, params: &FadingParams) -> Result<f64> {
    twdp_cdf_with_nodes(r, params, DEFAULT_QUADRATURE_NODES)
}

/// Central difference of a CDF given as `(F, 1 - F)` pairs. The stencil is
/// clipped at zero, and the difference is taken on whichever side of the
/// distribution is smaller at the upper stencil point.
fn difference_pdf(
    r: f64,
    h: f64,
    mut cdf_sf: impl FnMut(f64) -> Result<(f64, f64)>,
) -> Result<f64> {
    let lo = (r - h).max(0.0);
    let hi = r + h;
    let (f_hi, s_hi) = cdf_sf(hi)?;
    let (f_lo, s_lo) = cdf_sf(lo)?;
    let diff = if f_hi <= 0.5 { f_hi - f_lo } else { s_lo - s_hi };
    Ok((diff / (hi - lo)).max(0.0))
}

/// TWDP pdf by numerical differentiation of [`twdp_cdf`].
pub fn twdp_pdf(r: f64, params: &FadingParams) -> Result<f64> {
    check_radius(r)?;
    let h = PDF_STEP * params.omega.sqrt();
    difference_pdf(r, h, |x| twdp_cdf_sf(x, params, DEFAULT_QUADRATURE_NODES))
}

/// A TWDP distribution with its quadrature precomputed, for evaluating the
/// CDF and pdf at many points.
///
/// Exchanging the trapezoid sum with the Poisson form of the Marcum
/// function gives
///
/// ```text
/// F(r) = Σ_i P(N_y = i) · P(M < i),   y = r²(1 + K)/Ω
/// ```
///
/// where `M` is the Poisson mixture whose mean `K(1 + Δ cos α)` is drawn from
/// the quadrature nodes. The mixture weights depend only on `(K, Δ)`, so each
/// evaluation costs `O(sqrt(y))` instead of a full quadrature. The results
/// equal [`twdp_cdf_with_nodes`] up to rounding.
#[derive(Debug, Clone)]
pub struct TwdpDistribution {
    params: FadingParams,
    start: usize,
    /// `lower[i] = P(M <= start + i)`
    lower: Vec<f64>,
    /// `upper[i] = P(M >= start + i)`
    upper: Vec<f64>,
    total: f64,
}

impl TwdpDistribution {
    pub fn new(params: FadingParams) -> Result<Self> {
        Self::with_nodes(params, DEFAULT_QUADRATURE_NODES)
    }

    pub fn with_nodes(params: FadingParams, nodes: usize) -> Result<Self> {
        params.check_supported()?;
        if nodes == 0 {
            return domain("quadrature needs at least one node");
        }
        let max_mean = params.k * (1.0 + params.delta);
        let mut top = 0;
        walk_poisson(max_mean, |n, _| top = top.max(n));
        let mut weights = vec![0.0; top + 1];
        let mut add = |mean: f64, scale: f64| {
            walk_poisson(mean, |n, p| {
                if let Some(w) = weights.get_mut(n) {
                    *w += scale * p;
                }
            })
        };
        if params.k * params.delta == 0.0 {
            add(params.k, 1.0);
        } else {
            for (cos_alpha, w) in folded_nodes(nodes) {
                add((params.k * (1.0 + params.delta * cos_alpha)).max(0.0), w);
            }
        }
        let start = weights.iter().position(|&w| w > 0.0).unwrap_or(0);
        let weights = weights.split_off(start);
        let mut lower = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            lower.push(acc);
        }
        let total = acc;
        let mut upper = vec![0.0; weights.len()];
        let mut acc = 0.0;
        for i in (0..weights.len()).rev() {
            acc += weights[i];
            upper[i] = acc;
        }
        Ok(TwdpDistribution {
            params,
            start,
            lower,
            upper,
            total,
        })
    }

    pub fn params(&self) -> &FadingParams {
        &self.params
    }

    /// `P(M < i)`
    #[inline]
    fn mixture_below(&self, i: usize) -> f64 {
        if i <= self.start {
            0.0
        } else if i - self.start > self.lower.len() {
            self.total
        } else {
            self.lower[i - self.start - 1]
        }
    }

    /// `P(M >= i)`
    #[inline]
    fn mixture_at_or_above(&self, i: usize) -> f64 {
        if i < self.start {
            self.total
        } else if i - self.start >= self.upper.len() {
            0.0
        } else {
            self.upper[i - self.start]
        }
    }

    /// `(F(r), 1 - F(r))` without argument validation.
    #[inline]
    pub(crate) fn cdf_sf_unchecked(&self, r: f64) -> (f64, f64) {
        let y = r * r * (1.0 + self.params.k) / self.params.omega;
        let (mut cdf, mut sf) = (0.0, 0.0);
        walk_poisson(y, |i, p| {
            cdf += p * self.mixture_below(i);
            sf += p * self.mixture_at_or_above(i);
        });
        (cdf.clamp(0.0, 1.0), sf.clamp(0.0, 1.0))
    }

    pub fn cdf_sf(&self, r: f64) -> Result<(f64, f64)> {
        check_radius(r)?;
        Ok(self.cdf_sf_unchecked(r))
    }

    pub fn cdf(&self, r: f64) -> Result<f64> {
        self.cdf_sf(r).map(|(c, _)| c)
    }

    pub fn pdf(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.pdf_unchecked(r))
    }

    #[inline]
    pub(crate) fn pdf_unchecked(&self, r: f64) -> f64 {
        let h = PDF_STEP * self.params.omega.sqrt();
        difference_pdf(r, h, |x| Ok(self.cdf_sf_unchecked(x))).unwrap_or(0.0)
    }
}
