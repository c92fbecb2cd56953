//! Poisson probabilities and the generalized Marcum Q-function of order one.
//!
//! `Q1(a, b)` is evaluated through its Bessel series
//!
//! ```text
//! Q1(a, b) = exp(-(a² + b²)/2) · Σ_{k≥0} (a/b)^k I_k(ab)
//! ```
//!
//! Expanding every `I_k` in its power series turns the double sum into
//! products of Poisson probabilities with means `x = a²/2` and `y = b²/2`:
//!
//! ```text
//! Q1(a, b) = Σ_j P(N_x = j) · P(N_y ≤ j) = P(N_y ≤ N_x)
//! ```
//!
//! Each factor is bounded by one, so no term can overflow regardless of
//! `a·b`, and summing outward from the Poisson modes with a term cutoff gives
//! both `Q1` and `1 - Q1` to absolute accuracy near machine precision. The
//! complement is accumulated separately so that tiny lower-tail CDF values
//! keep their relative precision.

use crate::error::{domain, Result};

/// Terms below this magnitude are dropped when walking away from a Poisson mode.
pub(crate) const PMF_CUTOFF: f64 = 1e-20;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln(n!) - ln(sqrt(2πn) (n/e)^n)`, the Stirling remainder.
fn stirling_error(n: usize) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nf = n as f64;
    if n <= 15 {
        // n! is exact in f64 up to 22!.
        let factorial: f64 = (1..=n).map(|i| i as f64).product();
        return factorial.ln() - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI;
    }
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x/m) + m - x`, computed without cancellation for x ≈ m.
fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let v2 = v * v;
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `P(N = n)` for `N ~ Poisson(mean)`, accurate to a few ulps for any `n`.
pub fn poisson_pmf(n: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n == 0 {
        return (-mean).exp();
    }
    let nf = n as f64;
    (-stirling_error(n) - deviance(nf, mean)).exp() / (std::f64::consts::TAU * nf).sqrt()
}

/// Visits every non-negligible `(n, P(N = n))` of a Poisson pmf: the mode
/// first, then walking down, then walking up. Visiting order is not sorted.
#[inline]
pub(crate) fn walk_poisson(mean: f64, mut visit: impl FnMut(usize, f64)) {
    if mean == 0.0 {
        visit(0, 1.0);
        return;
    }
    let mode = mean.floor() as usize;
    let at_mode = poisson_pmf(mode, mean);
    visit(mode, at_mode);
    let mut p = at_mode;
    let mut n = mode;
    while n > 0 {
        p *= n as f64 / mean;
        n -= 1;
        if p < PMF_CUTOFF {
            break;
        }
        visit(n, p);
    }
    let mut p = at_mode;
    let mut n = mode;
    loop {
        n += 1;
        p *= mean / n as f64;
        if p < PMF_CUTOFF {
            break;
        }
        visit(n, p);
    }
}

/// The non-negligible part of a Poisson pmf: `pmf[i] = P(N = start + i)`.
#[derive(Debug, Clone)]
pub(crate) struct PoissonWindow {
    pub start: usize,
    pub pmf: Vec<f64>,
}

impl PoissonWindow {
    pub fn new(mean: f64) -> Self {
        let mut points = Vec::new();
        walk_poisson(mean, |n, p| points.push((n, p)));
        points.sort_unstable_by_key(|&(n, _)| n);
        let start = points[0].0;
        PoissonWindow {
            start,
            pmf: points.into_iter().map(|(_, p)| p).collect(),
        }
    }

    pub fn end(&self) -> usize {
        self.start + self.pmf.len()
    }
}

/// `Q1(a, b)` together with its complement `1 - Q1(a, b)`.
///
/// Both values carry absolute error near `1e-16`; whichever is small keeps
/// its relative precision.
pub fn marcum_q1_pair(a: f64, b: f64) -> Result<(f64, f64)> {
    if !a.is_finite() || !b.is_finite() {
        return domain(format!("Marcum Q1 arguments must be finite, got ({a}, {b})"));
    }
    if a < 0.0 || b < 0.0 {
        return domain(format!("Marcum Q1 arguments must be nonnegative, got ({a}, {b})"));
    }
    let x = 0.5 * a * a;
    let y = 0.5 * b * b;
    if y == 0.0 {
        return Ok((1.0, 0.0));
    }
    if x == 0.0 {
        return Ok(((-y).exp(), -(-y).exp_m1()));
    }

    let wy = PoissonWindow::new(y);
    // below[i] = P(N_y <= start + i), above[i] = P(N_y > start + i)
    let mut below = Vec::with_capacity(wy.pmf.len());
    let mut acc = 0.0;
    for &p in &wy.pmf {
        acc += p;
        below.push(acc);
    }
    let total_y = acc;
    let mut above = vec![0.0; wy.pmf.len()];
    let mut acc = 0.0;
    for i in (0..wy.pmf.len()).rev() {
        above[i] = acc;
        acc += wy.pmf[i];
    }

    let (mut q, mut p) = (0.0, 0.0);
    walk_poisson(x, |j, px| {
        if j < wy.start {
            p += px * total_y;
        } else if j >= wy.end() {
            q += px * total_y;
        } else {
            q += px * below[j - wy.start];
            p += px * above[j - wy.start];
        }
    });
    Ok((q.clamp(0.0, 1.0), p.clamp(0.0, 1.0)))
}

/// Generalized Marcum Q-function of order one.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    marcum_q1_pair(a, b).map(|(q, _)| q)
}
