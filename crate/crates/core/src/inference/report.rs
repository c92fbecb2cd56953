use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fading::FadingParams;

use super::gtest::{g_test, GTestConfig, GTestResult};
use super::likelihood::{ml_fit_batch, GridConfig, MlFits};
use super::partition::{estimate_omega, EnvelopeSet, Role};
use super::selection::{aicc, select_model, Model};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiceSummary {
    pub k_hat: f64,
    pub loglik: f64,
    pub aicc: f64,
    pub at_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwdpSummary {
    pub k_hat: f64,
    pub delta_hat: f64,
    pub loglik: f64,
    pub aicc: f64,
    pub at_boundary: bool,
}

/// Everything the pipeline decides about one envelope set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub omega_hat: f64,
    pub rice: RiceSummary,
    pub twdp: TwdpSummary,
    pub chosen: Model,
    pub gtest: GTestResult,
    pub n_fit: usize,
    pub n_moment: usize,
}

impl FitReport {
    /// Parameters of the selected model.
    pub fn chosen_params(&self) -> Result<FadingParams> {
        match self.chosen {
            Model::Rice => FadingParams::new(self.rice.k_hat, 0.0, self.omega_hat),
            Model::Twdp => FadingParams::new(self.twdp.k_hat, self.twdp.delta_hat, self.omega_hat),
        }
    }

    pub fn rice_params(&self) -> Result<FadingParams> {
        FadingParams::new(self.rice.k_hat, 0.0, self.omega_hat)
    }

    pub fn twdp_params(&self) -> Result<FadingParams> {
        FadingParams::new(self.twdp.k_hat, self.twdp.delta_hat, self.omega_hat)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub grid: GridConfig,
    pub gtest: GTestConfig,
}

fn finish(set: &EnvelopeSet, omega_hat: f64, fits: MlFits, config: &AnalysisConfig) -> Result<FitReport> {
    let n_fit = set.count(Role::Fit);
    let rice_aicc = aicc(fits.rice.loglik, Model::Rice.order(), n_fit)?;
    let twdp_aicc = aicc(fits.twdp.loglik, Model::Twdp.order(), n_fit)?;
    let chosen = select_model(rice_aicc, twdp_aicc);
    let params = match chosen {
        Model::Rice => FadingParams::new(fits.rice.k_hat, 0.0, omega_hat)?,
        Model::Twdp => FadingParams::new(fits.twdp.k_hat, fits.twdp.delta_hat, omega_hat)?,
    };
    let gtest = g_test(&set.fit_values(), chosen, &params, &config.gtest)?;
    Ok(FitReport {
        omega_hat,
        rice: RiceSummary {
            k_hat: fits.rice.k_hat,
            loglik: fits.rice.loglik,
            aicc: rice_aicc,
            at_boundary: fits.rice.at_boundary,
        },
        twdp: TwdpSummary {
            k_hat: fits.twdp.k_hat,
            delta_hat: fits.twdp.delta_hat,
            loglik: fits.twdp.loglik,
            aicc: twdp_aicc,
            at_boundary: fits.twdp.at_boundary,
        },
        chosen,
        gtest,
        n_fit,
        n_moment: set.count(Role::Moment),
    })
}

/// Runs `Ω̂ → ML fit → AICc selection → g-test` on every set, sharing one
/// pass over the parameter grid. Results are in input order.
pub fn analyze_batch(sets: &[EnvelopeSet], config: &AnalysisConfig) -> Result<Vec<Result<FitReport>>> {
    let omegas: Vec<Result<f64>> = sets
        .iter()
        .map(|set| set.check_estimable().and_then(|_| estimate_omega(set)))
        .collect();
    let ready: Vec<(usize, f64)> = omegas
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.as_ref().ok().map(|o| (i, *o)))
        .collect();
    let batch: Vec<(&EnvelopeSet, f64)> = ready.iter().map(|&(i, o)| (&sets[i], o)).collect();
    let fits = ml_fit_batch(&batch, &config.grid)?;

    let mut fits = fits.into_iter();
    let mut ready = ready.into_iter();
    let mut out = Vec::with_capacity(sets.len());
    for (i, omega) in omegas.into_iter().enumerate() {
        out.push(match omega {
            Err(e) => Err(e),
            Ok(omega) => {
                debug_assert_eq!(ready.next().map(|r| r.0), Some(i));
                let fit = fits.next().expect("one fit per estimable set");
                fit.and_then(|fit| finish(&sets[i], omega, fit, config))
            }
        });
    }
    Ok(out)
}

/// The full pipeline on one set.
pub fn analyze(set: &EnvelopeSet, config: &AnalysisConfig) -> Result<FitReport> {
    analyze_batch(std::slice::from_ref(set), config)?
        .pop()
        .expect("one result per set")
}
