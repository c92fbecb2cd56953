//! Estimation and model selection: partitioning, `Ω̂`, grid maximum
//! likelihood for `(K, Δ)`, AICc selection between Rice and TWDP, and the
//! g-test of the selected fit.

mod gtest;
mod likelihood;
mod partition;
mod report;
mod selection;

pub use gtest::{chi2_quantile, g_statistic, g_test, GTestConfig, GTestResult, Verdict, DEFAULT_ALPHA, DEFAULT_PER_CELL};
pub use likelihood::{ml_fit, ml_fit_batch, GridConfig, MlFits, RiceFit, TwdpFit};
pub use partition::{estimate_omega, partition_chequerboard, partition_stride, EnvelopeSet, Role};
pub use report::{analyze, analyze_batch, AnalysisConfig, FitReport, RiceSummary, TwdpSummary};
pub use selection::{aicc, select_model, Model};
