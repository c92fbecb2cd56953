//! JSON documents written by the commands. All of them carry
//! `schema_version` and a `kind` tag and are described by
//! `schema/report.schema.json`.

use serde::{Deserialize, Serialize};
use twdp::inference::{AnalysisConfig, FitReport, Model, Verdict};
use twdp::measurement::Direction;
use twdp::FadingParams;

pub const SCHEMA_VERSION: &str = "1.0.0";

/// The published schema for every document kind.
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Fit,
    Scan,
    Correlation,
    Ber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    #[serde(flatten)]
    pub analysis: AnalysisConfig,
    /// Partition used for the input; `chequerboard` for grid taps.
    pub partition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub schema_version: String,
    pub kind: Kind,
    pub source: String,
    pub settings: FitSettings,
    pub report: FitReport,
}

impl FitDocument {
    pub fn new(source: String, settings: FitSettings, report: FitReport) -> Self {
        FitDocument {
            schema_version: SCHEMA_VERSION.into(),
            kind: Kind::Fit,
            source,
            settings,
            report,
        }
    }
}

/// Per-direction outcome shown on scan maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Marker {
    #[serde(rename = "rice")]
    Rice,
    #[serde(rename = "twdp")]
    Twdp,
    /// The chosen model failed the goodness-of-fit test.
    #[serde(rename = "rejected")]
    Rejected,
    #[serde(rename = "not evaluated")]
    NotEvaluated,
    /// The direction passed the noise mask but could not be fitted.
    #[serde(rename = "failed")]
    Failed,
}

impl Marker {
    pub fn of(report: &FitReport) -> Self {
        match (report.gtest.verdict, report.chosen) {
            (Verdict::Rejected, _) => Marker::Rejected,
            (Verdict::Accepted, Model::Rice) => Marker::Rice,
            (Verdict::Accepted, Model::Twdp) => Marker::Twdp,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Marker::Rice => "rice",
            Marker::Twdp => "twdp",
            Marker::Rejected => "rejected",
            Marker::NotEvaluated => "not evaluated",
            Marker::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub direction: Direction,
    pub omega_hat: f64,
    pub power_norm: f64,
    pub evaluated: bool,
    pub marker: Marker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionFit {
    pub direction: Direction,
    pub marker: Marker,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<FitReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDocument {
    pub schema_version: String,
    pub kind: Kind,
    pub source: String,
    pub margin_db: f64,
    pub settings: FitSettings,
    /// Every direction of the scan.
    pub power_map: Vec<PowerPoint>,
    /// Only the directions that passed the noise mask.
    pub fits: Vec<DirectionFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDocument {
    pub schema_version: String,
    pub kind: Kind,
    pub source: String,
    pub matrix_file: String,
    /// Lag step in wavelengths.
    pub step: f64,
    pub interp_factor: usize,
    pub lag_axis_x: Vec<f64>,
    pub lag_axis_y: Vec<f64>,
    pub cut_x: Vec<f64>,
    pub cut_y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerDocument {
    pub schema_version: String,
    pub kind: Kind,
    pub table_file: String,
    pub params: FadingParams,
    pub n_symbols: usize,
    pub seed: u64,
    pub capacity_loss: f64,
}
