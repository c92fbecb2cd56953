use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Candidate envelope model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Rice,
    Twdp,
}

impl Model {
    /// Number of fitted shape parameters (`Ω` is estimated separately).
    pub fn order(self) -> usize {
        match self {
            Model::Rice => 1,
            Model::Twdp => 2,
        }
    }

    /// Parameters estimated from the data, counting `Ω`.
    pub fn estimated_parameters(self) -> usize {
        self.order() + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Rice => "rice",
            Model::Twdp => "twdp",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Rice => "Rice",
            Model::Twdp => "TWDP",
        })
    }
}

/// Small-sample corrected Akaike information criterion.
pub fn aicc(loglik: f64, order: usize, n: usize) -> Result<f64> {
    if n <= order + 1 {
        return domain(format!("AICc needs n > {}, got n = {n}", order + 1));
    }
    if loglik.is_nan() {
        return domain("log-likelihood is NaN");
    }
    let u = order as f64;
    Ok(-2.0 * loglik + 2.0 * u + 2.0 * u * (u + 1.0) / (n as f64 - u - 1.0))
}

/// The model with strictly lower AICc; ties go to Rice.
pub fn select_model(aicc_rice: f64, aicc_twdp: f64) -> Model {
    if aicc_twdp < aicc_rice {
        Model::Twdp
    } else {
        Model::Rice
    }
}
