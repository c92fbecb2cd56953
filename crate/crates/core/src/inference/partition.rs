use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measurement::GridShape;

/// What an envelope sample is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Second-moment estimation.
    Moment,
    /// Likelihood fitting and goodness-of-fit testing.
    Fit,
}

/// Envelope samples, each labelled with its [`Role`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSet {
    values: Vec<f64>,
    roles: Vec<Role>,
}

impl EnvelopeSet {
    pub fn new(values: Vec<f64>, roles: Vec<Role>) -> Result<Self> {
        if values.len() != roles.len() {
            return domain(format!(
                "{} values but {} partition labels",
                values.len(),
                roles.len()
            ));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return domain(format!("envelope {i} is {v}; envelopes must be finite and nonnegative"));
        }
        Ok(EnvelopeSet { values, roles })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn class(&self, role: Role) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.roles)
            .filter(move |(_, r)| **r == role)
            .map(|(v, _)| *v)
    }

    pub fn fit_values(&self) -> Vec<f64> {
        self.class(Role::Fit).collect()
    }

    pub fn count(&self, role: Role) -> usize {
        self.roles.iter().filter(|r| **r == role).count()
    }

    /// The same partition with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        EnvelopeSet::new(
            self.values.iter().map(|v| v * factor).collect(),
            self.roles.clone(),
        )
    }

    /// Fails unless both classes are nonempty.
    pub fn check_estimable(&self) -> Result<()> {
        let fit = self.count(Role::Fit);
        if fit == 0 || fit == self.len() {
            return Err(Error::Domain(format!(
                "partition has {fit} fit and {} moment samples; both classes must be nonempty",
                self.len() - fit
            )));
        }
        Ok(())
    }
}

/// Marks every `stride`-th sample (indices `stride-1, 2·stride-1, …`) for
/// fitting; the rest estimate the second moment.
pub fn partition_stride(values: Vec<f64>, stride: usize) -> Result<EnvelopeSet> {
    if stride < 2 {
        return domain(format!("stride {stride} leaves no samples for moment estimation"));
    }
    if values.len() < 2 * stride {
        return domain(format!(
            "stride {stride} needs at least {} samples, got {}",
            2 * stride,
            values.len()
        ));
    }
    let roles = (0..values.len())
        .map(|i| if (i + 1) % stride == 0 { Role::Fit } else { Role::Moment })
        .collect();
    EnvelopeSet::new(values, roles)
}

/// 3D chequerboard labels in [`GridShape::iter`] order: a point is used for
/// fitting when `x + y + z` is even.
pub fn partition_chequerboard(shape: GridShape) -> Vec<Role> {
    shape
        .iter()
        .map(|(x, y, z)| if (x + y + z) % 2 == 0 { Role::Fit } else { Role::Moment })
        .collect()
}

/// Second-moment estimate from the moment class only.
pub fn estimate_omega(set: &EnvelopeSet) -> Result<f64> {
    let (count, sum) = set
        .class(Role::Moment)
        .fold((0usize, 0.0), |(n, s), v| (n + 1, s + v * v));
    if count == 0 {
        return domain("moment class is empty");
    }
    let omega = sum / count as f64;
    if omega <= 0.0 {
        return Err(Error::Estimation(
            "moment class has zero power; the second moment must be positive".into(),
        ));
    }
    Ok(omega)
}
