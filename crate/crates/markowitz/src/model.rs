//! On-disk form of a [`MarketModel`]: a small JSON document carrying asset
//! ids, the mean vector, the covariance matrix in row-major order, the
//! observation count, and — so a file can never be misread in the wrong
//! units — an explicit `units` field.
//!
//! Floats are serialized losslessly (shortest representation that parses back
//! to the same bits), so writing a model out and reading it back reproduces
//! the in-memory values bit for bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{SymMatrix, Vector};
use crate::returns::MarketModel;

/// Units of the mean vector entries.
pub const MU_UNITS: &str = "percent/day";
/// Units of the covariance entries.
pub const SIGMA_UNITS: &str = "percent^2/day";

/// Tolerance for symmetry of a deserialized covariance matrix, relative to
/// `max(1, largest |entry|)`.
pub const SYMMETRY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelFileError {
    #[error("invalid model JSON: {message}")]
    Json { message: String },
    #[error("unit mismatch for {field}: expected {expected:?}, got {got:?}")]
    UnitMismatch {
        field: &'static str,
        expected: &'static str,
        got: String,
    },
    #[error("bad model shape: {reason}")]
    Shape { reason: String },
    #[error("sigma[{row}][{col}] differs from sigma[{col}][{row}] by {difference:e}")]
    AsymmetricSigma {
        row: usize,
        col: usize,
        difference: f64,
    },
    #[error("non-finite value in {field} at index {index}")]
    NonFinite { field: &'static str, index: usize },
}

impl ModelFileError {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFileError::Json { .. } => "Json",
            ModelFileError::UnitMismatch { .. } => "UnitMismatch",
            ModelFileError::Shape { .. } => "Shape",
            ModelFileError::AsymmetricSigma { .. } => "AsymmetricSigma",
            ModelFileError::NonFinite { .. } => "NonFinite",
        }
    }
}

/// The `units` block of a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelUnits {
    pub mu: String,
    pub sigma: String,
}

impl Default for ModelUnits {
    fn default() -> Self {
        ModelUnits {
            mu: MU_UNITS.to_string(),
            sigma: SIGMA_UNITS.to_string(),
        }
    }
}

/// Serialized market model. Field order below is the stable JSON field
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub asset_ids: Vec<String>,
    /// Mean daily returns, percent/day, one entry per asset.
    pub mu: Vec<f64>,
    /// Covariances, percent²/day, row-major `N × N`.
    pub sigma: Vec<f64>,
    /// Number of return observations behind the estimates.
    pub observations: u64,
    pub units: ModelUnits,
}

impl ModelFile {
    pub fn from_model(model: &MarketModel) -> Self {
        let n = model.n_assets();
        let mut sigma = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                sigma.push(model.sigma().entry(i, j));
            }
        }
        ModelFile {
            asset_ids: model.asset_ids().to_vec(),
            mu: model.mu().as_slice().to_vec(),
            sigma,
            observations: model.observations() as u64,
            units: ModelUnits::default(),
        }
    }

    /// Validates and converts back into a [`MarketModel`].
    ///
    /// Units must match [`MU_UNITS`] and [`SIGMA_UNITS`] exactly. The sigma
    /// entries must be symmetric within [`SYMMETRY_REL_TOL`] (relative to the
    /// matrix scale); any such residual is removed by averaging each entry
    /// with its transpose, so an exactly symmetric file round-trips exactly.
    pub fn to_model(&self) -> Result<MarketModel, ModelFileError> {
        if self.units.mu != MU_UNITS {
            return Err(ModelFileError::UnitMismatch {
                field: "mu",
                expected: MU_UNITS,
                got: self.units.mu.clone(),
            });
        }
        if self.units.sigma != SIGMA_UNITS {
            return Err(ModelFileError::UnitMismatch {
                field: "sigma",
                expected: SIGMA_UNITS,
                got: self.units.sigma.clone(),
            });
        }

        let n = self.asset_ids.len();
        if n == 0 {
            return Err(ModelFileError::Shape {
                reason: "no assets".to_string(),
            });
        }
        if self.mu.len() != n {
            return Err(ModelFileError::Shape {
                reason: format!("{n} asset id(s) but {} mu entries", self.mu.len()),
            });
        }
        if self.sigma.len() != n * n {
            return Err(ModelFileError::Shape {
                reason: format!(
                    "{n} asset id(s) need {} sigma entries, got {}",
                    n * n,
                    self.sigma.len()
                ),
            });
        }
        if let Some(i) = self.mu.iter().position(|v| !v.is_finite()) {
            return Err(ModelFileError::NonFinite {
                field: "mu",
                index: i,
            });
        }
        if let Some(i) = self.sigma.iter().position(|v| !v.is_finite()) {
            return Err(ModelFileError::NonFinite {
                field: "sigma",
                index: i,
            });
        }

        let scale = self.sigma.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                let difference = (self.sigma[i * n + j] - self.sigma[j * n + i]).abs();
                if difference > SYMMETRY_REL_TOL * scale {
                    return Err(ModelFileError::AsymmetricSigma {
                        row: i,
                        col: j,
                        difference,
                    });
                }
            }
        }

        let sigma = SymMatrix::from_fn(n, |i, j| {
            if i == j {
                self.sigma[i * n + i]
            } else {
                0.5 * (self.sigma[i * n + j] + self.sigma[j * n + i])
            }
        });
        MarketModel::new(
            self.asset_ids.clone(),
            Vector::new(self.mu.clone()),
            sigma,
            self.observations as usize,
        )
        .map_err(|e| ModelFileError::Shape {
            reason: e.to_string(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ModelFileError> {
        serde_json::from_str(text).map_err(|e| ModelFileError::Json {
            message: e.to_string(),
        })
    }

    /// Pretty-printed JSON with the stable field order and lossless floats.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serialization cannot fail")
    }
}
