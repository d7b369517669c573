//! Percent daily returns from aligned prices, and the sample moments —
//! mean vector and covariance matrix — estimated from them.
//!
//! A return is the simple percent change between consecutive trading days:
//! `(price_next − price_prev) / price_prev × 100`. Log returns are out of
//! scope. The covariance estimator is two-pass (means first, then centered
//! cross products), each unordered pair computed once so the matrix is
//! symmetric by construction.

use chrono::NaiveDate;
use thiserror::Error;

use crate::linalg::{SymMatrix, Vector};
use crate::market_data::AlignedPrices;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReturnsError {
    #[error("asset {asset_id:?} has no adjusted close on {date}")]
    AdjustedUnavailable { asset_id: String, date: NaiveDate },
    #[error("{observations} return observation(s); at least 2 are needed for a covariance")]
    InsufficientData { observations: usize },
    #[error("invalid returns panel: {reason}")]
    InvalidPanel { reason: String },
    #[error("invalid market model: {reason}")]
    InvalidModel { reason: String },
}

impl ReturnsError {
    pub fn name(&self) -> &'static str {
        match self {
            ReturnsError::AdjustedUnavailable { .. } => "AdjustedUnavailable",
            ReturnsError::InsufficientData { .. } => "InsufficientData",
            ReturnsError::InvalidPanel { .. } => "InvalidPanel",
            ReturnsError::InvalidModel { .. } => "InvalidModel",
        }
    }
}

/// Which price column feeds the return calculation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriceField {
    /// Raw close price — the default.
    #[default]
    Close,
    /// Adjusted close; errors when any aligned row lacks one.
    Adjusted,
}

/// Covariance normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Divisor {
    /// Unbiased estimator, divides by T − 1 — the default.
    #[default]
    Sample,
    /// Maximum-likelihood estimator, divides by T.
    Population,
}

/// T × N panel of percent daily returns, row-major (one row per period).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsPanel {
    asset_ids: Vec<String>,
    returns: Vec<f64>,
    n_periods: usize,
}

impl ReturnsPanel {
    pub fn new(
        asset_ids: Vec<String>,
        returns: Vec<f64>,
        n_periods: usize,
    ) -> Result<Self, ReturnsError> {
        let n = asset_ids.len();
        if n == 0 || n_periods == 0 {
            return Err(ReturnsError::InvalidPanel {
                reason: "panel needs at least one asset and one period".to_string(),
            });
        }
        if returns.len() != n_periods * n {
            return Err(ReturnsError::InvalidPanel {
                reason: format!(
                    "{} entries do not fill a {n_periods}×{n} panel",
                    returns.len()
                ),
            });
        }
        if let Some(pos) = returns.iter().position(|r| !(r.is_finite() && *r > -100.0)) {
            return Err(ReturnsError::InvalidPanel {
                reason: format!(
                    "entry {pos} is {}; percent returns from positive prices exceed -100",
                    returns[pos]
                ),
            });
        }
        Ok(ReturnsPanel {
            asset_ids,
            returns,
            n_periods,
        })
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn entry(&self, period: usize, asset: usize) -> f64 {
        self.returns[period * self.n_assets() + asset]
    }
}

/// Estimated market inputs for portfolio construction: mean returns
/// (percent/day), return covariances (percent²/day), and how many return
/// observations produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    asset_ids: Vec<String>,
    mu: Vector,
    sigma: SymMatrix,
    observations: usize,
}

impl MarketModel {
    pub fn new(
        asset_ids: Vec<String>,
        mu: Vector,
        sigma: SymMatrix,
        observations: usize,
    ) -> Result<Self, ReturnsError> {
        let n = asset_ids.len();
        if n == 0 {
            return Err(ReturnsError::InvalidModel {
                reason: "model needs at least one asset".to_string(),
            });
        }
        if mu.len() != n || sigma.n() != n {
            return Err(ReturnsError::InvalidModel {
                reason: format!(
                    "{n} asset id(s) with mu of length {} and sigma of dimension {}",
                    mu.len(),
                    sigma.n()
                ),
            });
        }
        for i in 0..n {
            if sigma.entry(i, i) < 0.0 {
                return Err(ReturnsError::InvalidModel {
                    reason: format!("negative variance {} for asset {i}", sigma.entry(i, i)),
                });
            }
        }
        Ok(MarketModel {
            asset_ids,
            mu,
            sigma,
            observations,
        })
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn mu(&self) -> &Vector {
        &self.mu
    }

    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    pub fn observations(&self) -> usize {
        self.observations
    }
}

/// Percent daily returns of every aligned asset.
///
/// With T price rows the panel has T − 1 periods:
/// `entry(t, i) = (price(t+1, i) − price(t, i)) / price(t, i) × 100`.
pub fn daily_returns(
    prices: &AlignedPrices,
    source: PriceField,
) -> Result<ReturnsPanel, ReturnsError> {
    let n = prices.n_assets();
    let t_prices = prices.n_dates();
    let price_at = |t: usize, i: usize| -> Result<f64, ReturnsError> {
        match source {
            PriceField::Close => Ok(prices.close(t, i)),
            PriceField::Adjusted => {
                prices
                    .adj_close(t, i)
                    .ok_or_else(|| ReturnsError::AdjustedUnavailable {
                        asset_id: prices.asset_ids()[i].clone(),
                        date: prices.dates()[t],
                    })
            }
        }
    };

    let mut returns = Vec::with_capacity((t_prices - 1) * n);
    for t in 0..t_prices - 1 {
        for i in 0..n {
            let prev = price_at(t, i)?;
            let next = price_at(t + 1, i)?;
            returns.push((next - prev) / prev * 100.0);
        }
    }
    ReturnsPanel::new(prices.asset_ids().to_vec(), returns, t_prices - 1)
}

/// Per-asset arithmetic mean return, percent/day.
pub fn mean_vector(panel: &ReturnsPanel) -> Vector {
    let t = panel.n_periods() as f64;
    Vector::new(
        (0..panel.n_assets())
            .map(|i| {
                (0..panel.n_periods())
                    .map(|p| panel.entry(p, i))
                    .sum::<f64>()
                    / t
            })
            .collect(),
    )
}

/// Two-pass covariance of the panel columns.
///
/// `entry(i, j) = Σ_t (r_ti − mean_i)(r_tj − mean_j) / divisor` with divisor
/// T − 1 (sample) or T (population).
pub fn covariance_matrix(
    panel: &ReturnsPanel,
    divisor: Divisor,
) -> Result<SymMatrix, ReturnsError> {
    let t = panel.n_periods();
    if t < 2 {
        return Err(ReturnsError::InsufficientData { observations: t });
    }
    let means = mean_vector(panel);
    let denom = match divisor {
        Divisor::Sample => (t - 1) as f64,
        Divisor::Population => t as f64,
    };
    Ok(SymMatrix::from_fn(panel.n_assets(), |i, j| {
        (0..t)
            .map(|p| (panel.entry(p, i) - means[i]) * (panel.entry(p, j) - means[j]))
            .sum::<f64>()
            / denom
    }))
}

/// Prices → returns → moments in one step. `observations` on the result is
/// the number of return periods (price rows − 1).
pub fn build_model(
    prices: &AlignedPrices,
    source: PriceField,
    divisor: Divisor,
) -> Result<MarketModel, ReturnsError> {
    let panel = daily_returns(prices, source)?;
    let mu = mean_vector(&panel);
    let sigma = covariance_matrix(&panel, divisor)?;
    MarketModel::new(panel.asset_ids().to_vec(), mu, sigma, panel.n_periods())
}
