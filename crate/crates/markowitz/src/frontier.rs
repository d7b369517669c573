//! Closed-form mean-variance portfolio construction: frontier scalars, the
//! minimum-variance, tangency, and risk-aversion-optimal portfolios, and the
//! efficient-frontier curve in both quadratic and hyperbola form.
//!
//! All formulas solve the equality-constrained problem only — allocations sum
//! to the capital, target means are hit exactly, and short positions
//! (negative entries) are permitted. The risk-free rate is zero throughout.
//!
//! # Units
//!
//! `theta` is in currency units (how much money each asset receives) while
//! mean returns are percent/day, so a portfolio's `mean` is in
//! currency·percent units and `std` matches it. No conversion is applied.

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::linalg::{self, LinalgError, Vector};
use crate::returns::MarketModel;

/// Scale-relative degeneracy threshold: the frontier quadratic needs
/// `d > DEGENERACY_REL_TOL · a · c`.
pub const DEGENERACY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontierError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    /// `d ≈ 0`: the mean vector is (numerically) proportional to the ones
    /// vector, so every frontier portfolio shares one mean and the frontier
    /// collapses to a point.
    #[error("degenerate frontier: d = {d:e} is not above {threshold:e}; all frontier portfolios share one mean")]
    DegenerateFrontier { d: f64, threshold: f64 },
    /// `b ≤ 0`: the tangency formula places the portfolio on the inefficient
    /// branch, which signals economically degenerate inputs.
    #[error("tangency portfolio undefined: b = {b} is not positive")]
    NonpositiveB { b: f64 },
    #[error("bad sampling range: {reason}")]
    BadRange { reason: String },
    #[error("capital must be positive and finite, got {value}")]
    InvalidCapital { value: f64 },
    #[error("risk aversion must be positive and finite, got {value}")]
    InvalidRiskAversion { value: f64 },
}

impl FrontierError {
    pub fn name(&self) -> &'static str {
        match self {
            FrontierError::Linalg(e) => e.name(),
            FrontierError::DegenerateFrontier { .. } => "DegenerateFrontier",
            FrontierError::NonpositiveB { .. } => "NonpositiveB",
            FrontierError::BadRange { .. } => "BadRange",
            FrontierError::InvalidCapital { .. } => "InvalidCapital",
            FrontierError::InvalidRiskAversion { .. } => "InvalidRiskAversion",
        }
    }
}

/// The four scalars that fully parameterize the frontier:
/// `a = μᵀΣ⁻¹μ`, `b = μᵀΣ⁻¹1̄`, `c = 1̄ᵀΣ⁻¹1̄`, `d = a·c − b²`.
///
/// With Σ positive definite, `c > 0`, `a > 0` unless μ = 0, and `d ≥ 0` with
/// equality exactly when μ is proportional to 1̄ (Cauchy–Schwarz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierScalars {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl FrontierScalars {
    /// Scale-relative threshold below which `d` counts as zero.
    pub fn degeneracy_threshold(&self) -> f64 {
        DEGENERACY_REL_TOL * self.a * self.c
    }

    fn ensure_nondegenerate(&self) -> Result<(), FrontierError> {
        let threshold = self.degeneracy_threshold();
        if self.d > threshold {
            Ok(())
        } else {
            Err(FrontierError::DegenerateFrontier {
                d: self.d,
                threshold,
            })
        }
    }
}

/// Initial capital `C₀`, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capital {
    c0: f64,
}

impl Capital {
    pub fn new(c0: f64) -> Result<Self, FrontierError> {
        if c0.is_finite() && c0 > 0.0 {
            Ok(Capital { c0 })
        } else {
            Err(FrontierError::InvalidCapital { value: c0 })
        }
    }

    pub fn amount(&self) -> f64 {
        self.c0
    }
}

/// Risk-aversion parameter `γ`, strictly positive. Larger values pull the
/// optimal portfolio toward the minimum-variance vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskAversion {
    gamma: f64,
}

impl RiskAversion {
    pub fn new(gamma: f64) -> Result<Self, FrontierError> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(RiskAversion { gamma })
        } else {
            Err(FrontierError::InvalidRiskAversion { value: gamma })
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Which construction produced a [`Portfolio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortfolioKind {
    /// Frontier portfolio at a chosen target mean. Target means below the
    /// vertex are allowed and give the lower (inefficient) branch.
    EfficientPoint,
    /// The frontier vertex — lowest variance of any budget-feasible
    /// allocation. Depends only on Σ, not on μ.
    MinVariance,
    /// The maximum-Sharpe-ratio portfolio (zero risk-free rate).
    Tangency,
    /// Maximizer of mean-variance utility at a given risk aversion.
    Optimal,
}

impl PortfolioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PortfolioKind::EfficientPoint => "efficient-point",
            PortfolioKind::MinVariance => "min-variance",
            PortfolioKind::Tangency => "tangency",
            PortfolioKind::Optimal => "optimal",
        }
    }
}

impl std::fmt::Display for PortfolioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A concrete allocation: currency per asset, with its expected return and
/// standard deviation (see the module notes on units).
///
/// Every portfolio satisfies the budget constraint `sum(theta) = C₀` to
/// within 1e-9 relative.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    pub theta: Vector,
    pub mean: f64,
    pub std: f64,
    pub kind: PortfolioKind,
}

impl Portfolio {
    pub fn variance(&self) -> f64 {
        self.std * self.std
    }
}

/// The two SPD solves every closed form is assembled from, done once.
struct SolvedModel {
    /// Σ⁻¹μ
    sigma_inv_mu: Vector,
    /// Σ⁻¹1̄
    sigma_inv_ones: Vector,
    scalars: FrontierScalars,
}

fn solve_model(model: &MarketModel) -> Result<SolvedModel, FrontierError> {
    let factor = linalg::cholesky(model.sigma())?;
    let sigma_inv_mu = linalg::solve_spd(&factor, model.mu())?;
    let ones = Vector::ones(model.n_assets());
    let sigma_inv_ones = linalg::solve_spd(&factor, &ones)?;
    let a = linalg::dot(model.mu(), &sigma_inv_mu)?;
    let b = linalg::dot(model.mu(), &sigma_inv_ones)?;
    let c = linalg::dot(&ones, &sigma_inv_ones)?;
    Ok(SolvedModel {
        sigma_inv_mu,
        sigma_inv_ones,
        scalars: FrontierScalars {
            a,
            b,
            c,
            d: a * c - b * b,
        },
    })
}

/// Frontier variance in completed-square form, `C₀²/c + (c/d)(μ_p − bC₀/c)²`.
///
/// Algebraically identical to `(c·μ_p² − 2b·C₀·μ_p + a·C₀²)/d`, but exact at
/// the vertex: evaluated at `μ_p = bC₀/c` the square term vanishes instead of
/// cancelling catastrophically.
fn variance_at_unchecked(s: &FrontierScalars, c0: f64, target_mean: f64) -> f64 {
    let vertex_variance = c0 * c0 / s.c;
    let deviation = target_mean - s.b * c0 / s.c;
    vertex_variance + (s.c / s.d) * deviation * deviation
}

impl SolvedModel {
    /// Frontier portfolio at one target mean. Infallible: callers check
    /// degeneracy once, not per point — this keeps parallel and sequential
    /// sampling on one shared code path with bit-identical results.
    fn point_at(&self, c0: f64, target_mean: f64, kind: PortfolioKind) -> Portfolio {
        let s = &self.scalars;
        let theta = Vector::new(
            self.sigma_inv_ones
                .iter()
                .zip(self.sigma_inv_mu.iter())
                .map(|(&y, &x)| {
                    let intercept = (s.a * y - s.b * x) * c0 / s.d;
                    let slope = (s.c * x - s.b * y) / s.d;
                    intercept + target_mean * slope
                })
                .collect(),
        );
        Portfolio {
            theta,
            mean: target_mean,
            std: variance_at_unchecked(s, c0, target_mean).sqrt(),
            kind,
        }
    }
}

/// The scalars `a`, `b`, `c`, `d` of a model, via two SPD solves and three
/// dot products. No matrix inverse is formed.
pub fn frontier_scalars(model: &MarketModel) -> Result<FrontierScalars, FrontierError> {
    Ok(solve_model(model)?.scalars)
}

/// The frontier vertex: `theta = Σ⁻¹1̄·C₀/c`, `mean = b·C₀/c`,
/// `std = C₀/√c`. The allocation depends only on Σ.
pub fn min_variance_portfolio(
    model: &MarketModel,
    cap: Capital,
) -> Result<Portfolio, FrontierError> {
    let solved = solve_model(model)?;
    let s = &solved.scalars;
    let c0 = cap.amount();
    Ok(Portfolio {
        theta: solved.sigma_inv_ones.scaled(c0 / s.c),
        mean: s.b * c0 / s.c,
        std: c0 / s.c.sqrt(),
        kind: PortfolioKind::MinVariance,
    })
}

/// The maximum-Sharpe portfolio: `theta = Σ⁻¹μ·C₀/b`, `mean = a·C₀/b`,
/// `std = √a·C₀/b`. Requires `b > 0`.
pub fn tangency_portfolio(model: &MarketModel, cap: Capital) -> Result<Portfolio, FrontierError> {
    let solved = solve_model(model)?;
    let s = &solved.scalars;
    // Negated form rather than `s.b <= 0.0`: a NaN scalar must also be
    // rejected.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(s.b > 0.0) {
        return Err(FrontierError::NonpositiveB { b: s.b });
    }
    let c0 = cap.amount();
    Ok(Portfolio {
        theta: solved.sigma_inv_mu.scaled(c0 / s.b),
        mean: s.a * c0 / s.b,
        std: s.a.sqrt() * c0 / s.b,
        kind: PortfolioKind::Tangency,
    })
}

/// The variance-minimizing allocation for one target mean:
/// `theta = (a·Σ⁻¹1̄ − b·Σ⁻¹μ)·C₀/d + target·(c·Σ⁻¹μ − b·Σ⁻¹1̄)/d`.
///
/// Target means below the vertex mean are accepted and land on the lower
/// (inefficient) branch of the hyperbola; the result is still the lowest
/// variance attainable at exactly that mean.
pub fn efficient_frontier_allocation(
    model: &MarketModel,
    cap: Capital,
    target_mean: f64,
) -> Result<Portfolio, FrontierError> {
    let solved = solve_model(model)?;
    solved.scalars.ensure_nondegenerate()?;
    Ok(solved.point_at(cap.amount(), target_mean, PortfolioKind::EfficientPoint))
}

/// Variance of the frontier portfolio with the given target mean —
/// the quadratic `(c·μ_p² − 2b·C₀·μ_p + a·C₀²)/d` evaluated in
/// completed-square form so the vertex value is exact.
pub fn frontier_variance(
    s: &FrontierScalars,
    cap: Capital,
    target_mean: f64,
) -> Result<f64, FrontierError> {
    s.ensure_nondegenerate()?;
    Ok(variance_at_unchecked(s, cap.amount(), target_mean))
}

/// The frontier quadratic rearranged as a hyperbola in (mean, std) space:
/// `σ_p²/variance_scale − (μ_p − mean_center)²/mean_scale_sq = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolaParams {
    /// `C₀²/c` — the squared std of the vertex.
    pub variance_scale: f64,
    /// `b·C₀/c` — the vertex mean.
    pub mean_center: f64,
    /// `d·C₀²/c²`.
    pub mean_scale_sq: f64,
}

pub fn hyperbola_params(
    s: &FrontierScalars,
    cap: Capital,
) -> Result<HyperbolaParams, FrontierError> {
    s.ensure_nondegenerate()?;
    let c0 = cap.amount();
    Ok(HyperbolaParams {
        variance_scale: c0 * c0 / s.c,
        mean_center: s.b * c0 / s.c,
        mean_scale_sq: s.d * c0 * c0 / (s.c * s.c),
    })
}

/// The mean-variance-utility maximizer at risk aversion γ, as an affine blend
/// of tangency and minimum-variance:
/// `theta = (b/(C₀γ))·θ_tg + (1 − b/(γC₀))·θ_mv`,
/// `mean = d/(cγ) + μ_mv`, `std² = d/(cγ²) + σ_mv²`.
pub fn optimal_portfolio(
    model: &MarketModel,
    cap: Capital,
    risk: RiskAversion,
) -> Result<Portfolio, FrontierError> {
    let tangency = tangency_portfolio(model, cap)?;
    let min_var = min_variance_portfolio(model, cap)?;
    let s = frontier_scalars(model)?;
    let c0 = cap.amount();
    let gamma = risk.gamma();
    let tangency_weight = s.b / (c0 * gamma);
    let theta = Vector::new(
        tangency
            .theta
            .iter()
            .zip(min_var.theta.iter())
            .map(|(&tg, &mv)| tangency_weight * tg + (1.0 - tangency_weight) * mv)
            .collect(),
    );
    let variance = s.d / (s.c * gamma * gamma) + min_var.std * min_var.std;
    Ok(Portfolio {
        theta,
        mean: s.d / (s.c * gamma) + min_var.mean,
        std: variance.sqrt(),
        kind: PortfolioKind::Optimal,
    })
}

fn prepare_sample(
    model: &MarketModel,
    mean_lo: f64,
    mean_hi: f64,
    points: usize,
) -> Result<SolvedModel, FrontierError> {
    if points < 2 {
        return Err(FrontierError::BadRange {
            reason: format!("at least 2 points are needed, got {points}"),
        });
    }
    if !(mean_lo.is_finite() && mean_hi.is_finite() && mean_lo < mean_hi) {
        return Err(FrontierError::BadRange {
            reason: format!("need finite mean_lo < mean_hi, got [{mean_lo}, {mean_hi}]"),
        });
    }
    let solved = solve_model(model)?;
    solved.scalars.ensure_nondegenerate()?;
    Ok(solved)
}

/// `k`-th of `points` equally spaced targets; both endpoints are hit exactly
/// rather than reconstructed through rounding.
fn sample_target(mean_lo: f64, mean_hi: f64, points: usize, k: usize) -> f64 {
    if k == 0 {
        mean_lo
    } else if k == points - 1 {
        mean_hi
    } else {
        mean_lo + (mean_hi - mean_lo) * (k as f64) / ((points - 1) as f64)
    }
}

/// `points` frontier portfolios at equally spaced target means from
/// `mean_lo` to `mean_hi` inclusive, ordered by mean.
///
/// With the `parallel` feature (on by default) the points are computed on a
/// rayon thread pool; every point is a pure function of the one shared solve,
/// so the output is deterministic, ordering-stable, and bit-identical to
/// [`frontier_sample_seq`].
pub fn frontier_sample(
    model: &MarketModel,
    cap: Capital,
    mean_lo: f64,
    mean_hi: f64,
    points: usize,
) -> Result<Vec<Portfolio>, FrontierError> {
    let solved = prepare_sample(model, mean_lo, mean_hi, points)?;
    let c0 = cap.amount();

    #[cfg(feature = "parallel")]
    let portfolios = (0..points)
        .into_par_iter()
        .map(|k| {
            solved.point_at(
                c0,
                sample_target(mean_lo, mean_hi, points, k),
                PortfolioKind::EfficientPoint,
            )
        })
        .collect();

    #[cfg(not(feature = "parallel"))]
    let portfolios = (0..points)
        .map(|k| {
            solved.point_at(
                c0,
                sample_target(mean_lo, mean_hi, points, k),
                PortfolioKind::EfficientPoint,
            )
        })
        .collect();

    Ok(portfolios)
}

/// Sequential twin of [`frontier_sample`]: same contract, same results,
/// single-threaded regardless of enabled features.
pub fn frontier_sample_seq(
    model: &MarketModel,
    cap: Capital,
    mean_lo: f64,
    mean_hi: f64,
    points: usize,
) -> Result<Vec<Portfolio>, FrontierError> {
    let solved = prepare_sample(model, mean_lo, mean_hi, points)?;
    let c0 = cap.amount();
    Ok((0..points)
        .map(|k| {
            solved.point_at(
                c0,
                sample_target(mean_lo, mean_hi, points, k),
                PortfolioKind::EfficientPoint,
            )
        })
        .collect())
}
