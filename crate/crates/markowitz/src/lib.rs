//! Mean-variance portfolio analysis from historical prices.
//!
//! The pipeline has three stages, each usable on its own:
//!
//! 1. **Ingestion** ([`market_data`]): parse per-asset price CSVs
//!    (Yahoo-Finance export layout) and align them onto their common trading
//!    dates. Strict intersection — no forward-filling, no fabricated prices.
//! 2. **Estimation** ([`returns`]): percent daily returns via
//!    `(price_next − price_prev) / price_prev × 100`, then the mean vector
//!    and covariance matrix of those returns, packaged as a [`MarketModel`].
//! 3. **Portfolio construction** ([`frontier`]): closed-form solutions of the
//!    equality-constrained mean-variance problem — minimum-variance,
//!    tangency, risk-aversion-optimal, arbitrary frontier points, and the
//!    frontier curve itself in quadratic and hyperbola form. Everything is
//!    built from Cholesky solves; no matrix is ever inverted explicitly.
//!
//! Models can be saved and loaded as JSON ([`model`]) with explicit units and
//! lossless floats, so estimation and portfolio construction can run in
//! separate processes without drift.
//!
//! # Units
//!
//! Mean returns are percent/day and covariances percent²/day, while
//! allocations are currency amounts summing to the capital `C₀`. A
//! portfolio's `mean` is therefore in currency·percent units — e.g. capital
//! 100 with a portfolio mean of 5.09 says the expected daily gain is 5.09%
//! of one currency unit. The library performs no unit conversion and the
//! model file format records the units explicitly.
//!
//! # Short positions
//!
//! The closed forms solve the equality-constrained problem only: allocations
//! may contain negative (short) entries, and no long-only variant is
//! provided.
//!
//! # Concurrency
//!
//! All computations are pure functions over immutable inputs and safe to
//! call concurrently. With the `parallel` feature (default) frontier
//! sampling distributes points over a rayon thread pool; results are
//! bit-identical to the sequential fallback either way.
//!
//! # Example
//!
//! ```
//! use markowitz::{
//!     linalg::{SymMatrix, Vector},
//!     Capital, MarketModel, RiskAversion,
//! };
//!
//! let model = MarketModel::new(
//!     vec!["A".into(), "B".into(), "C".into()],
//!     Vector::new(vec![1.0, 2.0, 3.0]),
//!     SymMatrix::identity(3),
//!     250,
//! )?;
//! let cap = Capital::new(1.0)?;
//!
//! let mv = markowitz::min_variance_portfolio(&model, cap)?;
//! assert!((mv.std - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);
//!
//! let opt = markowitz::optimal_portfolio(&model, cap, RiskAversion::new(3.0)?)?;
//! assert!((opt.theta.as_slice()[2] - 2.0 / 3.0).abs() < 1e-12);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod frontier;
pub mod linalg;
pub mod market_data;
pub mod model;
pub mod returns;

pub use frontier::{
    efficient_frontier_allocation, frontier_sample, frontier_sample_seq, frontier_scalars,
    frontier_variance, hyperbola_params, min_variance_portfolio, optimal_portfolio,
    tangency_portfolio, Capital, FrontierError, FrontierScalars, HyperbolaParams, Portfolio,
    PortfolioKind, RiskAversion,
};
pub use market_data::{align, parse_price_csv, AlignedPrices, MarketDataError, PriceSeries};
pub use model::{ModelFile, ModelFileError, ModelUnits, MU_UNITS, SIGMA_UNITS};
pub use returns::{
    build_model, covariance_matrix, daily_returns, mean_vector, Divisor, MarketModel, PriceField,
    ReturnsError, ReturnsPanel,
};
