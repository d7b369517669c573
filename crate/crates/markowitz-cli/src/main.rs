//! `markowitz` — estimate market models from price CSVs and compute
//! closed-form mean-variance portfolios.
//!
//! Three subcommands form a pipeline connected by files:
//!
//! * `stats`: price CSVs → model JSON (mean vector, covariance matrix).
//! * `solve`: model JSON → one portfolio (min-variance, tangency, optimal
//!   at a risk aversion, or at a target mean).
//! * `frontier`: model JSON → CSV sweep of the efficient frontier.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or invalid
//! input files), 3 numerical error (covariance not positive definite,
//! degenerate frontier, nonpositive b).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use markowitz::{
    efficient_frontier_allocation, min_variance_portfolio, optimal_portfolio, tangency_portfolio,
    Capital, Divisor, FrontierError, MarketDataError, MarketModel, ModelFile, ModelFileError,
    Portfolio, PriceField, ReturnsError, RiskAversion,
};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "markowitz",
    version,
    about = "Mean-variance portfolio analysis from historical prices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a market model (means and covariances of percent daily
    /// returns) from per-asset price CSV files
    Stats(StatsArgs),
    /// Compute one closed-form portfolio from a model file
    Solve(SolveArgs),
    /// Sample the efficient frontier into CSV
    Frontier(FrontierArgs),
}

#[derive(Args)]
struct StatsArgs {
    /// Price CSV files, one per asset (Date/Close[/Adj Close] columns)
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Comma-separated asset ids matching the file order (default: file stems)
    #[arg(long)]
    ids: Option<String>,
    /// Which price column feeds the return calculation
    #[arg(long, value_enum, default_value_t = SourceArg::Close)]
    source: SourceArg,
    /// Covariance normalization: sample (T-1) or population (T)
    #[arg(long, value_enum, default_value_t = DivisorArg::Sample)]
    divisor: DivisorArg,
    /// Write the model JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("objective").required(true))]
struct SolveArgs {
    /// Model JSON file, as produced by `stats`
    model: PathBuf,
    /// Initial capital C0
    #[arg(long, default_value_t = 100.0)]
    capital: f64,
    /// The minimum-variance portfolio
    #[arg(long, group = "objective")]
    min_variance: bool,
    /// The tangency (maximum Sharpe ratio) portfolio
    #[arg(long, group = "objective")]
    tangency: bool,
    /// The mean-variance-optimal portfolio at risk aversion GAMMA
    #[arg(long, value_name = "GAMMA", group = "objective")]
    gamma: Option<f64>,
    /// The frontier portfolio with expected return MEAN
    #[arg(long, value_name = "MEAN", group = "objective")]
    target_mean: Option<f64>,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Args)]
struct FrontierArgs {
    /// Model JSON file, as produced by `stats`
    model: PathBuf,
    /// Initial capital C0
    #[arg(long, default_value_t = 100.0)]
    capital: f64,
    /// Lowest target mean of the sweep
    #[arg(long)]
    from: f64,
    /// Highest target mean of the sweep
    #[arg(long)]
    to: f64,
    /// Number of equally spaced points (at least 2)
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceArg {
    Close,
    Adjusted,
}

impl From<SourceArg> for PriceField {
    fn from(arg: SourceArg) -> Self {
        match arg {
            SourceArg::Close => PriceField::Close,
            SourceArg::Adjusted => PriceField::Adjusted,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DivisorArg {
    Sample,
    Population,
}

impl From<DivisorArg> for Divisor {
    fn from(arg: DivisorArg) -> Self {
        match arg {
            DivisorArg::Sample => Divisor::Sample,
            DivisorArg::Population => Divisor::Population,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

/// A failure with its exit code, the stable error name, and a message.
/// Printed to stderr as `error (<name>): <message>`.
#[derive(Debug)]
struct AppError {
    code: u8,
    name: String,
    message: String,
}

impl AppError {
    fn new(code: u8, name: impl Into<String>, message: impl Into<String>) -> Self {
        AppError {
            code,
            name: name.into(),
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        AppError::new(EXIT_USAGE, "Usage", message)
    }

    /// Prefixes the message with the file it concerns.
    fn for_file(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl From<MarketDataError> for AppError {
    fn from(err: MarketDataError) -> Self {
        AppError::new(EXIT_DATA, err.name(), err.to_string())
    }
}

impl From<ReturnsError> for AppError {
    fn from(err: ReturnsError) -> Self {
        AppError::new(EXIT_DATA, err.name(), err.to_string())
    }
}

impl From<ModelFileError> for AppError {
    fn from(err: ModelFileError) -> Self {
        AppError::new(EXIT_DATA, err.name(), err.to_string())
    }
}

impl From<FrontierError> for AppError {
    fn from(err: FrontierError) -> Self {
        let code = match &err {
            FrontierError::BadRange { .. }
            | FrontierError::InvalidCapital { .. }
            | FrontierError::InvalidRiskAversion { .. } => EXIT_USAGE,
            FrontierError::Linalg(_)
            | FrontierError::DegenerateFrontier { .. }
            | FrontierError::NonpositiveB { .. } => EXIT_NUMERICAL,
        };
        AppError::new(code, err.name(), err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help / --version are successful runs; everything else clap
            // rejects is a usage error.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error ({}): {}", err.name, err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Stats(args) => run_stats(args),
        Command::Solve(args) => run_solve(args),
        Command::Frontier(args) => run_frontier(args),
    }
}

fn run_stats(args: StatsArgs) -> Result<(), AppError> {
    let ids = resolve_ids(&args.files, args.ids.as_deref())?;

    let mut series = Vec::with_capacity(args.files.len());
    for (path, id) in args.files.iter().zip(&ids) {
        let bytes = std::fs::read(path)
            .map_err(|e| AppError::new(EXIT_DATA, "Io", e.to_string()).for_file(path))?;
        let parsed =
            markowitz::parse_price_csv(&bytes, id).map_err(|e| AppError::from(e).for_file(path))?;
        series.push(parsed);
    }

    let aligned = markowitz::align(&series)?;
    let model = markowitz::build_model(&aligned, args.source.into(), args.divisor.into())?;
    eprintln!("observations: {}", model.observations());

    let json = ModelFile::from_model(&model).to_json();
    write_output(args.out.as_deref(), &format!("{json}\n"))
}

fn run_solve(args: SolveArgs) -> Result<(), AppError> {
    let model = load_model(&args.model)?;
    let cap = Capital::new(args.capital)?;

    let portfolio = if args.min_variance {
        min_variance_portfolio(&model, cap)?
    } else if args.tangency {
        tangency_portfolio(&model, cap)?
    } else if let Some(gamma) = args.gamma {
        optimal_portfolio(&model, cap, RiskAversion::new(gamma)?)?
    } else if let Some(target) = args.target_mean {
        if !target.is_finite() {
            return Err(AppError::usage(format!(
                "target mean must be finite, got {target}"
            )));
        }
        efficient_frontier_allocation(&model, cap, target)?
    } else {
        unreachable!("clap requires exactly one objective flag");
    };

    let report = render_portfolio(args.format, model.asset_ids(), &portfolio, cap.amount());
    print!("{report}");
    Ok(())
}

fn run_frontier(args: FrontierArgs) -> Result<(), AppError> {
    let model = load_model(&args.model)?;
    let cap = Capital::new(args.capital)?;
    let rows = markowitz::frontier_sample(&model, cap, args.from, args.to, args.points)?;

    let mut csv = String::new();
    csv.push_str("target_mean,variance,std");
    for id in model.asset_ids() {
        csv.push_str(",theta_");
        csv.push_str(id);
    }
    csv.push('\n');
    for p in &rows {
        push_portfolio_row(&mut csv, p);
    }

    write_output(args.out.as_deref(), &csv)
}

fn push_portfolio_row(csv: &mut String, p: &Portfolio) {
    csv.push_str(&fmt_sig10(p.mean));
    csv.push(',');
    csv.push_str(&fmt_sig10(p.variance()));
    csv.push(',');
    csv.push_str(&fmt_sig10(p.std));
    for &t in p.theta.iter() {
        csv.push(',');
        csv.push_str(&fmt_sig10(t));
    }
    csv.push('\n');
}

fn resolve_ids(files: &[PathBuf], ids: Option<&str>) -> Result<Vec<String>, AppError> {
    match ids {
        Some(list) => {
            let ids: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
            if ids.len() != files.len() {
                return Err(AppError::usage(format!(
                    "--ids lists {} id(s) for {} file(s)",
                    ids.len(),
                    files.len()
                )));
            }
            if ids.iter().any(|id| id.is_empty()) {
                return Err(AppError::usage("--ids contains an empty id"));
            }
            Ok(ids)
        }
        None => files
            .iter()
            .map(|path| {
                path.file_stem()
                    .map(|stem| stem.to_string_lossy().into_owned())
                    .filter(|stem| !stem.is_empty())
                    .ok_or_else(|| {
                        AppError::usage(format!(
                            "cannot derive an asset id from {:?}; pass --ids",
                            path.display()
                        ))
                    })
            })
            .collect(),
    }
}

fn load_model(path: &Path) -> Result<MarketModel, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::new(EXIT_DATA, "Io", e.to_string()).for_file(path))?;
    let file = ModelFile::from_json(&text).map_err(|e| AppError::from(e).for_file(path))?;
    file.to_model()
        .map_err(|e| AppError::from(e).for_file(path))
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| AppError::new(EXIT_DATA, "Io", e.to_string()).for_file(path)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Machine-readable portfolio report; field order is the stable JSON order.
#[derive(Serialize)]
struct PortfolioReport<'a> {
    kind: &'static str,
    capital: f64,
    asset_ids: &'a [String],
    theta: Vec<f64>,
    mean: f64,
    std: f64,
    variance: f64,
}

fn render_portfolio(format: FormatArg, ids: &[String], p: &Portfolio, capital: f64) -> String {
    match format {
        FormatArg::Table => {
            let id_width = ids
                .iter()
                .map(|s| s.len())
                .max()
                .unwrap_or(0)
                .max("asset".len());
            let mut out = String::new();
            out.push_str(&format!("portfolio:  {}\n", p.kind));
            out.push_str(&format!("capital:    {capital:.4}\n\n"));
            out.push_str(&format!("{:<id_width$}  {:>14}\n", "asset", "theta"));
            for (id, &t) in ids.iter().zip(p.theta.iter()) {
                out.push_str(&format!("{id:<id_width$}  {t:>14.4}\n"));
            }
            out.push('\n');
            out.push_str(&format!("mean:       {:.4}\n", p.mean));
            out.push_str(&format!("std:        {:.4}\n", p.std));
            out.push_str(&format!("variance:   {:.4}\n", p.variance()));
            out
        }
        FormatArg::Json => {
            let report = PortfolioReport {
                kind: p.kind.as_str(),
                capital: round_sig10(capital),
                asset_ids: ids,
                theta: p.theta.iter().map(|&t| round_sig10(t)).collect(),
                mean: round_sig10(p.mean),
                std: round_sig10(p.std),
                variance: round_sig10(p.variance()),
            };
            let mut json =
                serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
            json.push('\n');
            json
        }
        FormatArg::Csv => {
            let mut csv = String::from("kind,mean,variance,std");
            for id in ids {
                csv.push_str(",theta_");
                csv.push_str(id);
            }
            csv.push('\n');
            csv.push_str(p.kind.as_str());
            csv.push(',');
            csv.push_str(&fmt_sig10(p.mean));
            csv.push(',');
            csv.push_str(&fmt_sig10(p.variance()));
            csv.push(',');
            csv.push_str(&fmt_sig10(p.std));
            for &t in p.theta.iter() {
                csv.push(',');
                csv.push_str(&fmt_sig10(t));
            }
            csv.push('\n');
            csv
        }
    }
}

/// Formats with 10 significant digits: plain fixed-point notation when the
/// magnitude allows it, scientific otherwise.
fn fmt_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-4..=9).contains(&exponent) {
        let decimals = (9 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.9e}")
    }
}

/// Rounds to 10 significant digits (for JSON reports, where serialization
/// itself is lossless).
fn round_sig10(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("rounded float reparses")
}
