//! Command-line front end.
//!
//! Exit codes: 0 success or consistent, 1 inconsistent, 2 input error,
//! 3 degenerate parameters, 4 indeterminate.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::consistency::{
    check_consistency, model_state_samples, ConsistencyProblem, ConsistencyReport,
    DEFAULT_TOLERANCE,
};
use crate::curves::{
    default_lambda_grid, fit_ns, tau_grid, BasisFunction, CurveInBasis, FactorBasis,
    NelsonSiegelParams, DEFAULT_TAU_POINTS,
};
use crate::error::{Error, Result};
use crate::io::{read_samples, to_json_string, write_ensemble, write_pairs};
use crate::models::{HoLeeModel, HullWhiteModel, ModelFile, ModelKind, ShortRateModel};
use crate::simulation::{mc_bond_price, simulate_ensemble, TimeGrid, DEFAULT_STEPS_PER_YEAR};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;

/// Extended Nelson-Siegel forward curves under Ho-Lee and Hull-White.
///
/// Times are in years; rates are continuously compounded decimals.
#[derive(Debug, Parser)]
#[command(name = "nsm", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a Nelson-Siegel curve to `tau_years,rate` forward samples.
    Fit(FitArgs),
    /// Build a model file from a Nelson-Siegel curve and model parameters.
    Calibrate(CalibrateArgs),
    /// Forward curve of a model at time t, as basis coefficients and a grid.
    Evolve(EvolveArgs),
    /// Simulate short-rate paths.
    Simulate(SimulateArgs),
    /// Monte Carlo zero-coupon bond price against the affine formula.
    Price(PriceArgs),
    /// Check a model against a forward curve basis.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Longest maturity on the output grid.
    #[arg(long, env = "NSM_DEFAULT_TAU_MAX", default_value_t = 30.0)]
    pub tau_max: f64,
    /// Number of maturity points.
    #[arg(long, default_value_t = DEFAULT_TAU_POINTS)]
    pub tau_points: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        if !(self.tau_max.is_finite() && self.tau_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "--tau-max must be > 0, got {}",
                self.tau_max
            )));
        }
        if self.tau_points < 2 {
            return Err(Error::InvalidParameter("--tau-points must be >= 2".into()));
        }
        Ok(tau_grid(self.tau_max, self.tau_points))
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with header `tau_years,rate`.
    #[arg(long)]
    pub samples: PathBuf,
    /// Shape grid as `start:stop:step` (default 0.1:3.0:0.1).
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Nelson-Siegel parameter JSON (as written by `fit`).
    #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
    pub curve: Option<PathBuf>,
    /// Fit the initial curve from forward samples instead.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub sigma: f64,
    /// Mean reversion (Hull-White only).
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write `t_years,theta` on the maturity grid.
    #[arg(long)]
    pub theta_out: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    HoLee,
    HullWhite,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub t: f64,
    /// Short rate at t; defaults to its mean under Q.
    #[arg(long = "r-t", allow_hyphen_values = true)]
    pub r_t: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Curve JSON destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `tau_years,forward_rate` CSV destination.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub horizon: f64,
    #[arg(long)]
    pub paths: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_STEPS_PER_YEAR)]
    pub steps_per_year: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Bond maturity.
    #[arg(long)]
    pub horizon: f64,
    #[arg(long)]
    pub paths: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_STEPS_PER_YEAR)]
    pub steps_per_year: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BasisArg {
    /// The model's own extended basis.
    Model,
    /// `{1, e^{-λτ}, τe^{-λτ}}`.
    Ns,
    /// `{τ, 1, e^{-λτ}, τe^{-λτ}}`.
    HoLee,
    /// `{e^{-aτ}, e^{-2aτ}, 1, e^{-λτ}, τe^{-λτ}}`.
    HullWhite,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = BasisArg::Model)]
    pub basis: BasisArg,
    /// Decay rate of the basis (defaults to the model's λ).
    #[arg(long)]
    pub basis_lambda: Option<f64>,
    /// `a` of a Hull-White basis (defaults to the model's `a`).
    #[arg(long)]
    pub basis_a: Option<f64>,
    /// JSON array of basis functions; overrides `--basis`.
    #[arg(long)]
    pub basis_file: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Maps a library error to the process exit code.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Degenerate(_) => EXIT_DEGENERATE,
        _ => EXIT_INPUT,
    }
}

/// Runs a parsed command and returns its exit code.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Calibrate(a) => cmd_calibrate(&a),
        Command::Evolve(a) => cmd_evolve(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Price(a) => cmd_price(&a),
        Command::Check(a) => cmd_check(&a),
    }
}

/// Parses `start:stop:step` into `start, start+step, …` up to `stop`.
pub fn parse_lambda_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("lambda grid `{text}` is not start:stop:step"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(start > 0.0 && stop >= start && step > 0.0 && stop.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda grid `{text}` needs 0 < start <= stop and step > 0"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn open_samples(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_samples(File::open(path)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn load_model(path: &Path) -> Result<ShortRateModel> {
    read_json::<ModelFile>(path)?.build()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn lambda_grid(text: Option<&str>) -> Result<Vec<f64>> {
    text.map_or_else(|| Ok(default_lambda_grid()), parse_lambda_grid)
}

#[derive(Serialize)]
struct FitOutput {
    #[serde(flatten)]
    params: NelsonSiegelParams,
    residual: f64,
}

pub fn cmd_fit(args: &FitArgs) -> Result<u8> {
    let samples = open_samples(&args.samples)?;
    let fit = fit_ns(&samples, &lambda_grid(args.lambda_grid.as_deref())?)?;
    emit(
        args.out.as_deref(),
        &to_json_string(&FitOutput {
            params: fit.params,
            residual: fit.residual,
        })?,
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<u8> {
    let curve: NelsonSiegelParams = match (&args.curve, &args.samples) {
        (Some(p), _) => read_json(p)?,
        (None, Some(p)) => {
            fit_ns(
                &open_samples(p)?,
                &lambda_grid(args.lambda_grid.as_deref())?,
            )?
            .params
        }
        (None, None) => {
            return Err(Error::InvalidParameter(
                "either --curve or --samples is required".into(),
            ))
        }
    };
    let model: ShortRateModel = match (args.kind, args.a) {
        (KindArg::HoLee, None) => HoLeeModel::new(args.sigma, curve)?.into(),
        (KindArg::HoLee, Some(_)) => {
            return Err(Error::InvalidParameter(
                "--a only applies to hull-white".into(),
            ))
        }
        (KindArg::HullWhite, Some(a)) => HullWhiteModel::new(a, args.sigma, curve)?.into(),
        (KindArg::HullWhite, None) => {
            return Err(Error::InvalidParameter("hull-white requires --a".into()))
        }
    };
    emit(
        args.out.as_deref(),
        &to_json_string(&ModelFile::from(&model))?,
    )?;
    if let Some(path) = &args.theta_out {
        let rows = args
            .grid
            .grid()?
            .into_iter()
            .map(|t| Ok((t, model.theta(t)?)))
            .collect::<Result<Vec<_>>>()?;
        write_pairs(
            BufWriter::new(File::create(path)?),
            ["t_years", "theta"],
            rows,
        )?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct EvolveOutput {
    model: ModelKind,
    t_years: f64,
    r_t: f64,
    #[serde(flatten)]
    curve: CurveInBasis,
}

pub fn cmd_evolve(args: &EvolveArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    let r_t = match args.r_t {
        Some(r) => r,
        None => model.short_rate_moments(args.t)?.mean,
    };
    let curve = model.forward_curve(args.t, r_t)?;
    if let Some(path) = &args.grid_out {
        let rows = args
            .grid
            .grid()?
            .into_iter()
            .map(|tau| Ok((tau, curve.eval(tau)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut w = BufWriter::new(File::create(path)?);
        write_pairs(&mut w, ["tau_years", "forward_rate"], rows)?;
        w.flush()?;
    }
    emit(
        args.out.as_deref(),
        &to_json_string(&EvolveOutput {
            model: model.kind(),
            t_years: args.t,
            r_t,
            curve,
        })?,
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    let grid = TimeGrid::uniform(args.horizon, args.steps_per_year)?;
    if args.paths == 0 {
        return Err(Error::InvalidParameter("--paths must be > 0".into()));
    }
    let paths = simulate_ensemble(&model, &grid, args.seed, args.paths);
    let mut w = BufWriter::new(File::create(&args.out)?);
    write_ensemble(&mut w, &paths)?;
    w.flush()?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PriceOutput {
    estimate: f64,
    std_error: f64,
    n_paths: usize,
    seed: u64,
    maturity: f64,
    steps_per_year: usize,
    affine_price: f64,
}

pub fn cmd_price(args: &PriceArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    let mc = mc_bond_price(
        &model,
        args.horizon,
        args.paths,
        args.steps_per_year,
        args.seed,
    )?;
    let affine_price = model.bond_price(0.0, args.horizon, model.r0())?;
    emit(
        args.out.as_deref(),
        &to_json_string(&PriceOutput {
            estimate: mc.estimate,
            std_error: mc.std_error,
            n_paths: mc.n_paths,
            seed: mc.seed,
            maturity: args.horizon,
            steps_per_year: args.steps_per_year,
            affine_price,
        })?,
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    model: ModelKind,
    #[serde(flatten)]
    report: &'a ConsistencyReport,
}

fn check_basis(args: &CheckArgs, model: &ShortRateModel) -> Result<FactorBasis> {
    if let Some(path) = &args.basis_file {
        let functions: Vec<BasisFunction> = read_json(path)?;
        return FactorBasis::new(functions);
    }
    let lambda = args.basis_lambda.unwrap_or(model.initial_curve().lambda);
    let model_a = match model {
        ShortRateModel::HullWhite(m) => Some(m.a()),
        ShortRateModel::HoLee(_) => None,
    };
    match args.basis {
        BasisArg::Model => match model {
            ShortRateModel::HoLee(_) => FactorBasis::ho_lee(lambda),
            ShortRateModel::HullWhite(m) => FactorBasis::hull_white(m.a(), lambda),
        },
        BasisArg::Ns => FactorBasis::nelson_siegel(lambda),
        BasisArg::HoLee => FactorBasis::ho_lee(lambda),
        BasisArg::HullWhite => {
            let a = args.basis_a.or(model_a).ok_or_else(|| {
                Error::InvalidParameter("a hull-white basis needs --basis-a".into())
            })?;
            FactorBasis::hull_white(a, lambda)
        }
    }
}

/// Tests the model's drift and volatility against the chosen basis, using
/// the model's own forward curves at t ∈ {0, 1, 5} as the state samples.
pub fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    let basis = check_basis(args, &model)?;
    let problem = ConsistencyProblem::for_model(&model, basis)?
        .with_state_basis(model.basis())
        .with_tau_grid(args.grid.grid()?)?;
    let z = model_state_samples(&model, problem.t_samples())?;
    let report = check_consistency(&problem, &z, args.tolerance)?;
    emit(
        args.out.as_deref(),
        &to_json_string(&CheckOutput {
            model: model.kind(),
            report: &report,
        })?,
    )?;
    Ok(report.verdict.exit_code())
}
