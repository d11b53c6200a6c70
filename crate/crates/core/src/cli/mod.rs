//! Command-line front end.
//!
//! Exit codes: 0 success, 1 numeric or data error, 2 configuration error.

pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::estimation::{self, Frequency, ModelSpec, ShockDist, VolModel, WeekConvention};
use crate::factor::{default_corr_mc, FactorKind, FactorModelSpec, Idiosyncratic};
use crate::gaussian::PConvention;
use crate::rng::derive_seed;
use crate::surface::{build_surface, delta_adjustments, CellStatus, SurfaceConfig};
use crate::tarch::{
    agg_kurtosis, cond_skewness, cond_variance_agg, sigma3_forecast, simulate_paths, stationary_sigma3_ratio,
    uncond_skewness_term, InitialVariance, Innovation, PathConfig, TarchParams,
};
use crate::error::LossBound;
use config::{check_range, require, ConfigError, ConfigFile};

#[derive(Debug, Parser)]
#[command(name = "corrsurf", version, about = "Correlation surfaces, TARCH moments and tranche deltas")]
pub struct Cli {
    /// TOML config with top-level `seed`/`threads` and one table per subcommand
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; every random stream is derived from it
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate TARCH return paths or a price-level series
    Simulate(SimulateArgs),
    /// Fit GARCH/TARCH models to a return or price file
    Fit(FitArgs),
    /// Skewness, kurtosis and variance term structures of aggregated returns
    Moments(MomentsArgs),
    /// Default-correlation curve with percentile bounds
    Defaultcorr(DefaultCorrArgs),
    /// Implied correlation surface on a (K, T) grid
    Surface(SurfaceArgs),
    /// Hazard-rate delta adjustments across detachments
    Deltas(DeltasArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorName {
    Gaussian,
    Tarch,
    TCopula,
    DoubleT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimFormat {
    Paths,
    Levels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreqName {
    Daily,
    Weekly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeekName {
    /// Calendar weeks ending Friday
    Calendar,
    /// Blocks of five trading days
    #[value(name = "5day")]
    #[serde(rename = "5day")]
    FiveDay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Garch,
    Tarch,
    GarchT,
    TarchT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionName {
    /// p = 1 - exp(-h t)
    Continuous,
    /// p = 1 - (1 - h)^t
    Discrete,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateArgs {
    /// ARCH coefficient
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Extra ARCH coefficient on non-positive returns
    #[arg(long)]
    pub alpha_d: Option<f64>,
    /// GARCH coefficient
    #[arg(long)]
    pub beta: Option<f64>,
    /// Student-t shock degrees of freedom (Gaussian shocks when absent)
    #[arg(long)]
    pub shock_nu: Option<f64>,
    /// Variance constant (default: unit unconditional variance)
    #[arg(long)]
    pub omega: Option<f64>,
    /// Steps per path
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Number of paths (default 1)
    #[arg(long)]
    pub paths: Option<usize>,
    /// Discarded initial steps (default 0)
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Initial conditional variance (default: unconditional)
    #[arg(long)]
    pub sigma2_init: Option<f64>,
    /// `paths`: path,step,return,variance; `levels`: date,level of path 0
    #[arg(long, value_enum)]
    pub format: Option<SimFormat>,
    /// First business day for `levels` (default 1962-07-02)
    #[arg(long)]
    pub start_date: Option<NaiveDate>,
    /// Initial price level for `levels` (default 100)
    #[arg(long)]
    pub start_level: Option<f64>,
    /// Output CSV (default stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FitArgs {
    /// CSV with columns date,level or date,return
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Sampling frequency of the fitted returns (default weekly)
    #[arg(long, value_enum)]
    pub frequency: Option<FreqName>,
    /// Week construction for weekly returns (default calendar)
    #[arg(long, value_enum)]
    pub week: Option<WeekName>,
    /// Winsorize this fraction in each tail before fitting
    #[arg(long)]
    pub trim: Option<f64>,
    /// Only use returns on or after this date
    #[arg(long)]
    pub since: Option<NaiveDate>,
    /// Models to fit (default all four)
    #[arg(long, value_enum, value_delimiter = ',')]
    pub models: Option<Vec<ModelName>>,
    /// Output CSV (default stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MomentsArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_d: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub shock_nu: Option<f64>,
    /// Largest aggregation horizon in steps (default 520)
    #[arg(long)]
    pub max_horizon: Option<usize>,
    /// Initial variances, in units of the unconditional one, for conditional curves (default 0.5,2)
    #[arg(long, value_delimiter = ',')]
    pub cond_sigma2: Option<Vec<f64>>,
    /// Paths for the stationary E(sigma_t/sigma)^3 estimate (default 2000)
    #[arg(long)]
    pub sigma3_paths: Option<usize>,
    /// Paths for conditional sigma^3 forecasts (default 20000)
    #[arg(long)]
    pub forecast_paths: Option<usize>,
    /// Output CSV (default stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DefaultCorrArgs {
    /// Market factor model
    #[arg(long, value_enum)]
    pub factor: Option<FactorName>,
    /// Latent-variable correlation b^2
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_d: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub shock_nu: Option<f64>,
    /// Student-t copula degrees of freedom
    #[arg(long)]
    pub nu: Option<f64>,
    /// Double-t market degrees of freedom
    #[arg(long)]
    pub nu_m: Option<f64>,
    /// Student-t idiosyncratic degrees of freedom (Gaussian when absent)
    #[arg(long)]
    pub idio_nu: Option<f64>,
    /// Aggregation horizon in years (default 5)
    #[arg(long)]
    pub years: Option<f64>,
    /// Model steps per year (default 52)
    #[arg(long)]
    pub steps_per_year: Option<usize>,
    /// Default probabilities (default 0.01,0.02,0.05,0.1)
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    /// Paths per repetition (default 10000)
    #[arg(long)]
    pub paths: Option<usize>,
    /// Independent repetitions (default 200)
    #[arg(long)]
    pub reps: Option<usize>,
    /// Central coverage of the percentile bounds (default 0.95)
    #[arg(long)]
    pub level: Option<f64>,
    /// Output CSV (default stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SurfaceArgs {
    #[arg(long, value_enum)]
    pub factor: Option<FactorName>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Recovery rate (default 0.4)
    #[arg(long)]
    pub recovery: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_d: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub shock_nu: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub nu_m: Option<f64>,
    #[arg(long)]
    pub idio_nu: Option<f64>,
    /// Detachment grid (default 0.01..0.30 step 0.01)
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<f64>>,
    /// Maturities in years (default 1,3,5,7,10)
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    /// Hazard rate (default 0.01)
    #[arg(long)]
    pub hazard: Option<f64>,
    /// Hazard to default-probability convention (default continuous)
    #[arg(long, value_enum)]
    pub convention: Option<ConventionName>,
    /// Model steps per year (default 52)
    #[arg(long)]
    pub steps_per_year: Option<usize>,
    /// Monte Carlo paths (default 100000)
    #[arg(long)]
    pub paths: Option<usize>,
    /// Output CSV (default stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DeltasArgs {
    #[arg(long, value_enum)]
    pub factor: Option<FactorName>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub recovery: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_d: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub shock_nu: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub nu_m: Option<f64>,
    #[arg(long)]
    pub idio_nu: Option<f64>,
    /// Detachments (default 0.01..0.30 step 0.01)
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<f64>>,
    /// Maturity in years (default 5)
    #[arg(long)]
    pub maturity: Option<f64>,
    /// Hazard rate, continuous compounding (default 0.01)
    #[arg(long)]
    pub hazard: Option<f64>,
    /// Central hazard bump for d rho / dh (default 0.0025)
    #[arg(long)]
    pub bump: Option<f64>,
    #[arg(long)]
    pub steps_per_year: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Output CSV (default stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] crate::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `args` and run; returns the process exit code.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let seed = require(cli.seed.or(file.globals.seed), "seed")?;
    let threads = cli.threads.or(file.globals.threads);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(ConfigError::key("threads", "must be at least 1").into());
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| ConfigError::key("threads", e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Simulate(a) => cmd_simulate(file.merge("simulate", a)?, seed),
        Command::Fit(a) => cmd_fit(file.merge("fit", a)?),
        Command::Moments(a) => cmd_moments(file.merge("moments", a)?, seed),
        Command::Defaultcorr(a) => cmd_defaultcorr(file.merge("defaultcorr", a)?, seed),
        Command::Surface(a) => cmd_surface(file.merge("surface", a)?, seed),
        Command::Deltas(a) => cmd_deltas(file.merge("deltas", a)?, seed),
    })
}

fn open_output(path: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn tarch_params(
    section: &str,
    alpha: Option<f64>,
    alpha_d: Option<f64>,
    beta: Option<f64>,
    shock_nu: Option<f64>,
) -> CliResult<TarchParams> {
    let key = |k: &str| format!("{section}.{k}");
    let alpha = check_range(require(alpha, &key("alpha"))?, 0.0, 1.0, &key("alpha"))?;
    let alpha_d = check_range(alpha_d.unwrap_or(0.0), 0.0, 1.0, &key("alpha-d"))?;
    let beta = check_range(require(beta, &key("beta"))?, 0.0, 1.0, &key("beta"))?;
    let innovation = match shock_nu {
        Some(nu) => Innovation::StudentT { nu: check_range(nu, 2.0 + 1e-9, f64::INFINITY, &key("shock-nu"))? },
        None => Innovation::Gaussian,
    };
    TarchParams::unit_variance(alpha, alpha_d, beta, innovation)
        .map_err(|e| ConfigError::key(key("beta"), e.to_string()).into())
}

struct ModelFields {
    factor: Option<FactorName>,
    rho: Option<f64>,
    recovery: Option<f64>,
    alpha: Option<f64>,
    alpha_d: Option<f64>,
    beta: Option<f64>,
    shock_nu: Option<f64>,
    nu: Option<f64>,
    nu_m: Option<f64>,
    idio_nu: Option<f64>,
}

fn factor_spec(section: &str, m: ModelFields) -> CliResult<FactorModelSpec> {
    let key = |k: &str| format!("{section}.{k}");
    let rho = check_range(require(m.rho, &key("rho"))?, 0.0, 0.999, &key("rho"))?;
    let recovery = check_range(m.recovery.unwrap_or(0.4), 0.0, 0.999, &key("recovery"))?;
    let idio = match m.idio_nu {
        Some(nu) => Idiosyncratic::StudentT { nu: check_range(nu, 2.0 + 1e-9, f64::INFINITY, &key("idio-nu"))? },
        None => Idiosyncratic::Gaussian,
    };
    let factor = match require(m.factor, &key("factor"))? {
        FactorName::Gaussian => FactorKind::GaussianStatic,
        FactorName::Tarch => FactorKind::Tarch(tarch_params(section, m.alpha, m.alpha_d, m.beta, m.shock_nu)?),
        FactorName::TCopula => {
            if m.idio_nu.is_some() {
                return Err(ConfigError::key(key("idio-nu"), "the t-copula uses Gaussian idiosyncratic terms").into());
            }
            FactorKind::StudentTMixing {
                nu: check_range(require(m.nu, &key("nu"))?, 2.0 + 1e-9, f64::INFINITY, &key("nu"))?,
            }
        }
        FactorName::DoubleT => FactorKind::DoubleT {
            nu_m: check_range(require(m.nu_m, &key("nu-m"))?, 2.0 + 1e-9, f64::INFINITY, &key("nu-m"))?,
        },
    };
    Ok(FactorModelSpec::new(factor, rho, idio, recovery)?)
}

fn positive(v: usize, key: &str) -> CliResult<usize> {
    if v == 0 {
        Err(ConfigError::key(key, "must be positive").into())
    } else {
        Ok(v)
    }
}

fn default_k_grid() -> Vec<f64> {
    (1..=30).map(|i| i as f64 / 100.0).collect()
}

fn cmd_simulate(a: SimulateArgs, seed: u64) -> CliResult<()> {
    let mut params = tarch_params("simulate", a.alpha, a.alpha_d, a.beta, a.shock_nu)?;
    if let Some(w) = a.omega {
        params.omega = check_range(w, f64::MIN_POSITIVE, f64::INFINITY, "simulate.omega")?;
    }
    let horizon = positive(require(a.horizon, "simulate.horizon")?, "simulate.horizon")?;
    let n_paths = positive(a.paths.unwrap_or(1), "simulate.paths")?;
    let initial = match a.sigma2_init {
        Some(v) => InitialVariance::Value(check_range(v, f64::MIN_POSITIVE, f64::INFINITY, "simulate.sigma2-init")?),
        None => InitialVariance::Unconditional,
    };
    let cfg = PathConfig {
        horizon,
        n_paths,
        seed: derive_seed(seed, "simulate"),
        initial,
        burn_in: a.burn_in.unwrap_or(0),
    };
    let paths = simulate_paths(&params, &cfg)?;
    let mut w = open_output(a.output.as_deref())?;
    match a.format.unwrap_or(SimFormat::Paths) {
        SimFormat::Paths => {
            w.write_record(["path", "step", "return", "variance"])?;
            for i in 0..n_paths {
                for (t, (r, v)) in paths.returns(i).iter().zip(paths.variances(i)).enumerate() {
                    w.write_record([i.to_string(), (t + 1).to_string(), r.to_string(), v.to_string()])?;
                }
            }
        }
        SimFormat::Levels => {
            let start = a.start_date.unwrap_or(NaiveDate::from_ymd_opt(1962, 7, 2).expect("valid date"));
            let s0 = check_range(a.start_level.unwrap_or(100.0), f64::MIN_POSITIVE, f64::INFINITY, "simulate.start-level")?;
            let dates = estimation::business_days(start, horizon + 1);
            w.write_record(["date", "level"])?;
            let mut level = s0;
            w.write_record([dates[0].to_string(), format!("{level:.6}")])?;
            for (d, r) in dates[1..].iter().zip(paths.returns(0)) {
                level *= r.exp();
                w.write_record([d.to_string(), format!("{level:.6}")])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn model_spec(m: ModelName) -> ModelSpec {
    match m {
        ModelName::Garch => ModelSpec::new(VolModel::Garch, ShockDist::Gaussian),
        ModelName::Tarch => ModelSpec::new(VolModel::Tarch, ShockDist::Gaussian),
        ModelName::GarchT => ModelSpec::new(VolModel::Garch, ShockDist::StudentT),
        ModelName::TarchT => ModelSpec::new(VolModel::Tarch, ShockDist::StudentT),
    }
}

fn cmd_fit(a: FitArgs) -> CliResult<()> {
    let input = require(a.input, "fit.input")?;
    let frequency = match a.frequency.unwrap_or(FreqName::Weekly) {
        FreqName::Daily => Frequency::Daily,
        FreqName::Weekly => Frequency::Weekly,
    };
    let week = match a.week.unwrap_or(WeekName::Calendar) {
        WeekName::Calendar => WeekConvention::CalendarFriday,
        WeekName::FiveDay => WeekConvention::TradingDays(5),
    };
    let mut series = estimation::load_returns(&input, frequency, week)?;
    if let Some(d) = a.since {
        series = series.since(d);
    }
    if let Some(f) = a.trim {
        series = estimation::trim_extremes(&series, check_range(f, 1e-12, 0.05 - 1e-12, "fit.trim")?)?;
    }
    let models = a.models.unwrap_or(vec![ModelName::Garch, ModelName::Tarch, ModelName::GarchT, ModelName::TarchT]);
    let mut w = open_output(a.output.as_deref())?;
    w.write_record(["model", "parameter", "estimate", "std_error"])?;
    for m in models {
        let spec = model_spec(m);
        let f = estimation::fit(&series.returns, spec)?;
        let name = spec.to_string();
        for (p, est, se) in f.rows() {
            w.write_record([name.as_str(), p, &est.to_string(), &se.to_string()])?;
        }
        w.write_record([name.as_str(), "loglik", &f.loglik.to_string(), ""])?;
        w.write_record([name.as_str(), "converged", if f.converged { "1" } else { "0" }, ""])?;
        w.write_record([name.as_str(), "n_obs", &f.n_obs.to_string(), ""])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_moments(a: MomentsArgs, seed: u64) -> CliResult<()> {
    let params = tarch_params("moments", a.alpha, a.alpha_d, a.beta, a.shock_nu)?;
    let t_max = positive(a.max_horizon.unwrap_or(520), "moments.max-horizon")?;
    let cond = a.cond_sigma2.unwrap_or(vec![0.5, 2.0]);
    for &v in &cond {
        check_range(v, f64::MIN_POSITIVE, f64::INFINITY, "moments.cond-sigma2")?;
    }
    let ratio = stationary_sigma3_ratio(
        &params,
        positive(a.sigma3_paths.unwrap_or(2000), "moments.sigma3-paths")?,
        10_000,
        1000,
        derive_seed(seed, "sigma3-ratio"),
    )?;
    let forecast_paths = positive(a.forecast_paths.unwrap_or(20_000), "moments.forecast-paths")?;
    let forecasts = cond
        .iter()
        .enumerate()
        .map(|(i, &v)| sigma3_forecast(&params, v, t_max, forecast_paths, crate::rng::derive_seed_indexed(seed, "sigma3-forecast", i as u64)))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut w = open_output(a.output.as_deref())?;
    w.write_record(["horizon", "quantity", "sigma2_init", "value"])?;
    for t in 1..=t_max {
        let ts = t.to_string();
        w.write_record([ts.as_str(), "skewness", "", &uncond_skewness_term(&params, t, ratio.value)?.to_string()])?;
        if params.is_garch() && params.innovation.is_symmetric() {
            w.write_record([ts.as_str(), "kurtosis", "", &agg_kurtosis(&params, t)?.to_string()])?;
        }
        for (&v, f) in cond.iter().zip(&forecasts) {
            let vs = v.to_string();
            w.write_record([ts.as_str(), "skewness", &vs, &cond_skewness(&params, v, &f[..t], t)?.to_string()])?;
            w.write_record([ts.as_str(), "variance", &vs, &cond_variance_agg(&params, v, t)?.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn horizon_steps(years: f64, steps_per_year: usize, key: &str) -> CliResult<usize> {
    let y = check_range(years, 1e-9, 1000.0, key)?;
    Ok(((y * steps_per_year as f64).round() as usize).max(1))
}

fn cmd_defaultcorr(a: DefaultCorrArgs, seed: u64) -> CliResult<()> {
    let spec = factor_spec(
        "defaultcorr",
        ModelFields {
            factor: a.factor,
            rho: a.rho,
            recovery: None,
            alpha: a.alpha,
            alpha_d: a.alpha_d,
            beta: a.beta,
            shock_nu: a.shock_nu,
            nu: a.nu,
            nu_m: a.nu_m,
            idio_nu: a.idio_nu,
        },
    )?;
    let spy = positive(a.steps_per_year.unwrap_or(52), "defaultcorr.steps-per-year")?;
    let steps = horizon_steps(a.years.unwrap_or(5.0), spy, "defaultcorr.years")?;
    let p_grid = a.p_grid.unwrap_or(vec![0.01, 0.02, 0.05, 0.1]);
    for &p in &p_grid {
        check_range(p, 1e-12, 1.0 - 1e-12, "defaultcorr.p-grid")?;
    }
    let level = check_range(a.level.unwrap_or(0.95), 1e-6, 1.0 - 1e-6, "defaultcorr.level")?;
    let curve = default_corr_mc(
        &spec,
        steps,
        &p_grid,
        positive(a.paths.unwrap_or(10_000), "defaultcorr.paths")?,
        derive_seed(seed, "defaultcorr"),
        positive(a.reps.unwrap_or(200), "defaultcorr.reps")?,
        level,
    )?;
    let mut w = open_output(a.output.as_deref())?;
    w.write_record(["p", "estimate", "lower", "upper"])?;
    for c in curve {
        w.write_record([c.p.to_string(), c.estimate.to_string(), c.lower.to_string(), c.upper.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn status_name(s: CellStatus) -> &'static str {
    match s {
        CellStatus::Valid => "valid",
        CellStatus::Boundary(LossBound::Independence) => "independence-bound",
        CellStatus::Boundary(LossBound::Comonotone) => "comonotone-bound",
        CellStatus::Invalid => "invalid",
    }
}

fn cmd_surface(a: SurfaceArgs, seed: u64) -> CliResult<()> {
    let spec = factor_spec(
        "surface",
        ModelFields {
            factor: a.factor,
            rho: a.rho,
            recovery: a.recovery,
            alpha: a.alpha,
            alpha_d: a.alpha_d,
            beta: a.beta,
            shock_nu: a.shock_nu,
            nu: a.nu,
            nu_m: a.nu_m,
            idio_nu: a.idio_nu,
        },
    )?;
    let mut cfg = SurfaceConfig::new(
        a.t_grid.unwrap_or(vec![1.0, 3.0, 5.0, 7.0, 10.0]),
        check_range(a.hazard.unwrap_or(0.01), 0.0, 10.0, "surface.hazard")?,
        positive(a.paths.unwrap_or(100_000), "surface.paths")?,
        derive_seed(seed, "surface"),
    );
    if let Some(k) = a.k_grid {
        cfg.k_grid = k;
    }
    cfg.steps_per_year = positive(a.steps_per_year.unwrap_or(52), "surface.steps-per-year")?;
    cfg.convention = match a.convention.unwrap_or(ConventionName::Continuous) {
        ConventionName::Continuous => PConvention::Continuous,
        ConventionName::Discrete => PConvention::Discrete,
    };
    let s = build_surface(&spec, &cfg)?;
    let mut w = open_output(a.output.as_deref())?;
    w.write_record(["t", "k", "p", "rho", "status", "expected_loss"])?;
    for (j, &t) in s.t_grid.iter().enumerate() {
        for (i, &k) in s.k_grid.iter().enumerate() {
            let c = s.cells[i][j];
            w.write_record([
                t.to_string(),
                k.to_string(),
                s.p[j].to_string(),
                c.rho.to_string(),
                status_name(c.status).to_string(),
                c.expected_loss.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_deltas(a: DeltasArgs, seed: u64) -> CliResult<()> {
    let spec = factor_spec(
        "deltas",
        ModelFields {
            factor: a.factor,
            rho: a.rho,
            recovery: a.recovery,
            alpha: a.alpha,
            alpha_d: a.alpha_d,
            beta: a.beta,
            shock_nu: a.shock_nu,
            nu: a.nu,
            nu_m: a.nu_m,
            idio_nu: a.idio_nu,
        },
    )?;
    let k_grid = a.k_grid.unwrap_or_else(default_k_grid);
    let maturity = check_range(a.maturity.unwrap_or(5.0), 1e-6, 100.0, "deltas.maturity")?;
    let hazard = check_range(a.hazard.unwrap_or(0.01), 1e-9, 10.0, "deltas.hazard")?;
    let bump = check_range(a.bump.unwrap_or(0.0025), 1e-9, hazard * (1.0 - 1e-9), "deltas.bump")?;
    let reps = delta_adjustments(
        &spec,
        &k_grid,
        maturity,
        hazard,
        bump,
        positive(a.steps_per_year.unwrap_or(52), "deltas.steps-per-year")?,
        positive(a.paths.unwrap_or(100_000), "deltas.paths")?,
        derive_seed(seed, "deltas"),
    )?;
    let mut w = open_output(a.output.as_deref())?;
    w.write_record(["k", "rho", "psi", "rho_h", "delta_adj", "gaussian_delta"])?;
    for r in reps {
        w.write_record([
            r.k.to_string(),
            r.rho.to_string(),
            r.psi.to_string(),
            r.rho_h.to_string(),
            r.delta_adj.to_string(),
            r.gaussian_delta.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
