//! Maximum-likelihood estimation of GARCH(1,1) / TARCH(1,1) with Gaussian or
//! Student-t shocks, plus return-series preparation.

use std::fmt;
use std::io::Read;
use std::path::Path;

use argmin::core::{CostFunction, Executor, Gradient, State, TerminationReason, TerminationStatus};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::neldermead::NelderMead;
use argmin::solver::quasinewton::BFGS;
use chrono::{Datelike, Days, NaiveDate};
use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::stats;
use crate::tarch::{simulate_paths, InitialVariance, Innovation, PathConfig, TarchParams};

/// Heuristic floor on the sample size accepted by [`fit`].
pub const MIN_FIT_OBS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frequency {
    Daily,
    Weekly,
}

/// How daily returns are bucketed into weeks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeekConvention {
    /// Calendar weeks Saturday..Friday, labelled by the last trading day.
    #[default]
    CalendarFriday,
    /// Consecutive blocks of this many trading days; a trailing partial block is dropped.
    TradingDays(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
    pub frequency: Frequency,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, returns: Vec<f64>, frequency: Frequency) -> Result<Self> {
        if dates.len() != returns.len() {
            return Err(Error::LengthMismatch { expected: dates.len(), got: returns.len() });
        }
        check_increasing(&dates)?;
        if let Some(i) = returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::Data(format!("non-finite return at row {i}")));
        }
        Ok(Self { dates, returns, frequency })
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// Returns observed on or after `start`.
    pub fn since(&self, start: NaiveDate) -> Self {
        let i = self.dates.partition_point(|d| *d < start);
        Self { dates: self.dates[i..].to_vec(), returns: self.returns[i..].to_vec(), frequency: self.frequency }
    }
}

fn check_increasing(dates: &[NaiveDate]) -> Result<()> {
    match dates.windows(2).position(|w| w[1] <= w[0]) {
        Some(i) => Err(Error::Data(format!("dates not strictly increasing at row {}", i + 1))),
        None => Ok(()),
    }
}

/// Contents of a two-column input file.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesData {
    Levels(PriceSeries),
    Returns(ReturnSeries),
}

const LEVEL_COLUMNS: [&str; 4] = ["level", "price", "close", "adj_close"];
const RETURN_COLUMNS: [&str; 3] = ["return", "log_return", "r"];

/// Read `date,level` or `date,return` CSV with a header row and ISO dates.
/// Return files are tagged with `return_frequency`.
pub fn read_series_csv<R: Read>(reader: R, return_frequency: Frequency) -> Result<SeriesData> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 {
        return Err(Error::Data(format!("expected 2 columns, found {}", headers.len())));
    }
    let kind = headers[1].to_ascii_lowercase();
    let is_level = LEVEL_COLUMNS.contains(&kind.as_str());
    if !is_level && !RETURN_COLUMNS.contains(&kind.as_str()) {
        return Err(Error::Data(format!("unrecognised value column '{}'", &headers[1])));
    }
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let d = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
            .map_err(|e| Error::Data(format!("row {}: bad date '{}': {e}", i + 1, &rec[0])))?;
        let v: f64 = rec[1]
            .parse()
            .map_err(|_| Error::Data(format!("row {}: bad number '{}'", i + 1, &rec[1])))?;
        dates.push(d);
        values.push(v);
    }
    if is_level {
        check_increasing(&dates)?;
        Ok(SeriesData::Levels(PriceSeries { dates, levels: values }))
    } else {
        Ok(SeriesData::Returns(ReturnSeries::new(dates, values, return_frequency)?))
    }
}

pub fn read_series_file(path: impl AsRef<Path>, return_frequency: Frequency) -> Result<SeriesData> {
    read_series_csv(std::fs::File::open(path)?, return_frequency)
}

/// Load a file as returns at `frequency`, converting levels or aggregating
/// daily returns as needed.
pub fn load_returns(path: impl AsRef<Path>, frequency: Frequency, week: WeekConvention) -> Result<ReturnSeries> {
    match read_series_file(path, Frequency::Daily)? {
        SeriesData::Levels(p) => prices_to_log_returns(&p, frequency, week),
        SeriesData::Returns(r) => match frequency {
            Frequency::Daily => Ok(r),
            Frequency::Weekly => aggregate_weekly(&r, week),
        },
    }
}

/// Log returns `ln S_t - ln S_{t-1}`, optionally summed into weeks.
pub fn prices_to_log_returns(prices: &PriceSeries, frequency: Frequency, week: WeekConvention) -> Result<ReturnSeries> {
    let n = prices.levels.len();
    if n != prices.dates.len() {
        return Err(Error::LengthMismatch { expected: prices.dates.len(), got: n });
    }
    if n < 2 {
        return Err(Error::Data("need at least 2 price observations".into()));
    }
    if let Some(i) = prices.levels.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Data(format!("non-positive price {} at row {i}", prices.levels[i])));
    }
    check_increasing(&prices.dates)?;
    let returns = prices.levels.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    let daily = ReturnSeries::new(prices.dates[1..].to_vec(), returns, Frequency::Daily)?;
    match frequency {
        Frequency::Daily => Ok(daily),
        Frequency::Weekly => aggregate_weekly(&daily, week),
    }
}

fn week_end(d: NaiveDate) -> NaiveDate {
    let wd = d.weekday().num_days_from_monday() as u64;
    d + Days::new((4 + 7 - wd) % 7)
}

/// Sum daily log returns into weekly returns.
pub fn aggregate_weekly(daily: &ReturnSeries, week: WeekConvention) -> Result<ReturnSeries> {
    if daily.frequency != Frequency::Daily {
        return Err(domain("weekly aggregation needs a daily series"));
    }
    let mut dates = Vec::new();
    let mut returns = Vec::new();
    match week {
        WeekConvention::TradingDays(m) => {
            if m == 0 {
                return Err(domain("block length must be positive"));
            }
            for (ds, rs) in daily.dates.chunks_exact(m).zip(daily.returns.chunks_exact(m)) {
                dates.push(ds[m - 1]);
                returns.push(rs.iter().sum());
            }
        }
        WeekConvention::CalendarFriday => {
            let mut key = None;
            for (&d, &r) in daily.dates.iter().zip(&daily.returns) {
                let k = week_end(d);
                if key == Some(k) {
                    *returns.last_mut().unwrap() += r;
                    *dates.last_mut().unwrap() = d;
                } else {
                    key = Some(k);
                    dates.push(d);
                    returns.push(r);
                }
            }
        }
    }
    ReturnSeries::new(dates, returns, Frequency::Weekly)
}

/// Winsorize returns at the `fraction` and `1 - fraction` empirical quantiles.
pub fn trim_extremes(series: &ReturnSeries, fraction: f64) -> Result<ReturnSeries> {
    if !(fraction > 0.0 && fraction < 0.05) {
        return Err(domain(format!("trim fraction must lie in (0, 0.05), got {fraction}")));
    }
    if series.is_empty() {
        return Ok(series.clone());
    }
    let mut sorted = series.returns.clone();
    sorted.sort_by(f64::total_cmp);
    let lo = stats::quantile_sorted(&sorted, fraction);
    let hi = stats::quantile_sorted(&sorted, 1.0 - fraction);
    Ok(ReturnSeries {
        dates: series.dates.clone(),
        returns: series.returns.iter().map(|r| r.clamp(lo, hi)).collect(),
        frequency: series.frequency,
    })
}

/// Raw standardized moments and their negative-return counterparts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub s_r: f64,
    pub s_r_d: f64,
    pub k_r: f64,
    pub k_r_d: f64,
    pub v_r_d: f64,
}

pub fn sample_moments(returns: &[f64]) -> Result<SampleMoments> {
    if returns.len() < 2 {
        return Err(domain("need at least 2 observations"));
    }
    let n = returns.len() as f64;
    let (mut m2, mut m3, mut m4, mut d2, mut d3, mut d4) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &r in returns {
        let r2 = r * r;
        m2 += r2;
        m3 += r2 * r;
        m4 += r2 * r2;
        if r <= 0.0 {
            d2 += r2;
            d3 += r2 * r;
            d4 += r2 * r2;
        }
    }
    if m2 == 0.0 {
        return Err(Error::Degenerate("zero second moment".into()));
    }
    let m2 = m2 / n;
    let s3 = m2.powf(1.5) * n;
    let s4 = m2 * m2 * n;
    Ok(SampleMoments { s_r: m3 / s3, s_r_d: d3 / s3, k_r: m4 / s4, k_r_d: d4 / s4, v_r_d: d2 / (m2 * n) })
}

/// Skewness of overlapping `T`-period sums for each horizon.
pub fn aggregated_skewness(returns: &[f64], horizons: &[usize]) -> Result<Vec<f64>> {
    horizons
        .iter()
        .map(|&t| {
            if t == 0 || t + 2 > returns.len() {
                return Err(domain(format!("horizon {t} needs at least {} returns", t + 2)));
            }
            let mut sums = Vec::with_capacity(returns.len() - t + 1);
            let mut acc: f64 = returns[..t].iter().sum();
            sums.push(acc);
            for i in t..returns.len() {
                acc += returns[i] - returns[i - t];
                sums.push(acc);
            }
            Ok(stats::skewness(&sums))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolModel {
    Garch,
    Tarch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShockDist {
    Gaussian,
    StudentT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub vol: VolModel,
    pub shock: ShockDist,
}

impl ModelSpec {
    pub const fn new(vol: VolModel, shock: ShockDist) -> Self {
        Self { vol, shock }
    }

    /// Names of the free parameters in vector order.
    pub fn param_names(&self) -> Vec<&'static str> {
        let mut v = vec!["omega", "alpha"];
        if self.vol == VolModel::Tarch {
            v.push("alpha_d");
        }
        v.push("beta");
        if self.shock == ShockDist::StudentT {
            v.push("nu");
        }
        v
    }

    /// Natural parameter vector of `p` in the order of [`Self::param_names`].
    fn pack(&self, p: &Natural) -> Vec<f64> {
        let mut v = vec![p.omega, p.alpha];
        if self.vol == VolModel::Tarch {
            v.push(p.alpha_d);
        }
        v.push(p.beta);
        if self.shock == ShockDist::StudentT {
            v.push(p.nu.unwrap_or(8.0));
        }
        v
    }

    fn unpack(&self, x: &[f64]) -> Natural {
        let tarch = self.vol == VolModel::Tarch;
        let ib = if tarch { 3 } else { 2 };
        Natural {
            omega: x[0],
            alpha: x[1],
            alpha_d: if tarch { x[2] } else { 0.0 },
            beta: x[ib],
            nu: (self.shock == ShockDist::StudentT).then(|| x[ib + 1]),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.vol {
            VolModel::Garch => "GARCH",
            VolModel::Tarch => "TARCH",
        };
        match self.shock {
            ShockDist::Gaussian => write!(f, "{v}"),
            ShockDist::StudentT => write!(f, "{v}+t"),
        }
    }
}

/// Unconstrained natural parameters; used for likelihood evaluation at
/// points that may sit just outside the admissible region.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Natural {
    omega: f64,
    alpha: f64,
    alpha_d: f64,
    beta: f64,
    nu: Option<f64>,
}

impl Natural {
    fn from_params(p: &TarchParams) -> Self {
        let nu = match p.innovation {
            Innovation::Gaussian => None,
            Innovation::StudentT { nu } => Some(nu),
        };
        Self { omega: p.omega, alpha: p.alpha, alpha_d: p.alpha_d, beta: p.beta, nu }
    }
}

fn t_log_const(nu: f64) -> f64 {
    libm::lgamma(0.5 * (nu + 1.0)) - libm::lgamma(0.5 * nu) - 0.5 * (std::f64::consts::PI * (nu - 2.0)).ln()
}

/// Negative log-likelihood; `NaN` if the variance recursion leaves `(0, inf)`.
fn nll_raw(p: &Natural, returns: &[f64], sigma2_1: f64) -> f64 {
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let t_const = match p.nu {
        Some(nu) if nu > 2.0 => Some((nu, t_log_const(nu))),
        Some(_) => return f64::NAN,
        None => None,
    };
    let mut s2 = sigma2_1;
    let mut nll = 0.0;
    for &r in returns {
        if !(s2 > 0.0 && s2.is_finite()) {
            return f64::NAN;
        }
        let z2 = r * r / s2;
        nll += match t_const {
            None => 0.5 * (ln2pi + s2.ln() + z2),
            Some((nu, c)) => -c + 0.5 * (nu + 1.0) * (z2 / (nu - 2.0)).ln_1p() + 0.5 * s2.ln(),
        };
        let arch = if r <= 0.0 { p.alpha + p.alpha_d } else { p.alpha };
        s2 = p.omega + arch * r * r + p.beta * s2;
    }
    nll
}

/// Negative log-likelihood of `returns` under `params`, starting the
/// variance recursion at `sigma2_1`.
pub fn neg_log_likelihood(params: &TarchParams, returns: &[f64], sigma2_1: f64) -> Result<f64> {
    if !(sigma2_1 > 0.0 && sigma2_1.is_finite()) {
        return Err(domain(format!("initial variance must be positive, got {sigma2_1}")));
    }
    let v = nll_raw(&Natural::from_params(params), returns, sigma2_1);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("conditional variance left (0, inf)".into()))
    }
}

/// Initial variance used by the likelihood: the sample variance.
pub fn initial_variance(returns: &[f64]) -> Result<f64> {
    let v = stats::variance(returns);
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Degenerate("return series has zero variance".into()))
    }
}

/// Per-parameter asymptotic standard deviations; absent entries are not
/// part of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamErrors {
    pub omega: f64,
    pub alpha: f64,
    pub alpha_d: Option<f64>,
    pub beta: f64,
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: ModelSpec,
    pub params: TarchParams,
    pub std_errors: ParamErrors,
    pub loglik: f64,
    pub converged: bool,
    pub n_obs: usize,
}

impl FitResult {
    /// `(name, estimate, std error)` rows in model order.
    pub fn rows(&self) -> Vec<(&'static str, f64, f64)> {
        let est = self.model.pack(&Natural::from_params(&self.params));
        let e = &self.std_errors;
        let se = self.model.pack(&Natural {
            omega: e.omega,
            alpha: e.alpha,
            alpha_d: e.alpha_d.unwrap_or(f64::NAN),
            beta: e.beta,
            nu: e.nu,
        });
        self.model.param_names().into_iter().zip(est).zip(se).map(|((n, v), s)| (n, v, s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iters: u64,
    /// Also start from the optimum of each nested model, so the fitted
    /// likelihood is never below the nested one.
    pub nested_starts: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iters: 4000, nested_starts: true }
    }
}

/// Transformed problem: every parameter is `exp(theta)`, `nu = 2 + exp(theta)`.
#[derive(Clone, Copy)]
struct Problem<'a> {
    model: ModelSpec,
    returns: &'a [f64],
    sigma2_1: f64,
}

const PENALTY: f64 = 1e300;
const GRAD_STEP: f64 = 1e-6;

impl Problem<'_> {
    fn natural_of(&self, theta: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        if self.model.shock == ShockDist::StudentT {
            *x.last_mut().unwrap() += 2.0;
        }
        x
    }

    fn theta_of(&self, x: &[f64]) -> Vec<f64> {
        let mut x = x.to_vec();
        if self.model.shock == ShockDist::StudentT {
            *x.last_mut().unwrap() -= 2.0;
        }
        x.iter().map(|v| v.max(1e-8).ln()).collect()
    }

    fn nll_natural(&self, x: &[f64]) -> f64 {
        nll_raw(&self.model.unpack(x), self.returns, self.sigma2_1)
    }

    fn nll_theta(&self, theta: &[f64]) -> f64 {
        let v = self.nll_natural(&self.natural_of(theta));
        if v.is_finite() {
            v
        } else {
            PENALTY
        }
    }
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, theta: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.nll_theta(theta))
    }
}

impl Gradient for Problem<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, theta: &Self::Param) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        let mut x = theta.clone();
        Ok((0..theta.len())
            .map(|i| {
                x[i] = theta[i] + GRAD_STEP;
                let up = self.nll_theta(&x);
                x[i] = theta[i] - GRAD_STEP;
                let dn = self.nll_theta(&x);
                x[i] = theta[i];
                (up - dn) / (2.0 * GRAD_STEP)
            })
            .collect())
    }
}

fn converged_status(s: &TerminationStatus) -> bool {
    matches!(
        s,
        TerminationStatus::Terminated(TerminationReason::SolverConverged | TerminationReason::TargetCostReached)
    )
}

fn optimize(problem: &Problem<'_>, start: &[f64], max_iters: u64) -> (Vec<f64>, f64, bool) {
    let theta0 = problem.theta_of(start);
    let mut simplex = vec![theta0.clone()];
    for i in 0..theta0.len() {
        let mut v = theta0.clone();
        v[i] += 0.3;
        simplex.push(v);
    }
    let mut best = (theta0.clone(), problem.nll_theta(&theta0), false);
    let nm = NelderMead::new(simplex).with_sd_tolerance(1e-10).expect("valid tolerance");
    if let Ok(res) = Executor::new(*problem, nm).configure(|s| s.max_iters(max_iters)).run() {
        let st = res.state();
        if let Some(p) = st.get_best_param() {
            if st.get_best_cost() < best.1 {
                best = (p.clone(), st.get_best_cost(), converged_status(st.get_termination_status()));
            }
        }
    }
    let n = best.0.len();
    let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let bfgs = BFGS::new(MoreThuenteLineSearch::new()).with_tolerance_grad(1e-6).expect("valid tolerance");
    let start = best.0.clone();
    if let Ok(res) =
        Executor::new(*problem, bfgs).configure(|s| s.param(start).inv_hessian(eye).max_iters(200)).run()
    {
        let st = res.state();
        if let Some(p) = st.get_best_param() {
            let c = st.get_best_cost();
            if c.is_finite() && c <= best.1 {
                best = (p.clone(), c, best.2 || converged_status(st.get_termination_status()));
            }
        }
    }
    (problem.natural_of(&best.0), best.1, best.2)
}

fn hessian_step(name: &str, x: f64) -> f64 {
    let floor = match name {
        "omega" => 0.0,
        "nu" => 1e-1,
        _ => 1e-3,
    };
    1e-4 * x.abs().max(floor)
}

/// Central-difference Hessian of the negative log-likelihood in natural parameters.
fn numerical_hessian(problem: &Problem<'_>, x: &[f64]) -> DMatrix<f64> {
    let names = problem.model.param_names();
    let h: Vec<f64> = names.iter().zip(x).map(|(n, &v)| hessian_step(n, v)).collect();
    let n = x.len();
    let f0 = problem.nll_natural(x);
    let eval = |di: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in di {
            y[i] += s * h[i];
        }
        problem.nll_natural(&y)
    };
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = (eval(&[(i, 1.0)]) - 2.0 * f0 + eval(&[(i, -1.0)])) / (h[i] * h[i]);
        for j in 0..i {
            let v = (eval(&[(i, 1.0), (j, 1.0)]) - eval(&[(i, 1.0), (j, -1.0)]) - eval(&[(i, -1.0), (j, 1.0)])
                + eval(&[(i, -1.0), (j, -1.0)]))
                / (4.0 * h[i] * h[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn default_start(model: ModelSpec, var: f64) -> Vec<f64> {
    let (alpha, alpha_d) = match model.vol {
        VolModel::Garch => (0.08, 0.0),
        VolModel::Tarch => (0.04, 0.08),
    };
    let beta = 0.88;
    let omega = var * (1.0 - alpha - 0.5 * alpha_d - beta);
    model.pack(&Natural { omega, alpha, alpha_d, beta, nu: Some(8.0) })
}

/// Maximum-likelihood fit; see [`fit_with`].
pub fn fit(returns: &[f64], model: ModelSpec) -> Result<FitResult> {
    fit_with(returns, model, FitOptions::default())
}

/// Fit `model` by simplex search refined with BFGS on log-transformed
/// parameters. Standard errors come from the inverse numerical Hessian in
/// natural parameters. Non-convergence is flagged, not an error.
pub fn fit_with(returns: &[f64], model: ModelSpec, options: FitOptions) -> Result<FitResult> {
    if returns.len() < MIN_FIT_OBS {
        return Err(Error::Data(format!("need at least {MIN_FIT_OBS} observations, got {}", returns.len())));
    }
    if let Some(i) = returns.iter().position(|r| !r.is_finite()) {
        return Err(Error::Data(format!("non-finite return at index {i}")));
    }
    let sigma2_1 = initial_variance(returns)?;
    let problem = Problem { model, returns, sigma2_1 };

    let mut starts = vec![default_start(model, sigma2_1)];
    if options.nested_starts {
        let nested_opts = FitOptions { nested_starts: true, ..options };
        if model.vol == VolModel::Tarch {
            let g = fit_with(returns, ModelSpec::new(VolModel::Garch, model.shock), nested_opts)?;
            let mut nat = Natural::from_params(&g.params);
            nat.alpha_d = 0.01;
            nat.alpha = (nat.alpha - 0.005).max(1e-4);
            starts.push(model.pack(&nat));
        }
        if model.shock == ShockDist::StudentT {
            let g = fit_with(returns, ModelSpec::new(model.vol, ShockDist::Gaussian), nested_opts)?;
            let mut nat = Natural::from_params(&g.params);
            nat.nu = Some(50.0);
            starts.push(model.pack(&nat));
        }
    }

    let (x, nll, solver_ok) = starts
        .iter()
        .map(|s| optimize(&problem, s, options.max_iters))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");
    if !(nll < PENALTY) {
        return Err(Error::NonFinite("likelihood not finite at any start".into()));
    }

    let hess = numerical_hessian(&problem, &x);
    let se: Vec<f64> = match hess.clone().try_inverse() {
        Some(inv) => (0..x.len()).map(|i| inv[(i, i)]).map(|v| if v > 0.0 { v.sqrt() } else { f64::NAN }).collect(),
        None => vec![f64::NAN; x.len()],
    };
    let se_ok = se.iter().all(|s| s.is_finite());
    let nat = model.unpack(&x);
    let innovation = match nat.nu {
        Some(nu) => Innovation::StudentT { nu },
        None => Innovation::Gaussian,
    };
    let params = TarchParams::new(nat.omega, nat.alpha, nat.alpha_d, nat.beta, innovation)?;
    let e = model.unpack(&se);
    Ok(FitResult {
        model,
        params,
        std_errors: ParamErrors {
            omega: e.omega,
            alpha: e.alpha,
            alpha_d: (model.vol == VolModel::Tarch).then_some(e.alpha_d),
            beta: e.beta,
            nu: e.nu,
        },
        loglik: -nll,
        converged: solver_ok && se_ok,
        n_obs: returns.len(),
    })
}

/// One simulated return path of length `n` after `burn_in` discarded steps.
pub fn simulate_returns(params: &TarchParams, n: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    let cfg = PathConfig { horizon: n, n_paths: 1, seed, initial: InitialVariance::Unconditional, burn_in };
    Ok(simulate_paths(params, &cfg)?.returns(0).to_vec())
}

/// Consecutive business days (Mon..Fri) starting at `start`.
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    start.iter_days().filter(|d| d.weekday().num_days_from_monday() < 5).take(n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn log_returns_of_levels() {
        let p = PriceSeries { dates: vec![date("2004-01-05"), date("2004-01-06")], levels: vec![100.0, 110.0] };
        let r = prices_to_log_returns(&p, Frequency::Daily, WeekConvention::default()).unwrap();
        assert!((r.returns[0] - 0.09531).abs() < 1e-5);
        let flat = PriceSeries { levels: vec![100.0, 100.0], ..p.clone() };
        assert_eq!(prices_to_log_returns(&flat, Frequency::Daily, WeekConvention::default()).unwrap().returns, [0.0]);
        let bad = PriceSeries { levels: vec![100.0, 0.0], ..p };
        assert!(prices_to_log_returns(&bad, Frequency::Daily, WeekConvention::default()).is_err());
    }

    #[test]
    fn calendar_weeks() {
        // Wed 2004-01-07 .. Tue 2004-01-20
        let dates = business_days(date("2004-01-07"), 10);
        let levels: Vec<f64> = (0..10).map(|i| 100.0 + i as f64).collect();
        let p = PriceSeries { dates: dates.clone(), levels: levels.clone() };
        let w = prices_to_log_returns(&p, Frequency::Weekly, WeekConvention::CalendarFriday).unwrap();
        assert_eq!(w.dates, vec![date("2004-01-09"), date("2004-01-16"), date("2004-01-20")]);
        assert!((w.returns[1] - (107.0f64 / 102.0).ln()).abs() < 1e-14);
        let total: f64 = w.returns.iter().sum();
        assert!((total - (109.0f64 / 100.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn trading_day_blocks() {
        let dates = business_days(date("1962-07-02"), 10_699);
        let levels = vec![1.0; 10_699];
        let w = prices_to_log_returns(&PriceSeries { dates, levels }, Frequency::Weekly, WeekConvention::TradingDays(5))
            .unwrap();
        assert_eq!(w.len(), 2139);
    }

    #[test]
    fn winsorize() {
        let dates = business_days(date("2000-01-03"), 2000);
        let mut r: Vec<f64> = (0..2000).map(|i| ((i * 7919) % 2000) as f64 / 2000.0 * 0.02 - 0.01).collect();
        r[17] = -0.20;
        let s = ReturnSeries::new(dates, r.clone(), Frequency::Daily).unwrap();
        let t = trim_extremes(&s, 0.001).unwrap();
        let mut sorted = r.clone();
        sorted.sort_by(f64::total_cmp);
        let q = stats::quantile_sorted(&sorted, 0.001);
        assert_eq!(t.returns[17], q);
        assert!(q > -0.011);
        // two points below the interpolated lower quantile, two above the upper
        assert_eq!(t.returns.iter().zip(&r).filter(|(a, b)| a != b).count(), 4);
        assert!(trim_extremes(&s, 0.1).is_err());
    }

    #[test]
    fn trivial_likelihood() {
        let p = TarchParams::new(1.0, 0.0, 0.0, 0.0, Innovation::Gaussian).unwrap();
        let v = neg_log_likelihood(&p, &[0.0; 10], 1.0).unwrap();
        assert!((v - 10.0 * 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
    }

    #[test]
    fn student_t_density_normalizes() {
        let nu = 7.0;
        let c = t_log_const(nu);
        let f = |z: f64| (c - 0.5 * (nu + 1.0) * (z * z / (nu - 2.0)).ln_1p()).exp();
        let mass = crate::math::quad::integrate_real_line(f, 1e-12).unwrap();
        let var = crate::math::quad::integrate_real_line(|z| z * z * f(z), 1e-12).unwrap();
        assert!((mass - 1.0).abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-8);
    }

    #[test]
    fn moments_of_symmetric_sample() {
        let r: Vec<f64> = (1..=500).flat_map(|i| [i as f64, -(i as f64)]).collect();
        let m = sample_moments(&r).unwrap();
        assert!(m.s_r.abs() < 1e-12);
        assert!((m.v_r_d - 0.5).abs() < 1e-12);
        assert!((2.0 * m.k_r_d - m.k_r).abs() < 1e-12);
        assert!(sample_moments(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn fit_recovers_garch() {
        let truth = TarchParams::new(0.05, 0.08, 0.0, 0.87, Innovation::Gaussian).unwrap();
        let r = simulate_returns(&truth, 4000, 500, 42).unwrap();
        let f = fit(&r, ModelSpec::new(VolModel::Garch, ShockDist::Gaussian)).unwrap();
        assert!(f.converged);
        assert!((f.params.alpha - 0.08).abs() < 3.0 * f.std_errors.alpha, "{f:?}");
        assert!((f.params.beta - 0.87).abs() < 3.0 * f.std_errors.beta, "{f:?}");
        let direct = neg_log_likelihood(&f.params, &r, initial_variance(&r).unwrap()).unwrap();
        assert!((f.loglik + direct).abs() < 1e-9);
    }
}
