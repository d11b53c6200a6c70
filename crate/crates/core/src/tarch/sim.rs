//! Path simulation and Monte Carlo moment estimators.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{persistence, Innovation, TarchParams};
use crate::error::{Error, Result};
use crate::math::ScaledStudentT;
use crate::rng::path_rng;
use crate::stats;

/// Starting value `sigma_1^2` of each simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialVariance {
    /// The unconditional variance `omega / (1 - zeta)`.
    Unconditional,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub horizon: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub initial: InitialVariance,
    /// Steps simulated and discarded before the recorded window.
    pub burn_in: usize,
}

impl PathConfig {
    pub fn new(horizon: usize, n_paths: usize, seed: u64) -> Self {
        Self { horizon, n_paths, seed, initial: InitialVariance::Unconditional, burn_in: 0 }
    }
}

#[derive(Debug, Clone, Copy)]
enum Shock {
    Gaussian,
    T(ScaledStudentT),
}

impl Shock {
    fn new(innovation: Innovation) -> Result<Self> {
        Ok(match innovation {
            Innovation::Gaussian => Shock::Gaussian,
            Innovation::StudentT { nu } => Shock::T(ScaledStudentT::new(nu)?),
        })
    }
}

impl Distribution<f64> for Shock {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Shock::Gaussian => rng.sample(StandardNormal),
            Shock::T(t) => t.sample(rng),
        }
    }
}

/// Running conditional variance of a single path.
#[derive(Debug, Clone, Copy)]
pub struct TarchState {
    params: TarchParams,
    shock: Shock,
    sigma2: f64,
}

impl TarchState {
    pub fn new(params: &TarchParams, sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidParams(format!("initial variance must be > 0, got {sigma2}")));
        }
        Ok(Self { params: *params, shock: Shock::new(params.innovation)?, sigma2 })
    }

    /// Conditional variance of the next return.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Advance with a given standardized shock; returns the realized return.
    pub fn step_with(&mut self, eps: f64) -> f64 {
        let r = self.sigma2.sqrt() * eps;
        let p = &self.params;
        let arch = if r <= 0.0 { p.alpha + p.alpha_d } else { p.alpha };
        self.sigma2 = p.omega + arch * r * r + p.beta * self.sigma2;
        r
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let eps = self.shock.sample(rng);
        self.step_with(eps)
    }
}

fn initial_sigma2(params: &TarchParams, initial: InitialVariance) -> Result<f64> {
    if !(params.omega > 0.0) {
        return Err(Error::InvalidParams(format!(
            "simulation needs omega > 0 for a mean-reverting variance, got {}",
            params.omega
        )));
    }
    match initial {
        InitialVariance::Unconditional => params.unconditional_variance(),
        InitialVariance::Value(v) => Ok(v),
    }
}

/// Simulated returns and conditional variances, stored path-major.
#[derive(Debug, Clone)]
pub struct SimulatedPaths {
    pub n_paths: usize,
    pub horizon: usize,
    returns: Vec<f64>,
    variances: Vec<f64>,
}

impl SimulatedPaths {
    pub fn returns(&self, path: usize) -> &[f64] {
        &self.returns[path * self.horizon..(path + 1) * self.horizon]
    }

    /// `sigma_t^2` for each recorded step `t` of `path`.
    pub fn variances(&self, path: usize) -> &[f64] {
        &self.variances[path * self.horizon..(path + 1) * self.horizon]
    }

    pub fn all_returns(&self) -> &[f64] {
        &self.returns
    }
}

/// Simulate `n_paths` independent TARCH paths of length `horizon`.
pub fn simulate_paths(params: &TarchParams, config: &PathConfig) -> Result<SimulatedPaths> {
    let s0 = initial_sigma2(params, config.initial)?;
    let proto = TarchState::new(params, s0)?;
    let h = config.horizon;
    let mut returns = vec![0.0; h * config.n_paths];
    let mut variances = vec![0.0; h * config.n_paths];
    if h > 0 {
        returns
            .par_chunks_mut(h)
            .zip(variances.par_chunks_mut(h))
            .enumerate()
            .for_each(|(i, (rs, vs))| {
                let mut rng = path_rng(config.seed, i as u64);
                let mut st = proto;
                for _ in 0..config.burn_in {
                    st.step(&mut rng);
                }
                for (r, v) in rs.iter_mut().zip(vs.iter_mut()) {
                    *v = st.sigma2();
                    *r = st.step(&mut rng);
                }
            });
    }
    Ok(SimulatedPaths { n_paths: config.n_paths, horizon: h, returns, variances })
}

/// Aggregated returns `R_{0,T}` for every requested horizon, one vector per
/// horizon indexed by path. Paths are simulated to the largest horizon once.
pub fn aggregated_returns(params: &TarchParams, config: &PathConfig, horizons: &[usize]) -> Result<Vec<Vec<f64>>> {
    let s0 = initial_sigma2(params, config.initial)?;
    let proto = TarchState::new(params, s0)?;
    let t_max = horizons.iter().copied().max().unwrap_or(0);
    let per_path: Vec<Vec<f64>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(config.seed, i as u64);
            let mut st = proto;
            for _ in 0..config.burn_in {
                st.step(&mut rng);
            }
            let mut cum = Vec::with_capacity(t_max + 1);
            cum.push(0.0);
            let mut acc = 0.0;
            for _ in 0..t_max {
                acc += st.step(&mut rng);
                cum.push(acc);
            }
            horizons.iter().map(|&t| cum[t]).collect()
        })
        .collect();
    Ok((0..horizons.len())
        .map(|j| per_path.iter().map(|p| p[j]).collect())
        .collect())
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// `E(sigma_t / sigma)^3` under the stationary law, averaged over
/// `sample_steps` steps of each of `n_paths` paths after `burn_in` steps.
pub fn stationary_sigma3_ratio(
    params: &TarchParams,
    n_paths: usize,
    burn_in: usize,
    sample_steps: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_paths < 2 || sample_steps == 0 {
        return Err(Error::Domain("need at least two paths and one sample step".into()));
    }
    let s2 = initial_sigma2(params, InitialVariance::Unconditional)?;
    let proto = TarchState::new(params, s2)?;
    let per_path: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let mut st = proto;
            for _ in 0..burn_in {
                st.step(&mut rng);
            }
            let mut acc = 0.0;
            for _ in 0..sample_steps {
                acc += (st.sigma2() / s2).powf(1.5);
                st.step(&mut rng);
            }
            acc / sample_steps as f64
        })
        .collect();
    Ok(McEstimate { value: stats::mean(&per_path), std_error: stats::std_error(&per_path) })
}

/// Forecast `E_t sigma_{t+u}^3` for `u = 1..=horizon` given `sigma_{t+1}^2`.
pub fn sigma3_forecast(
    params: &TarchParams,
    sigma2_next: f64,
    horizon: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if persistence(params) >= 1.0 {
        return Err(Error::InvalidParams("persistence must be < 1".into()));
    }
    let proto = TarchState::new(params, sigma2_next)?;
    // fixed-order block reduction
    const BLOCK: usize = 256;
    let n_blocks = n_paths.div_ceil(BLOCK);
    let blocks: Vec<Vec<f64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; horizon];
            for i in b * BLOCK..((b + 1) * BLOCK).min(n_paths) {
                let mut rng = path_rng(seed, i as u64);
                let mut st = proto;
                for a in acc.iter_mut() {
                    *a += st.sigma2().powf(1.5);
                    st.step(&mut rng);
                }
            }
            acc
        })
        .collect();
    let mut sums = vec![0.0; horizon];
    for b in &blocks {
        sums.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    }
    Ok(sums.into_iter().map(|s| s / n_paths as f64).collect())
}
