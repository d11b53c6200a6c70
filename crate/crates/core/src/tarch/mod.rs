//! TARCH(1,1) / GARCH(1,1) volatility dynamics.
//!
//! Returns follow `r_t = sigma_t * eps_t` with
//! `sigma_t^2 = omega + (alpha + alpha_d * 1{r_{t-1} <= 0}) * r_{t-1}^2 + beta * sigma_{t-1}^2`
//! and unit-variance iid shocks. This module holds the closed-form moment
//! term structures of aggregated returns; [`sim`] holds the simulator and
//! the Monte Carlo estimators that feed the formulas where no closed form
//! exists.

pub mod sim;

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use sim::{
    aggregated_returns, sigma3_forecast, simulate_paths, stationary_sigma3_ratio, InitialVariance,
    McEstimate, PathConfig, SimulatedPaths, TarchState,
};

/// Distribution of the unit-variance return shocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Innovation {
    Gaussian,
    /// Student-t with `nu` degrees of freedom, rescaled to unit variance.
    StudentT { nu: f64 },
}

impl Innovation {
    fn validate(&self) -> Result<()> {
        match *self {
            Innovation::Gaussian => Ok(()),
            Innovation::StudentT { nu } if nu > 2.0 && nu.is_finite() => Ok(()),
            Innovation::StudentT { nu } => Err(Error::InvalidParams(format!(
                "student-t shocks need nu > 2 for unit variance, got {nu}"
            ))),
        }
    }

    /// Right-truncated variance `E(eps^2 1{eps <= 0})`; one half for both
    /// supported (symmetric) shock laws.
    pub fn truncated_variance(&self) -> f64 {
        0.5
    }

    pub fn is_symmetric(&self) -> bool {
        true
    }
}

/// Central and right-truncated moments of the shock distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationMoments {
    /// `E(eps^2 1{eps <= 0})`
    pub v_d: f64,
    /// `E(eps^3)`
    pub s: f64,
    /// `E(eps^3 1{eps <= 0})`
    pub s_d: f64,
    /// `E(eps^4)`
    pub k: f64,
    /// `E(eps^4 1{eps <= 0})`
    pub k_d: f64,
}

/// Moments of the unit-variance shock distribution.
///
/// Student-t shocks need `nu > 4` for a finite kurtosis.
pub fn innovation_moments(innovation: Innovation) -> Result<InnovationMoments> {
    innovation.validate()?;
    match innovation {
        Innovation::Gaussian => Ok(InnovationMoments {
            v_d: 0.5,
            s: 0.0,
            s_d: -(2.0 / PI).sqrt(),
            k: 3.0,
            k_d: 1.5,
        }),
        Innovation::StudentT { nu } => {
            if nu <= 4.0 {
                return Err(Error::InfiniteMoment(format!(
                    "student-t kurtosis is infinite for nu = {nu} <= 4"
                )));
            }
            let k = 3.0 * (nu - 2.0) / (nu - 4.0);
            // E|eps|^3 for the unit-variance scaled t
            let abs3 = (nu - 2.0).powf(1.5)
                * (libm::lgamma(0.5 * (nu - 3.0)) - libm::lgamma(0.5 * nu)).exp()
                / PI.sqrt();
            Ok(InnovationMoments {
                v_d: 0.5,
                s: 0.0,
                s_d: -0.5 * abs3,
                k,
                k_d: 0.5 * k,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub alpha_d: f64,
    pub beta: f64,
    pub innovation: Innovation,
}

impl TarchParams {
    pub fn new(omega: f64, alpha: f64, alpha_d: f64, beta: f64, innovation: Innovation) -> Result<Self> {
        for (name, v) in [("omega", omega), ("alpha", alpha), ("alpha_d", alpha_d), ("beta", beta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        innovation.validate()?;
        Ok(Self { omega, alpha, alpha_d, beta, innovation })
    }

    /// Parameters normalized so that the unconditional variance is one,
    /// i.e. `omega = 1 - zeta`.
    pub fn unit_variance(alpha: f64, alpha_d: f64, beta: f64, innovation: Innovation) -> Result<Self> {
        let mut p = Self::new(0.0, alpha, alpha_d, beta, innovation)?;
        let zeta = persistence(&p);
        if zeta >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "persistence {zeta} >= 1 has no unconditional variance"
            )));
        }
        p.omega = 1.0 - zeta;
        Ok(p)
    }

    pub fn is_garch(&self) -> bool {
        self.alpha_d == 0.0
    }

    /// `omega / (1 - zeta)`.
    pub fn unconditional_variance(&self) -> Result<f64> {
        let zeta = stationary_persistence(self)?;
        Ok(self.omega / (1.0 - zeta))
    }
}

/// Volatility persistence `zeta = beta + alpha + alpha_d * v_d`.
pub fn persistence(params: &TarchParams) -> f64 {
    params.beta + params.alpha + params.alpha_d * params.innovation.truncated_variance()
}

fn stationary_persistence(params: &TarchParams) -> Result<f64> {
    let zeta = persistence(params);
    if zeta < 1.0 {
        Ok(zeta)
    } else {
        Err(Error::InvalidParams(format!("persistence {zeta} must be < 1")))
    }
}

/// `xi = E(beta + alpha eps^2 + alpha_d eps^2 1{eps <= 0})^2`.
pub fn xi(params: &TarchParams) -> Result<f64> {
    let m = innovation_moments(params.innovation)?;
    let TarchParams { alpha: a, alpha_d: ad, beta: b, .. } = *params;
    Ok(b * b + a * a * m.k + ad * ad * m.k_d + 2.0 * a * b + 2.0 * ad * b * m.v_d + 2.0 * a * ad * m.k_d)
}

/// Correlation between a return shock and the next conditional variance.
pub fn leverage_corr(params: &TarchParams) -> Result<f64> {
    let m = innovation_moments(params.innovation)?;
    let zeta = persistence(params);
    let var_eta = xi(params)? - zeta * zeta;
    if var_eta <= 1e-15 {
        return Err(Error::Degenerate(
            "volatility shocks have zero variance (alpha = alpha_d = 0)".into(),
        ));
    }
    Ok((params.alpha * m.s + params.alpha_d * m.s_d) / var_eta.sqrt())
}

/// `sum_{1 <= t1 < t2 <= T} zeta^(t2 - t1 - 1) = (T(1-zeta) - 1 + zeta^T) / (1-zeta)^2`.
pub fn aggregation_weight(zeta: f64, horizon: usize) -> f64 {
    let t = horizon as f64;
    if 1.0 - zeta >= 1e-3 {
        let q = 1.0 - zeta;
        (t * q - 1.0 + zeta.powi(horizon as i32)) / (q * q)
    } else {
        // cancellation-free direct sum near unit persistence
        (0..horizon.saturating_sub(1))
            .map(|j| (t - 1.0 - j as f64) * zeta.powi(j as i32))
            .sum()
    }
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        Err(Error::Domain("aggregation horizon must be at least one step".into()))
    } else {
        Ok(())
    }
}

/// Conditional variance of the `T`-step aggregated return given the next
/// one-step variance `sigma2_next`.
pub fn cond_variance_agg(params: &TarchParams, sigma2_next: f64, horizon: usize) -> Result<f64> {
    check_horizon(horizon)?;
    let zeta = stationary_persistence(params)?;
    let s2 = params.omega / (1.0 - zeta);
    let t = horizon as f64;
    Ok(t * s2 + (sigma2_next - s2) * (1.0 - zeta.powi(horizon as i32)) / (1.0 - zeta))
}

/// Unconditional skewness `S_T` of the `T`-step aggregated return.
///
/// `sigma3_ratio` is `E(sigma_t / sigma)^3` under the stationary law, which
/// has no closed form; see [`stationary_sigma3_ratio`].
pub fn uncond_skewness_term(params: &TarchParams, horizon: usize, sigma3_ratio: f64) -> Result<f64> {
    check_horizon(horizon)?;
    let m = innovation_moments(params.innovation)?;
    let zeta = stationary_persistence(params)?;
    let t = horizon as f64;
    let lev = params.alpha * m.s + params.alpha_d * m.s_d;
    let bracket = m.s / t.sqrt() + 3.0 * lev * aggregation_weight(zeta, horizon) / t.powf(1.5);
    Ok(bracket * sigma3_ratio)
}

/// Conditional third moment `E_t R_{t,t+T}^3` from a forecast term
/// structure `E_t sigma_{t+u}^3`, `u = 1..=T`.
pub fn cond_third_moment(params: &TarchParams, sigma3_forecast: &[f64], horizon: usize) -> Result<f64> {
    check_horizon(horizon)?;
    if sigma3_forecast.len() != horizon {
        return Err(Error::LengthMismatch { expected: horizon, got: sigma3_forecast.len() });
    }
    let m = innovation_moments(params.innovation)?;
    let zeta = stationary_persistence(params)?;
    let lev = params.alpha * m.s + params.alpha_d * m.s_d;
    let mut direct = 0.0;
    let mut feedback = 0.0;
    for (i, &s3) in sigma3_forecast.iter().enumerate() {
        let u = i + 1;
        direct += s3;
        feedback += (1.0 - zeta.powi((horizon - u) as i32)) / (1.0 - zeta) * s3;
    }
    Ok(m.s * direct + 3.0 * lev * feedback)
}

/// Conditional skewness of the aggregated return given `sigma2_next` and a
/// forecast `E_t sigma_{t+u}^3`.
pub fn cond_skewness(
    params: &TarchParams,
    sigma2_next: f64,
    sigma3_forecast: &[f64],
    horizon: usize,
) -> Result<f64> {
    let third = cond_third_moment(params, sigma3_forecast, horizon)?;
    let var = cond_variance_agg(params, sigma2_next, horizon)?;
    Ok(third / var.powf(1.5))
}

/// Unconditional kurtosis of one-step returns, `K_1 = k (1 - zeta^2) / (1 - xi)`.
pub fn uncond_kurtosis_1(params: &TarchParams) -> Result<f64> {
    let m = innovation_moments(params.innovation)?;
    let zeta = stationary_persistence(params)?;
    let xi = xi(params)?;
    if xi >= 1.0 {
        return Err(Error::InfiniteMoment(format!(
            "unconditional kurtosis is infinite for xi = {xi} >= 1"
        )));
    }
    Ok(m.k * (1.0 - zeta * zeta) / (1.0 - xi))
}

/// Standardized fourth-order moments of one-step returns entering `gamma_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnKurtosisInputs {
    /// `E r^4 / (E r^2)^2`
    pub k_r: f64,
    /// `E(r^4 1{r <= 0}) / (E r^2)^2`
    pub k_r_d: f64,
    /// `E(r^2 1{r <= 0}) / E r^2`
    pub v_r_d: f64,
}

impl ReturnKurtosisInputs {
    /// Exact stationary values: `sigma_t` is independent of `eps_t`, so the
    /// truncated moments factor through the shock moments.
    pub fn stationary(params: &TarchParams) -> Result<Self> {
        let m = innovation_moments(params.innovation)?;
        let k1 = uncond_kurtosis_1(params)?;
        Ok(Self { k_r: k1, k_r_d: k1 * m.k_d / m.k, v_r_d: m.v_d })
    }
}

/// First-lag autocovariance of squared returns in units of `sigma^4`:
/// `cov(r_{t-1}^2, r_t^2) / sigma^4`.
///
/// Expanding `E(r_{t-1}^2 sigma_t^2)` with the variance recursion gives
/// `alpha (k_r - 1) + alpha_d (k_r^d - v_r^d) + beta (k_r / k - 1)`.
pub fn gamma_1(params: &TarchParams, inputs: &ReturnKurtosisInputs) -> Result<f64> {
    let m = innovation_moments(params.innovation)?;
    let ReturnKurtosisInputs { k_r, k_r_d, v_r_d } = *inputs;
    Ok(params.alpha * (k_r - 1.0) + params.alpha_d * (k_r_d - v_r_d) + params.beta * (k_r / m.k - 1.0))
}

/// Unconditional kurtosis `K_T` of the `T`-step aggregated return for a
/// symmetric GARCH(1,1) (`alpha_d = 0`, symmetric shocks).
pub fn agg_kurtosis(params: &TarchParams, horizon: usize) -> Result<f64> {
    check_horizon(horizon)?;
    if params.alpha_d != 0.0 || !params.innovation.is_symmetric() {
        return Err(Error::Hypothesis(
            "aggregated kurtosis formula needs alpha_d = 0 and symmetric shocks".into(),
        ));
    }
    let k1 = uncond_kurtosis_1(params)?;
    let g1 = gamma_1(params, &ReturnKurtosisInputs::stationary(params)?)?;
    let zeta = persistence(params);
    let t = horizon as f64;
    Ok(3.0 + (k1 - 3.0) / t + 6.0 * g1 * aggregation_weight(zeta, horizon) / (t * t))
}
