//! One-factor LHP Monte Carlo engine.
//!
//! Latent returns are `R_i = b R_m + sqrt(1 - b^2) E_i`. The market factor is
//! simulated, normalized to unit sample variance, and each path is mapped to
//! its conditional default probability; the portfolio loss of a path is
//! `(1 - R)` times that probability.

use rayon::prelude::*;

use crate::copulas;
use crate::error::{domain, Error, Result};
use crate::gaussian::{equity_payoff, tranche_payoff, TrancheSpec};
use crate::math::{expand_bracket, find_root_monotone, norm_cdf, norm_inv_cdf, scaled_t_cdf, scaled_t_inv};
use crate::rng::derive_seed_indexed;
use crate::stats;
use crate::tarch::{aggregated_returns, McEstimate, PathConfig, TarchParams};

/// Distribution of the idiosyncratic term `E_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Idiosyncratic {
    Gaussian,
    /// Unit-variance scaled Student-t.
    StudentT { nu: f64 },
}

impl Idiosyncratic {
    fn validate(&self) -> Result<()> {
        match *self {
            Idiosyncratic::StudentT { nu } if !(nu > 2.0) => {
                Err(domain(format!("student-t idiosyncratic returns need nu > 2, got {nu}")))
            }
            _ => Ok(()),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Idiosyncratic::Gaussian => norm_cdf(x),
            Idiosyncratic::StudentT { nu } => scaled_t_cdf(x, nu).unwrap_or(f64::NAN),
        }
    }

    pub fn inv_cdf(&self, p: f64) -> Result<f64> {
        match *self {
            Idiosyncratic::Gaussian => norm_inv_cdf(p),
            Idiosyncratic::StudentT { nu } => scaled_t_inv(p, nu),
        }
    }
}

/// Law of the market factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorKind {
    GaussianStatic,
    /// Time-aggregated TARCH returns; `omega` is replaced by `1 - zeta`.
    Tarch(TarchParams),
    /// Unit-variance Student-t market factor (double-t copula).
    DoubleT { nu_m: f64 },
    /// Student-t copula: Gaussian factor and idiosyncratic terms scaled by a
    /// common mixing variable `sqrt(nu / chi2_nu)`.
    StudentTMixing { nu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorModelSpec {
    pub factor: FactorKind,
    /// Loading `b`; the latent linear correlation is `b^2`.
    pub loading: f64,
    pub idiosyncratic: Idiosyncratic,
    pub recovery: f64,
}

impl FactorModelSpec {
    pub fn new(factor: FactorKind, rho: f64, idiosyncratic: Idiosyncratic, recovery: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(domain(format!("linear correlation must lie in [0,1), got {rho}")));
        }
        let spec = Self { factor, loading: rho.sqrt(), idiosyncratic, recovery };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rho(&self) -> f64 {
        self.loading * self.loading
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.loading) {
            return Err(domain(format!("factor loading must lie in [0,1), got {}", self.loading)));
        }
        if !(0.0..1.0).contains(&self.recovery) {
            return Err(domain(format!("recovery must lie in [0,1), got {}", self.recovery)));
        }
        self.idiosyncratic.validate()?;
        match self.factor {
            FactorKind::DoubleT { nu_m: nu } | FactorKind::StudentTMixing { nu } if !(nu > 2.0) => {
                Err(domain(format!("student-t factor needs nu > 2, got {nu}")))
            }
            FactorKind::StudentTMixing { .. } if self.idiosyncratic != Idiosyncratic::Gaussian => Err(domain(
                "the student-t copula mixes Gaussian idiosyncratic terms; use Idiosyncratic::Gaussian",
            )),
            _ => Ok(()),
        }
    }

    /// Factor draws for every horizon (in model steps). Static factors
    /// ignore the horizon and share one sample.
    pub fn sample_horizons(&self, horizons: &[usize], n_paths: usize, seed: u64) -> Result<Vec<FactorSample>> {
        self.validate()?;
        match self.factor {
            FactorKind::Tarch(params) => {
                if horizons.contains(&0) {
                    return Err(domain("aggregation horizon must be at least one step"));
                }
                let unit = TarchParams::unit_variance(params.alpha, params.alpha_d, params.beta, params.innovation)?;
                let agg = aggregated_returns(&unit, &PathConfig::new(0, n_paths, seed), horizons)?;
                agg.into_iter().map(FactorSample::normalized).collect()
            }
            _ => {
                let s = self.sample_static(n_paths, seed)?;
                Ok(vec![s; horizons.len()])
            }
        }
    }

    fn sample_static(&self, n_paths: usize, seed: u64) -> Result<FactorSample> {
        match self.factor {
            FactorKind::GaussianStatic => copulas::gaussian_factor_sample(n_paths, seed),
            FactorKind::DoubleT { nu_m } => copulas::double_t_factor_sample(nu_m, n_paths, seed),
            FactorKind::StudentTMixing { nu } => copulas::mixing_sample(nu, n_paths, seed)?.into_factor_sample(),
            FactorKind::Tarch(_) => unreachable!("dynamic factor"),
        }
    }

    /// Default threshold for probability `p`: the exact marginal quantile
    /// for the Student-t copula, Monte Carlo calibration otherwise.
    pub fn threshold(&self, sample: &FactorSample, p: f64) -> Result<f64> {
        match self.factor {
            FactorKind::StudentTMixing { nu } => copulas::t_copula_threshold(nu, p),
            _ => calibrate_threshold(sample, self.loading, self.idiosyncratic, p),
        }
    }

    /// Threshold plus LHP loss mapping at default probability `p`.
    pub fn losses(&self, sample: &FactorSample, p: f64) -> Result<LossDistribution> {
        let d = self.threshold(sample, p)?;
        Ok(lhp_losses(sample, self.loading, self.idiosyncratic, d, self.recovery))
    }
}

/// Normalized market-factor draws, optionally with per-path mixing values.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSample {
    pub values: Vec<f64>,
    pub mixing: Option<Vec<f64>>,
}

impl FactorSample {
    /// Divide raw draws by their sample standard deviation.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let sd = stats::variance(&raw).sqrt();
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::Degenerate(format!("factor sample standard deviation is {sd}")));
        }
        Ok(Self { values: raw.into_iter().map(|x| x / sd).collect(), mixing: None })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Draw the normalized factor for `spec` at a single horizon.
pub fn sample_factor(spec: &FactorModelSpec, horizon_steps: usize, n_paths: usize, seed: u64) -> Result<FactorSample> {
    Ok(spec.sample_horizons(&[horizon_steps], n_paths, seed)?.remove(0))
}

fn cond_probs(sample: &FactorSample, b: f64, idio: Idiosyncratic, d: f64) -> Vec<f64> {
    let s = (1.0 - b * b).sqrt();
    match &sample.mixing {
        None => sample.values.par_iter().map(|&x| idio.cdf((d - b * x) / s)).collect(),
        Some(w) => sample
            .values
            .par_iter()
            .zip(w.par_iter())
            .map(|(&x, &w)| norm_cdf((d / w - b * x) / s))
            .collect(),
    }
}

/// Conditional default probability `G((d - b x) / sqrt(1 - b^2))` of every path.
pub fn conditional_default_probs(sample: &FactorSample, b: f64, idio: Idiosyncratic, d: f64) -> Vec<f64> {
    cond_probs(sample, b, idio, d)
}

/// Solve `mean_i G((d - b x_i) / sqrt(1 - b^2)) = p` for `d`.
pub fn calibrate_threshold(sample: &FactorSample, b: f64, idio: Idiosyncratic, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("default probability must lie in (0,1), got {p}")));
    }
    if !(0.0..1.0).contains(&b) {
        return Err(domain(format!("factor loading must lie in [0,1), got {b}")));
    }
    idio.validate()?;
    if sample.is_empty() {
        return Err(domain("empty factor sample"));
    }
    if b == 0.0 && sample.mixing.is_none() {
        return idio.inv_cdf(p);
    }
    let f = |d: f64| stats::mean(&cond_probs(sample, b, idio, d)) - p;
    let start = idio.inv_cdf(p)?;
    let (lo, hi) = expand_bracket(f, start - 1.0, start + 1.0, 200)?;
    find_root_monotone(f, lo, hi, 1e-13)
}

/// Per-path LHP losses.
#[derive(Debug, Clone, PartialEq)]
pub struct LossDistribution {
    pub losses: Vec<f64>,
    pub recovery: f64,
}

impl LossDistribution {
    pub fn mean(&self) -> f64 {
        stats::mean(&self.losses)
    }

    pub fn expected_equity_loss(&self, k: f64) -> f64 {
        expected_tranche_loss_mc(self, k)
    }

    pub fn expected_equity_loss_se(&self, k: f64) -> McEstimate {
        let pay: Vec<f64> = self.losses.iter().map(|&l| equity_payoff(l, k)).collect();
        McEstimate { value: stats::mean(&pay), std_error: stats::std_error(&pay) }
    }

    pub fn expected_tranche_loss(&self, tranche: &TrancheSpec) -> f64 {
        self.losses.iter().map(|&l| tranche_payoff(l, tranche)).sum::<f64>() / self.losses.len() as f64
    }

    /// Empirical `P(L <= l)`.
    pub fn cdf(&self, l: f64) -> f64 {
        self.losses.iter().filter(|&&x| x <= l).count() as f64 / self.losses.len() as f64
    }
}

/// Map each factor draw to its LHP loss `(1 - R) G((d - b x) / sqrt(1 - b^2))`.
pub fn lhp_losses(sample: &FactorSample, b: f64, idio: Idiosyncratic, d: f64, recovery: f64) -> LossDistribution {
    let lgd = 1.0 - recovery;
    let losses = cond_probs(sample, b, idio, d).into_iter().map(|q| lgd * q).collect();
    LossDistribution { losses, recovery }
}

/// `E min(L, K)` as the path average.
pub fn expected_tranche_loss_mc(loss_dist: &LossDistribution, k: f64) -> f64 {
    loss_dist.losses.iter().map(|&l| equity_payoff(l, k)).sum::<f64>() / loss_dist.losses.len() as f64
}

/// `rho_d(p) = (p12 - p^2) / (p (1 - p))` with `p12` the mean squared
/// conditional default probability.
pub fn default_corr_from_sample(spec: &FactorModelSpec, sample: &FactorSample, p: f64) -> Result<f64> {
    let d = spec.threshold(sample, p)?;
    let q = cond_probs(sample, spec.loading, spec.idiosyncratic, d);
    let p12 = q.iter().map(|x| x * x).sum::<f64>() / q.len() as f64;
    Ok((p12 - p * p) / (p * (1.0 - p)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultCorrPoint {
    pub p: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Default correlation curve with percentile bounds over `n_reps`
/// independent repetitions of `n_paths` factor draws.
pub fn default_corr_mc(
    spec: &FactorModelSpec,
    horizon_steps: usize,
    p_grid: &[f64],
    n_paths: usize,
    seed: u64,
    n_reps: usize,
    level: f64,
) -> Result<Vec<DefaultCorrPoint>> {
    if n_reps == 0 {
        return Err(domain("need at least one repetition"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain(format!("confidence level must lie in (0,1), got {level}")));
    }
    let reps: Vec<Vec<f64>> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let s = derive_seed_indexed(seed, "default-corr", r as u64);
            let sample = sample_factor(spec, horizon_steps, n_paths, s)?;
            p_grid.iter().map(|&p| default_corr_from_sample(spec, &sample, p)).collect()
        })
        .collect::<Result<_>>()?;
    let tail = 0.5 * (1.0 - level);
    Ok(p_grid
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let mut v: Vec<f64> = reps.iter().map(|r| r[j]).collect();
            let estimate = stats::mean(&v);
            v.sort_by(f64::total_cmp);
            DefaultCorrPoint {
                p,
                estimate,
                lower: stats::quantile_sorted(&v, tail),
                upper: stats::quantile_sorted(&v, 1.0 - tail),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{expected_equity_loss_gauss, gaussian_default_corr};
    use crate::tarch::Innovation;

    fn gauss(rho: f64) -> FactorModelSpec {
        FactorModelSpec::new(FactorKind::GaussianStatic, rho, Idiosyncratic::Gaussian, 0.4).unwrap()
    }

    #[test]
    fn zero_loading_threshold_is_marginal_quantile() {
        let s = sample_factor(&gauss(0.3), 1, 1000, 1).unwrap();
        let d = calibrate_threshold(&s, 0.0, Idiosyncratic::Gaussian, 0.05).unwrap();
        assert_eq!(d, norm_inv_cdf(0.05).unwrap());
        let t = Idiosyncratic::StudentT { nu: 12.0 };
        assert_eq!(calibrate_threshold(&s, 0.0, t, 0.05).unwrap(), scaled_t_inv(0.05, 12.0).unwrap());
    }

    #[test]
    fn calibration_post_condition() {
        let spec = gauss(0.3);
        let s = sample_factor(&spec, 1, 20_000, 2).unwrap();
        for idio in [Idiosyncratic::Gaussian, Idiosyncratic::StudentT { nu: 12.0 }] {
            let d = calibrate_threshold(&s, spec.loading, idio, 0.0961).unwrap();
            let achieved = stats::mean(&conditional_default_probs(&s, spec.loading, idio, d));
            assert!((achieved - 0.0961).abs() < 1e-10);
        }
        let d = calibrate_threshold(&s, spec.loading, Idiosyncratic::Gaussian, 0.0961).unwrap();
        assert!((d - norm_inv_cdf(0.0961).unwrap()).abs() < 0.02);
    }

    #[test]
    fn normalized_sample_has_unit_variance() {
        let s = sample_factor(&gauss(0.3), 1, 5000, 3).unwrap();
        assert!((stats::variance(&s.values) - 1.0).abs() < 1e-12);
        assert!(matches!(FactorSample::normalized(vec![1.0; 10]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn loss_limits() {
        let spec = gauss(0.0);
        let s = sample_factor(&spec, 1, 1000, 4).unwrap();
        let l = spec.losses(&s, 0.0961).unwrap();
        assert!(l.losses.iter().all(|&x| (x - 0.6 * 0.0961).abs() < 1e-15));
        let b = 0.999_999_f64;
        let s = sample_factor(&gauss(0.3), 1, 20_000, 5).unwrap();
        let d = calibrate_threshold(&s, b, Idiosyncratic::Gaussian, 0.1).unwrap();
        let l = lhp_losses(&s, b, Idiosyncratic::Gaussian, d, 0.4);
        let extreme = l.losses.iter().filter(|&&x| !(1e-6..0.6 - 1e-6).contains(&x)).count();
        assert!(extreme as f64 > 0.99 * l.losses.len() as f64);
        assert!((l.cdf(0.3) - 0.9).abs() < 0.01);
    }

    #[test]
    fn gaussian_factor_reproduces_closed_forms() {
        let spec = gauss(0.3);
        let s = sample_factor(&spec, 1, 100_000, 6).unwrap();
        let l = spec.losses(&s, 0.0961).unwrap();
        assert!(l.losses.iter().all(|&x| (0.0..=0.6).contains(&x)));
        for &k in &[0.01, 0.03, 0.07, 0.15, 0.3] {
            let mc = l.expected_equity_loss_se(k);
            let cf = expected_equity_loss_gauss(k, 0.0961, 0.4, 0.3).unwrap();
            assert!((mc.value - cf).abs() < 3.0 * mc.std_error + 1e-6, "k {k}: {mc:?} vs {cf}");
        }
        let rd = default_corr_from_sample(&spec, &s, 0.05).unwrap();
        let cf = gaussian_default_corr(0.05, 0.3).unwrap();
        assert!((rd - cf).abs() < 0.01, "{rd} vs {cf}");
    }

    #[test]
    fn tranche_loss_is_nondecreasing_and_concave_in_k() {
        let spec = gauss(0.3);
        let s = sample_factor(&spec, 1, 10_000, 7).unwrap();
        let l = spec.losses(&s, 0.0961).unwrap();
        let ks: Vec<f64> = (1..=30).map(|i| i as f64 / 100.0).collect();
        let el: Vec<f64> = ks.iter().map(|&k| expected_tranche_loss_mc(&l, k)).collect();
        for w in el.windows(3) {
            assert!(w[1] >= w[0] && w[2] >= w[1]);
            assert!(w[2] - w[1] <= w[1] - w[0] + 1e-15);
        }
        for (k, e) in ks.iter().zip(&el) {
            assert!(*e <= *k);
        }
        assert!((expected_tranche_loss_mc(&l, 0.7) - l.mean()).abs() < 1e-15);
    }

    #[test]
    fn tarch_factor_is_skewed_and_fat_tailed() {
        let p = TarchParams::unit_variance(0.01, 0.10, 0.92, Innovation::Gaussian).unwrap();
        let spec = FactorModelSpec::new(FactorKind::Tarch(p), 0.3, Idiosyncratic::Gaussian, 0.4).unwrap();
        let s = sample_factor(&spec, 260, 20_000, 8).unwrap();
        assert!(stats::skewness(&s.values) < 0.0);
        assert!(stats::kurtosis(&s.values) > 3.0);
        assert_eq!(s, sample_factor(&spec, 260, 20_000, 8).unwrap());
    }

    #[test]
    fn default_corr_bounds_bracket_estimate() {
        let pts = default_corr_mc(&gauss(0.3), 1, &[0.02, 0.05], 5000, 9, 20, 0.95).unwrap();
        for pt in &pts {
            assert!(pt.lower <= pt.estimate && pt.estimate <= pt.upper);
            let cf = gaussian_default_corr(pt.p, 0.3).unwrap();
            assert!(pt.lower - 0.01 <= cf && cf <= pt.upper + 0.01);
        }
        let zero = default_corr_mc(&gauss(0.0), 1, &[0.05], 2000, 9, 3, 0.95).unwrap();
        assert!(zero[0].estimate.abs() < 1e-12);
    }
}
