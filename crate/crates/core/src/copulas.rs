//! Static single-period copulas expressed as factor samplers.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::factor::{lhp_losses, FactorSample, Idiosyncratic, LossDistribution};
use crate::math::{student_t_inv, ScaledStudentT};
use crate::rng::path_rng;

/// Market draws and common mixing values `W = sqrt(nu / chi2_nu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingSample {
    pub market: Vec<f64>,
    pub mixing: Vec<f64>,
}

impl MixingSample {
    /// Normalize the market draws and attach the mixing values.
    pub fn into_factor_sample(self) -> Result<FactorSample> {
        let mut s = FactorSample::normalized(self.market)?;
        s.mixing = Some(self.mixing);
        Ok(s)
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 2.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("student-t degrees of freedom must be > 2, got {nu}")))
    }
}

pub fn mixing_sample(nu: f64, n_paths: usize, seed: u64) -> Result<MixingSample> {
    check_nu(nu)?;
    let chi = ChiSquared::new(nu).map_err(|e| domain(e.to_string()))?;
    let (market, mixing) = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let z: f64 = rng.sample(StandardNormal);
            let c: f64 = chi.sample(&mut rng);
            (z, (nu / c).sqrt())
        })
        .unzip();
    Ok(MixingSample { market, mixing })
}

/// Student-t copula default threshold: the standard `t_nu` quantile of `p`,
/// the exact marginal of `W (b Z + sqrt(1 - b^2) eps)`.
pub fn t_copula_threshold(nu: f64, p: f64) -> Result<f64> {
    check_nu(nu)?;
    student_t_inv(p, nu)
}

/// Student-t copula LHP losses `(1 - R) Phi((d / W - b Z) / sqrt(1 - b^2))`.
pub fn t_copula_conditional_loss(
    nu: f64,
    b: f64,
    recovery: f64,
    p: f64,
    n_paths: usize,
    seed: u64,
) -> Result<LossDistribution> {
    if !(0.0..1.0).contains(&b) {
        return Err(domain(format!("factor loading must lie in [0,1), got {b}")));
    }
    let d = t_copula_threshold(nu, p)?;
    let sample = mixing_sample(nu, n_paths, seed)?.into_factor_sample()?;
    Ok(lhp_losses(&sample, b, Idiosyncratic::Gaussian, d, recovery))
}

/// Normalized unit-variance Student-t market draws for the double-t copula.
pub fn double_t_factor_sample(nu_m: f64, n_paths: usize, seed: u64) -> Result<FactorSample> {
    let dist = ScaledStudentT::new(nu_m)?;
    let raw = (0..n_paths)
        .into_par_iter()
        .map(|i| dist.sample(&mut path_rng(seed, i as u64)))
        .collect();
    FactorSample::normalized(raw)
}

/// Normalized standard normal market draws.
pub fn gaussian_factor_sample(n_paths: usize, seed: u64) -> Result<FactorSample> {
    let raw = (0..n_paths)
        .into_par_iter()
        .map(|i| path_rng(seed, i as u64).sample(StandardNormal))
        .collect();
    FactorSample::normalized(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{FactorKind, FactorModelSpec};
    use crate::math::{norm_cdf, scaled_t_cdf};
    use crate::stats;

    #[test]
    fn mixing_values_are_positive() {
        let m = mixing_sample(12.0, 10_000, 1).unwrap();
        assert!(m.mixing.iter().all(|&w| w > 0.0));
        let s = m.into_factor_sample().unwrap();
        assert!((stats::variance(&s.values) - 1.0).abs() < 1e-12);
        assert!(mixing_sample(2.0, 10, 1).is_err());
    }

    #[test]
    fn zero_loading_mean_loss() {
        let l = t_copula_conditional_loss(12.0, 0.0, 0.4, 0.0961, 100_000, 2).unwrap();
        let se = stats::std_error(&l.losses);
        assert!((l.mean() - 0.6 * 0.0961).abs() < 3.0 * se, "{} vs {}", l.mean(), 0.6 * 0.0961);
        // still random through the mixing variable
        assert!(stats::variance(&l.losses) > 0.0);
    }

    #[test]
    fn t_copula_gaussian_limit() {
        let b = 0.3f64.sqrt();
        let lt = t_copula_conditional_loss(1e6, b, 0.4, 0.0961, 50_000, 3).unwrap();
        let g = gaussian_factor_sample(50_000, 3).unwrap();
        let d = crate::math::norm_inv_cdf(0.0961).unwrap();
        let lg = lhp_losses(&g, b, Idiosyncratic::Gaussian, d, 0.4);
        for &k in &[0.01, 0.03, 0.1] {
            let a = lt.expected_equity_loss_se(k);
            let c = lg.expected_equity_loss(k);
            assert!((a.value - c).abs() < 3.0 * a.std_error, "k {k}");
        }
    }

    #[test]
    fn double_t_sample_properties() {
        let s = double_t_factor_sample(12.0, 200_000, 4).unwrap();
        assert!((stats::variance(&s.values) - 1.0).abs() < 1e-12);
        let d = stats::ks_statistic(&s.values, |x| scaled_t_cdf(x, 12.0).unwrap());
        assert!(d < stats::ks_critical_99(s.len()));
        let near_normal = double_t_factor_sample(1e6, 20_000, 5).unwrap();
        let d = stats::ks_statistic(&near_normal.values, norm_cdf);
        assert!(d < stats::ks_critical_99(near_normal.len()));
        assert_eq!(s, double_t_factor_sample(12.0, 200_000, 4).unwrap());
    }

    #[test]
    fn double_t_marginal_calibration() {
        let idio = Idiosyncratic::StudentT { nu: 12.0 };
        let spec = FactorModelSpec::new(FactorKind::DoubleT { nu_m: 12.0 }, 0.3, idio, 0.4).unwrap();
        let s = crate::factor::sample_factor(&spec, 1, 20_000, 6).unwrap();
        let d = spec.threshold(&s, 0.0961).unwrap();
        let q = crate::factor::conditional_default_probs(&s, spec.loading, idio, d);
        assert!((stats::mean(&q) - 0.0961).abs() < 1e-10);
    }
}
