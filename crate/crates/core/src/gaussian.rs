//! Gaussian-copula large homogeneous portfolio (LHP) analytics.
//!
//! Loss `L = (1 - R) Phi((Phi^-1(p) - sqrt(rho) Z) / sqrt(1 - rho))` for a
//! standard normal market factor `Z`. Notional is normalized to one.

use crate::error::{domain, Result};
use crate::math::{binorm_cdf, binorm_pdf, norm_cdf, norm_inv_cdf};

/// Tranche `(k_down, k_up]` of the portfolio loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrancheSpec {
    pub k_down: f64,
    pub k_up: f64,
}

impl TrancheSpec {
    pub fn new(k_down: f64, k_up: f64) -> Result<Self> {
        if !(0.0 <= k_down && k_down < k_up && k_up <= 1.0) {
            return Err(domain(format!("tranche needs 0 <= k_down < k_up <= 1, got ({k_down}, {k_up}]")));
        }
        Ok(Self { k_down, k_up })
    }

    pub fn equity(k: f64) -> Result<Self> {
        Self::new(0.0, k)
    }
}

/// `(x - K_d)+ - (x - K_u)+`
pub fn tranche_payoff(loss: f64, tranche: &TrancheSpec) -> f64 {
    (loss - tranche.k_down).max(0.0) - (loss - tranche.k_up).max(0.0)
}

/// Equity tranche payoff `min(x, K)` for `x >= 0`.
pub fn equity_payoff(loss: f64, k: f64) -> f64 {
    loss.min(k)
}

/// How a hazard rate maps to a cumulative default probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PConvention {
    /// `1 - exp(-h t)`
    #[default]
    Continuous,
    /// `1 - (1 - h)^t`
    Discrete,
}

pub fn hazard_to_p(h: f64, t: f64) -> Result<f64> {
    hazard_to_p_with(h, t, PConvention::Continuous)
}

pub fn hazard_to_p_with(h: f64, t: f64, convention: PConvention) -> Result<f64> {
    if !(h >= 0.0 && h.is_finite()) || !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("hazard needs h >= 0 and t > 0, got h = {h}, t = {t}")));
    }
    Ok(match convention {
        PConvention::Continuous => -(-h * t).exp_m1(),
        PConvention::Discrete => {
            if h >= 1.0 {
                return Err(domain(format!("discrete hazard must be < 1, got {h}")));
            }
            -(t * (-h).ln_1p()).exp_m1()
        }
    })
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("default probability must lie in (0,1), got {p}")))
    }
}

fn check_recovery(recovery: f64) -> Result<()> {
    if (0.0..1.0).contains(&recovery) {
        Ok(())
    } else {
        Err(domain(format!("recovery must lie in [0,1), got {recovery}")))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("correlation must lie in (0,1), got {rho}")))
    }
}

fn check_common(k: f64, p: f64, recovery: f64, rho: f64) -> Result<()> {
    check_p(p)?;
    check_recovery(recovery)?;
    check_rho(rho)?;
    if !(k > 0.0 && k <= 1.0) {
        return Err(domain(format!("detachment must lie in (0,1], got {k}")));
    }
    Ok(())
}

/// `d1 = Phi^-1(p)/sqrt(rho) - sqrt(1-rho)/sqrt(rho) Phi^-1(K/(1-R))`, for
/// `K` in `(0, 1-R)`.
pub fn vasicek_d1(k: f64, p: f64, recovery: f64, rho: f64) -> Result<f64> {
    check_p(p)?;
    check_recovery(recovery)?;
    check_rho(rho)?;
    let u = k / (1.0 - recovery);
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("loss level must lie in (0, 1-R) = (0, {}), got {k}", 1.0 - recovery)));
    }
    let sr = rho.sqrt();
    Ok(norm_inv_cdf(p)? / sr - (1.0 - rho).sqrt() / sr * norm_inv_cdf(u)?)
}

/// `P(L <= l) = 1 - Phi(d1(l))`.
pub fn vasicek_loss_cdf(l: f64, p: f64, recovery: f64, rho: f64) -> Result<f64> {
    Ok(norm_cdf(-vasicek_d1(l, p, recovery, rho)?))
}

/// `E min(L, K)` in closed form.
pub fn expected_equity_loss_gauss(k: f64, p: f64, recovery: f64, rho: f64) -> Result<f64> {
    check_common(k, p, recovery, rho)?;
    let lgd = 1.0 - recovery;
    if k >= lgd {
        return Ok(lgd * p);
    }
    let d1 = vasicek_d1(k, p, recovery, rho)?;
    let a = norm_inv_cdf(p)?;
    Ok(lgd * binorm_cdf(a, -d1, -rho.sqrt())? + k * norm_cdf(d1))
}

/// Expected loss of a general tranche by equity decomposition.
pub fn expected_tranche_loss_gauss(tranche: &TrancheSpec, p: f64, recovery: f64, rho: f64) -> Result<f64> {
    let up = expected_equity_loss_gauss(tranche.k_up, p, recovery, rho)?;
    if tranche.k_down == 0.0 {
        return Ok(up);
    }
    Ok(up - expected_equity_loss_gauss(tranche.k_down, p, recovery, rho)?)
}

/// `d/d rho E min(L, K) = -(1-R)/(2 sqrt(rho)) phi(Phi^-1(p), -d1; -sqrt(rho))`.
pub fn d_expected_loss_d_rho(k: f64, p: f64, recovery: f64, rho: f64) -> Result<f64> {
    check_common(k, p, recovery, rho)?;
    let lgd = 1.0 - recovery;
    if k >= lgd {
        return Ok(0.0);
    }
    let d1 = vasicek_d1(k, p, recovery, rho)?;
    let a = norm_inv_cdf(p)?;
    Ok(-lgd / (2.0 * rho.sqrt()) * binorm_pdf(a, -d1, -rho.sqrt())?)
}

/// `d/dK E min(L, K) = P(L > K) = Phi(d1)`.
pub fn d_expected_loss_d_k(k: f64, p: f64, recovery: f64, rho: f64) -> Result<f64> {
    check_common(k, p, recovery, rho)?;
    if k >= 1.0 - recovery {
        return Ok(0.0);
    }
    Ok(norm_cdf(vasicek_d1(k, p, recovery, rho)?))
}

/// `d/dp E min(L, K) = (1-R) Phi((-d1 + sqrt(rho) Phi^-1(p)) / sqrt(1-rho))`.
pub fn d_expected_loss_d_p(k: f64, p: f64, recovery: f64, rho: f64) -> Result<f64> {
    check_common(k, p, recovery, rho)?;
    let lgd = 1.0 - recovery;
    if k >= lgd {
        return Ok(lgd);
    }
    let d1 = vasicek_d1(k, p, recovery, rho)?;
    let a = norm_inv_cdf(p)?;
    Ok(lgd * norm_cdf((-d1 + rho.sqrt() * a) / (1.0 - rho).sqrt()))
}

/// Hazard sensitivity `d/dh E min(L, K)` with `p_t = 1 - exp(-h t)`, so
/// `dp_t/dh = (1 - p_t) t`. At `p_t = 0` the continuous limit `t (1-R)` is
/// returned.
pub fn d_expected_loss_d_h(k: f64, p_t: f64, recovery: f64, rho: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("horizon must be positive, got {t}")));
    }
    if p_t == 0.0 {
        check_recovery(recovery)?;
        check_rho(rho)?;
        return Ok(t * (1.0 - recovery));
    }
    Ok((1.0 - p_t) * t * d_expected_loss_d_p(k, p_t, recovery, rho)?)
}

/// Variance of the LHP loss, `(1-R)^2 p (1-p) rho_d`.
pub fn loss_variance(p: f64, recovery: f64, rho_d: f64) -> f64 {
    (1.0 - recovery).powi(2) * p * (1.0 - p) * rho_d
}

/// Pairwise default correlation `(Phi2(d_p, d_p; rho) - p^2) / (p (1-p))`.
pub fn gaussian_default_corr(p: f64, rho: f64) -> Result<f64> {
    check_p(p)?;
    if !(0.0..1.0).contains(&rho) {
        return Err(domain(format!("correlation must lie in [0,1), got {rho}")));
    }
    let d = norm_inv_cdf(p)?;
    Ok((binorm_cdf(d, d, rho)? - p * p) / (p * (1.0 - p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::normal::norm_pdf;
    use crate::math::quad::integrate;

    // E min(L, K) by direct quadrature over the market factor
    fn el_oracle(k: f64, p: f64, r: f64, rho: f64) -> f64 {
        let a = norm_inv_cdf(p).unwrap();
        let f = |z: f64| {
            let l = (1.0 - r) * norm_cdf((a - rho.sqrt() * z) / (1.0 - rho).sqrt());
            l.min(k) * norm_pdf(z)
        };
        // split at the kink where L = K
        let u = k / (1.0 - r);
        let z_k = if u < 1.0 {
            (a - (1.0 - rho).sqrt() * norm_inv_cdf(u).unwrap()) / rho.sqrt()
        } else {
            -40.0
        };
        let z_k = z_k.clamp(-40.0, 40.0);
        integrate(f, -40.0, z_k, 1e-14).unwrap() + integrate(f, z_k, 40.0, 1e-14).unwrap()
    }

    #[test]
    fn payoffs() {
        let t = TrancheSpec::new(0.03, 0.07).unwrap();
        assert_eq!(tranche_payoff(0.0, &t), 0.0);
        assert!((tranche_payoff(1.0, &t) - 0.04).abs() < 1e-15);
        assert!((tranche_payoff(0.05, &t) - 0.02).abs() < 1e-15);
        assert!(TrancheSpec::new(0.07, 0.03).is_err());
        for &x in &[0.0, 0.01, 0.04, 0.2] {
            let e = TrancheSpec::equity(0.07).unwrap();
            let d = TrancheSpec::equity(0.03).unwrap();
            assert_eq!(tranche_payoff(x, &t), tranche_payoff(x, &e) - tranche_payoff(x, &d));
        }
    }

    #[test]
    fn d1_values() {
        assert!(vasicek_d1(0.3, 0.5, 0.4, 0.5).unwrap().abs() < 1e-15);
        let d = vasicek_d1(0.03, 0.0961, 0.4, 0.3).unwrap();
        let a = norm_inv_cdf(0.0961).unwrap();
        let b = norm_inv_cdf(0.05).unwrap();
        let expect = a / 0.3f64.sqrt() - (0.7f64 / 0.3f64).sqrt() * b;
        assert!((d - expect).abs() < 1e-14);
        assert!(vasicek_d1(0.6 - 1e-13, 0.1, 0.4, 0.3).unwrap() < -10.0);
        assert!(vasicek_d1(0.6, 0.1, 0.4, 0.3).is_err());
        assert!(vasicek_d1(0.03, 0.1, 0.4, 1.0).is_err());
    }

    #[test]
    fn loss_cdf_median_and_limits() {
        let (p, r, rho): (f64, f64, f64) = (0.0961, 0.4, 0.3);
        let median = (1.0 - r) * norm_cdf(norm_inv_cdf(p).unwrap() / (1.0 - rho).sqrt());
        assert!((vasicek_loss_cdf(median, p, r, rho).unwrap() - 0.5).abs() < 1e-12);
        let mean = (1.0 - r) * p;
        assert!(vasicek_loss_cdf(0.9 * mean, p, r, 1e-6).unwrap() < 1e-6);
        assert!(vasicek_loss_cdf(1.1 * mean, p, r, 1e-6).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn expected_loss_matches_quadrature() {
        for &(k, p, r, rho) in &[
            (0.03, 0.0961, 0.4, 0.3),
            (0.01, 0.02, 0.4, 0.1),
            (0.15, 0.05, 0.3, 0.6),
            (0.3, 0.2, 0.0, 0.9),
            (0.05, 0.005, 0.5, 0.05),
        ] {
            let got = expected_equity_loss_gauss(k, p, r, rho).unwrap();
            let want = el_oracle(k, p, r, rho);
            assert!((got - want).abs() < 1e-11, "{k} {p} {r} {rho}: {got} vs {want}");
        }
    }

    #[test]
    fn expected_loss_limits() {
        let (p, r) = (0.0961, 0.4);
        assert_eq!(expected_equity_loss_gauss(0.6, p, r, 0.3).unwrap(), 0.6 * p);
        assert_eq!(expected_equity_loss_gauss(1.0, p, r, 0.3).unwrap(), 0.6 * p);
        for &k in &[0.01, 0.03, 0.1, 0.3] {
            let lo = expected_equity_loss_gauss(k, p, r, 1e-10).unwrap();
            assert!((lo - k.min(0.6 * p)).abs() < 1e-6, "k {k}: {lo}");
            let hi = expected_equity_loss_gauss(k, p, r, 1.0 - 1e-12).unwrap();
            assert!((hi - p * k.min(0.6)).abs() < 1e-6, "k {k}: {hi}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for &(k, p, r, rho) in &[(0.03, 0.0961, 0.4, 0.3), (0.12, 0.03, 0.4, 0.5), (0.02, 0.2, 0.2, 0.15)] {
            let f = |k: f64, p: f64, rho: f64| expected_equity_loss_gauss(k, p, r, rho).unwrap();
            let fd_rho = (f(k, p, rho + h) - f(k, p, rho - h)) / (2.0 * h);
            let fd_k = (f(k + h, p, rho) - f(k - h, p, rho)) / (2.0 * h);
            let fd_p = (f(k, p + h, rho) - f(k, p - h, rho)) / (2.0 * h);
            assert!((d_expected_loss_d_rho(k, p, r, rho).unwrap() - fd_rho).abs() < 1e-6);
            assert!((d_expected_loss_d_k(k, p, r, rho).unwrap() - fd_k).abs() < 1e-6);
            assert!((d_expected_loss_d_p(k, p, r, rho).unwrap() - fd_p).abs() < 1e-6);
            assert!(d_expected_loss_d_rho(k, p, r, rho).unwrap() < 0.0);
        }
    }

    #[test]
    fn hazard_derivative() {
        let (k, t, hz, r, rho) = (0.03, 5.0, 0.01, 0.4, 0.3);
        let el = |h: f64| expected_equity_loss_gauss(k, hazard_to_p(h, t).unwrap(), r, rho).unwrap();
        let step = 1e-5;
        let fd = (el(hz + step) - el(hz - step)) / (2.0 * step);
        let an = d_expected_loss_d_h(k, hazard_to_p(hz, t).unwrap(), r, rho, t).unwrap();
        assert!(((an - fd) / an).abs() < 1e-6, "{an} vs {fd}");
        let pt = hazard_to_p(hz, t).unwrap();
        let lin = d_expected_loss_d_h(0.7, pt, r, rho, t).unwrap();
        assert!((lin - (1.0 - pt) * t * 0.6).abs() < 1e-15);
        let tiny = d_expected_loss_d_h(k, hazard_to_p(1e-12, t).unwrap(), r, rho, t).unwrap();
        assert!((tiny - t * 0.6).abs() < 1e-6);
        assert_eq!(d_expected_loss_d_h(k, 0.0, r, rho, t).unwrap(), t * 0.6);
    }

    #[test]
    fn hazard_conventions() {
        assert!((hazard_to_p(0.02, 5.0).unwrap() - 0.095_162_581_964_040_4).abs() < 1e-15);
        let d = hazard_to_p_with(0.02, 5.0, PConvention::Discrete).unwrap();
        assert!((d - (1.0 - 0.98f64.powi(5))).abs() < 1e-15);
        assert!((d - 0.0961).abs() < 1e-4);
        assert!(hazard_to_p(-0.1, 1.0).is_err());
    }

    #[test]
    fn default_correlation() {
        assert!(gaussian_default_corr(0.05, 0.0).unwrap().abs() < 1e-14);
        assert!(gaussian_default_corr(0.05, 0.999_999).unwrap() > 0.99);
        let v = gaussian_default_corr(0.05, 0.3).unwrap();
        assert!(v > 0.0 && v < 0.3);
        assert_eq!(loss_variance(0.5, 0.0, 1.0), 0.25);
        assert_eq!(loss_variance(0.5, 0.4, 0.0), 0.0);
    }

    #[test]
    fn mean_loss_conservation() {
        let (p, r) = (0.0961, 0.4);
        for &rho in &[0.05, 0.3, 0.9] {
            let el = expected_equity_loss_gauss(1.0, p, r, rho).unwrap();
            assert!((el - 0.6 * p).abs() < 1e-12);
            // just below the cap the closed form agrees with the linear branch
            let el = expected_equity_loss_gauss(0.6 - 1e-9, p, r, rho).unwrap();
            assert!((el - 0.6 * p).abs() < 1e-8);
        }
    }

    #[test]
    fn monotone_decreasing_in_rho() {
        for &k in &[0.01, 0.03, 0.07, 0.15, 0.3] {
            let mut prev = f64::INFINITY;
            for i in 1..100 {
                let rho = i as f64 / 100.0;
                let v = expected_equity_loss_gauss(k, 0.0961, 0.4, rho).unwrap();
                // far-out K at low rho moves below double resolution
                assert!(v <= prev + 1e-16, "k {k} rho {rho}");
                assert!(d_expected_loss_d_rho(k, 0.0961, 0.4, rho).unwrap() < 0.0);
                prev = v;
            }
        }
    }
}
