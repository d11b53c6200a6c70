use corrsurf::gaussian::{expected_equity_loss_gauss, hazard_to_p_with, vasicek_loss_cdf, PConvention};
use corrsurf::math::{binorm_cdf, norm_cdf, norm_inv_cdf};
use corrsurf::rng::{derive_seed, derive_seed_indexed};
use corrsurf::surface::{equity_loss_bounds, implied_corr, tranche_sensitivity_ratio};
use corrsurf::tarch::{cond_variance_agg, persistence, Innovation, TarchParams};
use proptest::prelude::*;

const R: f64 = 0.4;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normal_inverse_round_trip(x in -8.0f64..5.0) {
        let back = norm_inv_cdf(norm_cdf(x)).unwrap();
        prop_assert!((back - x).abs() < 1e-8 * x.abs().max(1.0));
    }

    #[test]
    fn bivariate_cdf_is_a_copula(x in -4.0f64..4.0, y in -4.0f64..4.0, r in -0.95f64..0.95) {
        let c = binorm_cdf(x, y, r).unwrap();
        let (fx, fy) = (norm_cdf(x), norm_cdf(y));
        prop_assert!(c >= (fx + fy - 1.0).max(0.0) - 1e-12);
        prop_assert!(c <= fx.min(fy) + 1e-12);
        prop_assert!((c - binorm_cdf(y, x, r).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn equity_loss_lies_between_bounds(k in 0.005f64..0.55, p in 0.001f64..0.5, rho in 0.01f64..0.95) {
        let el = expected_equity_loss_gauss(k, p, R, rho).unwrap();
        let (lo, hi) = equity_loss_bounds(k, p, R);
        prop_assert!(el >= lo - 1e-12 && el <= hi + 1e-12, "{lo} <= {el} <= {hi}");
    }

    #[test]
    fn equity_loss_rises_with_detachment(k in 0.005f64..0.5, dk in 0.001f64..0.05, p in 0.001f64..0.5, rho in 0.01f64..0.95) {
        let a = expected_equity_loss_gauss(k, p, R, rho).unwrap();
        let b = expected_equity_loss_gauss((k + dk).min(0.59), p, R, rho).unwrap();
        prop_assert!(b >= a - 1e-14);
    }

    #[test]
    fn equity_loss_falls_with_correlation(k in 0.01f64..0.3, p in 0.005f64..0.3, rho in 0.02f64..0.9, dr in 0.005f64..0.05) {
        let a = expected_equity_loss_gauss(k, p, R, rho).unwrap();
        let b = expected_equity_loss_gauss(k, p, R, rho + dr).unwrap();
        prop_assert!(b <= a + 1e-14);
    }

    #[test]
    fn implied_correlation_inverts_expected_loss(k in 0.01f64..0.2, p in 0.01f64..0.3, rho in 0.05f64..0.9) {
        let el = expected_equity_loss_gauss(k, p, R, rho).unwrap();
        let ic = implied_corr(el, k, p, R).unwrap();
        let back = expected_equity_loss_gauss(k, p, R, ic.rho).unwrap();
        prop_assert!((back - el).abs() < 1e-12 || (ic.rho - rho).abs() < 1e-8);
    }

    #[test]
    fn vasicek_cdf_is_monotone(x in 0.0f64..0.59, dx in 0.0f64..0.1, p in 0.001f64..0.5, rho in 0.01f64..0.95) {
        let a = vasicek_loss_cdf(x, p, R, rho).unwrap();
        let b = vasicek_loss_cdf((x + dx).min(0.599), p, R, rho).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-12);
    }

    #[test]
    fn sensitivity_ratio_is_negative(k in 0.01f64..0.3, h in 0.002f64..0.05, rho in 0.05f64..0.9, t in 1.0f64..10.0) {
        let p = hazard_to_p_with(h, t, PConvention::Continuous).unwrap();
        prop_assert!(tranche_sensitivity_ratio(k, p, R, rho, t).unwrap() < 0.0);
    }

    #[test]
    fn default_probability_conventions(h in 0.0001f64..0.2, t in 0.1f64..30.0) {
        let c = hazard_to_p_with(h, t, PConvention::Continuous).unwrap();
        let d = hazard_to_p_with(h, t, PConvention::Discrete).unwrap();
        prop_assert!(c > 0.0 && c < 1.0 && d > 0.0 && d < 1.0);
        prop_assert!(d >= c - 1e-15);
    }

    #[test]
    fn aggregated_variance_is_linear_in_start(a in 0.0f64..0.05, ad in 0.0f64..0.1, b in 0.5f64..0.9, s in 0.1f64..4.0, t in 1usize..500) {
        let p = TarchParams::unit_variance(a, ad, b, Innovation::Gaussian).unwrap();
        prop_assume!(persistence(&p) < 0.999);
        let v0 = cond_variance_agg(&p, 0.0, t).unwrap();
        let v1 = cond_variance_agg(&p, 1.0, t).unwrap();
        let vs = cond_variance_agg(&p, s, t).unwrap();
        prop_assert!((vs - (v0 + s * (v1 - v0))).abs() < 1e-9 * vs.abs().max(1.0));
        prop_assert!((v1 - t as f64).abs() < 1e-9 * t as f64);
    }

    #[test]
    fn seed_derivation_is_stable(seed in any::<u64>(), i in 0u64..1000) {
        prop_assert_eq!(derive_seed_indexed(seed, "x", i), derive_seed_indexed(seed, "x", i));
        prop_assert_ne!(derive_seed(seed, "a"), derive_seed(seed, "b"));
    }
}
