use corrsurf::tarch::{
    agg_kurtosis, cond_variance_agg, innovation_moments, leverage_corr, persistence, simulate_paths,
    uncond_kurtosis_1, uncond_skewness_term, xi, InitialVariance, Innovation, PathConfig, TarchParams,
};

fn leveraged() -> TarchParams {
    TarchParams::unit_variance(0.01, 0.10, 0.92, Innovation::Gaussian).unwrap()
}

#[test]
fn leveraged_persistence_is_098() {
    assert!((persistence(&leveraged()) - 0.98).abs() < 1e-12);
}

#[test]
fn leveraged_xi_and_leverage() {
    let p = leveraged();
    // beta^2 + 2 beta (alpha + alpha_d/2) + 3 (alpha^2 + alpha alpha_d + alpha_d^2/2)
    let want = 0.8464 + 0.1104 + 3.0 * (0.0001 + 0.001 + 0.005);
    let x = xi(&p).unwrap();
    assert!((x - want).abs() < 1e-12, "{x}");
    let l = leverage_corr(&p).unwrap();
    let s_d = -(2.0 / std::f64::consts::PI).sqrt();
    assert!((l - 0.1 * s_d / (want - 0.9604).sqrt()).abs() < 1e-9, "{l}");
}

#[test]
fn garch_xi_matches_arithmetic() {
    let p = TarchParams::unit_variance(0.045, 0.0, 0.948, Innovation::Gaussian).unwrap();
    let want = 0.948f64.powi(2) + 3.0 * 0.045f64.powi(2) + 2.0 * 0.045 * 0.948;
    assert!((xi(&p).unwrap() - want).abs() < 1e-12);
    assert!((want - 0.99010).abs() < 5e-6);
}

#[test]
fn leveraged_single_period_kurtosis() {
    let k = uncond_kurtosis_1(&leveraged()).unwrap();
    assert!((k - 3.0 * (1.0 - 0.9604) / (1.0 - 0.9751)).abs() < 1e-9, "{k}");
}

#[test]
fn aggregated_variance_example() {
    let p = TarchParams::unit_variance(0.02, 0.0, 0.96, Innovation::Gaussian).unwrap();
    let v = cond_variance_agg(&p, 2.0, 260).unwrap();
    assert!((v - (260.0 + (1.0 - 0.98f64.powi(260)) / 0.02)).abs() < 1e-9);
    assert!((v - 309.73).abs() < 1e-2, "{v}");
    assert!((cond_variance_agg(&p, 1.0, 37).unwrap() - 37.0).abs() < 1e-12);
}

#[test]
fn shock_moments() {
    let g = innovation_moments(Innovation::Gaussian).unwrap();
    assert!((g.s_d - (-0.79788)).abs() < 5e-6);
    let t = innovation_moments(Innovation::StudentT { nu: 12.0 }).unwrap();
    assert!((t.k - 3.75).abs() < 1e-6, "{}", t.k);
    assert!(innovation_moments(Innovation::StudentT { nu: 4.0 }).is_err());
}

#[test]
fn symmetric_garch_has_no_skewness() {
    let p = TarchParams::unit_variance(0.05, 0.0, 0.9, Innovation::Gaussian).unwrap();
    for t in [1, 5, 52] {
        assert_eq!(uncond_skewness_term(&p, t, 1.1).unwrap(), 0.0);
    }
    assert_eq!(uncond_skewness_term(&leveraged(), 1, 1.1).unwrap(), 0.0);
}

#[test]
fn aggregated_kurtosis_limits() {
    let p = TarchParams::unit_variance(0.045, 0.0, 0.948, Innovation::Gaussian).unwrap();
    assert!((agg_kurtosis(&p, 1).unwrap() - uncond_kurtosis_1(&p).unwrap()).abs() < 1e-9);
    let long = agg_kurtosis(&p, 100_000).unwrap();
    assert!((long - 3.0).abs() < 0.01, "{long}");
    assert!(agg_kurtosis(&leveraged(), 4).is_err());
}

#[test]
fn long_path_variance_matches_unconditional_level() {
    let p = TarchParams::new(0.02, 0.03, 0.08, 0.9, Innovation::Gaussian).unwrap();
    let cfg = PathConfig { horizon: 200_000, n_paths: 1, seed: 11, initial: InitialVariance::Unconditional, burn_in: 1000 };
    let paths = simulate_paths(&p, &cfg).unwrap();
    let v = paths.variances(0);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let want = p.unconditional_variance().unwrap();
    assert!((mean - want).abs() < 0.05 * want, "{mean} vs {want}");
}

#[test]
fn paths_do_not_depend_on_path_count() {
    let p = leveraged();
    let small = PathConfig { horizon: 50, n_paths: 3, seed: 5, initial: InitialVariance::Unconditional, burn_in: 10 };
    let large = PathConfig { n_paths: 40, ..small };
    let a = simulate_paths(&p, &small).unwrap();
    let b = simulate_paths(&p, &large).unwrap();
    for i in 0..3 {
        assert_eq!(a.returns(i), b.returns(i));
    }
}
