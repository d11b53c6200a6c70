//! Sample statistics shared by the Monte Carlo and estimation code.

use rand::Rng;

use crate::rng::path_rng;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population (1/n) variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Standardized central third moment.
pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in xs {
        let d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    let n = xs.len() as f64;
    (m3 / n) / (m2 / n).powf(1.5)
}

/// Standardized central fourth moment (not excess).
pub fn kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in xs {
        let d2 = (x - m) * (x - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    let n = xs.len() as f64;
    (m4 / n) / (m2 / n).powi(2)
}

/// Standard error of the sample mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / (xs.len() as f64 - 1.0)).sqrt()
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Nonparametric bootstrap standard error of `statistic` over `samples`.
///
/// Resampling indices come from a dedicated stream so the result is a pure
/// function of `(samples, n_boot, seed)`.
pub fn bootstrap_se<T, F>(samples: &[T], statistic: F, n_boot: usize, seed: u64) -> f64
where
    T: Clone,
    F: Fn(&[T]) -> f64,
{
    let n = samples.len();
    let mut rng = path_rng(seed, u64::MAX);
    let mut buf = Vec::with_capacity(n);
    let mut stats = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        buf.clear();
        for _ in 0..n {
            buf.push(samples[rng.gen_range(0..n)].clone());
        }
        stats.push(statistic(&buf));
    }
    variance(&stats).sqrt()
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a cdf.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 99% critical value of the one-sample KS statistic.
pub fn ks_critical_99(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
