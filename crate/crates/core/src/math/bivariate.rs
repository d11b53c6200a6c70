//! Standard bivariate normal distribution and its partial derivatives.
//!
//! The cdf follows Genz's double-precision refinement of the
//! Drezner-Wesolowsky Gauss-Legendre scheme (`BVND` in TVPACK), which is
//! accurate to roughly 1e-15 over the whole correlation range.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::math::normal::{norm_cdf, norm_pdf};

const TWO_PI: f64 = 2.0 * PI;

// Gauss-Legendre (weight, abscissa) pairs on [-1, 1], negative half only.
#[allow(clippy::excessive_precision)]
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];
#[allow(clippy::excessive_precision)]
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
#[allow(clippy::excessive_precision)]
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("correlation must lie in (-1, 1), got {rho}")))
    }
}

/// `P(X <= x, Y <= y)` for standard normals with correlation `rho`.
pub fn binorm_cdf(x: f64, y: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(bvnd(-x, -y, rho).clamp(0.0, 1.0))
}

/// Bivariate normal density `phi(x, y; rho)`.
pub fn binorm_pdf(x: f64, y: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let one_minus = (1.0 - rho) * (1.0 + rho);
    let q = (x * x - 2.0 * rho * x * y + y * y) / one_minus;
    Ok((-0.5 * q).exp() / (TWO_PI * one_minus.sqrt()))
}

/// Partial derivative of the cdf in its second argument:
/// `phi(y) * Phi((x - rho y) / sqrt(1 - rho^2))`.
pub fn binorm_cdf_d2(x: f64, y: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let s = ((1.0 - rho) * (1.0 + rho)).sqrt();
    Ok(norm_pdf(y) * norm_cdf((x - rho * y) / s))
}

/// Partial derivative of the cdf in the correlation, which equals the density.
pub fn binorm_cdf_d3(x: f64, y: f64, rho: f64) -> Result<f64> {
    binorm_pdf(x, y, rho)
}

/// Upper orthant probability `P(X > dh, Y > dk)`.
fn bvnd(dh: f64, dk: f64, r: f64) -> f64 {
    let quad: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };

    let h = dh;
    let mut k = dk;
    let mut hk = h * k;

    if r.abs() < 0.925 {
        let mut bvn = 0.0;
        if r != 0.0 {
            let hs = 0.5 * (h * h + k * k);
            let asr = r.asin();
            for &(w, x) in quad {
                for sx in [x, -x] {
                    let sn = (0.5 * asr * (sx + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (2.0 * TWO_PI);
        }
        return bvn + norm_cdf(-h) * norm_cdf(-k);
    }

    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    let mut bvn = 0.0;
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * TWO_PI.sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in quad {
            for sx in [x, -x] {
                let xs = (a * (sx + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (b_s / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / TWO_PI;
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        let mut bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += norm_cdf(k) - norm_cdf(h);
            } else {
                bvn += norm_cdf(-h) - norm_cdf(-k);
            }
        }
        bvn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::quad::integrate;

    // Independent oracle: integrate phi(s) Phi((y - rho s)/sqrt(1-rho^2)) over s <= x.
    fn oracle(x: f64, y: f64, rho: f64) -> f64 {
        let s = (1.0 - rho * rho).sqrt();
        let lo = -40.0;
        let hi = x.max(lo);
        integrate(|t| norm_pdf(t) * norm_cdf((y - rho * t) / s), lo, hi, 1e-15).unwrap()
    }

    #[test]
    fn independence_and_arcsine_identities() {
        assert!((binorm_cdf(0.0, 0.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
        for rho in [-0.99, -0.95, -0.5, 0.0, 0.3, 0.5, 0.75, 0.9, 0.93, 0.999] {
            let expect = 0.25 + f64::asin(rho) / TWO_PI;
            let got = binorm_cdf(0.0, 0.0, rho).unwrap();
            assert!((got - expect).abs() < 1e-14, "rho = {rho}: {got} vs {expect}");
        }
        let third = binorm_cdf(0.0, 0.0, 0.5).unwrap();
        assert!((third - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn marginal_limit_and_symmetry() {
        for &x in &[-3.0, -0.7, 0.0, 1.2, 2.5] {
            for &rho in &[-0.95, -0.4, 0.0, 0.6, 0.97] {
                let m = binorm_cdf(x, 40.0, rho).unwrap();
                assert!((m - norm_cdf(x)).abs() < 1e-14);
                for &y in &[-2.0, 0.3, 1.7] {
                    let a = binorm_cdf(x, y, rho).unwrap();
                    let b = binorm_cdf(y, x, rho).unwrap();
                    assert!((a - b).abs() < 1e-15);
                    if rho == 0.0 {
                        assert!((a - norm_cdf(x) * norm_cdf(y)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn matches_quadrature_oracle() {
        let pts = [-4.0, -2.0, -1.0, -0.3, 0.0, 0.5, 1.0, 2.0, 3.5];
        let rhos = [-0.999, -0.95, -0.93, -0.8, -0.5, -0.2, 0.1, 0.4, 0.8, 0.92, 0.93, 0.99, 0.9999];
        for &x in &pts {
            for &y in &pts {
                for &rho in &rhos {
                    let got = binorm_cdf(x, y, rho).unwrap();
                    let want = oracle(x, y, rho);
                    assert!(
                        (got - want).abs() < 1e-12,
                        "({x}, {y}, {rho}): {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_degenerate_correlation() {
        assert!(binorm_cdf(0.0, 0.0, 1.0).is_err());
        assert!(binorm_cdf(0.0, 0.0, -1.0).is_err());
        assert!(binorm_pdf(0.0, 0.0, 1.5).is_err());
        assert!(binorm_cdf_d2(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn derivative_reference_values() {
        let d2 = binorm_cdf_d2(0.0, 0.0, 0.0).unwrap();
        assert!((d2 - 0.5 * norm_pdf(0.0)).abs() < 1e-15);
        assert!((d2 - 0.199_471_140_200_716_3).abs() < 1e-12);
        let d3 = binorm_cdf_d3(0.0, 0.0, 0.0).unwrap();
        assert!((d3 - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        let grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
        for &x in &grid {
            for &y in &grid {
                for &rho in &[-0.8, -0.3, 0.0, 0.3, 0.8] {
                    let fd2 = (binorm_cdf(x, y + h, rho).unwrap()
                        - binorm_cdf(x, y - h, rho).unwrap())
                        / (2.0 * h);
                    let fd3 = (binorm_cdf(x, y, rho + h).unwrap()
                        - binorm_cdf(x, y, rho - h).unwrap())
                        / (2.0 * h);
                    assert!((fd2 - binorm_cdf_d2(x, y, rho).unwrap()).abs() < 1e-6);
                    assert!((fd3 - binorm_cdf_d3(x, y, rho).unwrap()).abs() < 1e-6);
                }
            }
        }
        let fd = (binorm_cdf(0.3, -0.7, 0.4 + h).unwrap() - binorm_cdf(0.3, -0.7, 0.4 - h).unwrap())
            / (2.0 * h);
        assert!((fd - binorm_cdf_d3(0.3, -0.7, 0.4).unwrap()).abs() < 1e-6);
    }
}
