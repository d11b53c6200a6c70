//! Student-t distribution: cdf through the regularized incomplete beta
//! function, quantile by root finding, and unit-variance sampling.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{domain, Result};
use crate::math::normal::norm_inv_cdf;
use crate::math::roots::{expand_bracket, find_root_monotone};

const CF_MAX_ITER: usize = 20_000;
const CF_EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;

fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`; `y` must equal `1 - x` and is
/// passed separately so callers can supply it without cancellation.
pub fn reg_inc_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, y) / b
    }
}

/// Student-t cdf with `nu` degrees of freedom (standard, not variance scaled).
pub fn student_t_cdf(x: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(domain(format!("student-t degrees of freedom must be positive, got {nu}")));
    }
    if x.is_nan() {
        return Err(domain("student-t cdf of NaN"));
    }
    if x.is_infinite() {
        return Ok(if x > 0.0 { 1.0 } else { 0.0 });
    }
    let x2 = x * x;
    let denom = nu + x2;
    // P(T <= -|x|) = I_{nu/(nu+x^2)}(nu/2, 1/2) / 2
    let tail = 0.5 * reg_inc_beta(0.5 * nu, 0.5, nu / denom, x2 / denom);
    Ok(if x > 0.0 { 1.0 - tail } else { tail })
}

/// Student-t quantile.
pub fn student_t_inv(p: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(domain(format!("student-t degrees of freedom must be positive, got {nu}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("student-t quantile requires p in (0,1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return Ok(-student_t_inv(1.0 - p, nu)?);
    }
    let ln_p = p.ln();
    let f = |x: f64| match student_t_cdf(x, nu) {
        Ok(c) if c > 0.0 => c.ln() - ln_p,
        _ => f64::NEG_INFINITY,
    };
    let z = norm_inv_cdf(p)?;
    // the t quantile lies below the normal one in the left tail
    let (lo, hi) = expand_bracket(f, 2.0 * z - 1.0, z.min(-1e-300) * 0.5, 400)?;
    find_root_monotone(f, lo, hi, 1e-15)
}

/// Scale factor `sqrt((nu - 2)/nu)` taking a standard t variate to unit variance.
pub fn unit_variance_scale(nu: f64) -> Result<f64> {
    if !(nu > 2.0) {
        return Err(domain(format!(
            "unit-variance student-t needs nu > 2, got {nu}"
        )));
    }
    Ok(((nu - 2.0) / nu).sqrt())
}

/// Cdf of the unit-variance scaled Student-t.
pub fn scaled_t_cdf(x: f64, nu: f64) -> Result<f64> {
    let c = unit_variance_scale(nu)?;
    student_t_cdf(x / c, nu)
}

/// Quantile of the unit-variance scaled Student-t.
pub fn scaled_t_inv(p: f64, nu: f64) -> Result<f64> {
    let c = unit_variance_scale(nu)?;
    Ok(c * student_t_inv(p, nu)?)
}

/// Sampler for the unit-variance scaled Student-t distribution.
#[derive(Debug, Clone, Copy)]
pub struct ScaledStudentT {
    nu: f64,
    scale: f64,
    chi: ChiSquared<f64>,
}

impl ScaledStudentT {
    pub fn new(nu: f64) -> Result<Self> {
        let scale = unit_variance_scale(nu)?;
        let chi = ChiSquared::new(nu).map_err(|e| domain(e.to_string()))?;
        Ok(Self { nu, scale, chi })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

impl Distribution<f64> for ScaledStudentT {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let w: f64 = self.chi.sample(rng);
        self.scale * z / (w / self.nu).sqrt()
    }
}

/// One draw from the unit-variance scaled Student-t.
pub fn scaled_t_sample<R: Rng + ?Sized>(nu: f64, rng: &mut R) -> Result<f64> {
    Ok(ScaledStudentT::new(nu)?.sample(rng))
}
