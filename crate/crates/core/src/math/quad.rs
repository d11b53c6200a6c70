//! Adaptive Gauss-Kronrod (7/15) quadrature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

// Globally adaptive bisection: always split the piece with the largest error.
fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (val, err) = kronrod(f, a, b);
    if !val.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, val, err });
    let (mut total, mut total_err) = (val, err);
    while heap.len() < MAX_INTERVALS {
        if total_err <= tol.max(50.0 * f64::EPSILON * total.abs()) {
            break;
        }
        let p = heap.pop().expect("heap is never empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = kronrod(f, p.a, m);
        let (v2, e2) = kronrod(f, m, p.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::NonFinite(format!("integrand on [{}, {}]", p.a, p.b)));
        }
        total += v1 + v2 - p.val;
        total_err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: m, val: v1, err: e1 });
        heap.push(Piece { a: m, b: p.b, val: v2, err: e2 });
    }
    // re-sum to shed the drift of the running updates
    Ok(heap.iter().map(|p| p.val).sum())
}

/// Integrate `f` over the finite interval `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    adapt(&f, a, b, tol)
}

/// Integrate `f` over `(-inf, b]` through the substitution `x = b - (1 - t)/t`.
pub fn integrate_to_neg_inf<F: Fn(f64) -> f64>(f: F, b: f64, tol: f64) -> Result<f64> {
    let g = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let x = b - (1.0 - t) / t;
        let v = f(x) / (t * t);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adapt(&g, 0.0, 1.0, tol)
}

/// Integrate `f` over the whole real line.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<f64> {
    let left = integrate_to_neg_inf(&f, 0.0, 0.5 * tol)?;
    let right = integrate_to_neg_inf(|x| f(-x), 0.0, 0.5 * tol)?;
    Ok(left + right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::normal::norm_pdf;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn normal_density_masses() {
        let total = integrate_real_line(norm_pdf, 1e-14).unwrap();
        assert!((total - 1.0).abs() < 1e-12);
        let second = integrate_real_line(|x| x * x * norm_pdf(x), 1e-14).unwrap();
        assert!((second - 1.0).abs() < 1e-12);
        let half = integrate_to_neg_inf(norm_pdf, 0.0, 1e-14).unwrap();
        assert!((half - 0.5).abs() < 1e-13);
    }
}
