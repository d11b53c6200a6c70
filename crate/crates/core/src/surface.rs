//! Correlation surface: Gaussian-copula correlation that reproduces a model's
//! expected equity-tranche loss, its slopes, loss-cdf reconstruction and
//! hazard-rate delta adjustments.

use rayon::prelude::*;

use crate::error::{domain, Error, LossBound, Result};
use crate::factor::{FactorModelSpec, FactorSample};
use crate::gaussian::{
    d_expected_loss_d_h, d_expected_loss_d_rho, expected_equity_loss_gauss, hazard_to_p_with, vasicek_d1,
    PConvention,
};
use crate::math::{binorm_pdf, find_root_monotone, norm_cdf, norm_inv_cdf};

/// Targets this close to an admissible bound are reported as boundary cells.
pub const BOUNDARY_TOL: f64 = 1e-12;
const RHO_MIN: f64 = 1e-12;
const RHO_MAX: f64 = 1.0 - 1e-12;

/// Result of inverting a tranche expected loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedCorr {
    pub rho: f64,
    /// Set when the target sits on an admissible bound; `rho` is then the
    /// corresponding limit `0+` or `1-`.
    pub boundary: Option<LossBound>,
}

/// Admissible range `[p f(1-R), f((1-R)p)]` of `E min(L, K)`.
pub fn equity_loss_bounds(k: f64, p: f64, recovery: f64) -> (f64, f64) {
    let lgd = 1.0 - recovery;
    (p * k.min(lgd), k.min(lgd * p))
}

/// Solve `E^G min(L, K)(rho) = target_el` for `rho`.
pub fn implied_corr(target_el: f64, k: f64, p: f64, recovery: f64) -> Result<ImpliedCorr> {
    if !(p > 0.0 && p < 1.0) || !(0.0..1.0).contains(&recovery) {
        return Err(domain(format!("need p in (0,1) and recovery in [0,1), got p = {p}, R = {recovery}")));
    }
    if !(k > 0.0 && k < 1.0 - recovery) {
        return Err(domain(format!(
            "detachment {k} must lie in (0, 1-R); beyond it the expected loss does not depend on rho"
        )));
    }
    if !target_el.is_finite() {
        return Err(Error::NonFinite(format!("target expected loss {target_el}")));
    }
    let (lo, hi) = equity_loss_bounds(k, p, recovery);
    if target_el > hi + BOUNDARY_TOL {
        return Err(Error::OutOfRange { target: target_el, limit: hi, bound: LossBound::Independence });
    }
    if target_el < lo - BOUNDARY_TOL {
        return Err(Error::OutOfRange { target: target_el, limit: lo, bound: LossBound::Comonotone });
    }
    let f = |rho: f64| expected_equity_loss_gauss(k, p, recovery, rho).unwrap_or(f64::NAN) - target_el;
    let f_lo = f(RHO_MIN);
    let f_hi = f(RHO_MAX);
    if f_lo <= 0.0 {
        return Ok(ImpliedCorr { rho: RHO_MIN, boundary: Some(LossBound::Independence) });
    }
    if f_hi >= 0.0 {
        return Ok(ImpliedCorr { rho: RHO_MAX, boundary: Some(LossBound::Comonotone) });
    }
    let rho = find_root_monotone(f, RHO_MIN, RHO_MAX, 1e-14)?;
    Ok(ImpliedCorr { rho, boundary: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Valid,
    Boundary(LossBound),
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    pub rho: f64,
    pub expected_loss: f64,
    pub status: CellStatus,
}

impl SurfaceCell {
    pub fn is_valid(&self) -> bool {
        self.status == CellStatus::Valid
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfig {
    pub k_grid: Vec<f64>,
    /// Horizons in years.
    pub t_grid: Vec<f64>,
    /// Model steps per year for dynamic factors.
    pub steps_per_year: usize,
    pub hazard: f64,
    pub convention: PConvention,
    pub n_paths: usize,
    pub seed: u64,
}

impl SurfaceConfig {
    /// `K = 0.01, ..., 0.30`, weekly steps, continuous hazard compounding.
    pub fn new(t_grid: Vec<f64>, hazard: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            k_grid: (1..=30).map(|i| i as f64 / 100.0).collect(),
            t_grid,
            steps_per_year: 52,
            hazard,
            convention: PConvention::Continuous,
            n_paths,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, g) in [("k_grid", &self.k_grid), ("t_grid", &self.t_grid)] {
            if g.is_empty() || g.windows(2).any(|w| !(w[1] > w[0])) || g[0] <= 0.0 {
                return Err(domain(format!("{name} must be positive and strictly increasing")));
            }
        }
        if self.steps_per_year == 0 || self.n_paths < 2 {
            return Err(domain("steps_per_year must be >= 1 and n_paths >= 2"));
        }
        Ok(())
    }

    pub fn horizon_steps(&self, t: f64) -> usize {
        ((t * self.steps_per_year as f64).round() as usize).max(1)
    }
}

/// Correlation surface on a `(K, T)` grid; `cells[i][j]` holds `K_i`, `T_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrSurface {
    pub k_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Default probability used at each horizon.
    pub p: Vec<f64>,
    pub recovery: f64,
    pub cells: Vec<Vec<SurfaceCell>>,
}

impl CorrSurface {
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.cells[i][j].rho
    }

    /// Correlations of the slice at horizon index `j`.
    pub fn slice(&self, j: usize) -> Vec<f64> {
        self.cells.iter().map(|row| row[j].rho).collect()
    }

    pub fn k_index(&self, k: f64) -> Option<usize> {
        self.k_grid.iter().position(|&x| (x - k).abs() < 1e-12)
    }

    pub fn t_index(&self, t: f64) -> Option<usize> {
        self.t_grid.iter().position(|&x| (x - t).abs() < 1e-12)
    }
}

fn cell_from(target: f64, k: f64, p: f64, recovery: f64) -> SurfaceCell {
    match implied_corr(target, k, p, recovery) {
        Ok(ImpliedCorr { rho, boundary: None }) => SurfaceCell { rho, expected_loss: target, status: CellStatus::Valid },
        Ok(ImpliedCorr { rho, boundary: Some(b) }) => {
            SurfaceCell { rho, expected_loss: target, status: CellStatus::Boundary(b) }
        }
        Err(_) => SurfaceCell { rho: f64::NAN, expected_loss: target, status: CellStatus::Invalid },
    }
}

/// Implied correlations of one horizon slice from a factor sample.
pub fn surface_slice(spec: &FactorModelSpec, sample: &FactorSample, k_grid: &[f64], p: f64) -> Result<Vec<SurfaceCell>> {
    let losses = spec.losses(sample, p)?;
    Ok(k_grid
        .par_iter()
        .map(|&k| cell_from(losses.expected_equity_loss(k), k, p, spec.recovery))
        .collect())
}

/// Invert Monte Carlo tranche losses of `spec` on every grid cell. The
/// factor is simulated once to the longest horizon.
pub fn build_surface(spec: &FactorModelSpec, config: &SurfaceConfig) -> Result<CorrSurface> {
    config.validate()?;
    let horizons: Vec<usize> = config.t_grid.iter().map(|&t| config.horizon_steps(t)).collect();
    let samples = spec.sample_horizons(&horizons, config.n_paths, config.seed)?;
    let mut p = Vec::with_capacity(config.t_grid.len());
    let mut columns = Vec::with_capacity(config.t_grid.len());
    for (&t, sample) in config.t_grid.iter().zip(&samples) {
        let pt = hazard_to_p_with(config.hazard, t, config.convention)?;
        columns.push(surface_slice(spec, sample, &config.k_grid, pt)?);
        p.push(pt);
    }
    let cells = (0..config.k_grid.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Ok(CorrSurface {
        k_grid: config.k_grid.clone(),
        t_grid: config.t_grid.clone(),
        p,
        recovery: spec.recovery,
        cells,
    })
}

/// `d rho / dK` at grid cell `(i, j)`: central difference inside the grid,
/// one-sided at the edges.
pub fn surface_slope_k(surface: &CorrSurface, i: usize, j: usize) -> Result<f64> {
    let n = surface.k_grid.len();
    if n < 2 || i >= n || j >= surface.t_grid.len() {
        return Err(domain("slope needs at least two K points and indices inside the grid"));
    }
    let (a, b) = if i == 0 {
        (0, 1)
    } else if i == n - 1 {
        (n - 2, n - 1)
    } else {
        (i - 1, i + 1)
    };
    let (ca, cb) = (surface.cells[a][j], surface.cells[b][j]);
    if !(ca.is_valid() && cb.is_valid()) {
        return Err(domain(format!(
            "grid too coarse: neighbours of K = {} at T = {} are not valid cells",
            surface.k_grid[i], surface.t_grid[j]
        )));
    }
    Ok((cb.rho - ca.rho) / (surface.k_grid[b] - surface.k_grid[a]))
}

/// `d rho / dh` by central bump-and-reprice with common random numbers:
/// the factor sample is shared and only the threshold moves with `h`.
pub fn surface_slope_h(
    spec: &FactorModelSpec,
    sample: &FactorSample,
    k: f64,
    t: f64,
    h: f64,
    bump: f64,
) -> Result<f64> {
    if !(bump > 0.0 && bump < h) {
        return Err(domain(format!("hazard bump must lie in (0, h), got {bump} for h = {h}")));
    }
    let rho_at = |hz: f64| -> Result<f64> {
        let p = hazard_to_p_with(hz, t, PConvention::Continuous)?;
        let el = spec.losses(sample, p)?.expected_equity_loss(k);
        let ic = implied_corr(el, k, p, spec.recovery)?;
        if ic.boundary.is_some() {
            return Err(domain(format!("implied correlation at h = {hz} sits on a bound")));
        }
        Ok(ic.rho)
    };
    Ok((rho_at(h + bump)? - rho_at(h - bump)?) / (2.0 * bump))
}

/// Loss cdf from the surface, `1 - Phi(d1) + (1-R)/(2 sqrt(rho)) phi2(Phi^-1(p), -d1; -sqrt(rho)) rho_K`.
pub fn loss_cdf_from_surface(rho: f64, rho_k: f64, k: f64, p: f64, recovery: f64) -> Result<f64> {
    let d1 = vasicek_d1(k, p, recovery, rho)?;
    let a = norm_inv_cdf(p)?;
    let phi2 = binorm_pdf(a, -d1, -rho.sqrt())?;
    let v = 1.0 - norm_cdf(d1) + (1.0 - recovery) / (2.0 * rho.sqrt()) * phi2 * rho_k;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InconsistentSurface { k, value: v });
    }
    Ok(v)
}

/// `Psi = E_rho / E_h` for the Gaussian equity tranche at horizon `t`.
pub fn tranche_sensitivity_ratio(k: f64, p_t: f64, recovery: f64, rho: f64, t: f64) -> Result<f64> {
    if k >= 1.0 - recovery {
        return Ok(0.0);
    }
    let num = d_expected_loss_d_rho(k, p_t, recovery, rho)?;
    let den = d_expected_loss_d_h(k, p_t, recovery, rho, t)?;
    Ok(num / den)
}

/// Components of the hazard delta adjustment at one detachment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaReport {
    pub k: f64,
    pub rho: f64,
    pub psi: f64,
    pub rho_h: f64,
    pub delta_adj: f64,
    /// Fixed-correlation Gaussian hazard sensitivity `E^G_h L`.
    pub gaussian_delta: f64,
}

/// Delta adjustments `rho_h * Psi` on a grid of detachments at horizon `t`
/// and hazard `h` (continuous compounding).
#[allow(clippy::too_many_arguments)]
pub fn delta_adjustments(
    spec: &FactorModelSpec,
    k_grid: &[f64],
    t: f64,
    h: f64,
    bump: f64,
    steps_per_year: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<DeltaReport>> {
    let steps = ((t * steps_per_year as f64).round() as usize).max(1);
    let sample = crate::factor::sample_factor(spec, steps, n_paths, seed)?;
    let p = hazard_to_p_with(h, t, PConvention::Continuous)?;
    let losses = spec.losses(&sample, p)?;
    k_grid
        .par_iter()
        .map(|&k| {
            let ic = implied_corr(losses.expected_equity_loss(k), k, p, spec.recovery)?;
            if ic.boundary.is_some() {
                return Err(domain(format!("implied correlation at K = {k} sits on a bound")));
            }
            let rho_h = surface_slope_h(spec, &sample, k, t, h, bump)?;
            let psi = tranche_sensitivity_ratio(k, p, spec.recovery, ic.rho, t)?;
            Ok(DeltaReport {
                k,
                rho: ic.rho,
                psi,
                rho_h,
                delta_adj: rho_h * psi,
                gaussian_delta: d_expected_loss_d_h(k, p, spec.recovery, ic.rho, t)?,
            })
        })
        .collect()
}

/// Single-detachment convenience wrapper around [`delta_adjustments`].
pub fn delta_adjustment(
    spec: &FactorModelSpec,
    k: f64,
    t: f64,
    h: f64,
    bump: f64,
    n_paths: usize,
    seed: u64,
) -> Result<DeltaReport> {
    Ok(delta_adjustments(spec, &[k], t, h, bump, 52, n_paths, seed)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{FactorKind, Idiosyncratic};
    use crate::gaussian::{vasicek_loss_cdf, d_expected_loss_d_k};

    #[test]
    fn round_trip() {
        for &rho in &[0.05, 0.3, 0.6, 0.9] {
            for &k in &[0.01, 0.03, 0.1, 0.3] {
                let el = expected_equity_loss_gauss(k, 0.0961, 0.4, rho).unwrap();
                let ic = implied_corr(el, k, 0.0961, 0.4).unwrap();
                assert!(ic.boundary.is_none());
                let back = expected_equity_loss_gauss(k, 0.0961, 0.4, ic.rho).unwrap();
                // far detachments are weakly sensitive to rho, so compare losses too
                assert!((ic.rho - rho).abs() < 1e-8 || (back - el).abs() < 1e-13, "rho {rho} k {k}: {}", ic.rho);
            }
        }
    }

    #[test]
    fn bounds_and_flags() {
        let (k, p, r) = (0.03, 0.0961, 0.4);
        let (lo, hi) = equity_loss_bounds(k, p, r);
        assert_eq!(implied_corr(hi, k, p, r).unwrap().boundary, Some(LossBound::Independence));
        assert_eq!(implied_corr(lo, k, p, r).unwrap().boundary, Some(LossBound::Comonotone));
        match implied_corr(hi + 1e-6, k, p, r) {
            Err(Error::OutOfRange { bound: LossBound::Independence, .. }) => {}
            other => panic!("{other:?}"),
        }
        match implied_corr(lo - 1e-6, k, p, r) {
            Err(Error::OutOfRange { bound: LossBound::Comonotone, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(implied_corr(0.01, 0.6, p, r).is_err());
    }

    #[test]
    fn reconstructed_cdf_reduces_to_vasicek() {
        for &k in &[0.02, 0.05, 0.2] {
            let v = loss_cdf_from_surface(0.3, 0.0, k, 0.0961, 0.4).unwrap();
            assert!((v - vasicek_loss_cdf(k, 0.0961, 0.4, 0.3).unwrap()).abs() < 1e-15);
            assert!((v - (1.0 - d_expected_loss_d_k(k, 0.0961, 0.4, 0.3).unwrap())).abs() < 1e-15);
        }
        assert!(matches!(
            loss_cdf_from_surface(0.3, 1e6, 0.05, 0.0961, 0.4),
            Err(Error::InconsistentSurface { .. })
        ));
    }

    #[test]
    fn sensitivity_ratio() {
        let (k, r, rho, t) = (0.03, 0.4, 0.3, 5.0);
        let p = hazard_to_p_with(0.02, t, PConvention::Continuous).unwrap();
        let psi = tranche_sensitivity_ratio(k, p, r, rho, t).unwrap();
        let direct = d_expected_loss_d_rho(k, p, r, rho).unwrap() / d_expected_loss_d_h(k, p, r, rho, t).unwrap();
        assert!((psi - direct).abs() < 1e-10);
        assert!(psi < 0.0);
        let d1 = vasicek_d1(k, p, r, rho).unwrap();
        let a = norm_inv_cdf(p).unwrap();
        let closed = -1.0 / (2.0 * (1.0 - p) * t * rho.sqrt()) * binorm_pdf(a, -d1, -rho.sqrt()).unwrap()
            / norm_cdf((-d1 + rho.sqrt() * a) / (1.0 - rho).sqrt());
        assert!((psi - closed).abs() < 1e-10 * closed.abs());
        assert_eq!(tranche_sensitivity_ratio(0.7, p, r, rho, t).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_surface_is_flat() {
        let spec = FactorModelSpec::new(FactorKind::GaussianStatic, 0.3, Idiosyncratic::Gaussian, 0.4).unwrap();
        let cfg = SurfaceConfig::new(vec![1.0, 5.0], 0.02, 50_000, 11);
        let s = build_surface(&spec, &cfg).unwrap();
        for (row, &k) in s.cells.iter().zip(&s.k_grid) {
            for c in row {
                assert!(c.is_valid());
                let tol = if k <= 0.1 { 0.02 } else { 0.05 };
                assert!((c.rho - 0.3).abs() < tol, "K {k}: {c:?}");
            }
        }
        let j = s.t_index(5.0).unwrap();
        let i = s.k_index(0.1).unwrap();
        assert!(surface_slope_k(&s, i, j).unwrap().abs() < 0.5);
        let d = delta_adjustment(&spec, 0.05, 5.0, 0.01, 0.0025, 50_000, 12).unwrap();
        assert!(d.delta_adj.abs() < 0.1, "{d:?}");
    }
}
