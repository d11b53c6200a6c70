#ifndef CORRSURF_H
#define CORRSURF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of one surface cell.
 */
typedef enum CsCellStatus {
  CS_CELL_STATUS_VALID = 0,
  CS_CELL_STATUS_INDEPENDENCE_BOUND = 1,
  CS_CELL_STATUS_COMONOTONE_BOUND = 2,
  CS_CELL_STATUS_INVALID = 3,
} CsCellStatus;

/**
 * Hazard to default-probability convention.
 */
typedef enum CsConvention {
  /**
   * `p = 1 - exp(-h t)`
   */
  CS_CONVENTION_CONTINUOUS = 0,
  /**
   * `p = 1 - (1 - h)^t`
   */
  CS_CONVENTION_DISCRETE = 1,
} CsConvention;

/**
 * Result code of every exported function.
 */
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_OUT_OF_RANGE = 3,
  CS_STATUS_NUMERIC = 4,
  CS_STATUS_PANIC = 5,
} CsStatus;

/**
 * Opaque factor loss model.
 */
typedef struct CsLossModel CsLossModel;

/**
 * Opaque correlation surface.
 */
typedef struct CsSurface CsSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *cs_last_error(void);

/**
 * Gaussian-copula expected equity-tranche loss `E L_(0,K]`.
 *
 * # Safety
 * `out` must be null or valid for a write of one `double`.
 */
enum CsStatus cs_expected_equity_loss(double k, double p, double recovery, double rho, double *out);

/**
 * Large-portfolio Gaussian loss cdf `P(L <= x)`.
 *
 * # Safety
 * `out` must be null or valid for a write of one `double`.
 */
enum CsStatus cs_vasicek_loss_cdf(double x, double p, double recovery, double rho, double *out);

/**
 * Gaussian correlation reproducing `target_el` for the equity tranche
 * `(0, K]`. A target on an admissible bound succeeds with `*out_bound`
 * set to 1 (independence) or 2 (comonotone); otherwise `*out_bound` is 0.
 * A target beyond a bound returns `CsStatus::OutOfRange`.
 *
 * # Safety
 * `out_rho` and `out_bound` must be null or valid for one write each.
 */
enum CsStatus cs_implied_corr(double target_el,
                              double k,
                              double p,
                              double recovery,
                              double *out_rho,
                              int32_t *out_bound);

/**
 * One-period Gaussian factor model.
 *
 * # Safety
 * `out` must be null or valid for a write of one pointer.
 */
enum CsStatus cs_loss_model_new_gaussian(double rho, double recovery, struct CsLossModel **out);

/**
 * TARCH market factor aggregated over the horizon, Gaussian
 * idiosyncratic terms. `shock_nu <= 0` selects Gaussian shocks, otherwise
 * unit-variance Student-t shocks with `shock_nu` degrees of freedom.
 *
 * # Safety
 * `out` must be null or valid for a write of one pointer.
 */
enum CsStatus cs_loss_model_new_tarch(double rho,
                                      double recovery,
                                      double alpha,
                                      double alpha_d,
                                      double beta,
                                      double shock_nu,
                                      struct CsLossModel **out);

/**
 * Student-t copula with `nu` degrees of freedom.
 *
 * # Safety
 * `out` must be null or valid for a write of one pointer.
 */
enum CsStatus cs_loss_model_new_t_copula(double rho,
                                         double recovery,
                                         double nu,
                                         struct CsLossModel **out);

/**
 * Double-t model with market and idiosyncratic degrees of freedom.
 *
 * # Safety
 * `out` must be null or valid for a write of one pointer.
 */
enum CsStatus cs_loss_model_new_double_t(double rho,
                                         double recovery,
                                         double nu_m,
                                         double nu_i,
                                         struct CsLossModel **out);

/**
 * Release a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from a `cs_loss_model_new_*` call that
 * has not been freed.
 */
void cs_loss_model_free(struct CsLossModel *model);

/**
 * Monte Carlo implied correlation surface on `k_grid x t_grid`.
 *
 * # Safety
 * `model` must be a live handle, the grids must point to `n_k` and `n_t`
 * doubles, and `out` must be null or valid for a write of one pointer.
 */
enum CsStatus cs_surface_build(const struct CsLossModel *model,
                               const double *k_grid,
                               uintptr_t n_k,
                               const double *t_grid,
                               uintptr_t n_t,
                               double hazard,
                               enum CsConvention convention,
                               uintptr_t steps_per_year,
                               uintptr_t n_paths,
                               uint64_t seed,
                               struct CsSurface **out);

/**
 * Grid sizes of a surface.
 *
 * # Safety
 * `s` must be a live handle; `n_k` and `n_t` must be null or writable.
 */
enum CsStatus cs_surface_dims(const struct CsSurface *s, uintptr_t *n_k, uintptr_t *n_t);

/**
 * Cell `(i_k, j_t)`: implied correlation (NaN for invalid cells) and status.
 *
 * # Safety
 * `s` must be a live handle; `rho` and `status` must be null or writable.
 */
enum CsStatus cs_surface_cell(const struct CsSurface *s,
                              uintptr_t i_k,
                              uintptr_t j_t,
                              double *rho,
                              enum CsCellStatus *status);

/**
 * Release a surface. Null is ignored.
 *
 * # Safety
 * `s` must be null or a handle from [`cs_surface_build`] that has not
 * been freed.
 */
void cs_surface_free(struct CsSurface *s);

/**
 * Delta adjustment factors `rho_h * Psi` at each detachment in `k_grid`,
 * written to `out[0..n_k]`.
 *
 * # Safety
 * `model` must be a live handle, `k_grid` must point to `n_k` doubles and
 * `out` must be writable for `n_k` doubles.
 */
enum CsStatus cs_delta_adjustments(const struct CsLossModel *model,
                                   const double *k_grid,
                                   uintptr_t n_k,
                                   double maturity,
                                   double hazard,
                                   double bump,
                                   uintptr_t steps_per_year,
                                   uintptr_t n_paths,
                                   uint64_t seed,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORRSURF_H */
