#ifndef QRPCA_H
#define QRPCA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call. The numeric values match the exit codes
 of the command-line tool where they overlap.
 */
typedef enum QrpcaStatus {
  QRPCA_STATUS_OK = 0,
  /*
   invalid argument or configuration
   */
  QRPCA_STATUS_USAGE = 1,
  /*
   input data violates a precondition
   */
  QRPCA_STATUS_DATA = 2,
  /*
   a numerical routine failed
   */
  QRPCA_STATUS_NUMERICAL = 3,
  /*
   a required pointer was null
   */
  QRPCA_STATUS_NULL_POINTER = 4,
  /*
   an internal error was caught at the boundary
   */
  QRPCA_STATUS_INTERNAL = 5,
} QrpcaStatus;

typedef struct QrpcaBasis QrpcaBasis;

typedef struct QrpcaFit QrpcaFit;

typedef struct QrpcaPanel QrpcaPanel;

/*
 Outcome of the zero-intercept test.
 */
typedef struct QrpcaAlphaTest {
  double statistic;
  double critical_value;
  double p_value;
  /*
   1 if the null is rejected, 0 otherwise
   */
  int reject;
  /*
   number of factors used
   */
  size_t k;
} QrpcaAlphaTest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the last failure on this thread, or an empty string.
 The pointer stays valid until the next call into this library on the
 same thread.
 */
const char *qrpca_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *qrpca_version(void);

/*
 Loads a long-format CSV. Null column names select the defaults `unit`,
 `time` and `y`; every other column is a characteristic.

 # Safety
 String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum QrpcaStatus qrpca_panel_load_csv(const char *path,
                                      const char *unit_col,
                                      const char *time_col,
                                      const char *y_col,
                                      struct QrpcaPanel **out);

/*
 Balanced panel from arrays: `y[i + n * t]` and `z[i + n * (t + n_periods * j)]`
 for unit `i`, period `t` and characteristic `j`.

 # Safety
 `y` must hold `n_units * n_periods` values and `z` that many times `n_chars`.
 */
enum QrpcaStatus qrpca_panel_from_arrays(size_t n_units,
                                         size_t n_periods,
                                         size_t n_chars,
                                         const double *y,
                                         const double *z,
                                         struct QrpcaPanel **out);

/*
 # Safety
 `panel` must come from this library; null outputs are skipped.
 */
enum QrpcaStatus qrpca_panel_dims(const struct QrpcaPanel *panel,
                                  size_t *n_units,
                                  size_t *n_periods,
                                  size_t *n_chars);

/*
 # Safety
 `panel` must be null or come from this library, and is not used afterwards.
 */
void qrpca_panel_free(struct QrpcaPanel *panel);

/*
 Resolves a JSON basis specification against the characteristics of
 `panel` (used for the number of characteristics and spline boundaries).

 # Safety
 `json` must be NUL-terminated; `panel` must come from this library.
 */
enum QrpcaStatus qrpca_basis_from_json(const char *json,
                                       const struct QrpcaPanel *panel,
                                       struct QrpcaBasis **out);

/*
 Number of basis functions `P`, or 0 for a null handle.

 # Safety
 `basis` must be null or come from this library.
 */
size_t qrpca_basis_dim(const struct QrpcaBasis *basis);

/*
 # Safety
 `basis` must be null or come from this library, and is not used afterwards.
 */
void qrpca_basis_free(struct QrpcaBasis *basis);

/*
 Fits intercepts, loadings and factors at quantile index `tau`. `k = 0`
 selects the number of factors by the eigenvalue ratio with default tuning.

 # Safety
 Handles must come from this library; `out` must be writable.
 */
enum QrpcaStatus qrpca_fit(const struct QrpcaPanel *panel,
                           const struct QrpcaBasis *basis,
                           double tau,
                           size_t k,
                           struct QrpcaFit **out);

/*
 `P`, `K`, `T` and the number of eigenvalues. Null outputs are skipped.

 # Safety
 `fit` must come from this library.
 */
enum QrpcaStatus qrpca_fit_dims(const struct QrpcaFit *fit,
                                size_t *p,
                                size_t *k,
                                size_t *t,
                                size_t *n_eigvals);

/*
 Copies `a_hat` (length `P`).

 # Safety
 `out` must hold `len` doubles.
 */
enum QrpcaStatus qrpca_fit_a_hat(const struct QrpcaFit *fit, double *out, size_t len);

/*
 Copies `B_hat` (`P x K`, column-major).

 # Safety
 `out` must hold `len` doubles.
 */
enum QrpcaStatus qrpca_fit_b_hat(const struct QrpcaFit *fit, double *out, size_t len);

/*
 Copies `F_hat` (`T x K`, column-major).

 # Safety
 `out` must hold `len` doubles.
 */
enum QrpcaStatus qrpca_fit_f_hat(const struct QrpcaFit *fit, double *out, size_t len);

/*
 Copies the descending eigenvalues (length `min(P, T)`).

 # Safety
 `out` must hold `len` doubles.
 */
enum QrpcaStatus qrpca_fit_eigvals(const struct QrpcaFit *fit, double *out, size_t len);

/*
 # Safety
 `fit` must be null or come from this library, and is not used afterwards.
 */
void qrpca_fit_free(struct QrpcaFit *fit);

/*
 Eigenvalue-ratio and threshold estimates of the number of factors.

 # Safety
 `eigvals` must hold `len` doubles; outputs must be writable.
 */
enum QrpcaStatus qrpca_select_k(const double *eigvals,
                                size_t len,
                                size_t kmax,
                                double lambda,
                                size_t *k_ratio,
                                size_t *k_threshold);

/*
 Weighted-bootstrap test of a zero intercept function. `k = 0` selects
 the number of factors by the eigenvalue ratio.

 # Safety
 Handles must come from this library; `out` must be writable.
 */
enum QrpcaStatus qrpca_alpha_test(const struct QrpcaPanel *panel,
                                  const struct QrpcaBasis *basis,
                                  double tau,
                                  size_t k,
                                  size_t n_draws,
                                  double level,
                                  uint64_t seed,
                                  struct QrpcaAlphaTest *out);

/*
 Weighted linear quantile regression of `y` on `x` (`n x p`,
 column-major). `weights` may be null for unit weights.

 # Safety
 `x` must hold `n * p` doubles, `y` and non-null `weights` `n`, `coef` `p`.
 */
enum QrpcaStatus qrpca_solve_qr(const double *x,
                                const double *y,
                                const double *weights,
                                size_t n,
                                size_t p,
                                double tau,
                                double *coef,
                                double *objective);

/*
 The check function `(tau - 1{u <= 0}) u`.
 */
double qrpca_check_loss(double tau, double u);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRPCA_H */
