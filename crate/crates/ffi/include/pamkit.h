#ifndef PAMKIT_H
#define PAMKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; 2 to 5 match the exit codes of the command line tool.
 */
typedef enum {
  PAMKIT_STATUS_OK = 0,
  PAMKIT_STATUS_FAILURE = 1,
  PAMKIT_STATUS_CONFIG = 2,
  PAMKIT_STATUS_HYPOTHESIS_VIOLATED = 3,
  PAMKIT_STATUS_DIVERGENCE = 4,
  PAMKIT_STATUS_INSUFFICIENT_DATA = 5,
  PAMKIT_STATUS_NULL_POINTER = 6,
  PAMKIT_STATUS_INVALID_UTF8 = 7,
  PAMKIT_STATUS_PANIC = 8,
} PamkitStatus;

/**
 * A resolved experiment configuration.
 */
typedef struct PamkitConfig PamkitConfig;

/**
 * A Lévy process paired with a noise specification.
 */
typedef struct PamkitModel PamkitModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *pamkit_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pamkit_version(void);

/**
 * Builds a model from spec strings such as `stable:alpha=1.5` and
 * `riesz:beta=0.5`.
 *
 * # Safety
 * `process` and `kernel` must be NUL-terminated strings; `out` must be
 * writable.
 */
PamkitStatus pamkit_model_new(const char *process,
                              const char *kernel,
                              size_t dim,
                              double beta0,
                              PamkitModel **out);

/**
 * # Safety
 * `model` must come from [`pamkit_model_new`] and not be freed twice.
 */
void pamkit_model_free(PamkitModel *model);

/**
 * Checks hypothesis (I) (`which = 1`) or (II) (`which = 2`).
 *
 * # Safety
 * `model` must be a live handle; `holds` must be writable; `integral` may
 * be null.
 */
PamkitStatus pamkit_check_hypothesis(const PamkitModel *model,
                                     uint32_t which,
                                     bool *holds,
                                     double *integral);

/**
 * `E H` over `[0, t]²`; `cross = false` for the self Hamiltonian.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
PamkitStatus pamkit_expected_hamiltonian(const PamkitModel *model,
                                         double t,
                                         bool cross,
                                         double *out);

/**
 * Monte Carlo estimate of `E u(t,x)^p` for `u₀ ≡ u0`; `skorohod = false`
 * selects the Stratonovich sense. `x` has `dim` entries.
 *
 * # Safety
 * `model` must be a live handle, `x` must point to `dim` doubles and
 * `value`, `stderr` must be writable.
 */
PamkitStatus pamkit_moment(const PamkitModel *model,
                           bool skorohod,
                           size_t p,
                           double t,
                           const double *x,
                           double u0,
                           size_t steps,
                           size_t replicates,
                           uint64_t seed,
                           double *value,
                           double *stderr);

/**
 * Partial sums `S_0..S_N` of the chaos series for `E u(t,x)²` with
 * `u₀ ≡ u0`, written to `sums[0..=n_terms]`.
 *
 * # Safety
 * `model` must be a live handle; `sums` must hold `n_terms + 1` doubles.
 */
PamkitStatus pamkit_chaos_partial_sums(const PamkitModel *model,
                                       size_t n_terms,
                                       double t,
                                       double u0,
                                       size_t steps,
                                       size_t replicates,
                                       uint64_t seed,
                                       double *sums);

/**
 * `Π Γ(α_i+1) t^{Σα+n} / Γ(Σα+n+1)` for `n = len` exponents.
 *
 * # Safety
 * `alphas` must point to `len` doubles; `out` must be writable.
 */
PamkitStatus pamkit_dirichlet_beta_integral(const double *alphas,
                                            size_t len,
                                            double t,
                                            double *out);

/**
 * Parses a config file text (the command line `--config` format).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
PamkitStatus pamkit_config_parse(const char *text, PamkitConfig **out);

/**
 * Overrides one key, as the matching command line flag would.
 *
 * # Safety
 * `config` must be a live handle; `key` and `value` NUL-terminated strings.
 */
PamkitStatus pamkit_config_set(PamkitConfig *config, const char *key, const char *value);

/**
 * # Safety
 * `config` must come from [`pamkit_config_parse`] and not be freed twice.
 */
void pamkit_config_free(PamkitConfig *config);

/**
 * Runs a subcommand (`"moments"`, `"chaos"`, ...) and writes its
 * artifacts to the configured output directory.
 *
 * # Safety
 * `config` must be a live handle; `command` a NUL-terminated string.
 */
PamkitStatus pamkit_run(const PamkitConfig *config, const char *command);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAMKIT_H */
