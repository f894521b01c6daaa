#ifndef ADAPTIVE_DRIFT_H
#define ADAPTIVE_DRIFT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AdStatus {
  AD_STATUS_OK = 0,
  AD_STATUS_NULL_POINTER = 1,
  AD_STATUS_INVALID_ARGUMENT = 2,
  AD_STATUS_INVALID_MODEL = 3,
  AD_STATUS_RESOURCE_GUARD = 4,
  AD_STATUS_NUMERICAL = 5,
  AD_STATUS_BUFFER_TOO_SMALL = 6,
  AD_STATUS_PANIC = 7,
} AdStatus;

typedef enum AdStrategy {
  AD_STRATEGY_QDRIFT = 0,
  AD_STRATEGY_EQUAL = 1,
  AD_STRATEGY_ADAPTIVE = 2,
} AdStrategy;

// A built model together with its initial state.
typedef struct AdModel AdModel;

typedef struct AdFidelityStats {
  double mean;
  double std_error;
  uint64_t n_samples;
  double max_tau;
} AdFidelityStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Mixed-field Ising chain from its default initial state.
//
// # Safety
// `out` must be valid for writing one pointer.
enum AdStatus ad_model_mfim(size_t chain_length,
                            double j,
                            double h_x,
                            double h_z,
                            bool open_boundary,
                            struct AdModel **out);

// # Safety
// `out` must be valid for writing one pointer.
enum AdStatus ad_model_kerr(double delta,
                            double kerr,
                            double drive,
                            size_t fock_dim,
                            struct AdModel **out);

// # Safety
// `out` must be valid for writing one pointer.
enum AdStatus ad_model_rabi(double omega,
                            double omega_q,
                            double g,
                            size_t fock_dim,
                            struct AdModel **out);

// Parses a model table in the same TOML form as the `[model]` section of a
// run configuration, including an optional `initial` list.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be valid for writing
// one pointer.
enum AdStatus ad_model_from_toml(const char *toml, struct AdModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must be null or a handle from an `ad_model_*` constructor that
// has not already been freed.
void ad_model_free(struct AdModel *model);

// # Safety
// `model` must be a live handle; `out` must be valid for one write.
enum AdStatus ad_model_dimension(const struct AdModel *model, size_t *out);

// Number of non-zero terms after construction.
//
// # Safety
// `model` must be a live handle; `out` must be valid for one write.
enum AdStatus ad_model_term_count(const struct AdModel *model, size_t *out);

// Writes the (truncated) spectral norm of each term.
//
// # Safety
// `model` must be a live handle; `buf` must be valid for `len` writes.
enum AdStatus ad_model_term_norms(const struct AdModel *model, double *buf, size_t len);

// Sampling probabilities on the initial state. Fixed strategies ignore the
// state; the adaptive one uses exact term deviations.
//
// # Safety
// `model` must be a live handle; `buf` must be valid for `len` writes.
enum AdStatus ad_model_probabilities(const struct AdModel *model,
                                     enum AdStrategy strategy,
                                     double *buf,
                                     size_t len);

// Mean fidelity over `n_samples` seeded trajectories, each of `n_steps`
// steps to total time `t`. `jobs = 0` uses every core; the result does not
// depend on it.
//
// # Safety
// `model` must be a live handle; `out` must be valid for one write.
enum AdStatus ad_monte_carlo_fidelity(const struct AdModel *model,
                                      enum AdStrategy strategy,
                                      double t,
                                      size_t n_steps,
                                      size_t n_samples,
                                      uint64_t seed,
                                      size_t jobs,
                                      struct AdFidelityStats *out);

// Fidelity of a single trajectory on stream `stream` of `seed`; equal to
// trajectory `stream` of [`ad_monte_carlo_fidelity`] with the same seed.
//
// # Safety
// `model` must be a live handle; `out` must be valid for one write.
enum AdStatus ad_trajectory_fidelity(const struct AdModel *model,
                                     enum AdStrategy strategy,
                                     double t,
                                     size_t n_steps,
                                     uint64_t seed,
                                     uint64_t stream,
                                     double *out);

// Short model tag (`mfim`, `kerr` or `rabi`); static storage.
//
// # Safety
// `model` must be a live handle or null (null yields an empty string).
const char *ad_model_tag(const struct AdModel *model);

// Message for the last failed call on this thread; empty after success.
// Valid until the next `ad_*` call on the same thread.
const char *ad_last_error(void);

const char *ad_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADAPTIVE_DRIFT_H */
