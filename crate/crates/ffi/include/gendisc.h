#ifndef GENDISC_H
#define GENDISC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GdAlgorithm {
  GD_ALGORITHM_FORWARD_BACKWARD = 0,
  GD_ALGORITHM_ENTROPIC_FORWARD_BACKWARD = 1,
} GdAlgorithm;

typedef enum GdModelKind {
  GD_MODEL_KIND_NAIVE_BAYES = 0,
  GD_MODEL_KIND_DISC_NB = 1,
  GD_MODEL_KIND_LOG_REG = 2,
  GD_MODEL_KIND_HMM = 3,
} GdModelKind;

// Posterior route for Naive Bayes models.
typedef enum GdRoute {
  GD_ROUTE_GENERATIVE = 0,
  GD_ROUTE_DISCRIMINATIVE = 1,
} GdRoute;

typedef enum GdStatus {
  GD_STATUS_OK = 0,
  GD_STATUS_NULL_ARGUMENT = 1,
  GD_STATUS_INVALID_UTF8 = 2,
  // Malformed model, dimension mismatch, unknown symbol, zero evidence.
  GD_STATUS_BAD_INPUT = 3,
  // Divergence or a non-finite intermediate.
  GD_STATUS_NUMERICAL = 4,
  // The operation does not apply to this kind of model.
  GD_STATUS_WRONG_MODEL_KIND = 5,
  // The caller's output buffer has the wrong length.
  GD_STATUS_BUFFER_SIZE = 6,
  GD_STATUS_IO = 7,
  GD_STATUS_VERIFY_FAILED = 8,
  GD_STATUS_PANIC = 9,
} GdStatus;

// Opaque model handle.
typedef struct GdModel GdModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *gd_version(void);

// Message of the most recent failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *gd_last_error_message(void);

// Parses a JSON model document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for one write.
enum GdStatus gd_model_from_json(const char *json, struct GdModel **out);

// Reads and parses a JSON model file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid for one write.
enum GdStatus gd_model_load(const char *path, struct GdModel **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `model` must be null or a handle not yet freed.
void gd_model_free(struct GdModel *model);

// Serializes a model; release the string with [`gd_string_free`].
//
// # Safety
// `model` must be a live handle; `out` must be valid for one write.
enum GdStatus gd_model_to_json(const struct GdModel *model, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void gd_string_free(char *s);

// # Safety
// `model` must be a live handle; `out` must be valid for one write.
enum GdStatus gd_model_kind(const struct GdModel *model, enum GdModelKind *out);

// # Safety
// `model` must be a live handle; `out` must be valid for one write.
enum GdStatus gd_model_n_labels(const struct GdModel *model, size_t *out);

// Name of label `index`; release the string with [`gd_string_free`].
//
// # Safety
// `model` must be a live handle; `out` must be valid for one write.
enum GdStatus gd_model_label(const struct GdModel *model, size_t index, char **out);

// Observation length `T` of a Naive Bayes, disc_nb or logreg model.
//
// # Safety
// `model` must be a live handle; `out` must be valid for one write.
enum GdStatus gd_model_n_positions(const struct GdModel *model, size_t *out);

// Posterior of a Naive Bayes model for symbol indices `symbols[0..len]`,
// written to `out[0..out_len]` with `out_len` equal to the label count.
//
// # Safety
// `model` must be a live handle; `symbols` valid for `len` reads; `out`
// valid for `out_len` writes.
enum GdStatus gd_predict_discrete(const struct GdModel *model,
                                  const size_t *symbols,
                                  size_t len,
                                  enum GdRoute route,
                                  double *out,
                                  size_t out_len);

// Posterior of a disc_nb or logreg model for real features `y[0..len]`.
//
// # Safety
// `model` must be a live handle; `y` valid for `len` reads; `out` valid
// for `out_len` writes.
enum GdStatus gd_predict_real(const struct GdModel *model,
                              const double *y,
                              size_t len,
                              double *out,
                              size_t out_len);

// disc_nb to logreg, or logreg to disc_nb under `prior[0..prior_len]`
// (uniform when `prior_len` is 0). The result is a new handle.
//
// # Safety
// `model` must be a live handle; `prior` valid for `prior_len` reads;
// `out` valid for one write.
enum GdStatus gd_convert(const struct GdModel *model,
                         const double *prior,
                         size_t prior_len,
                         struct GdModel **out);

// Smoothed marginals of an HMM for `observations[0..len]`, row-major into
// `out[0..out_len]` with `out_len = len * n_labels`. The entropic variant
// derives posterior columns from the emissions when the model has none.
//
// # Safety
// `model` must be a live handle; `observations` valid for `len` reads;
// `out` valid for `out_len` writes.
enum GdStatus gd_hmm_posterior(const struct GdModel *model,
                               const size_t *observations,
                               size_t len,
                               enum GdAlgorithm algorithm,
                               double *out,
                               size_t out_len);

// Runs the equivalence suites. Returns `GD_STATUS_VERIFY_FAILED` if any
// suite fails; `max_discrepancy`, when not null, receives the largest
// discrepancy over all suites.
//
// # Safety
// `max_discrepancy` must be null or valid for one write.
enum GdStatus gd_verify(uint64_t seed, size_t cases, double *max_discrepancy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENDISC_H */
