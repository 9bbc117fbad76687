#ifndef EXPLNEED_H
#define EXPLNEED_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a library call.
typedef enum ExnStatus {
  EXN_STATUS_OK = 0,
  // A required pointer argument was null.
  EXN_STATUS_NULL_ARGUMENT = 1,
  // Input data or arguments failed validation.
  EXN_STATUS_INVALID_INPUT = 2,
  // A model file could not be read or parsed.
  EXN_STATUS_MODEL_IO = 3,
  // Unexpected failure inside the library.
  EXN_STATUS_INTERNAL = 4,
  // A string argument was not valid UTF-8.
  EXN_STATUS_INVALID_UTF8 = 5,
} ExnStatus;

// Verbal interpretation of an agreement coefficient.
typedef enum ExnBand {
  EXN_BAND_NONE = 0,
  EXN_BAND_SLIGHT = 1,
  EXN_BAND_FAIR = 2,
  EXN_BAND_MODERATE = 3,
  EXN_BAND_SUBSTANTIAL = 4,
  EXN_BAND_ALMOST_PERFECT = 5,
} ExnBand;

// Opaque handle to a loaded dataset.
typedef struct ExnDataset ExnDataset;

// Opaque handle to a trained model.
typedef struct ExnModel ExnModel;

typedef struct ExnAgreement {
  uint64_t n;
  double percent_agreement;
  double cohens_kappa;
  bool kappa_degenerate;
  enum ExnBand kappa_band;
  double gwets_ac1;
  bool ac1_degenerate;
  enum ExnBand ac1_band;
} ExnAgreement;

typedef struct ExnRulePrediction {
  bool explanation_need;
  bool question_mark;
  bool why;
} ExnRulePrediction;

typedef struct ExnPrediction {
  bool label;
  double score;
} ExnPrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next library call on the same thread.
const char *exn_last_error(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void exn_string_free(char *s);

// Library version as a static string.
const char *exn_version(void);

// Agreement statistics for the 2x2 table: `a` both negative, `b` rater 1
// positive only, `c` rater 2 positive only, `d` both positive.
//
// # Safety
// `out` must be valid for writes.
enum ExnStatus exn_agreement(uint64_t a,
                             uint64_t b,
                             uint64_t c,
                             uint64_t d,
                             struct ExnAgreement *out);

// `(1 + β²)·P·R / (β²·P + R)`, or 0 when both are 0.
double exn_f_beta(double precision, double recall, double beta);

// `total / relevant`.
//
// # Safety
// `out` must be valid for writes.
enum ExnStatus exn_compute_lambda(uint64_t relevant, uint64_t total, double *out);

// Applies the question-mark / "why" rule to a NUL-terminated UTF-8 string.
//
// # Safety
// `text` must be a valid C string and `out` valid for writes.
enum ExnStatus exn_classify_rule_based(const char *text, struct ExnRulePrediction *out);

// Loads a dataset in the canonical CSV format.
//
// # Safety
// `path` and `name` must be valid C strings; `out` valid for writes.
enum ExnStatus exn_dataset_load(const char *path, const char *name, struct ExnDataset **out);

// Number of reviews, or 0 for a null handle.
//
// # Safety
// `ds` must be null or a live handle from [`exn_dataset_load`].
size_t exn_dataset_len(const struct ExnDataset *ds);

// Number of explanation needs, or 0 for a null handle.
//
// # Safety
// `ds` must be null or a live handle from [`exn_dataset_load`].
size_t exn_dataset_positives(const struct ExnDataset *ds);

// Dataset statistics as a JSON string, released with [`exn_string_free`].
//
// # Safety
// `ds` must be a live handle; `out` valid for writes.
enum ExnStatus exn_dataset_stats_json(const struct ExnDataset *ds, char **out);

// Releases a dataset handle. Null is ignored.
//
// # Safety
// `ds` must be null or a handle that has not been freed.
void exn_dataset_free(struct ExnDataset *ds);

// Loads a model saved by `explneed train`.
//
// # Safety
// `path` must be a valid C string; `out` valid for writes.
enum ExnStatus exn_model_load(const char *path, struct ExnModel **out);

// Scores one review text with a loaded model.
//
// # Safety
// `model` must be a live handle, `text` a valid C string and `out` valid for
// writes.
enum ExnStatus exn_model_predict(const struct ExnModel *model,
                                 const char *text,
                                 struct ExnPrediction *out);

// Releases a model handle. Null is ignored.
//
// # Safety
// `model` must be null or a handle that has not been freed.
void exn_model_free(struct ExnModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXPLNEED_H */
