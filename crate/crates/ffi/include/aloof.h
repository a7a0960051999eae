#ifndef ALOOF_H
#define ALOOF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AloofLearner {
  ALOOF_LEARNER_TREE = 0,
  ALOOF_LEARNER_GRADIENT_BOOSTING = 1,
  ALOOF_LEARNER_RANDOM_FOREST = 2,
} AloofLearner;

typedef enum AloofSelector {
  ALOOF_SELECTOR_CART = 0,
  ALOOF_SELECTOR_ALOOF = 1,
} AloofSelector;

// Result codes.
typedef enum AloofStatus {
  ALOOF_STATUS_OK = 0,
  ALOOF_STATUS_NULL_POINTER = 1,
  ALOOF_STATUS_INVALID_ARGUMENT = 2,
  ALOOF_STATUS_IO = 3,
  ALOOF_STATUS_SCHEMA = 4,
  ALOOF_STATUS_FORMAT = 5,
  ALOOF_STATUS_BUFFER_TOO_SMALL = 6,
  ALOOF_STATUS_PANIC = 7,
} AloofStatus;

// Opaque dataset handle.
typedef struct AloofDataset AloofDataset;

// Opaque model handle.
typedef struct AloofModel AloofModel;

// Fit settings. Zero in a numeric field means "library default" (no limit
// for `max_depth` and `max_categories`).
typedef struct AloofFitOptions {
  enum AloofLearner learner;
  enum AloofSelector selector;
  uint32_t max_depth;
  uint32_t min_leaf;
  uint32_t max_categories;
  uint32_t trees;
  uint64_t seed;
} AloofFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library on this thread.
const char *aloof_last_error(void);

// Defaults: single ALOOF tree, library size limits, seed 0.
struct AloofFitOptions aloof_fit_options_default(void);

// Loads a CSV file described by a schema file.
//
// # Safety
// Paths must be NUL-terminated strings; `out` must be writable.
enum AloofStatus aloof_dataset_load(const char *csv_path,
                                    const char *schema_path,
                                    struct AloofDataset **out);

// Parses CSV and schema text held in memory.
//
// # Safety
// Strings must be NUL-terminated; `out` must be writable.
enum AloofStatus aloof_dataset_parse(const char *csv_text,
                                     const char *schema_text,
                                     struct AloofDataset **out);

// Row and feature counts.
//
// # Safety
// `d` must be a live dataset handle; outputs must be writable.
enum AloofStatus aloof_dataset_shape(const struct AloofDataset *d, size_t *rows, size_t *features);

// # Safety
// `d` must come from this library and not be used afterwards. NULL is a no-op.
void aloof_dataset_free(struct AloofDataset *d);

// Fits a model. `options` may be NULL for the defaults.
//
// # Safety
// `d` must be a live dataset handle; `options` NULL or valid; `out` writable.
enum AloofStatus aloof_model_fit(const struct AloofDataset *d,
                                 const struct AloofFitOptions *options,
                                 struct AloofModel **out);

// Writes one prediction per dataset row into `out[0..len]`; `len` must equal
// the row count.
//
// # Safety
// Handles must be live; `out` must hold `len` doubles.
enum AloofStatus aloof_model_predict(const struct AloofModel *m,
                                     const struct AloofDataset *d,
                                     double *out,
                                     size_t len);

// Serializes a tree or ensemble model. Release the string with
// [`aloof_string_free`].
//
// # Safety
// `m` must be a live model handle; `out` writable.
enum AloofStatus aloof_model_to_json(const struct AloofModel *m, char **out);

// # Safety
// `json` must be NUL-terminated; `out` writable.
enum AloofStatus aloof_model_from_json(const char *json, struct AloofModel **out);

// # Safety
// `m` must come from this library and not be used afterwards. NULL is a no-op.
void aloof_model_free(struct AloofModel *m);

// # Safety
// `s` must come from this library. NULL is a no-op.
void aloof_string_free(char *s);

// Leave-one-out score of every feature at the root, with the default
// impurity and `min_leaf`. `scores` and `valid` must hold one entry per
// feature; invalid features get a score of +inf.
//
// # Safety
// `d` must be a live handle; output buffers must hold `len` entries.
enum AloofStatus aloof_loo_scores(const struct AloofDataset *d,
                                  uint32_t min_leaf,
                                  double *scores,
                                  uint8_t *valid,
                                  size_t len,
                                  double *baseline);

// One-sided sign test: exact binomial tail and continuity-corrected normal
// approximation.
//
// # Safety
// Outputs must be writable.
enum AloofStatus aloof_sign_test(uint64_t wins, uint64_t trials, double *exact, double *normal);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALOOF_H */
