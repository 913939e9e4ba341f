#ifndef DGM_H
#define DGM_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result of every fallible call.
 */
typedef enum DgmStatus {
  DGM_STATUS_OK = 0,
  /*
   Invalid input: malformed files, non-decomposable graphs, bad parameters.
   */
  DGM_STATUS_USER_ERROR = 1,
  /*
   A defect inside the library, including caught panics.
   */
  DGM_STATUS_INTERNAL_ERROR = 2,
  /*
   A required pointer argument was NULL.
   */
  DGM_STATUS_NULL_POINTER = 3,
  /*
   A string argument was not valid UTF-8.
   */
  DGM_STATUS_INVALID_UTF8 = 4,
} DgmStatus;

/*
 A parsed, decomposable model.
 */
typedef struct DgmModel DgmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer is
 valid until the next call into this library on the same thread.
 */
const char *dgm_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *dgm_version(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void dgm_string_free(char *s);

/*
 Parses a model description (JSON text).

 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DgmStatus dgm_model_from_json(const char *json, struct DgmModel **out);

/*
 Reads a model description from a file.

 # Safety
 `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DgmStatus dgm_model_from_file(const char *path, struct DgmModel **out);

/*
 Releases a model. NULL is ignored.

 # Safety
 `model` must come from this library and not have been freed.
 */
void dgm_model_free(struct DgmModel *model);

/*
 Number of variables and number of free parameters.

 # Safety
 `model` must be a live handle; the out-pointers must be writable.
 */
enum DgmStatus dgm_model_dimensions(const struct DgmModel *model,
                                    uintptr_t *n_variables,
                                    uintptr_t *n_parameters,
                                    uintptr_t *n_joint_cells);

/*
 The model with its clique order, as JSON.

 # Safety
 `model` must be a live handle and `out` writable.
 */
enum DgmStatus dgm_model_to_json(const struct DgmModel *model, char **out);

/*
 Converts a parameter dump to the kind `to` (joint, pcond, mod, cond,
 cliq or xi). `tolerance` bounds the Markov check on joint tables.

 # Safety
 `model` must be a live handle, the strings NUL-terminated, `out` writable.
 */
enum DgmStatus dgm_transform(const struct DgmModel *model,
                             const char *params_json,
                             const char *to,
                             double tolerance,
                             char **out);

/*
 Log-likelihood of a parameter point evaluated in parametrization `as`,
 for joint counts in row-major order (last variable fastest).

 # Safety
 `counts` must point to `n_counts` values; other pointers as above.
 */
enum DgmStatus dgm_loglik(const struct DgmModel *model,
                          const char *params_json,
                          const char *as_kind,
                          const uint64_t *counts,
                          uintptr_t n_counts,
                          double tolerance,
                          double *out);

/*
 Reference prior dump for `kind` (pcond, cond, cliq, mod or xi).

 # Safety
 Pointers as above.
 */
enum DgmStatus dgm_prior(const struct DgmModel *model, const char *kind, char **out);

/*
 Posterior hyperparameters after observing the joint counts.

 # Safety
 `counts` must point to `n_counts` values; other pointers as above.
 */
enum DgmStatus dgm_posterior(const struct DgmModel *model,
                             const uint64_t *counts,
                             uintptr_t n_counts,
                             char **out);

/*
 `n_draws` draws in parametrization `kind` as a JSON array of dumps. With
 `counts` NULL the draws come from the prior, otherwise from the posterior.

 # Safety
 `counts` is NULL or points to `n_counts` values; other pointers as above.
 */
enum DgmStatus dgm_sample(const struct DgmModel *model,
                          const char *kind,
                          uintptr_t n_draws,
                          uint64_t seed,
                          const uint64_t *counts,
                          uintptr_t n_counts,
                          char **out);

/*
 Cut decomposition along the comma-separated variables `set`, as JSON.
 Returns `UserError` with a witness when `set` is not a cut.

 # Safety
 Pointers as above.
 */
enum DgmStatus dgm_cut(const struct DgmModel *model, const char *set, bool with_prior, char **out);

/*
 Runs the built-in verification suite. `all_passed` receives 1 when every
 check passed; `report` receives the JSON report.

 # Safety
 The out-pointers must be writable.
 */
enum DgmStatus dgm_verify(uint64_t seed, int32_t *all_passed, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DGM_H */
