#ifndef DCAUSE_H
#define DCAUSE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_NULL_ARGUMENT = 1,
  DC_STATUS_INVALID_UTF8 = 2,
  DC_STATUS_INPUT = 3,
  DC_STATUS_MODEL = 4,
  DC_STATUS_IMPOSSIBLE_EVIDENCE = 5,
  DC_STATUS_DEFINEDNESS = 6,
  DC_STATUS_FORM = 7,
  DC_STATUS_LIMIT = 8,
  DC_STATUS_FORMAT = 9,
  DC_STATUS_WRONG_MODEL_KIND = 10,
  DC_STATUS_PANIC = 11,
} DcStatus;

/**
 * A parsed model file.
 */
typedef struct DcModel DcModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *dc_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *dc_last_error(void);

/**
 * Parses a model from JSON text.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum DcStatus dc_model_from_json(const char *json, struct DcModel **out);

/**
 * Reads a model file.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum DcStatus dc_model_from_path(const char *path, struct DcModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `m` is null or a handle not yet freed.
 */
void dc_model_free(struct DcModel *m);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or a string from this library not yet freed.
 */
void dc_string_free(char *s);

/**
 * The model tag (`world_table`, `canonical`, ...) into a new string.
 *
 * # Safety
 * `m` is a live handle; `out` is writable.
 */
enum DcStatus dc_model_kind(const struct DcModel *m, char **out);

/**
 * Serializes a model to its JSON file form.
 *
 * # Safety
 * `m` is a live handle; `out` is writable.
 */
enum DcStatus dc_model_to_json(const struct DcModel *m, char **out);

/**
 * Canonical-form diagram of a priced world table or a structural model.
 *
 * # Safety
 * `m` is a live handle; `out` is writable.
 */
enum DcStatus dc_canonicalize(const struct DcModel *m, struct DcModel **out);

/**
 * Whether chance variables `vars` (comma-separated) of a world table are
 * responsive to the decisions in states limited by `limited_by`, which may
 * be null.
 *
 * # Safety
 * `m` is a live handle; strings are NUL-terminated or null where allowed;
 * `out` is writable.
 */
enum DcStatus dc_is_responsive(const struct DcModel *m,
                               const char *vars,
                               const char *limited_by,
                               bool *out);

/**
 * Minimal cause sets of `var` in a world table, as a JSON array of sorted
 * arrays of ids.
 *
 * # Safety
 * `m` is a live handle; `var` is NUL-terminated; `out` is writable.
 */
enum DcStatus dc_find_causes(const struct DcModel *m, const char *var, char **out);

/**
 * Number of free probabilities: diagram parameters for a diagram,
 * disturbance parameters for a structural model.
 *
 * # Safety
 * `m` is a live handle; `out` is writable.
 */
enum DcStatus dc_count_params(const struct DcModel *m, uint64_t *out);

/**
 * `P(event | act, evidence)`. Assignments are written `a=x,b=y`; `act`
 * and `evidence` may be null.
 *
 * # Safety
 * `m` is a live handle; strings are NUL-terminated or null where allowed;
 * `out` is writable.
 */
enum DcStatus dc_infer_probability(const struct DcModel *m,
                                   const char *act,
                                   const char *evidence,
                                   const char *event,
                                   double *out);

/**
 * Probability of `event` in the counterfactual world where `cf_act` was
 * taken, given that `factual_act` was taken and `factual_evidence` seen.
 * Event ids are read in the counterfactual world. `full` selects the full
 * twin diagram instead of the minimal one.
 *
 * # Safety
 * `m` is a live handle; strings are NUL-terminated or null where allowed;
 * `out` is writable.
 */
enum DcStatus dc_counterfactual_probability(const struct DcModel *m,
                                            const char *factual_act,
                                            const char *factual_evidence,
                                            const char *cf_act,
                                            const char *event,
                                            bool full,
                                            double *out);

/**
 * Value of observing the unresponsive node `var` before deciding.
 *
 * # Safety
 * `m` is a live handle; `var` is NUL-terminated; `out` is writable.
 */
enum DcStatus dc_value_of_information(const struct DcModel *m, const char *var, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DCAUSE_H */
