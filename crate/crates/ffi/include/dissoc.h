#ifndef DISSOC_H
#define DISSOC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DissocStatus {
  DISSOC_STATUS_OK = 0,
  DISSOC_STATUS_NULL_ARGUMENT = 1,
  DISSOC_STATUS_INVALID_UTF8 = 2,
  DISSOC_STATUS_PARSE_ERROR = 3,
  /**
   * The input does not meet a documented precondition.
   */
  DISSOC_STATUS_PRECONDITION = 4,
  /**
   * An internal check failed. Indicates a bug.
   */
  DISSOC_STATUS_INTERNAL = 5,
  DISSOC_STATUS_PANIC = 6,
} DissocStatus;

typedef enum DissocDirection {
  DISSOC_DIRECTION_UPPER = 0,
  DISSOC_DIRECTION_LOWER = 1,
} DissocDirection;

typedef enum DissocTemplateKind {
  DISSOC_TEMPLATE_KIND_DISJUNCTIVE = 0,
  DISSOC_TEMPLATE_KIND_CONJUNCTIVE = 1,
} DissocTemplateKind;

/**
 * Parsed expression. Opaque.
 */
typedef struct DissocExpr DissocExpr;

/**
 * Variable probabilities. Opaque.
 */
typedef struct DissocProbs DissocProbs;

/**
 * Result of [`dissoc_bound`]. Values are rounded to double; the exact
 * rationals are available as text through `out_text`.
 */
typedef struct DissocBoundSummary {
  double exact;
  double bound;
  /**
   * `bound - exact`
   */
  double gap;
  bool tight;
  /**
   * True when every value was computed in rational arithmetic.
   */
  bool is_exact;
  enum DissocTemplateKind kind;
  /**
   * Number of fresh copies.
   */
  size_t n;
} DissocBoundSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *dissoc_last_error(void);

/**
 * Library version as a static string.
 */
const char *dissoc_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void dissoc_string_free(char *s);

/**
 * Parses `text` into a new expression stored in `*out`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DissocStatus dissoc_expr_parse(const char *text, struct DissocExpr **out);

/**
 * Re-parseable text for `expr`. Free the result with [`dissoc_string_free`].
 *
 * # Safety
 * `expr` must come from [`dissoc_expr_parse`]; `out` must be a valid pointer.
 */
enum DissocStatus dissoc_expr_format(const struct DissocExpr *expr, char **out);

/**
 * # Safety
 * `expr` must be null or come from [`dissoc_expr_parse`], not yet freed.
 */
void dissoc_expr_free(struct DissocExpr *expr);

/**
 * Empty probability assignment.
 */
struct DissocProbs *dissoc_probs_new(void);

/**
 * Parses a probability file's contents (`name = value` lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DissocStatus dissoc_probs_parse(const char *text, struct DissocProbs **out);

/**
 * Sets `name` to `value`, given as `a/b`, an integer or a decimal.
 *
 * # Safety
 * `probs` must come from this library; the strings must be NUL-terminated.
 */
enum DissocStatus dissoc_probs_set(struct DissocProbs *probs, const char *name, const char *value);

/**
 * # Safety
 * `probs` must be null or come from this library, not yet freed.
 */
void dissoc_probs_free(struct DissocProbs *probs);

/**
 * Probability of `expr`. `out_text`, if not null, receives the value as
 * `a/b` when exact or as a decimal otherwise.
 *
 * # Safety
 * Handles must come from this library; `out_value` must be valid.
 */
enum DissocStatus dissoc_eval(const struct DissocExpr *expr,
                              const struct DissocProbs *probs,
                              double *out_value,
                              char **out_text);

/**
 * Bound on `expr` by dissociating `var` with the symmetric assignment.
 * `out_text`, if not null, receives `exact=<v> bound=<v>` with rationals
 * where the computation stayed exact.
 *
 * # Safety
 * Handles must come from this library; `var` must be NUL-terminated and
 * `out` valid.
 */
enum DissocStatus dissoc_bound(const struct DissocExpr *expr,
                               const char *var,
                               enum DissocDirection direction,
                               const struct DissocProbs *probs,
                               struct DissocBoundSummary *out,
                               char **out_text);

/**
 * Writes the symmetric statically-tight assignment for `n` copies of a
 * variable with probability `p` into `out[0..n]`.
 *
 * # Safety
 * `out` must point to at least `n` writable doubles.
 */
enum DissocStatus dissoc_assign_symmetric(enum DissocTemplateKind kind,
                                          enum DissocDirection direction,
                                          double p,
                                          size_t n,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISSOC_H */
