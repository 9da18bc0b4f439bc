#ifndef CERES_H
#define CERES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CeresStatus {
  CERES_STATUS_OK = 0,
  CERES_STATUS_NULL_POINTER = 1,
  CERES_STATUS_INVALID_ARGUMENT = 2,
  CERES_STATUS_BUDGET_EXHAUSTED = 3,
  /**
   * The computation ran but gave a negative answer, e.g. no refutation.
   */
  CERES_STATUS_NOT_FOUND = 4,
  CERES_STATUS_INTERNAL = 5,
  CERES_STATUS_PANIC = 6,
} CeresStatus;

typedef enum CeresFormat {
  CERES_FORMAT_TEXT = 0,
  CERES_FORMAT_JSON = 1,
  CERES_FORMAT_TPTP = 2,
  CERES_FORMAT_DOT = 3,
  CERES_FORMAT_DIMACS = 4,
} CeresFormat;

typedef enum CeresMode {
  /**
   * ρ1–ρ4 under the repaired reading.
   */
  CERES_MODE_SCHEMA = 0,
  /**
   * ρ1–ρ4 exactly as printed; expected to exhaust its budget.
   */
  CERES_MODE_SCHEMA_PRINTED = 1,
  CERES_MODE_MATH = 2,
  CERES_MODE_SATURATE = 3,
} CeresMode;

/**
 * A refutation of `C(n)` built by [`ceres_refute`].
 */
typedef struct CeresTree CeresTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *ceres_version(void);

/**
 * Message of the last failed call on this thread, or null. Free with
 * [`ceres_string_free`].
 */
char *ceres_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed at most once.
 */
void ceres_string_free(char *s);

/**
 * `C(n)` as text, JSON or TPTP.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum CeresStatus ceres_clause_set(uint64_t n, enum CeresFormat format, char **out);

/**
 * Builds a refutation of `C(n)`. `budget` of 0 selects the mode's default;
 * `depth` is only read by saturation (0 selects `n + 1`). The tree is
 * returned even when it fails the checker; use [`ceres_tree_check`].
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum CeresStatus ceres_refute(uint64_t n,
                              enum CeresMode mode,
                              uint64_t budget,
                              uint64_t depth,
                              struct CeresTree **out);

/**
 * # Safety
 * `tree` must be null or a handle from [`ceres_refute`], freed at most once.
 */
void ceres_tree_free(struct CeresTree *tree);

/**
 * Tree size with shared subtrees counted once per use; 0 for null.
 *
 * # Safety
 * `tree` must be null or a live handle.
 */
uint64_t ceres_tree_size(const struct CeresTree *tree);

/**
 * Re-checks the tree against `C(n)`: leaves are instances, every step is
 * re-derived and the root is empty.
 *
 * # Safety
 * `tree` must be a live handle and `passes` valid for a write.
 */
enum CeresStatus ceres_tree_check(const struct CeresTree *tree, bool *passes);

/**
 * The tree as indented text, JSON or Graphviz dot.
 *
 * # Safety
 * `tree` must be a live handle and `out` valid for a pointer write.
 */
enum CeresStatus ceres_tree_render(const struct CeresTree *tree,
                                   enum CeresFormat format,
                                   char **out);

/**
 * Decides validity of the Herbrand sequent `S(n)` under the chosen axioms.
 *
 * # Safety
 * `valid` must be valid for a write.
 */
enum CeresStatus ceres_herbrand_verify(uint64_t n,
                                       bool equality_axioms,
                                       bool order_axioms,
                                       bool *valid);

/**
 * `S(n)` as text or JSON, or its validity problem as DIMACS.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum CeresStatus ceres_herbrand_render(uint64_t n, enum CeresFormat format, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CERES_H */
