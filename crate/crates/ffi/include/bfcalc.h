#ifndef BFCALC_H
#define BFCALC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BfcStatus {
  /**
   * The call succeeded and the checked property holds.
   */
  BFC_STATUS_OK = 0,
  /**
   * The call succeeded and the checked property fails.
   */
  BFC_STATUS_FAIL = 1,
  BFC_STATUS_INPUT_ERROR = 2,
  BFC_STATUS_NULL_POINTER = 3,
  BFC_STATUS_INTERNAL = 4,
  BFC_STATUS_UTF8 = 5,
} BfcStatus;

typedef struct BfcAlgebra BfcAlgebra;

/**
 * A parsed document.
 */
typedef struct BfcDocument BfcDocument;

/**
 * A pointed matched circle, valid or not.
 */
typedef struct BfcPmc BfcPmc;

/**
 * Message for the last failed call on this thread; empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *bfc_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void bfc_string_free(char *s);

/**
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum BfcStatus bfc_document_parse(const char *text, struct BfcDocument **out);

/**
 * Executes every RUN line. `report` receives the rendered reports, JSON
 * when `json` is true. Returns OK, FAIL or INPUT_ERROR as the command-line
 * driver would exit.
 *
 * # Safety
 * `doc` must be a live handle; `report` must be writable.
 */
enum BfcStatus bfc_document_run(const struct BfcDocument *doc, bool json, char **report);

/**
 * Executes one command line, e.g. `algebra verify A_T --budget 100`,
 * against the document.
 *
 * # Safety
 * `doc` must be a live handle, `command` a nul-terminated string and
 * `report` writable.
 */
enum BfcStatus bfc_document_execute(const struct BfcDocument *doc,
                                    const char *command,
                                    bool json,
                                    char **report);

/**
 * # Safety
 * `doc` must come from `bfc_document_parse` and not have been freed.
 */
void bfc_document_free(struct BfcDocument *doc);

/**
 * Builds a matching from `2 * pair_count` points laid out as consecutive
 * pairs. Malformed matchings are rejected; degenerate ones are accepted
 * and reported by `bfc_pmc_is_valid`.
 *
 * # Safety
 * `points` must hold `2 * pair_count` bytes; `out` must be writable.
 */
enum BfcStatus bfc_pmc_new(size_t genus,
                           const uint8_t *points,
                           size_t pair_count,
                           struct BfcPmc **out);

/**
 * Writes whether surgery on all pairs leaves one circle.
 *
 * # Safety
 * `pmc` must be a live handle; `valid` must be writable.
 */
enum BfcStatus bfc_pmc_is_valid(const struct BfcPmc *pmc, bool *valid);

/**
 * # Safety
 * `pmc` must come from `bfc_pmc_new` and not have been freed.
 */
void bfc_pmc_free(struct BfcPmc *pmc);

/**
 * Strand algebra of a valid circle.
 *
 * # Safety
 * `pmc` must be a live handle; `out` must be writable.
 */
enum BfcStatus bfc_algebra_strand(const struct BfcPmc *pmc, struct BfcAlgebra **out);

/**
 * # Safety
 * `alg` must be a live handle; `dim` must be writable.
 */
enum BfcStatus bfc_algebra_dim(const struct BfcAlgebra *alg, size_t *dim);

/**
 * Checks the DGA axioms with the given sample budget. Returns OK when all
 * pass and FAIL otherwise.
 *
 * # Safety
 * `alg` must be a live handle.
 */
enum BfcStatus bfc_algebra_verify(const struct BfcAlgebra *alg, size_t sample_budget);

/**
 * # Safety
 * `alg` must come from `bfc_algebra_strand` and not have been freed.
 */
void bfc_algebra_free(struct BfcAlgebra *alg);

#endif  /* BFCALC_H */
