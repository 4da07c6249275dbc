#ifndef PDMOD_H
#define PDMOD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `PDMOD_STATUS_OK` is zero; every other value names a failure class.
 */
typedef enum PdmodStatus {
    PDMOD_STATUS_OK = 0,
    PDMOD_STATUS_NULL_POINTER = 1,
    PDMOD_STATUS_INVALID_UTF8 = 2,
    PDMOD_STATUS_DOMAIN = 3,
    PDMOD_STATUS_SHAPE = 4,
    PDMOD_STATUS_PARSE = 5,
    PDMOD_STATUS_SYNTAX = 6,
    PDMOD_STATUS_UNDECLARED_SYMBOL = 7,
    PDMOD_STATUS_NON_RATIONAL_COEFFICIENT = 8,
    PDMOD_STATUS_ORDER_BUDGET_EXCEEDED = 9,
    PDMOD_STATUS_PRECONDITION_FAILED = 10,
    PDMOD_STATUS_NOT_TORSION_FREE = 11,
    PDMOD_STATUS_DEGENERATE_METRIC = 12,
    PDMOD_STATUS_UNSUPPORTED_DIMENSION = 13,
    PDMOD_STATUS_UNKNOWN = 14,
    PDMOD_STATUS_IO = 15,
    PDMOD_STATUS_PANIC = 16,
} PdmodStatus;

/**
 * Opaque matrix of linear differential operators.
 */
typedef struct PdmodOperator PdmodOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *pdmod_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pdmod_version(void);

/**
 * Parses an operator file (`dim`, `unknowns`, `eq` lines).
 */
enum PdmodStatus pdmod_operator_parse(const char *text, struct PdmodOperator **out);

/**
 * Builds a gallery operator. `n == 0` selects the default dimension; a NULL metric means `euclid`.
 */
enum PdmodStatus pdmod_operator_gallery(const char *name,
                                        size_t n,
                                        const char *metric,
                                        struct PdmodOperator **out);

/**
 * Releases a handle. NULL is ignored.
 */
void pdmod_operator_free(struct PdmodOperator *op);

/**
 * Copies a handle.
 */
enum PdmodStatus pdmod_operator_clone(const struct PdmodOperator *op, struct PdmodOperator **out);

/**
 * Dimension, row count, column count and order of an operator. Any out-pointer may be NULL.
 */
enum PdmodStatus pdmod_operator_shape(const struct PdmodOperator *op,
                                      size_t *n,
                                      size_t *rows,
                                      size_t *cols,
                                      size_t *order);

/**
 * Operator in file syntax. Free the result with `pdmod_string_free`.
 */
enum PdmodStatus pdmod_operator_to_string(const struct PdmodOperator *op, char **out);

/**
 * Formal adjoint.
 */
enum PdmodStatus pdmod_operator_adjoint(const struct PdmodOperator *op, struct PdmodOperator **out);

/**
 * Composition `a` after `b`.
 */
enum PdmodStatus pdmod_operator_compose(const struct PdmodOperator *a,
                                        const struct PdmodOperator *b,
                                        struct PdmodOperator **out);

/**
 * Generating compatibility conditions. `max_order == 0` means operator order + 5.
 */
enum PdmodStatus pdmod_operator_cc(const struct PdmodOperator *op,
                                   size_t max_order,
                                   struct PdmodOperator **out);

/**
 * Whether `cc` composed with `a` vanishes.
 */
enum PdmodStatus pdmod_verify_cc(const struct PdmodOperator *cc,
                                 const struct PdmodOperator *a,
                                 bool *out);

/**
 * Whether two operators generate the same row module.
 */
enum PdmodStatus pdmod_row_module_eq(const struct PdmodOperator *a,
                                     const struct PdmodOperator *b,
                                     bool *out);

/**
 * Differential rank of an operator.
 */
enum PdmodStatus pdmod_differential_rank(const struct PdmodOperator *op, size_t *out);

/**
 * Double-duality torsion test. `generators` receives the number of torsion generators;
 * either out-pointer may be NULL. `max_order == 0` means operator order + 5.
 */
enum PdmodStatus pdmod_torsion_test(const struct PdmodOperator *op,
                                    size_t max_order,
                                    bool *torsion_free,
                                    size_t *generators);

/**
 * Runs a CLI command on `count` operators and returns its JSON report.
 * `exit_code` receives the status the command-line tool would exit with.
 */
enum PdmodStatus pdmod_run_command(const char *command,
                                   const struct PdmodOperator *const *inputs,
                                   size_t count,
                                   uint64_t seed,
                                   char **json_out,
                                   int32_t *exit_code);

/**
 * Releases a string returned by this library. NULL is ignored.
 */
void pdmod_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDMOD_H */
