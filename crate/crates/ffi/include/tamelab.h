#ifndef TAMELAB_H
#define TAMELAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Cost functional.
typedef enum TlCost {
  TL_COST_TRIE_SIZE = 0,
  TL_COST_TRIE_PATH_LENGTH = 1,
  TL_COST_BST_SYMBOL_COST = 2,
} TlCost;

// Exact-mean method.
typedef enum TlMethod {
  TL_METHOD_ALTERNATING = 0,
  TL_METHOD_DIRECT = 1,
  TL_METHOD_RICE = 2,
} TlMethod;

// Status codes returned by every fallible function.
typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_NULL_POINTER = 1,
  TL_STATUS_INVALID_ARGUMENT = 2,
  TL_STATUS_UNSUPPORTED_SOURCE = 3,
  TL_STATUS_NUMERIC = 4,
  TL_STATUS_PANIC = 5,
} TlStatus;

// Opaque source handle.
typedef struct TlSource TlSource;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until the
// next call on the same thread.
const char *tl_last_error(void);

// Library version as a static NUL-terminated string.
const char *tl_version(void);

// Creates a built-in source by name, e.g. "uniform-binary" or "gauss".
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum TlStatus tl_source_builtin(const char *name, struct TlSource **out);

// Parses a source from its JSON description.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum TlStatus tl_source_from_json(const char *json, struct TlSource **out);

// Builds a memoryless source from `len` probabilities summing to one.
//
// # Safety
// `probs` must point to `len` doubles and `out` must be a valid pointer.
enum TlStatus tl_source_memoryless(const double *probs, size_t len, struct TlSource **out);

// Releases a source. NULL is ignored.
//
// # Safety
// `source` must come from a `tl_source_*` constructor and not be freed twice.
void tl_source_free(struct TlSource *source);

// Entropy h of the source.
//
// # Safety
// `source` must be a live handle and `out` a valid pointer.
enum TlStatus tl_entropy(const struct TlSource *source, double *out);

// Dirichlet series Lambda(s) at s = re + i im.
//
// # Safety
// `source` must be a live handle; `out_re` and `out_im` valid pointers.
enum TlStatus tl_dirichlet_series(const struct TlSource *source,
                                  double re,
                                  double im,
                                  double *out_re,
                                  double *out_im);

// Exact expected cost over `n` independent words. `abs_error` may be NULL.
//
// # Safety
// `source` must be a live handle and `out` a valid pointer.
enum TlStatus tl_exact_mean(const struct TlSource *source,
                            enum TlCost cost,
                            uint64_t n,
                            enum TlMethod method,
                            double *out,
                            double *abs_error);

// Tameness report as a JSON string; release it with `tl_string_free`.
//
// # Safety
// `source` must be a live handle and `out` a valid pointer.
enum TlStatus tl_classify_json(const struct TlSource *source, uint64_t seed, char **out);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void tl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAMELAB_H */
