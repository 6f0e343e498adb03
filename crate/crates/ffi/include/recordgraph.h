#ifndef RECORDGRAPH_H
#define RECORDGRAPH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RgStatus {
  RG_STATUS_OK = 0,
  RG_STATUS_NULL_POINTER = 1,
  RG_STATUS_INVALID_ARGUMENT = 2,
  RG_STATUS_INVALID_LAW = 3,
  RG_STATUS_NOT_SKIP_FREE = 4,
  RG_STATUS_PARSE = 5,
  RG_STATUS_NOT_FINITE = 6,
  RG_STATUS_CENSORED = 7,
  RG_STATUS_BUFFER_TOO_SMALL = 8,
  RG_STATUS_INTERNAL = 9,
} RgStatus;

/**
 * How a query about the record graph was answered.
 */
typedef enum RgResolution {
  RG_RESOLUTION_RESOLVED = 0,
  /**
   * The answer is "none" (for example no record ever occurs).
   */
  RG_RESOLUTION_PROVED_INFINITE = 1,
  /**
   * The window or budget ran out before the answer was certain.
   */
  RG_RESOLUTION_CENSORED = 2,
} RgResolution;

typedef struct RgIncrementLaw RgIncrementLaw;

typedef struct RgTree RgTree;

typedef struct RgWindow RgWindow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library as a static NUL-terminated string.
 */
const char *rg_version(void);

/**
 * Copies the message of the last failed call on this thread into `buf`.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes; `out_len` must be valid for a write.
 */
enum RgStatus rg_last_error(char *buf, uintptr_t cap, uintptr_t *out_len);

/**
 * Increment law with atoms `values[k]` of probability `probs[k]`.
 *
 * # Safety
 * `values` and `probs` must be valid for `len` reads; `out` must be valid for a write.
 */
enum RgStatus rg_law_new(const int64_t *values,
                         const double *probs,
                         uintptr_t len,
                         struct RgIncrementLaw **out);

/**
 * # Safety
 * `law` must be null or a handle from [`rg_law_new`] that was not freed before.
 */
void rg_law_free(struct RgIncrementLaw *law);

/**
 * # Safety
 * `law` must be a live handle; `out` must be valid for a write.
 */
enum RgStatus rg_law_mean(const struct RgIncrementLaw *law, double *out);

/**
 * Probability that the walk started at 0 ever hits -1.
 *
 * # Safety
 * `law` must be a live handle; `out` must be valid for a write.
 */
enum RgStatus rg_law_hitting_prob(const struct RgIncrementLaw *law, double *out);

/**
 * Lazily generated i.i.d. walk. `certificate_eps <= 0` disables probabilistic certificates.
 *
 * # Safety
 * `law` must be a live handle; `out` must be valid for a write.
 */
enum RgStatus rg_window_iid(const struct RgIncrementLaw *law,
                            uint64_t seed,
                            double certificate_eps,
                            struct RgWindow **out);

/**
 * Deterministic window with `xs[k] = x_{lo+k}`. With `padded != 0` every increment outside
 * the data equals `pad`; otherwise nothing exists outside it.
 *
 * # Safety
 * `xs` must be valid for `len` reads; `out` must be valid for a write.
 */
enum RgStatus rg_window_fixed(int64_t lo,
                              const int64_t *xs,
                              uintptr_t len,
                              int32_t padded,
                              int64_t pad,
                              struct RgWindow **out);

/**
 * # Safety
 * `window` must be null or a live handle that is not used afterwards.
 */
void rg_window_free(struct RgWindow *window);

/**
 * Prefix sum `S_n`, extending the window if needed.
 *
 * # Safety
 * `window` must be a live handle; `out` and `kind` must be valid for writes.
 */
enum RgStatus rg_window_prefix(struct RgWindow *window,
                               int64_t n,
                               int64_t *out,
                               enum RgResolution *kind);

/**
 * Record `R(i)`: the parent of `i` in the record graph.
 *
 * # Safety
 * `window` must be a live handle; `out` and `kind` must be valid for writes.
 */
enum RgStatus rg_record_of(struct RgWindow *window,
                           int64_t i,
                           int64_t *out,
                           enum RgResolution *kind);

/**
 * Smallest descendant `L(i)`; the descendants of `i` are `[L(i), i]`.
 *
 * # Safety
 * `window` must be a live handle; `out` and `kind` must be valid for writes.
 */
enum RgStatus rg_smallest_descendant(struct RgWindow *window,
                                     int64_t i,
                                     int64_t *out,
                                     enum RgResolution *kind);

/**
 * Children of `i`, eldest first. Requires a skip-free window. On `BufferTooSmall`
 * `*out_len` holds the required length.
 *
 * # Safety
 * `window` must be a live handle; `buf` must be valid for `cap` writes; `out_len` and `kind`
 * must be valid for writes.
 */
enum RgStatus rg_children_of(struct RgWindow *window,
                             int64_t i,
                             int64_t *buf,
                             uintptr_t cap,
                             uintptr_t *out_len,
                             enum RgResolution *kind);

/**
 * Ball of radius `radius` around 0 in the record graph, as a labelled ordered tree.
 *
 * # Safety
 * `window` must be a live handle; `out` must be valid for a write.
 */
enum RgStatus rg_component_ball(struct RgWindow *window,
                                uintptr_t radius,
                                uintptr_t node_budget,
                                struct RgTree **out);

/**
 * Parses the text form of an ordered tree.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for a write.
 */
enum RgStatus rg_tree_parse(const char *text, struct RgTree **out);

/**
 * # Safety
 * `tree` must be null or a live handle that is not used afterwards.
 */
void rg_tree_free(struct RgTree *tree);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `tree` must be null or a live handle.
 */
uintptr_t rg_tree_len(const struct RgTree *tree);

/**
 * Text form of the tree, NUL-terminated. On `BufferTooSmall` `*out_len` holds the
 * length without the terminator.
 *
 * # Safety
 * `tree` must be a live handle; `buf` must be null or valid for `cap` bytes; `out_len`
 * must be valid for a write.
 */
enum RgStatus rg_tree_serialize(const struct RgTree *tree,
                                char *buf,
                                uintptr_t cap,
                                uintptr_t *out_len);

/**
 * Offspring code of the tree along its succession line through the root, starting at index
 * `*out_lo`.
 *
 * # Safety
 * `tree` must be a live handle; `buf` must be valid for `cap` writes; `out_lo` and
 * `out_len` must be valid for writes.
 */
enum RgStatus rg_tree_encode(const struct RgTree *tree,
                             int64_t *buf,
                             uintptr_t cap,
                             int64_t *out_lo,
                             uintptr_t *out_len);

/**
 * Component of 0 in the record graph of the code `values[k] = y_{lo+k}`.
 *
 * # Safety
 * `values` must be valid for `len` reads; `out` must be valid for a write.
 */
enum RgStatus rg_tree_decode(int64_t lo, const int64_t *values, uintptr_t len, struct RgTree **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RECORDGRAPH_H */
