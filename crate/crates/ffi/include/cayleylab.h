#ifndef CAYLEYLAB_H
#define CAYLEYLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every FFI call.
 */
typedef enum {
  /**
   * Success.
   */
  CL_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CL_NULL_ARGUMENT = 1,
  /**
   * A presentation, word or rule failed to parse.
   */
  CL_PARSE_ERROR = 2,
  /**
   * An enumeration cap or search budget was exhausted.
   */
  CL_CAP_EXCEEDED = 3,
  /**
   * The inputs parse but name an impossible computation.
   */
  CL_DOMAIN_ERROR = 4,
  /**
   * A panic or unclassified failure inside the library.
   */
  CL_INTERNAL_ERROR = 5,
} ClStatus;

/**
 * Opaque marked-group handle.
 */
typedef struct ClGroup ClGroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the most recent failure on this thread, or null if the
 * last call succeeded.  The pointer is owned by the library and valid until
 * the next failing call on the same thread.
 */
const char *cl_last_error_message(void);

/**
 * Releases a string returned through a `char **` output.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library and not yet
 * freed; null is tolerated.
 */
void cl_string_free(char *s);

/**
 * Parses a presentation such as `<a,b|[a,b]>` into a group handle.
 *
 * # Safety
 * `presentation` must be a valid nul-terminated string; `out` must be a
 * valid pointer.
 */
ClStatus cl_group_parse(const char *presentation, ClGroup **out);

/**
 * Releases a group handle.
 *
 * # Safety
 * `group` must be null or a handle from [`cl_group_parse`], not yet freed.
 */
void cl_group_free(ClGroup *group);

/**
 * Number of elements within `radius` of the identity, at most `cap`.
 *
 * # Safety
 * `group` must be a live handle; `out` must be a valid pointer.
 */
ClStatus cl_group_ball_size(const ClGroup *group, uint32_t radius, size_t cap, size_t *out);

/**
 * Geodesic word length of `word` with respect to the marking.
 *
 * # Safety
 * `group` must be a live handle; `word` a valid string; `out` valid.
 */
ClStatus cl_group_word_length(const ClGroup *group, const char *word, size_t *out);

/**
 * Canonical rendering of the product `a * b`; release with
 * [`cl_string_free`].
 *
 * # Safety
 * `group` must be a live handle; `a`, `b` valid strings; `out` valid.
 */
ClStatus cl_group_multiply(const ClGroup *group, const char *a, const char *b, char **out);

/**
 * Conjugacy-growth verdict on the ball of `radius`: 1 = all tracked classes
 * keep growing, 0 = some class is provably finite, -1 = inconclusive.
 *
 * # Safety
 * `group` must be a live handle; `out` must be a valid pointer.
 */
ClStatus cl_group_icc_verdict(const ClGroup *group, uint32_t radius, size_t cap, int32_t *out);

/**
 * Number of positions reachable by at most `depth` legal moves on the ball
 * of `radius`; enumeration stops with `CL_CAP_EXCEEDED` past `state_cap`.
 *
 * # Safety
 * `group` must be a live handle; `out` must be a valid pointer.
 */
ClStatus cl_go_admissible_count(const ClGroup *group,
                                uint32_t radius,
                                uint32_t depth,
                                size_t ball_cap,
                                size_t state_cap,
                                size_t *out);

/**
 * Translation types of maximal cells on the ball of `radius`: writes the
 * number of types and the dimension bound.
 *
 * # Safety
 * `group` must be a live handle; `out_types` and `out_dimension_bound`
 * must be valid pointers.
 */
ClStatus cl_complex_type_count(const ClGroup *group,
                               uint32_t radius,
                               size_t ball_cap,
                               size_t *out_types,
                               uint32_t *out_dimension_bound);

/**
 * Defect of the creation identity for `generator` on the ball of `radius`:
 * writes the number of nonzero entries and whether they sit at the identity
 * alone (1) or elsewhere too (0).
 *
 * # Safety
 * `group` must be a live handle; `generator` a valid string;
 * `out_entries` and `out_identity_only` valid pointers.
 */
ClStatus cl_trunc_defect(const ClGroup *group,
                         uint32_t radius,
                         size_t ball_cap,
                         const char *generator,
                         size_t *out_entries,
                         int32_t *out_identity_only);

/**
 * Applies the piecewise circle word to `x` (both in [0, 1)).
 *
 * # Safety
 * `word` must be a valid string; `out` must be a valid pointer.
 */
ClStatus cl_circle_eval(const char *word, double theta, double x, double *out);

/**
 * Sup-distance of the word's action from the identity over `samples`
 * deterministic sample points.
 *
 * # Safety
 * `word` must be a valid string; `out` must be a valid pointer.
 */
ClStatus cl_circle_relation_sup(const char *word, double theta, size_t samples, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAYLEYLAB_H */
