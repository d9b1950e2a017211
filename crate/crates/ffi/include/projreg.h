#ifndef PROJREG_H
#define PROJREG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum ProjregStatus {
  PROJREG_STATUS_OK = 0,
  PROJREG_STATUS_NULL_POINTER = 1,
  PROJREG_STATUS_INVALID_ARGUMENT = 2,
  PROJREG_STATUS_NON_FINITE = 3,
  PROJREG_STATUS_LENGTH_MISMATCH = 4,
  PROJREG_STATUS_BUFFER_TOO_SMALL = 5,
  PROJREG_STATUS_INTERNAL = 6,
} ProjregStatus;

typedef enum ProjregScoreMode {
  PROJREG_SCORE_MODE_MAGNITUDE_INCREASING = 0,
  PROJREG_SCORE_MODE_PAPER_LITERAL = 1,
} ProjregScoreMode;

typedef enum ProjregSelection {
  PROJREG_SELECTION_TOP_K = 0,
  PROJREG_SELECTION_SAMPLED = 1,
  PROJREG_SELECTION_PROBABILITY_THRESHOLD = 2,
  PROJREG_SELECTION_UNIFORM_THRESHOLD = 3,
} ProjregSelection;

typedef enum ProjregPenaltyFamily {
  PROJREG_PENALTY_FAMILY_L1 = 0,
  PROJREG_PENALTY_FAMILY_L2 = 1,
  PROJREG_PENALTY_FAMILY_PROPOSED_SQRT = 2,
  PROJREG_PENALTY_FAMILY_PROPOSED_SQUARED = 3,
} ProjregPenaltyFamily;

/**
 * Opaque result of one [`projreg_sampler_draw`].
 */
typedef struct ProjregDraw ProjregDraw;

/**
 * Opaque random stream.
 */
typedef struct ProjregRng ProjregRng;

/**
 * Opaque sampler: configuration plus momentum state.
 */
typedef struct ProjregSampler ProjregSampler;

typedef struct ProjregSamplerConfig {
  double density;
  size_t experiments;
  double threshold;
  double alpha;
  enum ProjregScoreMode score_mode;
  enum ProjregSelection selection;
} ProjregSamplerConfig;

typedef struct ProjregBoundReport {
  size_t n;
  double threshold;
  size_t experiments;
  uint64_t seed;
  double mc_mean_lhs;
  double mc_std_error;
  double analytic_rhs;
  double bound_rhs_scaled;
  double tolerance;
  bool holds;
} ProjregBoundReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, static NUL-terminated string.
 */
const char *projreg_version(void);

/**
 * Copies the calling thread's last error message (NUL-terminated,
 * truncated to fit) into `buf` and returns the full message length
 * excluding the terminator. `buf` may be null when `cap` is 0.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes.
 */
size_t projreg_last_error(char *buf, size_t cap);

struct ProjregRng *projreg_rng_new(uint64_t seed);

/**
 * Independent child stream `stream` of `seed`.
 */
struct ProjregRng *projreg_rng_substream(uint64_t seed, uint64_t stream);

/**
 * # Safety
 * `rng` must come from `projreg_rng_new`/`projreg_rng_substream` and not be
 * used afterwards. Null is ignored.
 */
void projreg_rng_free(struct ProjregRng *rng);

/**
 * # Safety
 * `rng` and `out` must be valid.
 */
enum ProjregStatus projreg_rng_next_u64(struct ProjregRng *rng, uint64_t *out);

/**
 * # Safety
 * `rng` and `out` must be valid.
 */
enum ProjregStatus projreg_rng_uniform(struct ProjregRng *rng, double *out);

/**
 * Default sampler settings.
 */
struct ProjregSamplerConfig projreg_sampler_config_default(void);

/**
 * Validates `config` and creates a sampler with empty momentum state.
 *
 * # Safety
 * `config` and `out` must be valid; `*out` receives the handle.
 */
enum ProjregStatus projreg_sampler_new(const struct ProjregSamplerConfig *config,
                                       struct ProjregSampler **out);

/**
 * # Safety
 * `sampler` must come from `projreg_sampler_new`. Null is ignored.
 */
void projreg_sampler_free(struct ProjregSampler *sampler);

/**
 * Draws `experiments` masks for `w`. With `use_momentum`, the sampler's
 * stored distribution is blended in; call [`projreg_sampler_commit`] once
 * per optimizer step to advance it.
 *
 * # Safety
 * `w` must hold `n` values; handles must be valid; `*out` receives a draw
 * to release with `projreg_draw_free`.
 */
enum ProjregStatus projreg_sampler_draw(struct ProjregSampler *sampler,
                                        const double *w,
                                        size_t n,
                                        struct ProjregRng *rng,
                                        bool use_momentum,
                                        struct ProjregDraw **out);

/**
 * Stores the draw's mean distribution as the sampler's previous one. A
 * uniform-threshold draw carries no distribution and leaves the state as is.
 *
 * # Safety
 * Both handles must be valid.
 */
enum ProjregStatus projreg_sampler_commit(struct ProjregSampler *sampler,
                                          const struct ProjregDraw *draw);

/**
 * # Safety
 * `draw` must come from `projreg_sampler_draw`. Null is ignored.
 */
void projreg_draw_free(struct ProjregDraw *draw);

/**
 * Number of masks in the draw (0 for null).
 *
 * # Safety
 * `draw` must be valid or null.
 */
size_t projreg_draw_mask_count(const struct ProjregDraw *draw);

/**
 * Writes the ascending selected indices of mask `index` into `out` and
 * their number into `*len`. With a short buffer, `*len` still receives the
 * required size and `BufferTooSmall` is returned.
 *
 * # Safety
 * `out` must be valid for `cap` elements; `draw` and `len` must be valid.
 */
enum ProjregStatus projreg_draw_mask(const struct ProjregDraw *draw,
                                     size_t index,
                                     size_t *out,
                                     size_t cap,
                                     size_t *len);

/**
 * Per-coordinate selection counts over all masks; `n` must equal the
 * length of the drawn vector.
 *
 * # Safety
 * `out` must be valid for `n` elements.
 */
enum ProjregStatus projreg_draw_counts(const struct ProjregDraw *draw, size_t *out, size_t n);

/**
 * Penalty value (and optionally gradient) of `w`. The projected families
 * need `draw` from the same `w` length; L1 and L2 ignore it (may be null).
 * `normalize` applies the counter-based weight λ/max count.
 *
 * # Safety
 * `w` (and `grad` if non-null) must hold `n` values; `value` must be valid.
 */
enum ProjregStatus projreg_penalty(enum ProjregPenaltyFamily family,
                                   double lambda,
                                   bool normalize,
                                   const double *w,
                                   size_t n,
                                   const struct ProjregDraw *draw,
                                   double *value,
                                   double *grad);

/**
 * Max-subtracted softmax of `n` scores into `out` (may alias `scores`).
 *
 * # Safety
 * Both buffers must hold `n` values.
 */
enum ProjregStatus projreg_softmax(const double *scores, size_t n, double *out);

/**
 * Monte Carlo check of E||w⊙I||₂ ≤ √(1−T)·||w||₂ with `experiments`
 * uniform-threshold masks; `sp` only enters the scaled bound column.
 *
 * # Safety
 * `w` must hold `n` values; `rng` and `out` must be valid.
 */
enum ProjregStatus projreg_verify_bound(const double *w,
                                        size_t n,
                                        double threshold,
                                        size_t experiments,
                                        double sp,
                                        double tolerance,
                                        struct ProjregRng *rng,
                                        struct ProjregBoundReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROJREG_H */
