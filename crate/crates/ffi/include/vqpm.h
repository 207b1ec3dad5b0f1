#ifndef VQPM_H
#define VQPM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum VqpmStatus {
  VQPM_STATUS_OK = 0,
  VQPM_STATUS_NULL_POINTER = 1,
  VQPM_STATUS_INVALID_ARGUMENT = 2,
  VQPM_STATUS_RESOURCE_LIMIT = 3,
  VQPM_STATUS_NUMERIC_DEGENERATE = 4,
  VQPM_STATUS_UNBOUNDED = 5,
  VQPM_STATUS_PARSE = 6,
  VQPM_STATUS_IO = 7,
  VQPM_STATUS_INTERNAL = 8,
} VqpmStatus;

typedef enum VqpmTermination {
  VQPM_TERMINATION_SUCCESS_BY_PROBABILITY = 0,
  VQPM_TERMINATION_SUCCESS_BY_TARGET = 1,
  VQPM_TERMINATION_TARGET_ELIMINATED = 2,
  VQPM_TERMINATION_MAX_ITERATIONS = 3,
} VqpmTermination;

// Opaque QUBO instance.
typedef struct VqpmInstance VqpmInstance;

// Opaque engine result.
typedef struct VqpmResult VqpmResult;

// Engine settings. Obtain defaults from [`vqpm_run_config_default`].
typedef struct VqpmRunConfig {
  size_t max_iter;
  // Decimal places kept in the qubit marginals.
  uint32_t precision;
  // `false` runs the plain power iteration without measurement or locking.
  bool variational;
  double success_threshold;
  // Solve the instance exhaustively and use its optima as targets.
  bool use_oracle;
  bool stop_on_elimination;
} VqpmRunConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a success.
// Valid until the next `vqpm_*` call on the same thread.
const char *vqpm_last_error(void);

// Library version as a static string.
const char *vqpm_version(void);

// All-zero instance on `n` variables.
//
// # Safety
// `out` must be valid for writes.
enum VqpmStatus vqpm_instance_new(size_t n, struct VqpmInstance **out);

// Random instance with coefficients uniform in `[lo, hi]`.
//
// # Safety
// `out` must be valid for writes.
enum VqpmStatus vqpm_instance_random(size_t n,
                                     uint64_t seed,
                                     double lo,
                                     double hi,
                                     struct VqpmInstance **out);

// Reads an instance file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid for writes.
enum VqpmStatus vqpm_instance_load(const char *path, struct VqpmInstance **out);

// Sets coefficient `(i, j)`, `i <= j`.
//
// # Safety
// `inst` must be a live handle.
enum VqpmStatus vqpm_instance_set(struct VqpmInstance *inst, size_t i, size_t j, double value);

// # Safety
// `inst` must be a live handle; `out` valid for writes.
enum VqpmStatus vqpm_instance_get(const struct VqpmInstance *inst, size_t i, size_t j, double *out);

// Number of variables, 0 for a NULL handle.
//
// # Safety
// `inst` must be a live handle or NULL.
size_t vqpm_instance_n(const struct VqpmInstance *inst);

// Energy of a bitstring.
//
// # Safety
// `inst` must be a live handle, `bits` NUL-terminated, `out` valid for writes.
enum VqpmStatus vqpm_instance_energy(const struct VqpmInstance *inst,
                                     const char *bits,
                                     double *out);

// Releases an instance. NULL is ignored.
//
// # Safety
// `inst` must come from this library and not be used afterwards.
void vqpm_instance_free(struct VqpmInstance *inst);

// Exhaustive minimum. `argmin_index` is the lowest-index optimum
// (bit i of the index is variable i); `degeneracy` counts optima.
//
// # Safety
// `inst` must be a live handle; every output pointer valid for writes.
enum VqpmStatus vqpm_brute_force(const struct VqpmInstance *inst,
                                 double *min_energy,
                                 uint64_t *argmin_index,
                                 double *eigengap,
                                 size_t *degeneracy);

struct VqpmRunConfig vqpm_run_config_default(void);

// Runs the engine. `policy` uses the CLI grammar (`fixed:0.01`,
// `hoeffding+influence`, `none`, ...); NULL means `fixed:0.01`.
//
// # Safety
// `inst` must be a live handle, `config` readable, `policy` NULL or
// NUL-terminated, `out` valid for writes.
enum VqpmStatus vqpm_run(const struct VqpmInstance *inst,
                         const struct VqpmRunConfig *config,
                         const char *policy,
                         struct VqpmResult **out);

// Most probable bitstring at termination. Owned by the result.
//
// # Safety
// `r` must be a live handle or NULL.
const char *vqpm_result_found(const struct VqpmResult *r);

// # Safety
// `r` must be a live handle or NULL.
double vqpm_result_found_probability(const struct VqpmResult *r);

// NaN when the run had no target.
//
// # Safety
// `r` must be a live handle or NULL.
double vqpm_result_target_probability(const struct VqpmResult *r);

// -1 when the run had no target.
//
// # Safety
// `r` must be a live handle or NULL.
int64_t vqpm_result_hamming_to_target(const struct VqpmResult *r);

// -1 when the run had no target.
//
// # Safety
// `r` must be a live handle or NULL.
int64_t vqpm_result_wrong_locks(const struct VqpmResult *r);

// # Safety
// `r` must be a live handle or NULL.
size_t vqpm_result_iterations(const struct VqpmResult *r);

// # Safety
// `r` must be a live handle or NULL.
size_t vqpm_result_lock_events(const struct VqpmResult *r);

// # Safety
// `r` must be a live handle; `out` valid for writes.
enum VqpmStatus vqpm_result_termination(const struct VqpmResult *r, enum VqpmTermination *out);

// Releases a result. NULL is ignored.
//
// # Safety
// `r` must come from [`vqpm_run`] and not be used afterwards.
void vqpm_result_free(struct VqpmResult *r);

// `|1 + e^{i lambda}|` for a phase in `[0, pi]`.
//
// # Safety
// `out` must be valid for writes.
enum VqpmStatus vqpm_eigenvalue_magnitude(double lambda, double *out);

// Ratio of the second to the dominant eigenvalue magnitude.
//
// # Safety
// `out` must be valid for writes.
enum VqpmStatus vqpm_convergence_ratio(double lambda_dominant, double lambda_second, double *out);

// Iterations needed to push the second component below `epsilon`.
//
// # Safety
// `out` must be valid for writes.
enum VqpmStatus vqpm_iteration_bound(double ratio, double epsilon, uint64_t *out);

// # Safety
// `out` must be valid for writes.
enum VqpmStatus vqpm_hoeffding_epsilon(double delta, size_t n, uint64_t shots, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VQPM_H */
