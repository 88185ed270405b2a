/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef POLYCAP_H
#define POLYCAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call. Values 1 to 3 agree with the command-line
 * exit codes.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  /**
   * Bad input: schema, dimensions, parse or validation failures.
   */
  PC_STATUS_INVALID_INPUT = 1,
  PC_STATUS_RANK_DEFICIENT = 2,
  PC_STATUS_CAPACITY = 3,
  PC_STATUS_DEGENERATE = 4,
  PC_STATUS_NULL_POINTER = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  PC_STATUS_INTERNAL = 6,
} PcStatus;

/**
 * Opaque robot model.
 */
typedef struct PcModel PcModel;

/**
 * Opaque vertex set in canonical (lexicographic) order.
 */
typedef struct PcVertexSet PcVertexSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *pc_last_error(void);

/**
 * Loads a robot model from a JSON file. Bare names of bundled fixtures
 * such as `"panda7.json"` also resolve.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcStatus pc_model_load(const char *path, struct PcModel **out);

/**
 * # Safety
 * `model` must come from `pc_model_load` and not be freed twice.
 */
void pc_model_free(struct PcModel *model);

/**
 * Number of joints, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uintptr_t pc_model_dof(const struct PcModel *model);

/**
 * Force polytope of `model` at `q`. `axes` is a comma-separated task
 * frame such as `"x,y,z"`; null selects the model default.
 *
 * # Safety
 * `q` must point to `q_len` doubles, `axes` must be null or NUL-terminated
 * and `out` must be valid.
 */
enum PcStatus pc_force_polytope(const struct PcModel *model,
                                const double *q,
                                uintptr_t q_len,
                                const char *axes,
                                struct PcVertexSet **out);

/**
 * Force polytope of a raw `m x n` Jacobian stored row-major, with torque
 * limits `lo` and `hi` of length `n`.
 *
 * # Safety
 * `jac` must hold `m * n` doubles, `lo` and `hi` `n` each; `out` must be valid.
 */
enum PcStatus pc_force_polytope_raw(const double *jac,
                                    uintptr_t m,
                                    uintptr_t n,
                                    const double *lo,
                                    const double *hi,
                                    struct PcVertexSet **out);

/**
 * Velocity polytope of `model` at `q` from the joint velocity limits.
 *
 * # Safety
 * Same contract as `pc_force_polytope`.
 */
enum PcStatus pc_velocity_polytope(const struct PcModel *model,
                                   const double *q,
                                   uintptr_t q_len,
                                   const char *axes,
                                   struct PcVertexSet **out);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
uintptr_t pc_vertex_set_len(const struct PcVertexSet *set);

/**
 * Task-space dimension, or 0 for a null handle.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
uintptr_t pc_vertex_set_dim(const struct PcVertexSet *set);

/**
 * Copies the vertices row-major into `buf`, which must hold at least
 * `len * dim` doubles.
 *
 * # Safety
 * `buf` must point to `buf_len` writable doubles.
 */
enum PcStatus pc_vertex_set_copy(const struct PcVertexSet *set, double *buf, uintptr_t buf_len);

/**
 * # Safety
 * `set` must come from this library and not be freed twice.
 */
void pc_vertex_set_free(struct PcVertexSet *set);

/**
 * Payload share for robot 1 given both directional capacities.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PcStatus pc_lambda_policy(double f1_max, double f2_max, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYCAP_H */
