#ifndef GOAFEM_H
#define GOAFEM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum GoafemStatus {
  GOAFEM_STATUS_OK = 0,
  GOAFEM_STATUS_NULL_POINTER = 1,
  GOAFEM_STATUS_INVALID_ARGUMENT = 2,
  GOAFEM_STATUS_CONFIG = 3,
  GOAFEM_STATUS_SOLVER = 4,
  GOAFEM_STATUS_IO = 5,
  GOAFEM_STATUS_PANIC = 6,
} GoafemStatus;

/*
 Run configuration: a setup number plus `key = value` overrides.
 */
typedef struct GoafemConfig GoafemConfig;

/*
 Convergence log of a finished run.
 */
typedef struct GoafemLog GoafemLog;

typedef struct GoafemMesh GoafemMesh;

/*
 One iteration of the adaptive loop.
 */
typedef struct GoafemRecord {
  size_t iter;
  size_t dofs;
  double mu;
  double zeta;
  double product;
  double goal_value;
  size_t n_indices;
  uint32_t max_param;
  double seconds;
} GoafemRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *goafem_version(void);

/*
 Message of the last failed call on this thread, empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *goafem_last_error_message(void);

/*
 Creates a configuration with the defaults of `setup` (1 to 4).

 # Safety
 `out` must be null or point to writable storage for one pointer.
 */
enum GoafemStatus goafem_config_new(uint8_t setup, struct GoafemConfig **out);

/*
 Sets one configuration entry, using the keys of the config-file format
 (`theta`, `tol`, `max_iter`, `solver_tol`, `freeze_indices`, ...).

 # Safety
 `cfg` must come from [`goafem_config_new`]; `key` and `value` must be null
 or NUL-terminated strings.
 */
enum GoafemStatus goafem_config_set(struct GoafemConfig *cfg, const char *key, const char *value);

/*
 # Safety
 `cfg` must be null or come from [`goafem_config_new`] and not be freed yet.
 */
void goafem_config_free(struct GoafemConfig *cfg);

/*
 Runs the adaptive loop and returns its log.

 # Safety
 `cfg` must come from [`goafem_config_new`]; `out` must point to writable
 storage for one pointer.
 */
enum GoafemStatus goafem_run(const struct GoafemConfig *cfg, struct GoafemLog **out);

/*
 # Safety
 `log` must come from [`goafem_run`]; `len` must be writable.
 */
enum GoafemStatus goafem_log_len(const struct GoafemLog *log, size_t *len);

/*
 Whether the run reached its tolerance (1) or stopped at `max_iter` (0).

 # Safety
 `log` must come from [`goafem_run`]; `converged` must be writable.
 */
enum GoafemStatus goafem_log_converged(const struct GoafemLog *log, bool *converged);

/*
 # Safety
 `log` must come from [`goafem_run`]; `out` must be writable.
 */
enum GoafemStatus goafem_log_record(const struct GoafemLog *log,
                                    size_t index,
                                    struct GoafemRecord *out);

/*
 Writes the log in the convergence CSV format.

 # Safety
 `log` must come from [`goafem_run`]; `path` must be a NUL-terminated string.
 */
enum GoafemStatus goafem_log_write_csv(const struct GoafemLog *log, const char *path);

/*
 Final mesh of the zero index; free it with [`goafem_mesh_free`].

 # Safety
 `log` must come from [`goafem_run`]; `out` must be writable.
 */
enum GoafemStatus goafem_log_mesh(const struct GoafemLog *log, struct GoafemMesh **out);

/*
 # Safety
 `log` must be null or come from [`goafem_run`] and not be freed yet.
 */
void goafem_log_free(struct GoafemLog *log);

/*
 Initial mesh of `setup`.

 # Safety
 `out` must point to writable storage for one pointer.
 */
enum GoafemStatus goafem_initial_mesh(uint8_t setup, struct GoafemMesh **out);

/*
 Vertex, triangle and interior-dof counts.

 # Safety
 `mesh` must come from this library; the count pointers must be writable.
 */
enum GoafemStatus goafem_mesh_counts(const struct GoafemMesh *mesh,
                                     size_t *vertices,
                                     size_t *triangles,
                                     size_t *dofs);

/*
 Writes the mesh in the plain-text dump format.

 # Safety
 `mesh` must come from this library; `path` must be a NUL-terminated string.
 */
enum GoafemStatus goafem_mesh_write(const struct GoafemMesh *mesh, const char *path);

/*
 # Safety
 `mesh` must be null or come from this library and not be freed yet.
 */
void goafem_mesh_free(struct GoafemMesh *mesh);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GOAFEM_H */
