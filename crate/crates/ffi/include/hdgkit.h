#ifndef HDGKIT_H
#define HDGKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HdgStatus {
  HDG_STATUS_OK = 0,
  HDG_STATUS_NULL_POINTER = 1,
  HDG_STATUS_INVALID_ARGUMENT = 2,
  HDG_STATUS_UNKNOWN_NAME = 3,
  HDG_STATUS_MESH_ERROR = 4,
  HDG_STATUS_COMPUTE_ERROR = 5,
  HDG_STATUS_BUFFER_TOO_SMALL = 6,
  HDG_STATUS_PANIC = 7,
} HdgStatus;

/**
 * Boundary tagging for generated meshes.
 */
typedef enum HdgTagRule {
  HDG_TAG_RULE_ALL_DIRICHLET = 0,
  HDG_TAG_RULE_LEFT_DIRICHLET = 1,
  HDG_TAG_RULE_ALL_NEUMANN = 2,
} HdgTagRule;

/**
 * Opaque triangle mesh.
 */
typedef struct HdgMesh HdgMesh;

typedef struct HdgMeshInfo {
  size_t n_vertices;
  size_t n_cells;
  size_t n_faces;
  double h_max;
  double kappa;
  double theta;
  /**
   * 1 when the mesh satisfies the regularity assumptions.
   */
  int32_t regular;
} HdgMeshInfo;

/**
 * One audit result. `unbounded` is 1 when B vanishes where A does not,
 * and `lambda` is then +inf.
 */
typedef struct HdgAudit {
  double lambda;
  double h_max;
  size_t n_dof;
  int32_t unbounded;
} HdgAudit;

/**
 * One HDG solve. Quantities without an exact reference are NaN.
 */
typedef struct HdgReport {
  double h_max;
  size_t n_dof;
  double energy;
  double err_u;
  double err_p;
  double residual;
} HdgReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Same buffer protocol as `hdg_mesh_write`.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null; `needed` may be null.
 */
enum HdgStatus hdg_last_error(char *buf, size_t len, size_t *needed);

/**
 * Structured n×n unit-square mesh.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HdgStatus hdg_mesh_structured(uint32_t n, enum HdgTagRule tags, struct HdgMesh **out);

/**
 * Parses a mesh in the text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HdgStatus hdg_mesh_parse(const char *text, struct HdgMesh **out);

/**
 * # Safety
 * `mesh` must come from this library and not be used afterwards. Null is a no-op.
 */
void hdg_mesh_free(struct HdgMesh *mesh);

/**
 * # Safety
 * `mesh` and `out` must be valid pointers.
 */
enum HdgStatus hdg_mesh_info(const struct HdgMesh *mesh, struct HdgMeshInfo *out);

/**
 * Serializes the mesh into `buf` (NUL-terminated). When the buffer is too
 * small, `needed` still receives the required size.
 *
 * # Safety
 * `mesh` must be valid, `buf` valid for `len` bytes or null, `needed` valid or null.
 */
enum HdgStatus hdg_mesh_write(const struct HdgMesh *mesh, char *buf, size_t len, size_t *needed);

/**
 * Sharp constant of inequality `id` on the level-`level` structured mesh
 * (eigen mode, Γ = left edge).
 *
 * # Safety
 * `id` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HdgStatus hdg_audit(const char *id, uint32_t k, uint32_t level, struct HdgAudit *out);

/**
 * Audits levels 1..=levels and applies the default verdict. `lambdas` must
 * hold `levels` entries; `pass` receives 1 or 0.
 *
 * # Safety
 * `id` must be a NUL-terminated string, `lambdas` valid for `levels` writes, `pass` valid.
 */
enum HdgStatus hdg_audit_sweep(const char *id,
                               uint32_t k,
                               uint32_t levels,
                               double *lambdas,
                               int32_t *pass);

/**
 * Solves a registered problem on the level-`level` mesh.
 *
 * # Safety
 * `problem` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HdgStatus hdg_solve(const char *problem,
                         uint32_t k,
                         uint32_t level,
                         double tau,
                         struct HdgReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HDGKIT_H */
