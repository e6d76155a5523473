#ifndef QORIENT_H
#define QORIENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QorientStatus {
  QorientStatus_Ok = 0,
  // Malformed argument: bad spin, index, profile string, matrix shape.
  QorientStatus_InvalidInput = 1,
  // A physics invariant failed (non-PSD state, missing Fermi crossing, ...).
  QorientStatus_InvariantViolation = 2,
  // `qorient_verify` ran and at least one criterion failed.
  QorientStatus_VerifyFailed = 3,
  QorientStatus_NullPointer = 4,
  QorientStatus_BufferTooSmall = 5,
  // Internal panic, caught at the boundary.
  QorientStatus_Panic = 6,
} QorientStatus;

typedef enum QorientFermiMode {
  QorientFermiMode_Exact = 0,
  QorientFermiMode_FermiSurface = 1,
} QorientFermiMode;

// Spin-s density matrix.
typedef struct QorientState QorientState;

// Real Cartesian tensor, row-major components.
typedef struct QorientTensor QorientTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, static storage.
const char *qorient_version(void);

// Message of the last failure on this thread, or null. Owned by the
// library; valid until the next failing call on this thread.
const char *qorient_last_error(void);

// Maximally mixed state of spin `twice_s / 2`.
//
// # Safety
// `out` must be valid for a pointer write.
enum QorientStatus qorient_state_mixed(int32_t twice_s, struct QorientState **out);

// Basis state `|s, m⟩`, both given doubled.
//
// # Safety
// `out` must be valid for a pointer write.
enum QorientStatus qorient_state_basis(int32_t twice_s, int32_t twice_m, struct QorientState **out);

// Density matrix from row-major real and imaginary parts, `len = n²` with
// `n = twice_s + 1` and rows ordered by descending `m`. `im` may be null
// for a real matrix. The state is validated (Hermitian, unit trace, PSD).
//
// # Safety
// `re` (and `im` when non-null) must point to `len` readable doubles; `out`
// must be valid for a pointer write.
enum QorientStatus qorient_state_from_matrix(int32_t twice_s,
                                             const double *re,
                                             const double *im,
                                             size_t len,
                                             struct QorientState **out);

// Hilbert-space dimension, 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t qorient_state_dim(const struct QorientState *state);

// # Safety
// `state` must be null or a handle not yet freed.
void qorient_state_free(struct QorientState *state);

// Rank-`rank` order-parameter tensor `⟨T̂_rank⟩` of a spin state (3D).
//
// # Safety
// `state` must be a live handle; `out` must be valid for a pointer write.
enum QorientStatus qorient_spin_order_params(const struct QorientState *state,
                                             uint32_t rank,
                                             struct QorientTensor **out);

// Rank-`rank` order parameter (2D) of a Fermi sea given as a profile
// string, `disk:pF[,smear]` or `ellipse:a,b,chi[,smear]`.
//
// # Safety
// `profile` must be a NUL-terminated string; `out` must be valid for a
// pointer write.
enum QorientStatus qorient_fermi_order_params(const char *profile,
                                              enum QorientFermiMode mode,
                                              uint32_t rank,
                                              struct QorientTensor **out);

// # Safety
// `t` must be null or a live handle.
size_t qorient_tensor_rank(const struct QorientTensor *t);

// Spatial dimension (2 or 3), 0 for a null handle.
//
// # Safety
// `t` must be null or a live handle.
size_t qorient_tensor_dim(const struct QorientTensor *t);

// Number of components, `dim^rank`.
//
// # Safety
// `t` must be null or a live handle.
size_t qorient_tensor_len(const struct QorientTensor *t);

// Copy the row-major components into `buf` (capacity `cap`).
//
// # Safety
// `t` must be a live handle; `buf` must be writable for `cap` doubles.
enum QorientStatus qorient_tensor_copy(const struct QorientTensor *t, double *buf, size_t cap);

// Explanatory note attached to the result (e.g. why it vanishes), or null.
// Owned by the tensor.
//
// # Safety
// `t` must be null or a live handle.
const char *qorient_tensor_note(const struct QorientTensor *t);

// # Safety
// `t` must be null or a handle not yet freed.
void qorient_tensor_free(struct QorientTensor *t);

// `⟨j1 m1; j2 m2 | J M⟩`, all arguments doubled.
//
// # Safety
// `out` must be valid for a write.
enum QorientStatus qorient_clebsch(int32_t twice_j1,
                                   int32_t twice_m1,
                                   int32_t twice_j2,
                                   int32_t twice_m2,
                                   int32_t twice_j,
                                   int32_t twice_m,
                                   double *out);

// Run the acceptance suite. `only` is a comma-separated list of criterion
// names, or null for all. `failed` (nullable) receives the number of
// failing criteria. Returns `VerifyFailed` when that number is nonzero.
//
// # Safety
// `only` must be null or NUL-terminated; `failed` null or writable.
enum QorientStatus qorient_verify(const char *only, uint32_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QORIENT_H */
