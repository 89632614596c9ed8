#ifndef SEPDEC_H
#define SEPDEC_H

#include <stdbool.h>
#include <stddef.h>

typedef enum SepdecStatus {
  SEPDEC_STATUS_OK = 0,
  SEPDEC_STATUS_NULL_POINTER = 1,
  SEPDEC_STATUS_INVALID_ARGUMENT = 2,
  SEPDEC_STATUS_NOT_PSD = 3,
  SEPDEC_STATUS_NOT_B_INDEPENDENT = 4,
  SEPDEC_STATUS_NOT_A_INDEPENDENT = 5,
  SEPDEC_STATUS_CLUSTER_AMBIGUITY = 6,
  SEPDEC_STATUS_NUMERICAL = 7,
  SEPDEC_STATUS_OUT_OF_RANGE = 8,
  SEPDEC_STATUS_PANIC = 9,
} SepdecStatus;

typedef enum SepdecSide {
  SEPDEC_SIDE_A = 0,
  SEPDEC_SIDE_B = 1,
} SepdecSide;

typedef enum SepdecMarginalVerdict {
  SEPDEC_MARGINAL_VERDICT_SEPARABLE = 0,
  SEPDEC_MARGINAL_VERDICT_ENTANGLED = 1,
  SEPDEC_MARGINAL_VERDICT_NOT_MARGINAL_RANK = 2,
} SepdecMarginalVerdict;

typedef enum SepdecChannelKind {
  SEPDEC_CHANNEL_KIND_QC = 0,
  SEPDEC_CHANNEL_KIND_CQ = 1,
  SEPDEC_CHANNEL_KIND_ORTHOGONAL_ONLY = 2,
  SEPDEC_CHANNEL_KIND_NONE = 3,
} SepdecChannelKind;

// A canonical decomposition `Σ A_γ ⊗ B_γ`.
typedef struct SepdecDecomposition SepdecDecomposition;

// A bipartite matrix on `C^m ⊗ C^n`.
typedef struct SepdecMatrix SepdecMatrix;

typedef struct SepdecTolerances {
  double herm;
  double psd;
  double rank;
  double normal;
  double commute;
  double cluster;
  double recon;
} SepdecTolerances;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct SepdecTolerances sepdec_tolerances_default(void);

// Creates an `mn × mn` matrix from row-major parts. `im` may be null for a
// real matrix.
//
// # Safety
// `re` (and `im` when non-null) must point to `(m·n)²` doubles; `out` must be
// valid for writes.
enum SepdecStatus sepdec_matrix_new(size_t m,
                                    size_t n,
                                    const double *re,
                                    const double *im,
                                    struct SepdecMatrix **out);

// # Safety
// `mat` must be null or a handle from [`sepdec_matrix_new`] not yet freed.
void sepdec_matrix_free(struct SepdecMatrix *mat);

// # Safety
// `mat` must be a live handle; `m` and `n` must be valid for writes.
enum SepdecStatus sepdec_matrix_dims(const struct SepdecMatrix *mat, size_t *m, size_t *n);

// Canonical decomposition with the independent images on `side`. `tol` may be
// null for the defaults.
//
// # Safety
// `mat` must be a live handle, `tol` null or valid, `out` valid for writes.
enum SepdecStatus sepdec_decompose(const struct SepdecMatrix *mat,
                                   enum SepdecSide side,
                                   const struct SepdecTolerances *tol,
                                   struct SepdecDecomposition **out);

// # Safety
// `dec` must be null or a handle from [`sepdec_decompose`] not yet freed.
void sepdec_decomposition_free(struct SepdecDecomposition *dec);

// Number of terms, or 0 for a null handle.
//
// # Safety
// `dec` must be null or a live handle.
size_t sepdec_decomposition_term_count(const struct SepdecDecomposition *dec);

// Copies term `index`: `A` into `m·m` and `B` into `n·n` row-major buffers.
//
// # Safety
// `dec` must be a live handle and the four buffers large enough.
enum SepdecStatus sepdec_decomposition_term(const struct SepdecDecomposition *dec,
                                            size_t index,
                                            double *a_re,
                                            double *a_im,
                                            double *b_re,
                                            double *b_im);

// # Safety
// `dec` must be a live handle; `unique` valid for writes.
enum SepdecStatus sepdec_decomposition_is_unique(const struct SepdecDecomposition *dec,
                                                 bool *unique);

// Relative reconstruction residual `‖T − Σ A_γ ⊗ B_γ‖_F / ‖T‖_F`.
//
// # Safety
// `dec` must be a live handle; `residual` valid for writes.
enum SepdecStatus sepdec_decomposition_residual(const struct SepdecDecomposition *dec,
                                                double *residual);

// # Safety
// `mat` must be a live handle; `ppt` valid for writes.
enum SepdecStatus sepdec_ppt(const struct SepdecMatrix *mat, bool *ppt);

// # Safety
// `mat` must be a live handle; `verdict` valid for writes.
enum SepdecStatus sepdec_marginal_rank(const struct SepdecMatrix *mat,
                                       enum SepdecMarginalVerdict *verdict);

// Classifies a Choi matrix as quantum-classical.
//
// # Safety
// `choi` must be a live handle; `out` valid for writes.
enum SepdecStatus sepdec_detect_qc(const struct SepdecMatrix *choi, enum SepdecChannelKind *out);

// Classifies a Choi matrix as classical-quantum.
//
// # Safety
// `choi` must be a live handle; `out` valid for writes.
enum SepdecStatus sepdec_detect_cq(const struct SepdecMatrix *choi, enum SepdecChannelKind *out);

// Copies the calling thread's last error message (NUL-terminated, truncated
// to `len` bytes) and returns the length needed including the terminator.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t sepdec_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEPDEC_H */
