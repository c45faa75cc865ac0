#ifndef CIFAR_ENSEMBLE_H
#define CIFAR_ENSEMBLE_H

/* Generated by cbindgen from cifar-ensemble-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every API call.
typedef enum CeStatus {
  // The call succeeded.
  CE_STATUS_OK = 0,
  // A required pointer argument was null.
  CE_STATUS_NULL_ARGUMENT = 1,
  // Invalid parameters or configuration (matches process exit code 2).
  CE_STATUS_INVALID_CONFIG = 2,
  // Unreadable, malformed, or mis-shaped data (matches exit code 3).
  CE_STATUS_DATA_ERROR = 3,
  // A numeric failure such as divergence (matches exit code 4).
  CE_STATUS_NUMERIC_ERROR = 4,
  // The library panicked internally; state may be inconsistent.
  CE_STATUS_PANIC = 5,
} CeStatus;

// Which variance total a fraction is measured against.
typedef enum CeVarianceDenominator {
  // Sum of the eigenvalues kept in the model.
  CE_VARIANCE_DENOMINATOR_RETAINED = 0,
  // Trace of the full covariance, including discarded directions.
  CE_VARIANCE_DENOMINATOR_TOTAL = 1,
} CeVarianceDenominator;

// How neighbors vote.
typedef enum CeVoteRule {
  // Each of the k neighbors contributes one vote.
  CE_VOTE_RULE_UNIFORM = 0,
  // Each neighbor contributes 1 / (distance + epsilon).
  CE_VOTE_RULE_INVERSE_DISTANCE = 1,
} CeVoteRule;

// Opaque labeled image dataset (features, labels, class names).
typedef struct CeDataset CeDataset;

// Opaque named per-class score matrix ("expert"), one row per example.
typedef struct CeExpert CeExpert;

// Opaque exact K-nearest-neighbors model.
typedef struct CeKnn CeKnn;

// Opaque multinomial logistic-regression model.
typedef struct CeLogReg CeLogReg;

// Opaque dense row-major matrix of doubles.
typedef struct CeMatrix CeMatrix;

// Opaque PCA basis.
typedef struct CePca CePca;

// Opaque fusion weight vector with its search metadata.
typedef struct CeWeights CeWeights;

// Opaque ZCA whitening transform.
typedef struct CeZca CeZca;

// Hyperparameters for ce_logreg_train().
typedef struct CeLogRegHyper {
  // Gradient-descent step size (must be positive).
  double learning_rate;
  // Number of passes over the training data (must be positive).
  size_t epochs;
  // Mini-batch size (must be positive).
  size_t batch_size;
  // Coefficient of the (l2/2)·‖W‖² penalty (must be non-negative).
  double l2;
  // Whether to z-score features with training statistics first.
  bool standardize;
  // Seed for the shuffling RNG.
  uint64_t seed;
} CeLogRegHyper;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Describes the most recent failure on this thread. Empty until a call
// fails; valid until the next failing call on the same thread.
const char *ce_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ce_version(void);

// Load the five training batches plus the test batch from a directory in
// the standard binary layout. On success `*out_train` and `*out_test`
// receive new handles.
enum CeStatus ce_dataset_load_dir(const char *dir,
                                  struct CeDataset **out_train,
                                  struct CeDataset **out_test);

// Load a single binary batch file.
enum CeStatus ce_dataset_load_batch(const char *path, struct CeDataset **out);

// Number of examples in the dataset.
enum CeStatus ce_dataset_len(const struct CeDataset *ds, size_t *out);

// Number of feature columns per example.
enum CeStatus ce_dataset_dim(const struct CeDataset *ds, size_t *out);

// Copy the feature matrix into a new matrix handle.
enum CeStatus ce_dataset_features(const struct CeDataset *ds, struct CeMatrix **out);

// Copy the labels into `buf`, which must hold at least `cap` bytes and
// `cap` must be at least the dataset length.
enum CeStatus ce_dataset_labels(const struct CeDataset *ds, uint8_t *buf, size_t cap);

// Release a dataset handle (null is ignored).
void ce_dataset_free(struct CeDataset *ds);

// Create a matrix from a row-major buffer of `rows * cols` doubles.
enum CeStatus ce_matrix_create(size_t rows, size_t cols, const double *data, struct CeMatrix **out);

// Report the shape of a matrix.
enum CeStatus ce_matrix_shape(const struct CeMatrix *m, size_t *rows, size_t *cols);

// Copy the matrix into `buf` in row-major order; `cap` must be at least
// `rows * cols`.
enum CeStatus ce_matrix_copy_data(const struct CeMatrix *m, double *buf, size_t cap);

// Release a matrix handle (null is ignored).
void ce_matrix_free(struct CeMatrix *m);

// Contrast-normalize each row: subtract its mean, then divide by
// `max(epsilon, sqrt(lambda + variance))`, times `scale`.
enum CeStatus ce_gcn(const struct CeMatrix *m,
                     double scale,
                     double lambda,
                     double epsilon,
                     struct CeMatrix **out);

// Fit a ZCA whitening transform on the rows of `m`.
enum CeStatus ce_zca_fit(const struct CeMatrix *m, double epsilon, struct CeZca **out);

// Whiten the rows of `m` with a fitted transform.
enum CeStatus ce_zca_apply(const struct CeZca *zca,
                           const struct CeMatrix *m,
                           struct CeMatrix **out);

// Release a ZCA handle (null is ignored).
void ce_zca_free(struct CeZca *zca);

// Fit a PCA basis with `components` directions on the rows of `m`.
enum CeStatus ce_pca_fit(const struct CeMatrix *m, size_t components, struct CePca **out);

// Project each row of `m` onto the basis.
enum CeStatus ce_pca_transform(const struct CePca *pca,
                               const struct CeMatrix *m,
                               struct CeMatrix **out);

// Map projected rows back to the original feature space.
enum CeStatus ce_pca_inverse_transform(const struct CePca *pca,
                                       const struct CeMatrix *m,
                                       struct CeMatrix **out);

// Fraction of variance carried by components `start..end` (half-open).
enum CeStatus ce_pca_explained_variance_fraction(const struct CePca *pca,
                                                 size_t start,
                                                 size_t end,
                                                 enum CeVarianceDenominator denominator,
                                                 double *out);

// Release a PCA handle (null is ignored).
void ce_pca_free(struct CePca *pca);

// Build an exact KNN model over `features` (copied) with one label per row.
enum CeStatus ce_knn_fit(const struct CeMatrix *features,
                         const uint8_t *labels,
                         size_t labels_len,
                         size_t k,
                         enum CeVoteRule vote,
                         struct CeKnn **out);

// Vote-count scores for each query row, as an expert named "knn".
enum CeStatus ce_knn_predict_scores(const struct CeKnn *knn,
                                    const struct CeMatrix *queries,
                                    struct CeExpert **out);

// Release a KNN handle (null is ignored).
void ce_knn_free(struct CeKnn *knn);

// The documented default hyperparameters.
struct CeLogRegHyper ce_logreg_hyper_default(void);

// Train a multinomial logistic-regression model with mini-batch gradient
// descent on `features` with one label per row.
enum CeStatus ce_logreg_train(const struct CeMatrix *features,
                              const uint8_t *labels,
                              size_t labels_len,
                              struct CeLogRegHyper hyper,
                              struct CeLogReg **out);

// Class-probability scores for each query row, as an expert named "logreg".
enum CeStatus ce_logreg_predict_scores(const struct CeLogReg *model,
                                       const struct CeMatrix *queries,
                                       struct CeExpert **out);

// Release a logistic-regression handle (null is ignored).
void ce_logreg_free(struct CeLogReg *model);

// Parse an expert score file. Pass `expected_rows < 0` to accept any row
// count, otherwise the file must hold exactly that many rows.
enum CeStatus ce_expert_load(const char *path, int64_t expected_rows, struct CeExpert **out);

// Write an expert score file in the interchange format.
enum CeStatus ce_expert_export(const struct CeExpert *expert, const char *path);

// Wrap a 10-column score matrix as a named expert. With `row_stochastic`
// set, rows must sum to 1 within tolerance and are renormalized.
enum CeStatus ce_expert_from_scores(const struct CeMatrix *m,
                                    const char *name,
                                    bool row_stochastic,
                                    struct CeExpert **out);

// Number of rows (examples) in the expert.
enum CeStatus ce_expert_rows(const struct CeExpert *expert, size_t *out);

// Copy the expert's name into `buf` as a NUL-terminated string; `cap` must
// cover the name plus the terminator.
enum CeStatus ce_expert_name(const struct CeExpert *expert, char *buf, size_t cap);

// Copy the expert's score matrix into a new matrix handle.
enum CeStatus ce_expert_scores(const struct CeExpert *expert, struct CeMatrix **out);

// Write each row's predicted class (highest score, lowest index on ties)
// into `buf`; `cap` must be at least the row count.
enum CeStatus ce_expert_argmax(const struct CeExpert *expert, uint8_t *buf, size_t cap);

// Fraction of rows whose predicted class equals `truth` (one label per row).
enum CeStatus ce_expert_accuracy(const struct CeExpert *expert,
                                 const uint8_t *truth,
                                 size_t truth_len,
                                 double *out);

// Release an expert handle (null is ignored).
void ce_expert_free(struct CeExpert *expert);

// Combine `count` experts (all with the same row count) into one expert
// whose scores are the weighted sum; `weights` holds one non-negative
// weight per expert, not all zero.
enum CeStatus ce_fuse(const struct CeExpert *const *experts,
                      size_t count,
                      const double *weights,
                      struct CeExpert **out);

// Exhaustively search a step-by-step weight grid for the pair maximizing
// accuracy of `wa*a + wb*b` against `truth`; ties pick the smallest pair.
enum CeStatus ce_pairwise_search(const struct CeExpert *a,
                                 const struct CeExpert *b,
                                 const uint8_t *truth,
                                 size_t truth_len,
                                 double grid_step,
                                 double grid_max,
                                 struct CeWeights **out);

// Fold `count >= 2` experts left to right, running a pairwise search per
// stage between the running fusion and the next expert; returns one flat
// weight per expert.
enum CeStatus ce_chained_search(const struct CeExpert *const *experts,
                                size_t count,
                                const uint8_t *truth,
                                size_t truth_len,
                                double grid_step,
                                double grid_max,
                                struct CeWeights **out);

// Number of weights (one per fused expert).
enum CeStatus ce_weights_len(const struct CeWeights *w, size_t *out);

// Copy the weight values into `buf`; `cap` must be at least the count.
enum CeStatus ce_weights_values(const struct CeWeights *w, double *buf, size_t cap);

// Accuracy the search achieved on the rows it searched.
enum CeStatus ce_weights_achieved_accuracy(const struct CeWeights *w, double *out);

// Save the weights in the text interchange format.
enum CeStatus ce_weights_save(const struct CeWeights *w, const char *path);

// Load weights previously written by ce_weights_save().
enum CeStatus ce_weights_load(const char *path, struct CeWeights **out);

// Release a weights handle (null is ignored).
void ce_weights_free(struct CeWeights *w);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIFAR_ENSEMBLE_H */
