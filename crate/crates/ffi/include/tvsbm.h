#ifndef TVSBM_H
#define TVSBM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TvsbmStatus {
  TVSBM_STATUS_OK = 0,
  TVSBM_STATUS_INVALID_ARGUMENT = 1,
  TVSBM_STATUS_DATA_ERROR = 2,
  TVSBM_STATUS_PARSE_ERROR = 3,
  TVSBM_STATUS_EMPTY_INTERVAL = 4,
  TVSBM_STATUS_NUMERICAL = 5,
  TVSBM_STATUS_IO_ERROR = 6,
  TVSBM_STATUS_NULL_POINTER = 7,
  TVSBM_STATUS_BUFFER_TOO_SMALL = 8,
  TVSBM_STATUS_PANIC = 9,
} TvsbmStatus;

typedef enum TvsbmPartition {
  TVSBM_PARTITION_EQUAL_LENGTH = 0,
  TVSBM_PARTITION_EQUAL_COUNT = 1,
} TvsbmPartition;

typedef enum TvsbmShape {
  TVSBM_SHAPE_INCREASING = 0,
  TVSBM_SHAPE_DECREASING = 1,
  TVSBM_SHAPE_UNIMODAL = 2,
  TVSBM_SHAPE_INVERSE_UNIMODAL = 3,
  TVSBM_SHAPE_AUTO = 4,
} TvsbmShape;

typedef enum TvsbmStage {
  TVSBM_STAGE_UNCONSTRAINED = 0,
  TVSBM_STAGE_SHAPE = 1,
  TVSBM_STAGE_FUSED = 2,
} TvsbmStage;

/**
 * Opaque dataset handle.
 */
typedef struct TvsbmDataset TvsbmDataset;

/**
 * Opaque fit handle.
 */
typedef struct TvsbmFit TvsbmFit;

typedef struct TvsbmFitOptions {
  size_t intervals;
  enum TvsbmPartition partition;
  enum TvsbmShape shape;
  size_t quad_points;
  /**
   * Fixed number of fused groups; 0 selects it by BIC.
   */
  size_t groups;
  size_t max_iters;
  double rel_tol;
} TvsbmFitOptions;

typedef struct TvsbmBlockInfo {
  enum TvsbmShape shape;
  /**
   * One-based peak or valley interval; 0 for monotone shapes.
   */
  size_t turning_interval;
  size_t groups;
  size_t df;
} TvsbmBlockInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *tvsbm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tvsbm_version(void);

/**
 * Simulates one of the built-in examples (`'A'`, `'B'` or `'C'`).
 *
 * # Safety
 * `out` must be a valid pointer to writable handle storage.
 */
enum TvsbmStatus tvsbm_dataset_simulate(char example,
                                        size_t n_subjects,
                                        uint64_t seed,
                                        struct TvsbmDataset **out);

/**
 * Loads a dataset directory, along with `truth.json` when present.
 *
 * # Safety
 * `dir` must be a NUL-terminated string and `out` writable handle storage.
 */
enum TvsbmStatus tvsbm_dataset_load(const char *dir, struct TvsbmDataset **out);

/**
 * Writes the dataset files (and `truth.json` for simulated data) into `dir`.
 *
 * # Safety
 * `dataset` must be a live handle and `dir` a NUL-terminated string.
 */
enum TvsbmStatus tvsbm_dataset_save(const struct TvsbmDataset *dataset, const char *dir);

/**
 * # Safety
 * `dataset` must be null or a handle not yet freed.
 */
void tvsbm_dataset_free(struct TvsbmDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t tvsbm_dataset_subjects(const struct TvsbmDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t tvsbm_dataset_nodes(const struct TvsbmDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t tvsbm_dataset_communities(const struct TvsbmDataset *dataset);

/**
 * Defaults matching the command-line tool for `intervals` intervals.
 */
struct TvsbmFitOptions tvsbm_fit_options_default(size_t intervals);

/**
 * Runs the full three-stage fit.
 *
 * # Safety
 * `dataset` must be a live handle, `options` a valid pointer and `out`
 * writable handle storage.
 */
enum TvsbmStatus tvsbm_fit(const struct TvsbmDataset *dataset,
                           const struct TvsbmFitOptions *options,
                           struct TvsbmFit **out);

/**
 * Loads and validates a `fit.json` file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable handle storage.
 */
enum TvsbmStatus tvsbm_fit_load(const char *path, struct TvsbmFit **out);

/**
 * # Safety
 * `fit` must be a live handle and `path` a NUL-terminated string.
 */
enum TvsbmStatus tvsbm_fit_save(const struct TvsbmFit *fit, const char *path);

/**
 * # Safety
 * `fit` must be null or a handle not yet freed.
 */
void tvsbm_fit_free(struct TvsbmFit *fit);

/**
 * Number of time intervals `S`.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
size_t tvsbm_fit_intervals(const struct TvsbmFit *fit);

/**
 * Number of community blocks `K(K+1)/2`.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
size_t tvsbm_fit_blocks(const struct TvsbmFit *fit);

/**
 * # Safety
 * `fit` must be null or a live handle.
 */
bool tvsbm_fit_converged(const struct TvsbmFit *fit);

/**
 * Copies the `S + 1` interval boundaries.
 *
 * # Safety
 * `fit` must be a live handle and `out` valid for `len` writes.
 */
enum TvsbmStatus tvsbm_fit_boundaries(const struct TvsbmFit *fit, double *out, size_t len);

/**
 * Copies the `S` logit-scale levels of `block` at `stage`.
 *
 * # Safety
 * `fit` must be a live handle and `out` valid for `len` writes.
 */
enum TvsbmStatus tvsbm_fit_theta(const struct TvsbmFit *fit,
                                 enum TvsbmStage stage,
                                 size_t block,
                                 double *out,
                                 size_t len);

/**
 * Copies the `S` random-effect standard deviations.
 *
 * # Safety
 * `fit` must be a live handle and `out` valid for `len` writes.
 */
enum TvsbmStatus tvsbm_fit_sigma(const struct TvsbmFit *fit, double *out, size_t len);

/**
 * # Safety
 * `fit` must be a live handle and `out` a valid pointer.
 */
enum TvsbmStatus tvsbm_fit_block_info(const struct TvsbmFit *fit,
                                      size_t block,
                                      struct TvsbmBlockInfo *out);

/**
 * The fit serialized exactly as `fit.json`; release with [`tvsbm_string_free`].
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
char *tvsbm_fit_to_json(const struct TvsbmFit *fit);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void tvsbm_string_free(char *s);

/**
 * Hard-threshold fusion of `values` into `groups` constant runs.
 *
 * # Safety
 * `values` and `out` must each be valid for `len` elements.
 */
enum TvsbmStatus tvsbm_fuse(const double *values, size_t len, size_t groups, double *out);

/**
 * Least-squares projection onto a shape class. With `TVSBM_SHAPE_AUTO` the
 * chosen class is written to `resolved` (which may be null).
 *
 * # Safety
 * `values` and `out` must each be valid for `len` elements.
 */
enum TvsbmStatus tvsbm_project_shape(const double *values,
                                     size_t len,
                                     enum TvsbmShape shape,
                                     double *out,
                                     enum TvsbmShape *resolved);

/**
 * Physicists' Gauss-Hermite nodes and weights of the given order (1..=64).
 *
 * # Safety
 * `nodes` and `weights` must each be valid for `order` writes.
 */
enum TvsbmStatus tvsbm_hermite_rule(size_t order, double *nodes, double *weights);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TVSBM_H */
