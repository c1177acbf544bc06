#ifndef MPEG7_ANNOTATE_H
#define MPEG7_ANNOTATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum AnnDescriptor {
  ANN_DESCRIPTOR_EHD = 0,
  ANN_DESCRIPTOR_SCD = 1,
  ANN_DESCRIPTOR_CLD_RAW = 2,
} AnnDescriptor;

typedef enum AnnStatus {
  ANN_STATUS_OK = 0,
  ANN_STATUS_NULL_ARGUMENT = 1,
  ANN_STATUS_INVALID_ARGUMENT = 2,
  ANN_STATUS_IO = 3,
  ANN_STATUS_DECODE = 4,
  ANN_STATUS_IMAGE_TOO_SMALL = 5,
  ANN_STATUS_DIMENSION_MISMATCH = 6,
  ANN_STATUS_FORMAT = 7,
  ANN_STATUS_BUFFER_TOO_SMALL = 8,
  ANN_STATUS_PANIC = 9,
} AnnStatus;

/**
 * A loaded model bundle.
 */
typedef struct AnnModel AnnModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a model bundle written by `annotate train`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum AnnStatus ann_model_load(const char *path, struct AnnModel **out);

/**
 * Parses a model bundle from its JSON text.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum AnnStatus ann_model_from_json(const char *json, struct AnnModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void ann_model_free(struct AnnModel *model);

/**
 * Number of classes, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t ann_model_class_count(const struct AnnModel *model);

/**
 * Name of class `index`, valid while the model lives. Null when out of range.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
const char *ann_model_class_name(const struct AnnModel *model, size_t index);

/**
 * Length of the descriptor vector `ann_model_predict_features` expects.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t ann_model_input_dim(const struct AnnModel *model);

/**
 * Descriptor the model is trained on.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum AnnStatus ann_model_descriptor(const struct AnnModel *model, enum AnnDescriptor *out);

/**
 * Classifies a raw descriptor vector. `confidence` may be null.
 *
 * # Safety
 * `values` must point to `len` doubles; `label` must be valid.
 */
enum AnnStatus ann_model_predict_features(const struct AnnModel *model,
                                          const double *values,
                                          size_t len,
                                          size_t *label,
                                          double *confidence);

/**
 * Classifies an encoded PNG or JPEG image held in memory.
 *
 * # Safety
 * `bytes` must point to `len` bytes; `label` must be valid.
 */
enum AnnStatus ann_model_predict_image(const struct AnnModel *model,
                                       const uint8_t *bytes,
                                       size_t len,
                                       size_t *label,
                                       double *confidence);

/**
 * Classifies an image file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `label` must be valid.
 */
enum AnnStatus ann_model_predict_file(const struct AnnModel *model,
                                      const char *path,
                                      size_t *label,
                                      double *confidence);

/**
 * Length of a descriptor vector.
 */
size_t ann_descriptor_dim(enum AnnDescriptor kind);

/**
 * Extracts a descriptor from an encoded image into `out`, which must hold
 * at least `ann_descriptor_dim(kind)` values.
 *
 * # Safety
 * `bytes` must point to `len` bytes and `out` to `out_len` doubles.
 */
enum AnnStatus ann_extract_image(enum AnnDescriptor kind,
                                 const uint8_t *bytes,
                                 size_t len,
                                 double *out,
                                 size_t out_len);

/**
 * Message for the last failure on this thread, or null. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *ann_last_error(void);

/**
 * Library version as a static string.
 */
const char *ann_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPEG7_ANNOTATE_H */
