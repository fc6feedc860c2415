#ifndef HNERV_H
#define HNERV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum HnervStatus {
  HNERV_STATUS_OK = 0,
  /**
   * Invalid argument, index or option.
   */
  HNERV_STATUS_USAGE = 1,
  /**
   * Malformed, corrupted or unreadable data.
   */
  HNERV_STATUS_DATA = 2,
  /**
   * Non-finite values.
   */
  HNERV_STATUS_NUMERIC = 3,
  /**
   * The representation lacks a required part, such as the encoder.
   */
  HNERV_STATUS_CAPABILITY = 4,
  HNERV_STATUS_NULL_POINTER = 5,
  HNERV_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  HNERV_STATUS_PANIC = 7,
} HnervStatus;

/**
 * Opaque loaded representation.
 */
typedef struct HnervModel HnervModel;

typedef struct HnervInfo {
  uintptr_t num_frames;
  uintptr_t stored_frames;
  uintptr_t height;
  uintptr_t width;
  /**
   * Embedding values plus decoder parameters.
   */
  uintptr_t total_size;
  bool has_encoder;
} HnervInfo;

/**
 * Byte buffer allocated by the library; release with `hnerv_buffer_free`.
 */
typedef struct HnervBuffer {
  uint8_t *data;
  uintptr_t len;
} HnervBuffer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hnerv_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hnerv_version(void);

/**
 * Parses a compressed stream or float checkpoint held in memory.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes; `out` must be writable.
 */
enum HnervStatus hnerv_model_load(const uint8_t *bytes, uintptr_t len, struct HnervModel **out);

/**
 * Reads a `.hnrv` file.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
 */
enum HnervStatus hnerv_model_load_file(const char *path, struct HnervModel **out);

/**
 * Releases a model; NULL is ignored.
 *
 * # Safety
 * `model` must come from a load call and not be freed twice.
 */
void hnerv_model_free(struct HnervModel *model);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum HnervStatus hnerv_model_info(const struct HnervModel *model, struct HnervInfo *out);

/**
 * Decodes frame `t` as interleaved RGB8 into `out` (`3 * height * width` bytes).
 *
 * # Safety
 * `model` must be a live handle; `out` must point to `len` writable bytes.
 */
enum HnervStatus hnerv_decode_frame_rgb8(const struct HnervModel *model,
                                         uintptr_t t,
                                         uint8_t *out,
                                         uintptr_t len);

/**
 * Decodes `count` frames with `workers` threads, writing them back to back
 * as interleaved RGB8 in request order.
 *
 * # Safety
 * `frames` must point to `count` indices; `out` to `len` writable bytes.
 */
enum HnervStatus hnerv_decode_frames_rgb8(const struct HnervModel *model,
                                          const uintptr_t *frames,
                                          uintptr_t count,
                                          uintptr_t workers,
                                          uint8_t *out,
                                          uintptr_t len);

/**
 * Prunes, quantizes and entropy-codes the model without fine-tuning.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum HnervStatus hnerv_compress(const struct HnervModel *model,
                                double sparsity,
                                uint8_t bits,
                                uintptr_t workers,
                                struct HnervBuffer *out);

/**
 * Serializes the model as a float checkpoint.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum HnervStatus hnerv_checkpoint(const struct HnervModel *model, struct HnervBuffer *out);

/**
 * Releases a buffer from `hnerv_compress` or `hnerv_checkpoint`.
 *
 * # Safety
 * `buffer` must come from this library and not be freed twice.
 */
void hnerv_buffer_free(struct HnervBuffer buffer);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HNERV_H */
