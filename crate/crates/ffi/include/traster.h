#ifndef TRASTER_H
#define TRASTER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum TrasterStatus {
  TRASTER_STATUS_OK = 0,
  TRASTER_STATUS_NULL_POINTER = 1,
  TRASTER_STATUS_INVALID_ARGUMENT = 2,
  TRASTER_STATUS_OUT_OF_RANGE = 3,
  TRASTER_STATUS_FORMAT = 4,
  TRASTER_STATUS_IO = 5,
  TRASTER_STATUS_BUFFER_TOO_SMALL = 6,
  TRASTER_STATUS_PANIC = 7,
} TrasterStatus;

/**
 * Result of a window query.
 */
typedef struct TrasterCells TrasterCells;

/**
 * A compressed raster time series.
 */
typedef struct TrasterSeries TrasterSeries;

typedef struct TrasterCell {
  size_t row;
  size_t col;
} TrasterCell;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *traster_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *traster_version(void);

/**
 * Builds from `tau * rows * cols` values, frame-major then row-major,
 * with a snapshot every `t_delta` instants.
 *
 * # Safety
 * `values` must point to `tau * rows * cols` readable values and `out`
 * must be writable.
 */
enum TrasterStatus traster_build(const int32_t *values,
                                 size_t tau,
                                 size_t rows,
                                 size_t cols,
                                 size_t k,
                                 size_t t_delta,
                                 struct TrasterSeries **out);

/**
 * Like [`traster_build`] with adaptive snapshot placement.
 *
 * # Safety
 * As for [`traster_build`].
 */
enum TrasterStatus traster_build_auto(const int32_t *values,
                                      size_t tau,
                                      size_t rows,
                                      size_t cols,
                                      size_t k,
                                      double threshold,
                                      struct TrasterSeries **out);

/**
 * Reads a container file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum TrasterStatus traster_open(const char *path, struct TrasterSeries **out);

/**
 * Decodes a container from memory.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` must be writable.
 */
enum TrasterStatus traster_from_bytes(const uint8_t *bytes, size_t len, struct TrasterSeries **out);

/**
 * Writes a container file.
 *
 * # Safety
 * `s` must be a live handle and `path` a NUL-terminated string.
 */
enum TrasterStatus traster_save(const struct TrasterSeries *s, const char *path);

/**
 * Serializes into `buf`. `*written` receives the encoded size even when
 * the buffer is too small, so a NULL `buf` with `cap` 0 queries the size.
 *
 * # Safety
 * `buf` must have `cap` writable bytes unless `cap` is 0, and `written`
 * must be writable.
 */
enum TrasterStatus traster_serialize(const struct TrasterSeries *s,
                                     uint8_t *buf,
                                     size_t cap,
                                     size_t *written);

/**
 * Releases a series handle. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void traster_free(struct TrasterSeries *s);

/**
 * # Safety
 * `s` must be a live handle; each out pointer may be NULL.
 */
enum TrasterStatus traster_dims(const struct TrasterSeries *s,
                                size_t *tau,
                                size_t *rows,
                                size_t *cols);

/**
 * Whether instant `t` is stored as a snapshot.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum TrasterStatus traster_is_snapshot(const struct TrasterSeries *s, size_t t, bool *out);

/**
 * Encoded size in bytes.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum TrasterStatus traster_total_bytes(const struct TrasterSeries *s, size_t *out);

/**
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum TrasterStatus traster_get_cell(const struct TrasterSeries *s,
                                    size_t t,
                                    size_t r,
                                    size_t c,
                                    int32_t *out);

/**
 * Cells of the inclusive window `[r1, r2] x [c1, c2]` at instant `t` whose
 * value lies in `[vb, ve]`, in row-major order.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum TrasterStatus traster_get_cells(const struct TrasterSeries *s,
                                     size_t t,
                                     int64_t vb,
                                     int64_t ve,
                                     size_t r1,
                                     size_t r2,
                                     size_t c1,
                                     size_t c2,
                                     struct TrasterCells **out);

/**
 * # Safety
 * `cells` must be a live handle or NULL.
 */
size_t traster_cells_len(const struct TrasterCells *cells);

/**
 * Pointer to `traster_cells_len` entries, owned by the handle.
 *
 * # Safety
 * `cells` must be a live handle or NULL.
 */
const struct TrasterCell *traster_cells_data(const struct TrasterCells *cells);

/**
 * # Safety
 * `cells` must come from this library and not be used afterwards.
 */
void traster_cells_free(struct TrasterCells *cells);

/**
 * Writes frame `t` row-major into `buf`, which holds `len` values.
 *
 * # Safety
 * `s` must be a live handle and `buf` must have `len` writable values.
 */
enum TrasterStatus traster_decompress_frame(const struct TrasterSeries *s,
                                            size_t t,
                                            int32_t *buf,
                                            size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRASTER_H */
