#ifndef MOTIFMDL_H
#define MOTIFMDL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum MotifmdlStatus {
  MOTIFMDL_STATUS_OK = 0,
  MOTIFMDL_STATUS_NULL_POINTER = 1,
  MOTIFMDL_STATUS_INVALID_UTF8 = 2,
  MOTIFMDL_STATUS_PARSE = 3,
  MOTIFMDL_STATUS_VALIDATION = 4,
  MOTIFMDL_STATUS_CONFIG = 5,
  MOTIFMDL_STATUS_CAPACITY = 6,
  MOTIFMDL_STATUS_COVERAGE = 7,
  MOTIFMDL_STATUS_DECODE = 8,
  MOTIFMDL_STATUS_IO = 9,
  MOTIFMDL_STATUS_INVARIANT = 10,
  MOTIFMDL_STATUS_BUFFER_SIZE = 11,
  MOTIFMDL_STATUS_PANIC = 12,
  MOTIFMDL_STATUS_OTHER = 13,
} MotifmdlStatus;

/**
 * A parsed graph database.
 */
typedef struct MotifmdlDatabase MotifmdlDatabase;

/**
 * A fitted motif table with the per-graph scores of the database it was
 * fitted on.
 */
typedef struct MotifmdlModel MotifmdlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the
 * library and valid until the next call on this thread.
 */
const char *motifmdl_last_error(void);

/**
 * Parses an edge-list CSV held in memory.
 *
 * # Safety
 * `csv` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MotifmdlStatus motifmdl_database_from_csv(const char *csv, struct MotifmdlDatabase **out);

/**
 * Reads an edge-list CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MotifmdlStatus motifmdl_database_from_file(const char *path, struct MotifmdlDatabase **out);

/**
 * Number of graphs in the database.
 *
 * # Safety
 * `db` must come from this library and `out` be a valid pointer.
 */
enum MotifmdlStatus motifmdl_database_len(const struct MotifmdlDatabase *db, size_t *out);

/**
 * Releases a database. Null is ignored.
 *
 * # Safety
 * `db` must come from this library and not be used afterwards.
 */
void motifmdl_database_free(struct MotifmdlDatabase *db);

/**
 * Fits a motif table to `db` and scores every graph.
 *
 * # Safety
 * `db` must come from this library and `out` be a valid pointer.
 */
enum MotifmdlStatus motifmdl_fit(const struct MotifmdlDatabase *db,
                                 size_t k_min,
                                 size_t k_max,
                                 size_t budget,
                                 bool weighted,
                                 struct MotifmdlModel **out);

/**
 * Total description length of the fitted database in bits.
 *
 * # Safety
 * `model` must come from this library and `out` be a valid pointer.
 */
enum MotifmdlStatus motifmdl_model_total_bits(const struct MotifmdlModel *model, double *out);

/**
 * Number of motifs in the table, typed edges included.
 *
 * # Safety
 * `model` must come from this library and `out` be a valid pointer.
 */
enum MotifmdlStatus motifmdl_model_motif_count(const struct MotifmdlModel *model, size_t *out);

/**
 * Copies the anomaly score of each graph, in database order, into `out`.
 * `len` must equal the number of graphs.
 *
 * # Safety
 * `model` must come from this library and `out` point to `len` doubles.
 */
enum MotifmdlStatus motifmdl_model_scores(const struct MotifmdlModel *model,
                                          double *out,
                                          size_t len);

/**
 * The motif table as JSON. Release the string with
 * [`motifmdl_string_free`].
 *
 * # Safety
 * `model` must come from this library and `out` be a valid pointer.
 */
enum MotifmdlStatus motifmdl_model_table_json(const struct MotifmdlModel *model, char **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void motifmdl_model_free(struct MotifmdlModel *model);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void motifmdl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOTIFMDL_H */
