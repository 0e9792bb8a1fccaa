#ifndef LEVELSCOPE_H
#define LEVELSCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LsBackbone {
  LS_BACKBONE_TEMPORAL_BILINEAR = 0,
  LS_BACKBONE_CONVOLUTIONAL = 1,
} LsBackbone;

typedef enum LsPartition {
  LS_PARTITION_TRAIN = 0,
  LS_PARTITION_VALIDATION = 1,
  LS_PARTITION_TEST = 2,
} LsPartition;

/**
 * Result code of every exported function.
 */
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_ARGUMENT = 2,
  LS_STATUS_PARSE_ERROR = 3,
  LS_STATUS_DATA_ERROR = 4,
  LS_STATUS_IO_ERROR = 5,
  LS_STATUS_EVALUATION_ERROR = 6,
  LS_STATUS_CALLBACK_ERROR = 7,
  LS_STATUS_PANIC = 8,
} LsStatus;

/**
 * Normalized train/validation/test windows.
 */
typedef struct LsDataset LsDataset;

/**
 * Loaded or generated order-book events.
 */
typedef struct LsEvents LsEvents;

/**
 * Trained predictor parameters.
 */
typedef struct LsModel LsModel;

typedef struct Option_LsFitnessFn Option_LsFitnessFn;

typedef struct LsSplitConfig {
  size_t window_length;
  size_t horizon;
  double alpha;
  size_t stride;
  size_t train_days;
  size_t test_days;
  double validation_fraction;
} LsSplitConfig;

typedef struct LsTrainConfig {
  double learning_rate;
  size_t batch_size;
  size_t max_epochs;
  size_t early_stop_patience;
  uint64_t seed;
} LsTrainConfig;

typedef struct LsBpsoConfig {
  size_t swarm_size;
  size_t iterations;
  double c1;
  double c2;
  double v_max;
  double w_start;
  double w_end;
  uint64_t seed;
} LsBpsoConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ls_last_error_message(void);

/**
 * Reads an event CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LsStatus ls_events_parse_file(const char *path, struct LsEvents **out);

/**
 * Generates synthetic events from `key = value` lines (same keys as the
 * `gen-data` command; empty text gives the defaults).
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LsStatus ls_events_generate(const char *config, struct LsEvents **out);

/**
 * # Safety
 * `events` must come from this library and `len` be a valid pointer.
 */
enum LsStatus ls_events_len(const struct LsEvents *events, size_t *len);

/**
 * # Safety
 * `events` must come from this library; `path` must be NUL-terminated.
 */
enum LsStatus ls_events_write_file(const struct LsEvents *events, const char *path);

/**
 * # Safety
 * `events` must be null or a handle not yet freed.
 */
void ls_events_free(struct LsEvents *events);

/**
 * Builds labelled, normalized windows and splits them by trading day.
 *
 * # Safety
 * All pointers must be valid; `events` must come from this library.
 */
enum LsStatus ls_dataset_split(const struct LsEvents *events,
                               const struct LsSplitConfig *config,
                               struct LsDataset **out);

/**
 * Number of windows in each partition.
 *
 * # Safety
 * `dataset` must come from this library; the counts must be valid pointers.
 */
enum LsStatus ls_dataset_sizes(const struct LsDataset *dataset,
                               size_t *train,
                               size_t *validation,
                               size_t *test);

/**
 * # Safety
 * `dataset` must be null or a handle not yet freed.
 */
void ls_dataset_free(struct LsDataset *dataset);

/**
 * Parses a ten-character 0/1 mask string (leftmost is level 1).
 *
 * # Safety
 * `text` must be NUL-terminated and `bits` a valid pointer.
 */
enum LsStatus ls_mask_parse(const char *text, uint16_t *bits);

/**
 * Writes the 40 x `t` row-major mask matrix of `bits` into `buffer`, which
 * must hold `len >= 40 * t` values.
 *
 * # Safety
 * `buffer` must point to `len` writable doubles.
 */
enum LsStatus ls_mask_matrix(uint16_t bits, size_t t, double *buffer, size_t len);

/**
 * Trains a backbone on the training windows restricted to `mask`.
 *
 * # Safety
 * All pointers must be valid; `dataset` must come from this library.
 */
enum LsStatus ls_model_train(const struct LsDataset *dataset,
                             enum LsBackbone backbone,
                             uint16_t mask,
                             const struct LsTrainConfig *config,
                             struct LsModel **out);

/**
 * Macro-F1 of `model` on one partition of `dataset` under `mask`.
 *
 * # Safety
 * All pointers must be valid and come from this library.
 */
enum LsStatus ls_model_evaluate(const struct LsModel *model,
                                const struct LsDataset *dataset,
                                enum LsPartition partition,
                                uint16_t mask,
                                double *macro_f1);

/**
 * # Safety
 * `model` must come from this library; `path` must be NUL-terminated.
 */
enum LsStatus ls_model_save(const struct LsModel *model, const char *path);

/**
 * # Safety
 * `path` must be NUL-terminated and `out` a valid pointer.
 */
enum LsStatus ls_model_load(const char *path, struct LsModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void ls_model_free(struct LsModel *model);

/**
 * Binary particle swarm search over level subsets. The callback is invoked
 * from one thread at a time.
 *
 * # Safety
 * `config`, `best_mask` and `best_fitness` must be valid pointers.
 */
enum LsStatus ls_bpso_select(struct Option_LsFitnessFn fitness,
                             void *user_data,
                             const struct LsBpsoConfig *config,
                             uint16_t *best_mask,
                             double *best_fitness);

/**
 * Backward elimination from all ten levels. `removed` receives the nine
 * removed levels in order and `final_level` the survivor. When
 * `remove_lower_on_tie` is nonzero, ties drop the lower level.
 *
 * # Safety
 * `removed` must point to 9 writable bytes and `final_level` to one.
 */
enum LsStatus ls_backward_eliminate(struct Option_LsFitnessFn fitness,
                                    void *user_data,
                                    int32_t remove_lower_on_tie,
                                    uint8_t *removed,
                                    uint8_t *final_level);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEVELSCOPE_H */
