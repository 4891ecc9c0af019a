#ifndef LANERACER_H
#define LANERACER_H

/* C interface to the laneracer core: circuits, datasets, models, training,
 * closed-loop episodes and evaluation suites.
 *
 * Every object is an opaque handle released with its *_free function.
 * Functions return an lr_status; on failure lr_last_error() describes the
 * problem (thread-local, valid until the next failing call on that thread).
 * Strings returned through char** are owned by the caller: lr_string_free. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(LANERACER_BUILD)
#define LR_API __attribute__((visibility("default")))
#else
#define LR_API
#endif

typedef enum lr_status {
  LR_OK = 0,
  LR_ERR_INVALID_ARGUMENT = 1,
  LR_ERR_SHAPE = 2,
  LR_ERR_IO = 3,
  LR_ERR_FORMAT = 4,
  LR_ERR_VERSION = 5,
  LR_ERR_CHECKSUM = 6,
  LR_ERR_NUMERIC = 7,
  LR_ERR_RUNTIME = 8,
  LR_ERR_INTERNAL = 9
} lr_status;

LR_API const char* lr_version(void);
LR_API const char* lr_last_error(void);
LR_API const char* lr_status_name(lr_status status);
LR_API void lr_string_free(char* s);

/* ---- circuits ---- */

typedef struct lr_track lr_track;

typedef enum lr_role { LR_ROLE_TRAIN = 0, LR_ROLE_TEST = 1 } lr_role;

typedef struct lr_track_info {
  const char* name; /* valid while the handle lives */
  lr_role role;
  size_t waypoints;
  double length_m;
  double road_width_m;
  double line_width_m;
} lr_track_info;

LR_API size_t lr_circuit_count(void);
/* Static name of builtin circuit `index`. */
LR_API lr_status lr_circuit_name(size_t index, const char** name);
/* Builtin name, or a path to a circuit document. */
LR_API lr_status lr_track_open(const char* name_or_path, lr_track** out);
LR_API lr_status lr_track_get_info(const lr_track* track, lr_track_info* info);
LR_API lr_status lr_track_save(const lr_track* track, const char* path);
LR_API void lr_track_free(lr_track* track);

/* ---- datasets ---- */

typedef struct lr_dataset lr_dataset;

typedef struct lr_dataset_info {
  uint64_t samples;
  uint64_t episodes;
  uint32_t width;
  uint32_t height;
  uint32_t horizon_row;
} lr_dataset_info;

/* Expert recording: one episode of `laps` laps per circuit (red line, grey
 * road, walls, 64x48 camera). Fails if the expert fails anywhere. */
LR_API lr_status lr_dataset_record(const char* const* circuits, size_t count, int laps, uint64_t seed,
                                   lr_dataset** out);
LR_API lr_status lr_dataset_read(const char* path, lr_dataset** out);
LR_API lr_status lr_dataset_write(const lr_dataset* ds, const char* path);
/* Portable pixmaps plus labels.csv. */
LR_API lr_status lr_dataset_export(const lr_dataset* ds, const char* dir);
LR_API lr_status lr_dataset_get_info(const lr_dataset* ds, lr_dataset_info* info);
LR_API void lr_dataset_free(lr_dataset* ds);

/* ---- models ---- */

typedef struct lr_model lr_model;

typedef enum lr_scale { LR_SCALE_DESK = 0, LR_SCALE_FULL = 1 } lr_scale;

/* name: pilotnet | deepest_lstm_tiny | pilotnet_x3 | memdccp */
LR_API lr_status lr_model_create(const char* name, lr_scale scale, uint64_t seed, lr_model** out);
LR_API lr_status lr_model_load(const char* name, lr_scale scale, const char* path, lr_model** out);
LR_API lr_status lr_model_save(const lr_model* model, const char* path);
LR_API lr_status lr_model_param_count(const lr_model* model, uint64_t* count);
LR_API lr_status lr_model_manifest(const lr_model* model, char** text);
LR_API void lr_model_free(lr_model* model);

/* ---- training and internal metrics ---- */

typedef struct lr_train_params {
  int epochs;
  size_t batch;
  double learning_rate;
  uint64_t seed;
  double val_fraction;
  int mirror;      /* random horizontal flips */
  int photometric; /* brightness and pixel jitter */
} lr_train_params;

typedef struct lr_epoch_metrics {
  int epoch; /* 0 = before training */
  double train_mae, train_mse;
  double val_mae, val_mse;
  double seconds;
} lr_epoch_metrics;

typedef void (*lr_epoch_callback)(const lr_epoch_metrics* metrics, void* user);

LR_API void lr_train_params_default(lr_train_params* params);
/* Re-initializes the model from params->seed and trains it in place.
 * history_json (optional) receives the per-epoch record. */
LR_API lr_status lr_train(lr_model* model, const lr_dataset* ds, const lr_train_params* params,
                          lr_epoch_callback callback, void* user, char** history_json);

typedef enum lr_split { LR_SPLIT_ALL = 0, LR_SPLIT_TRAIN = 1, LR_SPLIT_VAL = 2 } lr_split;

/* The train/val split is the one lr_train draws for the same seed and fraction. */
LR_API lr_status lr_eval_internal(const lr_model* model, const lr_dataset* ds, lr_split split, double val_fraction,
                                  uint64_t seed, double* mae, double* mse);

/* ---- closed-loop episodes ---- */

typedef enum lr_line { LR_LINE_RED = 0, LR_LINE_WHITE = 1, LR_LINE_NONE = 2 } lr_line;
typedef enum lr_road { LR_ROAD_GREY = 0, LR_ROAD_WHITE = 1 } lr_road;
typedef enum lr_offset { LR_OFFSET_NONE = 0, LR_OFFSET_LEFT = 1, LR_OFFSET_RIGHT = 2 } lr_offset;

typedef enum lr_failure {
  LR_FAILURE_NONE = 0,
  LR_FAILURE_OFF_TRACK = 1,
  LR_FAILURE_LINE_LOST = 2,
  LR_FAILURE_TIME_LIMIT = 3
} lr_failure;

typedef struct lr_episode_params {
  lr_line line;
  lr_road road;
  int walls;
  double noise_p;
  lr_offset camera_offset;
  double offset_m;   /* magnitude used by camera_offset */
  double pitch_down; /* extra camera pitch, rad */
  uint64_t seed;
  int laps;
  double max_time; /* seconds; negative = default */
} lr_episode_params;

typedef struct lr_episode_metrics {
  int completed;
  double lap_seconds; /* NaN when not completed */
  double position_deviation_mae;
  double average_speed;
  lr_failure failure;
  double elapsed;
} lr_episode_metrics;

LR_API void lr_episode_params_default(lr_episode_params* params);
/* model == NULL drives the PID expert. json (optional) receives the metrics document. */
LR_API lr_status lr_run_episode(const lr_model* model, const lr_track* track, const lr_episode_params* params,
                                lr_episode_metrics* metrics, char** json);

/* ---- suites and reports ---- */

typedef struct lr_report lr_report;

typedef enum lr_suite_kind { LR_SUITE_GENERALIZATION = 0, LR_SUITE_ROBUSTNESS = 1 } lr_suite_kind;
typedef enum lr_report_format { LR_FORMAT_AUTO = 0, LR_FORMAT_JSON = 1, LR_FORMAT_CSV = 2 } lr_report_format;

/* Rows: the expert first when include_expert, then the models in order. */
LR_API lr_status lr_suite_run(lr_suite_kind kind, const lr_model* const* models, size_t count, int include_expert,
                              const lr_track* track, int repeats, uint64_t seed, lr_report** out);
LR_API lr_status lr_report_write(const lr_report* report, const char* path, lr_report_format format);
LR_API lr_status lr_report_read(const char* path, lr_report** out);
LR_API lr_status lr_report_cell(const lr_report* report, const char* brain, const char* condition,
                                lr_episode_metrics* metrics);
LR_API lr_status lr_report_dims(const lr_report* report, size_t* brains, size_t* conditions);
LR_API void lr_report_free(lr_report* report);

#ifdef __cplusplus
}
#endif

#endif
