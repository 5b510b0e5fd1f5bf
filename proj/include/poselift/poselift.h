#ifndef POSELIFT_POSELIFT_H
#define POSELIFT_POSELIFT_H

#include <stddef.h>
#include <stdint.h>

#if defined(POSELIFT_BUILDING)
#define PL_API __attribute__((visibility("default")))
#else
#define PL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pl_status {
  PL_OK = 0,
  PL_ERR_INVALID_ARGUMENT = 1,
  PL_ERR_SHAPE = 2,
  PL_ERR_IO = 3,
  PL_ERR_FORMAT = 4,
  PL_ERR_NUMERIC = 5,
  PL_ERR_CONFIG = 6,
  PL_ERR_INTERNAL = 100
} pl_status;

typedef struct pl_skeleton pl_skeleton;
typedef struct pl_dataset pl_dataset;
typedef struct pl_model pl_model;
typedef struct pl_report pl_report;

/* Message of the last failed call on this thread ("" if none). */
PL_API const char* pl_last_error(void);
/* Stable identifier such as "config_error". */
PL_API const char* pl_status_string(pl_status status);
PL_API const char* pl_version(void);
/* Strings returned through char** out-parameters are owned by the caller. */
PL_API void pl_string_free(char* s);
PL_API void pl_set_log_level(int level); /* 0 debug, 1 info, 2 warning, 3 error */

/* path == NULL selects the built-in 17-joint layout. */
PL_API pl_status pl_skeleton_load(const char* path, pl_skeleton** out);
PL_API size_t pl_skeleton_joint_count(const pl_skeleton* skeleton);
PL_API void pl_skeleton_free(pl_skeleton* skeleton);

/* Line-delimited JSON pose files. */
PL_API pl_status pl_dataset_load(const char* path, const pl_skeleton* skeleton, pl_dataset** out);
/* Synthetic clips on the built-in skeleton; length >= 2. */
PL_API pl_status pl_dataset_synth(size_t sequences, size_t length, uint64_t seed, pl_dataset** out);
PL_API pl_status pl_dataset_save(const pl_dataset* data, const char* path);
/* {"sequences","frames","with_3d","subjects":[...],"actions":{...}} */
PL_API pl_status pl_dataset_summary(const pl_dataset* data, char** json_out);
PL_API size_t pl_dataset_count(const pl_dataset* data);
/* Adds N(0, sigma^2) pixel noise to every 2D coordinate. */
PL_API pl_status pl_dataset_add_noise(pl_dataset* data, double sigma, uint64_t seed);
PL_API void pl_dataset_free(pl_dataset* data);

/* Merges overrides_json over the config file (NULL = none) over defaults and
   validates the result. Every violation is reported in one message. */
PL_API pl_status pl_config_resolve(const char* config_path, const char* overrides_json, char** json_out);

/* Trains per the resolved configuration and writes metrics.csv and
   checkpoints into its "out" directory. Summary is JSON. */
PL_API pl_status pl_train(const char* config_path, const char* overrides_json, char** summary_out);

/* Trains one model per window length and scores each on the validation
   split. CSV: seq_len,steps,val_sequences,protocol1_mm,protocol2_mm */
PL_API pl_status pl_sweep_seq_len(const char* config_path, const char* overrides_json,
                                  const uint32_t* seq_lens, size_t count, char** csv_out);

/* Trains the full model plus one variant per disabled component
   ("residual", "layer_norm", "recurrent_dropout", "smoothness").
   CSV: variant,steps,val_sequences,protocol1_mm,protocol2_mm,jitter_mm */
PL_API pl_status pl_ablate(const char* config_path, const char* overrides_json,
                           const char* const* toggles, size_t count, char** csv_out);

PL_API pl_status pl_model_load(const char* checkpoint_path, pl_model** out);
/* {"input_dim","output_dim","hidden","seq_len",...,"fingerprint"} */
PL_API pl_status pl_model_info(const pl_model* model, char** json_out);
PL_API void pl_model_free(pl_model* model);

/* Lifts every clip; the result holds camera-frame root-relative 3D. */
PL_API pl_status pl_lift(const pl_model* model, const pl_dataset* in, pl_dataset** out);
/* Raw buffers: frames x J x 2 pixels in, frames x J x 3 mm root-relative out
   (J = full joint count, root included). frames >= window length. */
PL_API pl_status pl_lift_frames(const pl_model* model, const double* frames_2d, size_t frames,
                                double* frames_3d_out);

PL_API pl_status pl_eval_model(const pl_model* model, const pl_dataset* data, int protocol, pl_report** out);
/* pred holds lifted clips aligned one-to-one with gt. */
PL_API pl_status pl_eval_predictions(const pl_dataset* pred, const pl_dataset* gt, const pl_skeleton* skeleton,
                                     int protocol, pl_report** out);
/* Temporal mean/median smoothing of the 3D of every clip. kind: "mean" | "median". */
PL_API pl_status pl_filter(const pl_dataset* pred, const pl_skeleton* skeleton, const char* kind, size_t window,
                           pl_dataset** out);
/* Protocol-2 error per sigma. CSV: sigma,frames,error_mm,avg_actions_mm */
PL_API pl_status pl_noise_sweep(const pl_model* model, const pl_dataset* data, const double* sigmas, size_t count,
                                uint64_t seed, char** csv_out);

PL_API pl_status pl_report_csv(const pl_report* report, char** out);
PL_API pl_status pl_report_json(const pl_report* report, int with_frames, char** out);
/* which: 0 frame-weighted overall, 1 mean over actions. */
PL_API double pl_report_error(const pl_report* report, int which);
PL_API void pl_report_free(pl_report* report);

PL_API pl_status pl_write_text(const char* path, const char* content);

#ifdef __cplusplus
}
#endif

#endif
