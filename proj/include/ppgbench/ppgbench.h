/*
 * Copyright 2026 The ppgbench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to ppgbench. All functions return a ppg_status; on failure
 * ppg_last_error() describes the problem for the calling thread. Strings
 * returned through char** are owned by the caller and released with
 * ppg_string_free. */

#ifndef PPGBENCH_PPGBENCH_H_
#define PPGBENCH_PPGBENCH_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PPG_API __declspec(dllexport)
#else
#define PPG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ppg_status {
  PPG_OK = 0,
  PPG_ERR_VALIDATION = 1, /* bad input, config, or data */
  PPG_ERR_RUNTIME = 2,    /* I/O or internal failure */
  PPG_ERR_ARGUMENT = 3    /* null handle or pointer */
} ppg_status;

typedef struct ppg_config ppg_config;
typedef struct ppg_record ppg_record;
typedef struct ppg_model ppg_model;

PPG_API const char* ppg_version(void);
PPG_API const char* ppg_last_error(void);
PPG_API void ppg_string_free(char* s);

/* Run configuration. */
PPG_API ppg_status ppg_config_default(ppg_config** out);
PPG_API ppg_status ppg_config_load(const char* path, ppg_config** out);
PPG_API ppg_status ppg_config_parse(const char* json, ppg_config** out);
/* key is a dotted path ("train.max_epochs"); value is JSON or a bare word. */
PPG_API ppg_status ppg_config_set(ppg_config* cfg, const char* key, const char* value);
PPG_API ppg_status ppg_config_to_json(const ppg_config* cfg, char** out);
PPG_API void ppg_config_free(ppg_config* cfg);

/* Pipeline commands. Each writes its files and returns a JSON summary. */
PPG_API ppg_status ppg_cmd_synth(const ppg_config* cfg, char** summary);
PPG_API ppg_status ppg_cmd_slice(const ppg_config* cfg, char** summary);
PPG_API ppg_status ppg_cmd_run(const ppg_config* cfg, char** summary);
PPG_API ppg_status ppg_cmd_sweep(const ppg_config* cfg, char** summary);
/* *all_pass is 1 when every layer and architecture passes. */
PPG_API ppg_status ppg_cmd_gradcheck(const ppg_config* cfg, int* all_pass, char** summary);
PPG_API ppg_status ppg_cmd_report(const ppg_config* cfg, char** summary);

/* PPG records. */
PPG_API ppg_status ppg_record_load(const char* path, ppg_record** out);
PPG_API ppg_status ppg_record_info(const ppg_record* rec, size_t* n_samples, double* sample_rate_hz);
PPG_API ppg_status ppg_record_samples(const ppg_record* rec, const double** samples);
PPG_API void ppg_record_free(ppg_record* rec);

/* Models. architecture_json is a JSON name ("\"pulsenet_var1\"") or an object such as
   {"name":"pulsenet","kernel_sizes":[15,8,2]}. */
PPG_API ppg_status ppg_model_create(const char* architecture_json, size_t window_len,
                                    double sample_rate_hz, uint64_t seed, ppg_model** out);
PPG_API ppg_status ppg_model_load(const char* checkpoint_path, ppg_model** out);
PPG_API ppg_status ppg_model_save(const ppg_model* model, const char* checkpoint_path);
PPG_API ppg_status ppg_model_param_count(const ppg_model* model, size_t* out);
/* Positive-class probability of one raw window of window_len samples. */
PPG_API ppg_status ppg_model_score(ppg_model* model, const double* window, size_t n, double* score);
PPG_API void ppg_model_free(ppg_model* model);

/* Metrics and schedule helpers. */
PPG_API ppg_status ppg_roc_auc(const double* scores, const int* labels, size_t n, double* out);
PPG_API ppg_status ppg_f1_weighted(const int* predictions, const int* labels, size_t n, double* out);
PPG_API ppg_status ppg_mean_sem(const double* values, size_t n, double* mean, double* sem);
PPG_API ppg_status ppg_sgdr_lr(double t_cur, double t_i, double eta_min, double eta_max, double* out);
/* logits: n_sub rows of 2 class logits, row-major. */
PPG_API ppg_status ppg_fuse_scores(const double* logits, size_t n_sub, double* score, int* decision);

#ifdef __cplusplus
}
#endif

#endif /* PPGBENCH_PPGBENCH_H_ */
