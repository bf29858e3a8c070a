// Copyright 2026 The ppgbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ppgbench/ppgbench.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <exception>
#include <string>
#include <vector>

#include "ppgbench/core/error.h"
#include "ppgbench/core/pipeline.h"
#include "ppgbench/core/rng.h"
#include "ppgbench/core/training.h"

struct ppg_config {
  ppgbench::RunConfig cfg;
};
struct ppg_record {
  ppgbench::PpgRecord rec;
};
struct ppg_model {
  ppgbench::Model model;
};

namespace {

thread_local std::string g_last_error;

ppg_status fail(ppg_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
ppg_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return PPG_OK;
  } catch (const ppgbench::ValidationError& e) {
    return fail(PPG_ERR_VALIDATION, e.what());
  } catch (const std::exception& e) {
    return fail(PPG_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(PPG_ERR_RUNTIME, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

#define PPG_REQUIRE(cond)                                         \
  do {                                                            \
    if (!(cond)) return fail(PPG_ERR_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* ppg_version(void) { return "0.1.0"; }
const char* ppg_last_error(void) { return g_last_error.c_str(); }
void ppg_string_free(char* s) { std::free(s); }

ppg_status ppg_config_default(ppg_config** out) {
  PPG_REQUIRE(out);
  return guarded([&] { *out = new ppg_config{}; });
}

ppg_status ppg_config_load(const char* path, ppg_config** out) {
  PPG_REQUIRE(path && out);
  return guarded([&] { *out = new ppg_config{ppgbench::load_run_config(path)}; });
}

ppg_status ppg_config_parse(const char* json, ppg_config** out) {
  PPG_REQUIRE(json && out);
  return guarded([&] { *out = new ppg_config{ppgbench::parse_run_config(json)}; });
}

ppg_status ppg_config_set(ppg_config* cfg, const char* key, const char* value) {
  PPG_REQUIRE(cfg && key && value);
  return guarded([&] { ppgbench::apply_override(cfg->cfg, key, value); });
}

ppg_status ppg_config_to_json(const ppg_config* cfg, char** out) {
  PPG_REQUIRE(cfg && out);
  return guarded([&] { *out = dup(ppgbench::to_json(cfg->cfg).dump(2)); });
}

void ppg_config_free(ppg_config* cfg) { delete cfg; }

ppg_status ppg_cmd_synth(const ppg_config* cfg, char** summary) {
  PPG_REQUIRE(cfg && summary);
  return guarded([&] { *summary = dup(to_json(ppgbench::cmd_synth(cfg->cfg)).dump()); });
}

ppg_status ppg_cmd_slice(const ppg_config* cfg, char** summary) {
  PPG_REQUIRE(cfg && summary);
  return guarded([&] { *summary = dup(to_json(ppgbench::cmd_slice(cfg->cfg)).dump()); });
}

ppg_status ppg_cmd_run(const ppg_config* cfg, char** summary) {
  PPG_REQUIRE(cfg && summary);
  return guarded([&] { *summary = dup(to_json(ppgbench::cmd_run(cfg->cfg)).dump()); });
}

ppg_status ppg_cmd_sweep(const ppg_config* cfg, char** summary) {
  PPG_REQUIRE(cfg && summary);
  return guarded([&] { *summary = dup(to_json(ppgbench::cmd_sweep(cfg->cfg)).dump()); });
}

ppg_status ppg_cmd_gradcheck(const ppg_config* cfg, int* all_pass, char** summary) {
  PPG_REQUIRE(cfg && all_pass && summary);
  return guarded([&] {
    const auto rows = ppgbench::cmd_gradcheck(cfg->cfg);
    const auto j = ppgbench::to_json(rows);
    *all_pass = j.at("pass").get<bool>() ? 1 : 0;
    *summary = dup(j.dump());
  });
}

ppg_status ppg_cmd_report(const ppg_config* cfg, char** summary) {
  PPG_REQUIRE(cfg && summary);
  return guarded([&] { *summary = dup(to_json(ppgbench::cmd_report(cfg->cfg)).dump()); });
}

ppg_status ppg_record_load(const char* path, ppg_record** out) {
  PPG_REQUIRE(path && out);
  return guarded([&] { *out = new ppg_record{ppgbench::load_ppg_record(path)}; });
}

ppg_status ppg_record_info(const ppg_record* rec, size_t* n_samples, double* sample_rate_hz) {
  PPG_REQUIRE(rec && n_samples && sample_rate_hz);
  *n_samples = rec->rec.samples.size();
  *sample_rate_hz = rec->rec.sample_rate_hz;
  return PPG_OK;
}

ppg_status ppg_record_samples(const ppg_record* rec, const double** samples) {
  PPG_REQUIRE(rec && samples);
  *samples = rec->rec.samples.data();
  return PPG_OK;
}

void ppg_record_free(ppg_record* rec) { delete rec; }

ppg_status ppg_model_create(const char* architecture_json, size_t window_len, double sample_rate_hz,
                            uint64_t seed, ppg_model** out) {
  PPG_REQUIRE(architecture_json && out);
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(architecture_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw ppgbench::ParseError(std::string("architecture: ") + e.what());
    }
    auto m = std::make_unique<ppg_model>();
    const auto spec = doc.is_string() ? ppgbench::architecture_by_name(doc.get<std::string>())
                                      : ppgbench::architecture_from_json(doc);
    m->model = ppgbench::build_model(spec, window_len, sample_rate_hz);
    m->model.graph.init_parameters(seed);
    *out = m.release();
  });
}

ppg_status ppg_model_load(const char* checkpoint_path, ppg_model** out) {
  PPG_REQUIRE(checkpoint_path && out);
  return guarded([&] { *out = new ppg_model{ppgbench::load_checkpoint(checkpoint_path)}; });
}

ppg_status ppg_model_save(const ppg_model* model, const char* checkpoint_path) {
  PPG_REQUIRE(model && checkpoint_path);
  return guarded([&] { ppgbench::save_checkpoint(model->model, checkpoint_path); });
}

ppg_status ppg_model_param_count(const ppg_model* model, size_t* out) {
  PPG_REQUIRE(model && out);
  *out = model->model.graph.param_count();
  return PPG_OK;
}

ppg_status ppg_model_score(ppg_model* model, const double* window, size_t n, double* score) {
  PPG_REQUIRE(model && window && score);
  return guarded([&] {
    const auto logits = model->model.logits(std::span<const double>(window, n));
    *score = ppgbench::softmax(logits)[1];
  });
}

void ppg_model_free(ppg_model* model) { delete model; }

ppg_status ppg_roc_auc(const double* scores, const int* labels, size_t n, double* out) {
  PPG_REQUIRE(scores && labels && out);
  return guarded([&] { *out = ppgbench::roc_auc({scores, n}, {labels, n}); });
}

ppg_status ppg_f1_weighted(const int* predictions, const int* labels, size_t n, double* out) {
  PPG_REQUIRE(predictions && labels && out);
  return guarded([&] { *out = ppgbench::f1_weighted({predictions, n}, {labels, n}); });
}

ppg_status ppg_mean_sem(const double* values, size_t n, double* mean, double* sem) {
  PPG_REQUIRE(values && mean && sem);
  return guarded([&] {
    const auto m = ppgbench::mean_sem({values, n});
    *mean = m.mean;
    *sem = m.sem;
  });
}

ppg_status ppg_sgdr_lr(double t_cur, double t_i, double eta_min, double eta_max, double* out) {
  PPG_REQUIRE(out);
  return guarded([&] { *out = ppgbench::sgdr_lr(t_cur, t_i, eta_min, eta_max); });
}

ppg_status ppg_fuse_scores(const double* logits, size_t n_sub, double* score, int* decision) {
  PPG_REQUIRE(logits && score && decision);
  return guarded([&] {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < n_sub; ++i) rows.push_back({logits[2 * i], logits[2 * i + 1]});
    const auto f = ppgbench::fuse_subwindow_scores(rows);
    *score = f.score;
    *decision = f.decision;
  });
}

}  // extern "C"
