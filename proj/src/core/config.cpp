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

#include "ppgbench/core/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "ppgbench/core/error.h"
#include "ppgbench/core/rng.h"

namespace ppgbench {

using json = nlohmann::json;

namespace {

void check_keys(const json& obj, std::string_view section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ParseError(std::string(section) + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!ok.count(k)) {
      std::string list;
      for (const auto& a : ok) list += (list.empty() ? "" : ", ") + a;
      throw ParseError(std::string(section) + ": unknown key '" + k + "' (valid: " + list + ")");
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, std::string_view section) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string(section) + "." + key + ": wrong type");
  }
}

template <class T>
void read_opt(const json& obj, const char* key, std::optional<T>& out, std::string_view section) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (it->is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(obj, key, v, section);
  out = v;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

CohortConfig RunConfig::default_synth() {
  CohortConfig c;
  // Planted speech coupling fixed by the learnability oracle run.
  c.speech_coupling = 0.1;
  return c;
}

std::filesystem::path RunConfig::windows_file() const {
  return windows_path ? *windows_path : output_dir / "windows.jsonl";
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.task = task;
  e.arch = arch;
  e.window = window;
  e.stft = stft;
  e.train = train;
  e.split = split;
  e.gender = gender;
  e.reps = reps;
  e.cnn2d_verification_reps = cnn2d_verification_reps;
  e.verification_targets = verification_targets;
  e.shuffle_labels = shuffle_labels;
  e.seed = derive_seed(seed, kRunSeedStage);
  e.workers = workers;
  return e;
}

void RunConfig::validate() const {
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (spectrogram_dump < 0) throw ValidationError("spectrogram_dump must be >= 0");
  synth.validate();
  stft.validate();
  experiment().validate();
  for (const auto& k : kernel_grid) {
    for (std::size_t v : k) {
      if (v < 2) throw ValidationError("sweep.kernel_grid: kernel sizes must be >= 2");
    }
  }
}

json to_json(const RunConfig& c) {
  json sessions = json::array();
  for (SessionKind k : c.synth.sessions) sessions.push_back(to_string(k));
  json grid = json::array();
  for (const auto& k : c.kernel_grid) grid.push_back(k);
  return json{
      {"data_dir", c.data_dir.string()},
      {"output_dir", c.output_dir.string()},
      {"windows_path", c.windows_path ? json(c.windows_path->string()) : json(nullptr)},
      {"seed", c.seed},
      {"workers", c.workers},
      {"task", to_string(c.task)},
      {"architecture", to_json(c.arch)},
      {"synth",
       {{"n_male", c.synth.n_male},
        {"n_female", c.synth.n_female},
        {"sessions", sessions},
        {"speech_coupling", c.synth.speech_coupling},
        {"sample_rate_hz", c.synth.sample_rate_hz},
        {"session_duration_s", c.synth.session_duration_s},
        {"jitter", {{"mean_s", c.synth.jitter.mean_s}, {"sigma_s", c.synth.jitter.sigma_s}}}}},
      {"window",
       {{"window_s", c.window.window_s},
        {"stride_s", c.window.stride_s},
        {"sub_window_s", opt(c.window.sub_window_s)},
        {"sub_overlap_frac", c.window.sub_overlap_frac},
        {"silence_discard_frac", c.window.silence_discard_frac},
        {"nonspeech_max_speech_frac", c.window.nonspeech_max_speech_frac}}},
      {"stft",
       {{"frame_len", c.stft.frame_len},
        {"hop", c.stft.hop},
        {"window", to_string(c.stft.window_fn)},
        {"log_floor", c.stft.log_floor}}},
      {"train",
       {{"batch_size", c.train.batch_size},
        {"max_epochs", c.train.max_epochs},
        {"eta_max", c.train.schedule.eta_max},
        {"eta_min", c.train.schedule.eta_min},
        {"t0_epochs", c.train.schedule.t0_epochs},
        {"t_mult", c.train.schedule.t_mult},
        {"patience_cycles", c.train.patience_cycles},
        {"class_weighting", c.train.class_weighting}}},
      {"split", {{"train", c.split.train_frac}, {"val", c.split.val_frac}, {"test", c.split.test_frac}}},
      {"gender",
       {{"n_folds", c.gender.n_folds},
        {"reps_per_fold", c.gender.reps_per_fold},
        {"cnn2d_n_folds", c.gender.cnn2d_n_folds},
        {"cnn2d_reps_per_fold", c.gender.cnn2d_reps_per_fold}}},
      {"reps", c.reps},
      {"verification", {{"targets", c.verification_targets}, {"cnn2d_reps", c.cnn2d_verification_reps}}},
      {"shuffle_labels", c.shuffle_labels},
      {"sweep", {{"kernel_grid", grid}}},
      {"spectrogram_dump", c.spectrogram_dump},
  };
}

RunConfig run_config_from_json(const json& doc) {
  check_keys(doc, "config",
             {"data_dir", "output_dir", "windows_path", "seed", "workers", "task", "architecture",
              "synth", "window", "stft", "train", "split", "gender", "reps", "verification",
              "shuffle_labels", "sweep", "spectrogram_dump"});
  RunConfig c;
  std::string s;
  if (doc.contains("data_dir")) {
    read(doc, "data_dir", s, "config");
    c.data_dir = s;
  }
  if (doc.contains("output_dir")) {
    read(doc, "output_dir", s, "config");
    c.output_dir = s;
  }
  if (auto it = doc.find("windows_path"); it != doc.end() && !it->is_null()) {
    read(doc, "windows_path", s, "config");
    c.windows_path = s;
  }
  read(doc, "seed", c.seed, "config");
  read(doc, "workers", c.workers, "config");
  if (doc.contains("task")) {
    read(doc, "task", s, "config");
    c.task = parse_task(s);
  }
  if (auto it = doc.find("architecture"); it != doc.end()) {
    if (it->is_string()) {
      c.arch = architecture_by_name(it->get<std::string>());
    } else {
      check_keys(*it, "architecture",
                 {"name", "family", "kernel_sizes", "branch_channels", "hidden_units",
                  "channel_sequence", "block_channels", "n_classes"});
      c.arch = architecture_from_json(*it);
    }
  }
  if (auto it = doc.find("synth"); it != doc.end()) {
    const json& j = *it;
    check_keys(j, "synth",
               {"n_male", "n_female", "sessions", "speech_coupling", "sample_rate_hz",
                "session_duration_s", "jitter"});
    read(j, "n_male", c.synth.n_male, "synth");
    read(j, "n_female", c.synth.n_female, "synth");
    if (j.contains("sessions")) {
      std::vector<std::string> names;
      read(j, "sessions", names, "synth");
      c.synth.sessions.clear();
      for (const auto& n : names) c.synth.sessions.push_back(parse_session_kind(n));
    }
    read(j, "speech_coupling", c.synth.speech_coupling, "synth");
    read(j, "sample_rate_hz", c.synth.sample_rate_hz, "synth");
    read(j, "session_duration_s", c.synth.session_duration_s, "synth");
    if (auto jt = j.find("jitter"); jt != j.end()) {
      check_keys(*jt, "synth.jitter", {"mean_s", "sigma_s"});
      read(*jt, "mean_s", c.synth.jitter.mean_s, "synth.jitter");
      read(*jt, "sigma_s", c.synth.jitter.sigma_s, "synth.jitter");
    }
  }
  if (auto it = doc.find("window"); it != doc.end()) {
    const json& j = *it;
    check_keys(j, "window",
               {"window_s", "stride_s", "sub_window_s", "sub_overlap_frac", "silence_discard_frac",
                "nonspeech_max_speech_frac"});
    read(j, "window_s", c.window.window_s, "window");
    read(j, "stride_s", c.window.stride_s, "window");
    read_opt(j, "sub_window_s", c.window.sub_window_s, "window");
    read(j, "sub_overlap_frac", c.window.sub_overlap_frac, "window");
    read(j, "silence_discard_frac", c.window.silence_discard_frac, "window");
    read(j, "nonspeech_max_speech_frac", c.window.nonspeech_max_speech_frac, "window");
  }
  if (auto it = doc.find("stft"); it != doc.end()) {
    const json& j = *it;
    check_keys(j, "stft", {"frame_len", "hop", "window", "log_floor"});
    read(j, "frame_len", c.stft.frame_len, "stft");
    read(j, "hop", c.stft.hop, "stft");
    if (j.contains("window")) {
      read(j, "window", s, "stft");
      c.stft.window_fn = parse_window_function(s);
    }
    read(j, "log_floor", c.stft.log_floor, "stft");
  }
  if (auto it = doc.find("train"); it != doc.end()) {
    const json& j = *it;
    check_keys(j, "train",
               {"batch_size", "max_epochs", "eta_max", "eta_min", "t0_epochs", "t_mult",
                "patience_cycles", "class_weighting"});
    read(j, "batch_size", c.train.batch_size, "train");
    read(j, "max_epochs", c.train.max_epochs, "train");
    read(j, "eta_max", c.train.schedule.eta_max, "train");
    read(j, "eta_min", c.train.schedule.eta_min, "train");
    read(j, "t0_epochs", c.train.schedule.t0_epochs, "train");
    read(j, "t_mult", c.train.schedule.t_mult, "train");
    read(j, "patience_cycles", c.train.patience_cycles, "train");
    read(j, "class_weighting", c.train.class_weighting, "train");
  }
  if (auto it = doc.find("split"); it != doc.end()) {
    check_keys(*it, "split", {"train", "val", "test"});
    read(*it, "train", c.split.train_frac, "split");
    read(*it, "val", c.split.val_frac, "split");
    read(*it, "test", c.split.test_frac, "split");
  }
  if (auto it = doc.find("gender"); it != doc.end()) {
    check_keys(*it, "gender", {"n_folds", "reps_per_fold", "cnn2d_n_folds", "cnn2d_reps_per_fold"});
    read(*it, "n_folds", c.gender.n_folds, "gender");
    read(*it, "reps_per_fold", c.gender.reps_per_fold, "gender");
    read(*it, "cnn2d_n_folds", c.gender.cnn2d_n_folds, "gender");
    read(*it, "cnn2d_reps_per_fold", c.gender.cnn2d_reps_per_fold, "gender");
  }
  read(doc, "reps", c.reps, "config");
  if (auto it = doc.find("verification"); it != doc.end()) {
    check_keys(*it, "verification", {"targets", "cnn2d_reps"});
    read(*it, "targets", c.verification_targets, "verification");
    read(*it, "cnn2d_reps", c.cnn2d_verification_reps, "verification");
  }
  read(doc, "shuffle_labels", c.shuffle_labels, "config");
  if (auto it = doc.find("sweep"); it != doc.end()) {
    check_keys(*it, "sweep", {"kernel_grid"});
    if (it->contains("kernel_grid")) {
      std::vector<std::vector<std::size_t>> grid;
      read(*it, "kernel_grid", grid, "sweep");
      c.kernel_grid.clear();
      for (const auto& k : grid) {
        if (k.size() != 3) throw ParseError("sweep.kernel_grid: each entry needs 3 kernel sizes");
        c.kernel_grid.push_back({k[0], k[1], k[2]});
      }
    }
  }
  read(doc, "spectrogram_dump", c.spectrogram_dump, "config");
  c.validate();
  return c;
}

RunConfig parse_run_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return run_config_from_json(doc);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void apply_override(RunConfig& cfg, std::string_view key, std::string_view value) {
  if (key.empty()) throw ValidationError("override: empty key");
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = std::string(value);
  }
  json doc = to_json(cfg);
  if (key == "architecture" || key == "architecture.name") {
    // A new name replaces the whole architecture section.
    doc["architecture"] = json{{"name", v}};
  } else {
    std::string ptr = "/" + std::string(key);
    for (char& c : ptr) c = c == '.' ? '/' : c;
    const json::json_pointer jp(ptr);
    if (!doc.contains(jp.parent_pointer())) throw ValidationError("override: unknown key '" + std::string(key) + "'");
    doc[jp] = v;
  }
  cfg = run_config_from_json(doc);
}

}  // namespace ppgbench
