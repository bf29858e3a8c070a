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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ppgbench/core/evaluation.h"
#include "ppgbench/core/signal_data.h"

namespace ppgbench {

// Stage indices for derive_seed(master, stage).
inline constexpr std::uint64_t kSynthSeedStage = 1;
inline constexpr std::uint64_t kRunSeedStage = 2;
inline constexpr std::uint64_t kSweepSeedStage = 3;
inline constexpr std::uint64_t kGradcheckSeedStage = 4;

struct RunConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> windows_path;  // default <output_dir>/windows.jsonl
  std::uint64_t seed = 0;
  int workers = 1;

  Task task = Task::kSpeech;
  ArchitectureSpec arch = architecture_by_name("pulsenet_var1");
  CohortConfig synth = default_synth();
  WindowConfig window;
  StftConfig stft;
  TrainConfig train;
  SplitSpec split;
  GenderFoldSpec gender;
  int reps = 100;
  int verification_targets = 0;
  int cnn2d_verification_reps = 22;
  bool shuffle_labels = false;
  std::vector<std::array<std::size_t, 3>> kernel_grid{{50, 30, 20}, {50, 10, 4}, {15, 8, 2}};
  int spectrogram_dump = 0;  // slice writes this many spectrogram CSVs

  std::filesystem::path windows_file() const;
  ExperimentConfig experiment() const;
  void validate() const;

  static CohortConfig default_synth();
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

// Sets one value by dotted path ("train.max_epochs", "architecture.name").
// `value` is JSON; a bare word that is not valid JSON is taken as a string.
void apply_override(RunConfig& cfg, std::string_view key, std::string_view value);

}  // namespace ppgbench
