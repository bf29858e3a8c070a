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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppgbench/core/config.h"

namespace ppgbench {

struct SynthSummary {
  std::size_t subjects = 0;
  std::size_t sessions = 0;
  std::vector<std::filesystem::path> files;
};

struct SliceSummary {
  std::size_t records = 0;
  SliceCounts counts;
  double speech_share = 0.0;  // speech / (speech + non-speech)
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;
};

struct RunOutputs {
  ExperimentReport report;
  std::vector<std::filesystem::path> files;
};

struct SweepRow {
  std::array<std::size_t, 3> kernel_sizes{};
  std::string architecture;
  std::optional<MeanSem> auc;
  std::optional<MeanSem> f1;
  std::string error;  // empty on success
};

struct SweepOutputs {
  std::vector<SweepRow> rows;  // ranked: best mean AUC first, failed cells last
  std::vector<std::filesystem::path> files;
};

struct GradcheckRow {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t skipped_kinks = 0;
  bool pass = false;
};

struct ReportOutputs {
  std::vector<ExperimentReport> reports;
  std::vector<std::filesystem::path> files;
};

inline constexpr double kGradcheckTolerance = 1e-4;
// At least this share of probed coordinates must be kink-free.
inline constexpr double kGradcheckMinChecked = 0.8;
// Sampled coordinates for graphs too large for an exhaustive check.
inline constexpr std::size_t kGradcheckLargeGraphCoordinates = 64;

SynthSummary cmd_synth(const RunConfig& cfg);
SliceSummary cmd_slice(const RunConfig& cfg);
RunOutputs cmd_run(const RunConfig& cfg);
SweepOutputs cmd_sweep(const RunConfig& cfg);
std::vector<GradcheckRow> cmd_gradcheck(const RunConfig& cfg);
ReportOutputs cmd_report(const RunConfig& cfg);

std::vector<WindowSample> load_windows(const RunConfig& cfg);

nlohmann::json to_json(const SynthSummary& s);
nlohmann::json to_json(const SliceSummary& s);
nlohmann::json to_json(const RunOutputs& s);
nlohmann::json to_json(const SweepOutputs& s);
nlohmann::json to_json(const std::vector<GradcheckRow>& rows);
nlohmann::json to_json(const ReportOutputs& s);

}  // namespace ppgbench
