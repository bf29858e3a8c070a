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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ppgbench/core/evaluation.h"

namespace ppgbench {

// Tukey box: quartiles by linear interpolation, whiskers at the furthest
// points within 1.5 IQR of the box.
struct BoxStats {
  std::size_t n = 0;
  double min = 0.0;
  double whisker_low = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_high = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> outliers;
};

BoxStats box_stats(std::span<const double> values);

std::string format_number(double v);
std::string csv_field(const std::string& s);
std::vector<std::string> split_csv_line(const std::string& line);

// File stem for one run: <task>_<architecture slug>_w<window>.
std::string report_stem(const ExperimentReport& r);

std::string reps_csv(std::span<const ExperimentReport> reports);
std::vector<ExperimentReport> parse_reps_csv(const std::string& text);

std::string aggregate_csv(std::span<const ExperimentReport> reports);
// Table 1 layout: one row per (architecture, window), AUC and F1 in percent
// per task.
std::string table1_markdown(std::span<const ExperimentReport> reports);
std::string boxplot_csv(std::span<const ExperimentReport> reports);
std::string boxplot_svg(std::span<const ExperimentReport> reports, const std::string& title);

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace ppgbench
