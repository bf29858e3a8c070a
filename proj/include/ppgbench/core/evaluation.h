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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppgbench/core/architectures.h"
#include "ppgbench/core/features.h"
#include "ppgbench/core/training.h"
#include "ppgbench/core/windowing.h"

namespace ppgbench {

// Mann-Whitney statistic: (wins + ties/2) / (n_pos * n_neg) over all
// positive-negative pairs. Labels are 0/1.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Per-class F1 weighted by class support in `labels`.
double f1_weighted(std::span<const int> predictions, std::span<const int> labels);

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;  // sample std (n - 1) / sqrt(n); 0 when n < 2
  std::size_t n = 0;
};

MeanSem mean_sem(std::span<const double> values);

struct SplitSpec {
  double train_frac = 0.64;
  double val_frac = 0.16;
  double test_frac = 0.20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then contiguous cuts of floor(frac * n); the remainder
// goes to test.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

// split_indices applied to each label class separately, then merged; every
// class with at least 3 members appears in train, val and test.
SplitIndices stratified_split_indices(std::span<const int> labels, const SplitSpec& spec);

struct WindowSplit {
  std::vector<WindowSample> train;
  std::vector<WindowSample> val;
  std::vector<WindowSample> test;
};

WindowSplit split_windows(std::span<const WindowSample> windows, const SplitSpec& spec);

struct GenderFoldSpec {
  int n_folds = 20;
  int reps_per_fold = 25;
  int cnn2d_n_folds = 10;
  int cnn2d_reps_per_fold = 10;

  void validate() const;
};

struct SubjectInfo {
  std::string subject_id;
  Gender gender = Gender::kUnknown;
};

// run_task draws its folds with derive_seed(seed, kGenderFoldSeedStage).
inline constexpr std::uint64_t kGenderFoldSeedStage = 0xF01D;

// Two male and two female subjects held out for testing.
struct GenderFold {
  std::array<std::string, 2> male;
  std::array<std::string, 2> female;

  bool holds_out(std::string_view subject) const;
};

std::uint64_t gender_fold_combinations(std::uint64_t n_male, std::uint64_t n_female);

// n_folds distinct (2M, 2F) combinations drawn without replacement.
std::vector<GenderFold> gender_folds(std::span<const SubjectInfo> subjects, int n_folds,
                                     std::uint64_t seed);

std::vector<SubjectInfo> subjects_of(std::span<const WindowSample> windows);

enum class Task { kSpeech, kGender, kVerification };

std::string_view to_string(Task t);
Task parse_task(std::string_view s);

struct ExperimentConfig {
  Task task = Task::kSpeech;
  ArchitectureSpec arch;
  WindowConfig window;
  StftConfig stft;
  TrainConfig train;
  SplitSpec split;
  GenderFoldSpec gender;
  int reps = 100;
  int cnn2d_verification_reps = 22;
  int verification_targets = 0;  // 0 = every subject is enrolled
  bool shuffle_labels = false;   // label-permutation control
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct Metrics {
  double auc = 0.0;
  double f1 = 0.0;
};

struct RepResult {
  int rep = 0;
  int fold = -1;  // gender task only
  double auc = 0.0;
  double f1 = 0.0;
};

struct ExperimentReport {
  Task task = Task::kSpeech;
  std::string architecture;
  double window_s = 1.0;
  std::vector<RepResult> reps;
  MeanSem auc;  // over all runs
  MeanSem f1;
  // Gender only: statistics over the per-fold means.
  std::optional<MeanSem> auc_by_fold;
  std::optional<MeanSem> f1_by_fold;

  void aggregate();
};

// Number of (fold, repetition) runs the config implies, after the CNN-2D
// overrides.
struct RunPlan {
  int folds = 0;  // 0 for tasks without folds
  int reps_per_fold = 0;
  int total() const { return folds > 0 ? folds * reps_per_fold : reps_per_fold; }
};

RunPlan plan_runs(const ExperimentConfig& cfg);

// Model inputs for every window, computed once and shared read-only by the
// repetition jobs. parts[w] holds one entry per sub-window when fusion is on.
struct PreparedInputs {
  std::vector<std::vector<std::vector<double>>> parts;
  std::size_t input_len = 0;
  double sample_rate_hz = kNominalSampleRateHz;
};

PreparedInputs prepare_inputs(std::span<const WindowSample> windows, const ExperimentConfig& cfg);

// Trains on train/val indices and scores the test indices.
Metrics run_binary_experiment(const PreparedInputs& inputs, std::span<const int> labels,
                              const SplitIndices& split, const ExperimentConfig& cfg,
                              std::uint64_t seed);

// Held-out subjects form the test set; the remaining windows are shuffled
// into train/val in the train:val proportion of `split`. Throws if a held-out
// subject leaks into train or val.
SplitIndices gender_fold_split(std::span<const WindowSample> windows, const GenderFold& fold,
                               const SplitSpec& split, std::uint64_t seed);

// One-vs-rest for one enrolled subject.
Metrics verification_harness(std::span<const WindowSample> windows, const PreparedInputs& inputs,
                             std::string_view target_subject, const ExperimentConfig& cfg,
                             std::uint64_t seed);

ExperimentReport run_task(std::span<const WindowSample> windows, const ExperimentConfig& cfg);

}  // namespace ppgbench
