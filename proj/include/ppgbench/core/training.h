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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ppgbench/core/architectures.h"
#include "ppgbench/core/windowing.h"

namespace ppgbench {

struct SgdrSchedule {
  double eta_max = 0.01;
  double eta_min = 1e-5;
  int t0_epochs = 10;
  double t_mult = 2.0;

  void validate() const;
};

// eta_min + (eta_max - eta_min) * (1 + cos(pi * t_cur / t_i)) / 2
double sgdr_lr(double t_cur, double t_i, double eta_min, double eta_max);

struct CyclePosition {
  int cycle = 0;
  double t_cur = 0.0;
  double t_i = 0.0;
};

// Cycle k spans t0 * t_mult^k epochs.
CyclePosition cycle_of(int epoch, const SgdrSchedule& schedule);
double lr_for_epoch(int epoch, const SgdrSchedule& schedule);

struct TrainConfig {
  std::size_t batch_size = 32;
  int max_epochs = 70;
  SgdrSchedule schedule;
  int patience_cycles = 2;
  bool class_weighting = false;  // inverse-frequency sample weights
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double val_auc = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int selected_epoch = -1;

  void write_csv(const std::filesystem::path& path) const;
};

// One model input with its class index.
struct LabeledInput {
  std::vector<double> x;
  int label = 0;
};

// One scored unit: a window, or the sub-windows of one window whose
// log-probabilities are fused.
struct EvalItem {
  std::vector<std::vector<double>> parts;
  int label = 0;
};

struct TrainResult {
  std::vector<double> best_parameters;
  TrainHistory history;
  double best_val_auc = 0.0;
};

// SGD over seeded-shuffled mini-batches with the SGDR learning rate, keeping
// the parameters with the best validation AUC. Starts from the model's
// current parameters and leaves the best ones loaded on return.
TrainResult train(Graph& graph, std::span<const LabeledInput> train_set,
                  std::span<const EvalItem> val_set, const TrainConfig& cfg);

// Positive-class scores; fused when an item has several parts.
std::vector<FusedScore> score_items(Graph& graph, std::span<const EvalItem> items);

// Scores raw windows with `parameters`; with fusion on, each window's
// sub-windows are fused, otherwise the whole window is scored.
std::vector<FusedScore> predict(Model& model, std::span<const double> parameters,
                                std::span<const WindowSample> windows, bool fusion);

double mean_loss(Graph& graph, std::span<const LabeledInput> set);

}  // namespace ppgbench
