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

#include "ppgbench/core/training.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "ppgbench/core/error.h"
#include "ppgbench/core/evaluation.h"
#include "ppgbench/core/rng.h"

namespace ppgbench {

void SgdrSchedule::validate() const {
  if (!(eta_min <= eta_max)) throw ValidationError("sgdr: eta_min must not exceed eta_max");
  if (!(eta_min >= 0.0)) throw ValidationError("sgdr: eta_min must be >= 0");
  if (t0_epochs < 1) throw ValidationError("sgdr: t0_epochs must be >= 1");
  if (!(t_mult >= 1.0)) throw ValidationError("sgdr: t_mult must be >= 1");
}

double sgdr_lr(double t_cur, double t_i, double eta_min, double eta_max) {
  if (!(t_i > 0.0) || !(t_cur >= 0.0) || !(t_cur <= t_i)) {
    throw ValidationError("sgdr_lr: need 0 <= T_cur <= T_i with T_i > 0");
  }
  return eta_min + 0.5 * (eta_max - eta_min) * (1.0 + std::cos(std::numbers::pi * t_cur / t_i));
}

CyclePosition cycle_of(int epoch, const SgdrSchedule& schedule) {
  schedule.validate();
  if (epoch < 0) throw ValidationError("cycle_of: negative epoch");
  CyclePosition pos;
  double start = 0.0;
  double len = schedule.t0_epochs;
  while (static_cast<double>(epoch) >= start + len) {
    start += len;
    len *= schedule.t_mult;
    ++pos.cycle;
  }
  pos.t_cur = static_cast<double>(epoch) - start;
  pos.t_i = len;
  return pos;
}

double lr_for_epoch(int epoch, const SgdrSchedule& schedule) {
  const CyclePosition pos = cycle_of(epoch, schedule);
  return sgdr_lr(pos.t_cur, pos.t_i, schedule.eta_min, schedule.eta_max);
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (max_epochs < 1) throw ValidationError("train: max_epochs must be >= 1");
  if (patience_cycles < 1) throw ValidationError("train: patience_cycles must be >= 1");
  schedule.validate();
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "epoch,lr,loss,val_auc\n";
  for (const auto& e : epochs) out << e.epoch << ',' << e.lr << ',' << e.loss << ',' << e.val_auc << '\n';
}

namespace {

void check_two_classes(std::span<const int> labels, const char* what) {
  std::size_t counts[2] = {0, 0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError(std::string(what) + ": labels must be 0 or 1");
    ++counts[y];
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw ValidationError(std::string(what) + " needs both classes (class 0: " +
                          std::to_string(counts[0]) + ", class 1: " + std::to_string(counts[1]) +
                          ")");
  }
}

double item_auc(Graph& graph, std::span<const EvalItem> items) {
  const auto scored = score_items(graph, items);
  std::vector<double> scores(items.size());
  std::vector<int> labels(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    scores[i] = scored[i].score;
    labels[i] = items[i].label;
  }
  return roc_auc(scores, labels);
}

}  // namespace

double mean_loss(Graph& graph, std::span<const LabeledInput> set) {
  if (set.empty()) return 0.0;
  const std::size_t classes = graph.output_shape()[0];
  double total = 0.0;
  for (const auto& s : set) {
    const Tensor& out = graph.forward(s.x);
    total += softmax_cross_entropy(out.values, classes, std::span<const int>(&s.label, 1)).loss;
  }
  return total / static_cast<double>(set.size());
}

TrainResult train(Graph& graph, std::span<const LabeledInput> train_set,
                  std::span<const EvalItem> val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty() || val_set.empty()) {
    throw ValidationError("train: training and validation sets must be non-empty");
  }
  {
    std::vector<int> tl(train_set.size()), vl(val_set.size());
    for (std::size_t i = 0; i < train_set.size(); ++i) tl[i] = train_set[i].label;
    for (std::size_t i = 0; i < val_set.size(); ++i) vl[i] = val_set[i].label;
    check_two_classes(tl, "training set");
    check_two_classes(vl, "validation set");
  }
  const std::size_t classes = graph.output_shape()[0];

  double class_weight[2] = {1.0, 1.0};
  if (cfg.class_weighting) {
    std::size_t counts[2] = {0, 0};
    for (const auto& s : train_set) ++counts[s.label];
    for (int c = 0; c < 2; ++c) {
      class_weight[c] = static_cast<double>(train_set.size()) / (2.0 * static_cast<double>(counts[c]));
    }
  }

  TrainResult result;
  result.best_parameters = graph.flat_parameters();
  result.best_val_auc = -std::numeric_limits<double>::infinity();
  int best_cycle = 0;

  Rng rng = make_rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const CyclePosition pos = cycle_of(epoch, cfg.schedule);
    const double lr = sgdr_lr(pos.t_cur, pos.t_i, cfg.schedule.eta_min, cfg.schedule.eta_max);
    shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      double wsum = 0.0;
      for (std::size_t i = start; i < end; ++i) wsum += class_weight[train_set[order[i]].label];
      graph.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const LabeledInput& s = train_set[order[i]];
        const Tensor& out = graph.forward(s.x);
        LossResult l = softmax_cross_entropy(out.values, classes, std::span<const int>(&s.label, 1));
        const double w = class_weight[s.label] / wsum;
        for (double& g : l.grad) g *= w;
        // Report the unweighted per-sample loss averaged over the epoch.
        epoch_loss += l.loss;
        graph.backward(l.grad);
      }
      sgd_step(graph, lr);
    }

    const double auc = item_auc(graph, val_set);
    result.history.epochs.push_back(
        {epoch, lr, epoch_loss / static_cast<double>(train_set.size()), auc});
    if (auc > result.best_val_auc) {
      result.best_val_auc = auc;
      result.best_parameters = graph.flat_parameters();
      result.history.selected_epoch = epoch;
      best_cycle = pos.cycle;
    }
    const bool cycle_ends = cycle_of(epoch + 1, cfg.schedule).cycle != pos.cycle;
    if (cycle_ends && pos.cycle - best_cycle >= cfg.patience_cycles) break;
  }
  graph.set_flat_parameters(result.best_parameters);
  return result;
}

std::vector<FusedScore> score_items(Graph& graph, std::span<const EvalItem> items) {
  std::vector<FusedScore> out;
  out.reserve(items.size());
  std::vector<std::vector<double>> logits;
  for (const EvalItem& item : items) {
    if (item.parts.empty()) throw ValidationError("score: item without inputs");
    logits.clear();
    for (const auto& part : item.parts) logits.push_back(graph.forward(part).values);
    out.push_back(fuse_subwindow_scores(logits));
  }
  return out;
}

std::vector<FusedScore> predict(Model& model, std::span<const double> parameters,
                                std::span<const WindowSample> windows, bool fusion) {
  model.graph.set_flat_parameters(parameters);
  std::vector<EvalItem> items;
  items.reserve(windows.size());
  for (const WindowSample& w : windows) {
    EvalItem item;
    item.label = static_cast<int>(w.label);
    if (fusion) {
      if (w.sub_windows.empty()) throw ValidationError("predict: fusion requested but window has no sub-windows");
      for (const auto& sub : w.sub_windows) item.parts.push_back(model.prepare_input(sub));
    } else {
      item.parts.push_back(model.prepare_input(w.samples));
    }
    items.push_back(std::move(item));
  }
  return score_items(model.graph, items);
}

}  // namespace ppgbench
