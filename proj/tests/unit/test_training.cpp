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

#include <cmath>

#include "doctest.h"
#include "ppgbench/core/error.h"
#include "ppgbench/core/evaluation.h"
#include "ppgbench/core/rng.h"
#include "ppgbench/core/training.h"
#include "test_util.h"

using namespace ppgbench;

namespace {

Graph toy_model() {
  Graph g;
  const NodeId x = g.input({2});
  const NodeId w = g.param({2, 2}, 2, "w");
  const NodeId b = g.param({2}, 2, "b");
  g.set_output(g.dense(x, w, b));
  return g;
}

// Two Gaussian blobs, optionally overlapping.
std::vector<LabeledInput> blobs(std::size_t n, double sep, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::vector<LabeledInput> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    const double c = y ? sep : -sep;
    out.push_back({{c + standard_normal(rng), c + standard_normal(rng)}, y});
  }
  return out;
}

std::vector<EvalItem> as_items(const std::vector<LabeledInput>& xs) {
  std::vector<EvalItem> out;
  for (const auto& x : xs) out.push_back({{x.x}, x.label});
  return out;
}

}  // namespace

TEST_CASE("sgdr_lr") {
  CHECK(sgdr_lr(0, 10, 1e-5, 0.01) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(sgdr_lr(10, 10, 1e-5, 0.01) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(sgdr_lr(5, 10, 0.0, 0.1) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK_THROWS_AS((void)sgdr_lr(-1, 10, 0, 0.1), ValidationError);
  CHECK_THROWS_AS((void)sgdr_lr(11, 10, 0, 0.1), ValidationError);
}

TEST_CASE("cycle_of") {
  const SgdrSchedule s;
  auto c = cycle_of(0, s);
  CHECK(c.cycle == 0);
  CHECK(c.t_cur == 0);
  CHECK(c.t_i == 10);
  c = cycle_of(10, s);
  CHECK(c.cycle == 1);
  CHECK(c.t_cur == 0);
  CHECK(c.t_i == 20);
  c = cycle_of(29, s);
  CHECK(c.cycle == 1);
  CHECK(c.t_cur == 19);
  CHECK(c.t_i == 20);
  c = cycle_of(30, s);
  CHECK(c.cycle == 2);
  CHECK(c.t_i == 40);
  SgdrSchedule flat = s;
  flat.t_mult = 1.0;
  flat.t0_epochs = 3;
  CHECK(cycle_of(7, flat).cycle == 2);
  CHECK(cycle_of(7, flat).t_cur == 1);
  SgdrSchedule bad = s;
  bad.eta_min = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("train: toy descent, determinism, recorded schedule") {
  const auto tr = blobs(200, 1.5, 1);
  const auto va = as_items(blobs(100, 1.5, 2));
  TrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.batch_size = 16;
  cfg.schedule.eta_max = 0.1;
  cfg.seed = 4;
  Graph g = toy_model();
  g.init_parameters(3);
  const double initial = mean_loss(g, tr);
  const auto r = train(g, tr, va, cfg);
  REQUIRE(r.history.epochs.size() == 10);
  CHECK(mean_loss(g, tr) < initial);
  CHECK(r.best_val_auc > 0.9);
  for (const auto& e : r.history.epochs) CHECK(e.lr == lr_for_epoch(e.epoch, cfg.schedule));
  // Returned parameters are the best ones and are left in the graph.
  CHECK(g.flat_parameters() == r.best_parameters);
  for (const auto& e : r.history.epochs) CHECK(r.best_val_auc >= e.val_auc);
  CHECK(r.history.epochs[static_cast<std::size_t>(r.history.selected_epoch)].val_auc == r.best_val_auc);

  Graph g2 = toy_model();
  g2.init_parameters(3);
  const auto r2 = train(g2, tr, va, cfg);
  REQUIRE(r2.history.epochs.size() == r.history.epochs.size());
  for (std::size_t i = 0; i < r.history.epochs.size(); ++i) {
    CHECK(r2.history.epochs[i].loss == r.history.epochs[i].loss);
    CHECK(r2.history.epochs[i].val_auc == r.history.epochs[i].val_auc);
  }
  CHECK(r2.best_parameters == r.best_parameters);
}

TEST_CASE("train: early stop after patience cycles without improvement") {
  // A trivially separable set saturates AUC at 1 in the first cycle.
  const auto tr = blobs(64, 6.0, 5);
  const auto va = as_items(blobs(40, 6.0, 6));
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.schedule.t0_epochs = 2;
  cfg.schedule.t_mult = 1.0;
  cfg.patience_cycles = 2;
  Graph g = toy_model();
  g.init_parameters(1);
  const auto r = train(g, tr, va, cfg);
  CHECK(r.history.epochs.size() < 200u);
  CHECK(r.history.epochs.size() % 2 == 0);  // stops only at a cycle end
}

TEST_CASE("train: error paths") {
  auto tr = blobs(20, 1, 1);
  for (auto& x : tr) x.label = 0;
  const auto va = as_items(blobs(20, 1, 2));
  Graph g = toy_model();
  g.init_parameters(1);
  try {
    (void)train(g, tr, va, TrainConfig{});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("20") != std::string::npos);
  }
  CHECK_THROWS_AS((void)train(g, blobs(20, 1, 1), {}, TrainConfig{}), ValidationError);
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("train: label swap mirrors scores") {
  const auto tr = blobs(120, 0.7, 11);
  const auto va = as_items(blobs(60, 0.7, 12));
  auto tr_sw = tr;
  for (auto& x : tr_sw) x.label = 1 - x.label;
  auto va_sw = va;
  for (auto& x : va_sw) x.label = 1 - x.label;
  TrainConfig cfg;
  cfg.max_epochs = 6;
  cfg.seed = 8;
  Graph a = toy_model(), b = toy_model();
  a.init_parameters(2);
  // b starts as a with its output rows exchanged, i.e. the mirrored model.
  auto p = a.flat_parameters();
  std::vector<double> q = {p[2], p[3], p[0], p[1], p[5], p[4]};
  b.set_flat_parameters(q);
  (void)train(a, tr, va, cfg);
  (void)train(b, tr_sw, va_sw, cfg);
  const auto sa = score_items(a, va);
  const auto sb = score_items(b, va);
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i].score == doctest::Approx(1.0 - sb[i].score).epsilon(1e-9));
}

TEST_CASE("small SGD step decreases loss on a frozen batch") {
  auto rng = make_rng(40);
  int decreased = 0;
  for (int t = 0; t < 20; ++t) {
    ArchitectureSpec s = architecture_by_name("pulsenet_var2");
    s.branch_channels = 4;
    s.hidden_units = 8;
    Graph g = build_pulsenet(s, 80);
    g.init_parameters(100 + t);
    std::vector<LabeledInput> batch;
    for (int i = 0; i < 8; ++i) {
      std::vector<double> x(80);
      for (double& v : x) v = standard_normal(rng);
      batch.push_back({x, i % 2});
    }
    const double before = mean_loss(g, batch);
    g.zero_grad();
    for (const auto& item : batch) {
      const auto& out = g.forward(item.x);
      const int y[] = {item.label};
      auto l = softmax_cross_entropy(out.values, 2, y);
      for (double& v : l.grad) v /= 8.0;
      g.backward(l.grad);
    }
    sgd_step(g, 1e-4);
    decreased += mean_loss(g, batch) < before ? 1 : 0;
  }
  CHECK(decreased == 20);
}

TEST_CASE("predict: fusion identity and length") {
  Model m = build_model(architecture_by_name("pulsenet_var2"), 80, 200.0);
  m.graph.init_parameters(5);
  const auto params = m.graph.flat_parameters();
  auto rng = make_rng(6);
  std::vector<WindowSample> ws(4);
  for (auto& w : ws) {
    w.samples.resize(80);
    for (double& v : w.samples) v = standard_normal(rng);
    w.sub_windows = {w.samples};
  }
  const auto plain = predict(m, params, ws, false);
  const auto fused = predict(m, params, ws, true);
  REQUIRE(plain.size() == 4);
  REQUIRE(fused.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto p = softmax(m.logits(ws[i].samples));
    CHECK(plain[i].score == doctest::Approx(p[1]).epsilon(1e-12));
    CHECK(fused[i].score == doctest::Approx(plain[i].score).epsilon(1e-12));
    CHECK(plain[i].score > 0.0);
    CHECK(plain[i].score < 1.0);
  }
}

TEST_CASE("history CSV") {
  TempDir dir;
  TrainHistory h;
  h.epochs = {{0, 0.01, 0.7, 0.5}, {1, 0.005, 0.6, 0.75}};
  h.write_csv(dir.path / "h.csv");
  const auto text = read_text(dir.path / "h.csv");
  CHECK(text.rfind("epoch,lr,loss,val_auc\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
