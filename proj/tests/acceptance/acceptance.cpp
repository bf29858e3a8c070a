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


// Acceptance suite. Prints one PASS/FAIL line per criterion; exits non-zero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "ppgbench/core/evaluation.h"
#include "ppgbench/core/pipeline.h"
#include "ppgbench/core/report.h"
#include "ppgbench/core/rng.h"
#include "ppgbench/core/training.h"
#include "ppgbench/core/windowing.h"

using namespace ppgbench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed checks; the first few are reported.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) first_ += (first_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string failures() const {
    return first_ + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "");
  }

 private:
  int failures_ = 0;
  std::string first_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int hardware_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Scratch {
  fs::path path;
  explicit Scratch(const std::string& tag) {
    path = fs::temp_directory_path() / ("ppgbench_acceptance_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

RunConfig config_in(const fs::path& root) {
  RunConfig c;
  c.data_dir = root / "data";
  c.output_dir = root / "out";
  return c;
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness.

Outcome criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = cmd_gradcheck(RunConfig{});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Checker c;
  double worst = 0.0;
  const std::set<std::string> required{"conv1d", "conv2d", "maxpool1d", "maxpool2d", "dense", "relu",
                                       "softmax_cross_entropy", "pulsenet", "pulsenet_var1",
                                       "pulsenet_var2", "vgg16_inv", "cnn2d"};
  std::set<std::string> seen;
  for (const auto& r : rows) {
    seen.insert(r.name);
    worst = std::max(worst, r.max_rel_error);
    c.expect(r.pass && r.max_rel_error < kGradcheckTolerance,
             r.name + " max_rel_error " + fmt("%.3g", r.max_rel_error));
  }
  for (const auto& name : required) c.expect(seen.count(name) > 0, "missing row " + name);
  c.expect(secs < 120.0, "runtime " + fmt("%.1f", secs) + " s");
  return {c.ok(), std::to_string(rows.size()) + " checks, max rel error " + fmt("%.2e", worst) + ", " +
                      fmt("%.1f", secs) + " s" + (c.ok() ? "" : ": " + c.failures())};
}

// ---------------------------------------------------------------------------
// 2. Metric oracles.

double pair_count_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

double confusion_f1(const std::vector<int>& p, const std::vector<int>& y) {
  double tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0}, support[2] = {0, 0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    support[y[i]] += 1;
    if (p[i] == y[i]) {
      tp[y[i]] += 1;
    } else {
      fp[p[i]] += 1;
      fn[y[i]] += 1;
    }
  }
  double f1 = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double denom = 2 * tp[k] + fp[k] + fn[k];
    f1 += support[k] * (denom > 0 ? 2 * tp[k] / denom : 0.0);
  }
  return f1 / static_cast<double>(y.size());
}

std::pair<double, double> two_pass_sem(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() < 2 ? 0.0 : std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

Outcome criterion_metrics() {
  auto rng = make_rng(20260101);
  Checker c;
  double f1_err = 0.0, sem_err = 0.0;
  int auc_cases = 0;
  while (auc_cases < 10000) {
    const std::size_t n = 2 + uniform_index(rng, 11);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const bool ties = uniform_index(rng, 2) == 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = ties ? static_cast<double>(uniform_index(rng, 4)) : uniform(rng, -1.0, 1.0);
      y[i] = static_cast<int>(uniform_index(rng, 2));
    }
    const auto pos = std::count(y.begin(), y.end(), 1);
    if (pos == 0 || pos == static_cast<long>(n)) continue;
    ++auc_cases;
    const double got = roc_auc(s, y);
    const double want = pair_count_auc(s, y);
    c.expect(got == want, "AUC " + fmt("%.17g", got) + " vs " + fmt("%.17g", want));
  }
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 40);
    std::vector<int> p(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(uniform_index(rng, 2));
      y[i] = static_cast<int>(uniform_index(rng, 2));
    }
    f1_err = std::max(f1_err, std::abs(f1_weighted(p, y) - confusion_f1(p, y)));

    std::vector<double> v(1 + uniform_index(rng, 100));
    const double offset = uniform(rng, -1e3, 1e3);
    for (double& x : v) x = offset + standard_normal(rng);
    const auto [mean, sem] = two_pass_sem(v);
    const MeanSem m = mean_sem(v);
    sem_err = std::max(sem_err, std::abs(m.sem - sem));
    c.expect(std::abs(m.mean - mean) <= 1e-12 * std::max(1.0, std::abs(mean)), "mean mismatch");
  }
  c.expect(f1_err <= 1e-12, "F1 error " + fmt("%.3g", f1_err));
  c.expect(sem_err <= 1e-12, "SEM error " + fmt("%.3g", sem_err));
  return {c.ok(), "10000 AUC cases exact, F1 max error " + fmt("%.1e", f1_err) + ", SEM max error " +
                      fmt("%.1e", sem_err) + (c.ok() ? "" : ": " + c.failures())};
}

// ---------------------------------------------------------------------------
// 3. Windowing arithmetic.

AlignmentTrack track_of(std::vector<Segment> segs, double duration) {
  AlignmentTrack t;
  t.segments = std::move(segs);
  t.record_duration_s = duration;
  return t;
}

PpgRecord flat_record(double duration_s, double rate = 200.0) {
  PpgRecord r;
  r.subject_id = "s001";
  r.session_id = "silence";
  r.sample_rate_hz = rate;
  r.gender = Gender::kMale;
  r.samples.assign(static_cast<std::size_t>(std::llround(duration_s * rate)), 0.0);
  return r;
}

Outcome criterion_windowing() {
  Checker c;
  WindowConfig wc;
  wc.window_s = 1.0;
  wc.sub_window_s = 0.4;
  wc.sub_overlap_frac = 0.7;
  const auto layout = sub_window_layout(200, 200.0, wc);
  c.expect(layout.count == 6, "sub-window count " + std::to_string(layout.count));
  WindowSample w;
  w.samples.resize(200);
  std::iota(w.samples.begin(), w.samples.end(), 0.0);
  const auto sub = subdivide(w, wc).sub_windows;
  std::vector<std::size_t> offsets;
  for (const auto& s : sub) offsets.push_back(static_cast<std::size_t>(s.front()));
  c.expect(offsets == std::vector<std::size_t>{0, 24, 48, 72, 96, 120}, "sub-window offsets differ");
  for (const auto& s : sub) c.expect(s.size() == 80, "sub-window length");

  const auto rec = flat_record(1.0);
  const auto r97 = slice_windows(rec, track_of({{0.03, 1.0, {}}}, 1.0), WindowConfig{});
  const auto r99 = slice_windows(rec, track_of({{0.01, 1.0, {}}}, 1.0), WindowConfig{});
  c.expect(r97.counts.discarded == 1 && r97.windows.empty(), "0.97 speech window not discarded");
  c.expect(r99.counts.speech == 1 && r99.windows.size() == 1, "0.99 speech window not kept");

  auto rng = make_rng(31337);
  for (int trial = 0; trial < 10000; ++trial) {
    const double dur = 2.0 + static_cast<double>(uniform_index(rng, 30));
    const auto r = flat_record(dur, 20.0);
    std::vector<Segment> segs;
    double cursor = uniform(rng, 0, 2);
    while (cursor + 0.2 < dur) {
      const double end = std::min(dur, cursor + uniform(rng, 0.1, 4));
      segs.push_back({cursor, end, {}});
      cursor = end + uniform(rng, 0.05, 3);
    }
    WindowConfig cfg;
    cfg.window_s = 0.5 + 0.5 * static_cast<double>(uniform_index(rng, 4));
    cfg.stride_s = cfg.window_s * (uniform_index(rng, 2) ? 1.0 : 0.5);
    cfg.silence_discard_frac = uniform(rng, 0.0, 0.1);
    const auto k = slice_windows(r, track_of(segs, dur), cfg).counts;
    c.expect(k.speech + k.non_speech + k.discarded == k.candidates,
             "partition mismatch at trial " + std::to_string(trial));
  }
  return {c.ok(), "6 sub-windows at {0,24,48,72,96,120}; 0.97 discarded, 0.99 kept; 10000 partitions sum" +
                      (c.ok() ? std::string() : ": " + c.failures())};
}

// ---------------------------------------------------------------------------
// 4. SGDR schedule.

double closed_form_lr(double t_cur, double t_i, double eta_min, double eta_max) {
  return eta_min + 0.5 * (eta_max - eta_min) * (1.0 + std::cos(std::numbers::pi * t_cur / t_i));
}

Outcome criterion_sgdr() {
  Checker c;
  TrainConfig cfg;
  cfg.max_epochs = 70;
  cfg.batch_size = 8;
  cfg.patience_cycles = 100;
  cfg.schedule.t0_epochs = 10;
  cfg.schedule.t_mult = 2.0;
  cfg.schedule.eta_max = 0.05;
  cfg.schedule.eta_min = 1e-4;
  cfg.seed = 1;

  Graph g;
  const NodeId x = g.input({2});
  const NodeId w = g.param({2, 2}, 2, "w");
  const NodeId b = g.param({2}, 2, "b");
  g.set_output(g.dense(x, w, b));
  g.init_parameters(2);
  auto rng = make_rng(9);
  std::vector<LabeledInput> train_set;
  std::vector<EvalItem> val_set;
  for (int i = 0; i < 64; ++i) {
    const int y = i % 2;
    const double m = y ? 1.0 : -1.0;
    LabeledInput li{{m + standard_normal(rng), m + standard_normal(rng)}, y};
    train_set.push_back(li);
    if (i < 32) val_set.push_back({{li.x}, y});
  }
  const auto result = train(g, train_set, val_set, cfg);
  const auto& epochs = result.history.epochs;
  c.expect(epochs.size() == 70, "trained " + std::to_string(epochs.size()) + " epochs");

  // Independent cycle bookkeeping: cycle k has length t0 * t_mult^k.
  std::vector<int> starts{0};
  std::vector<double> lengths{static_cast<double>(cfg.schedule.t0_epochs)};
  while (starts.back() + lengths.back() < 70) {
    starts.push_back(starts.back() + static_cast<int>(lengths.back()));
    lengths.push_back(lengths.back() * cfg.schedule.t_mult);
  }
  c.expect(starts == std::vector<int>{0, 10, 30, 70} || starts == std::vector<int>{0, 10, 30},
           "cycle starts");
  for (const auto& e : epochs) {
    std::size_t k = 0;
    while (k + 1 < starts.size() && e.epoch >= starts[k + 1]) ++k;
    const double t_cur = e.epoch - starts[k];
    const double want = closed_form_lr(t_cur, lengths[k], cfg.schedule.eta_min, cfg.schedule.eta_max);
    c.expect(e.lr == want, "epoch " + std::to_string(e.epoch) + " lr " + fmt("%.17g", e.lr));
    const auto pos = cycle_of(e.epoch, cfg.schedule);
    c.expect(pos.cycle == static_cast<int>(k) && pos.t_i == lengths[k], "cycle_of mismatch");
    if (t_cur == 0) c.expect(e.lr == cfg.schedule.eta_max, "lr at cycle start is not eta_max");
  }
  for (double t_i : {10.0, 20.0, 40.0}) {
    c.expect(sgdr_lr(0.0, t_i, cfg.schedule.eta_min, cfg.schedule.eta_max) == cfg.schedule.eta_max,
             "start endpoint");
    c.expect(sgdr_lr(t_i, t_i, cfg.schedule.eta_min, cfg.schedule.eta_max) == cfg.schedule.eta_min,
             "end endpoint");
  }
  return {c.ok(), "70 recorded rates exact; cycle lengths 10, 20, 40" +
                      (c.ok() ? std::string() : ": " + c.failures())};
}

// ---------------------------------------------------------------------------
// 5. Planted-signal learnability.

Outcome criterion_learnability() {
  const auto t0 = std::chrono::steady_clock::now();
  Scratch dir("planted");
  RunConfig cfg = config_in(dir.path);
  cfg.seed = 1;
  cfg.workers = hardware_workers();
  cfg.synth.speech_coupling = 0.1;
  cfg.arch = architecture_by_name("pulsenet_var1");
  cfg.task = Task::kSpeech;
  cfg.reps = 10;
  cfg.train.max_epochs = 10;
  cfg.train.schedule.t0_epochs = 10;
  cfg.train.schedule.t_mult = 1.0;
  const auto synth = cmd_synth(cfg);
  cmd_slice(cfg);
  const auto real = cmd_run(cfg);

  RunConfig control = cfg;
  control.shuffle_labels = true;
  control.output_dir = dir.path / "control";
  control.windows_path = cfg.windows_file();
  const auto shuffled = cmd_run(control);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Checker c;
  c.expect(synth.subjects == 31, "cohort size");
  c.expect(real.report.reps.size() == 10, "repetitions");
  c.expect(real.report.auc.mean >= 0.9, "planted AUC " + fmt("%.4f", real.report.auc.mean));
  c.expect(std::abs(shuffled.report.auc.mean - 0.5) <= 0.05,
           "shuffled AUC " + fmt("%.4f", shuffled.report.auc.mean));
  c.expect(secs <= 15 * 60, "runtime");
  return {c.ok(), "planted AUC " + fmt("%.4f", real.report.auc.mean) + " +- " + fmt("%.4f", real.report.auc.sem) +
                      " (>= 0.9), shuffled " + fmt("%.4f", shuffled.report.auc.mean) + " (0.5 +- 0.05), " +
                      fmt("%.0f", secs) + " s" + (c.ok() ? "" : ": " + c.failures())};
}

// ---------------------------------------------------------------------------
// 6. Harness fidelity.

std::vector<double> aucs_of(const ExperimentReport& r) {
  std::vector<double> v;
  for (const auto& x : r.reps) v.push_back(x.auc);
  return v;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

Outcome criterion_harness() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();

  // 100 repetitions per architecture on a small cohort with one training epoch.
  // VGG16-Inv keeps its 16-layer topology with narrow channels.
  Scratch dir("harness");
  RunConfig base = config_in(dir.path);
  base.seed = 6;
  base.workers = hardware_workers();
  base.synth.n_male = 3;
  base.synth.n_female = 2;
  base.synth.sessions = {SessionKind::kSentences};
  base.train.max_epochs = 1;
  base.reps = 100;
  cmd_synth(base);
  cmd_slice(base);
  const std::vector<std::string> archs{"pulsenet", "pulsenet_var1", "pulsenet_var2", "vgg16_inv", "cnn2d"};
  for (const auto& name : archs) {
    RunConfig cfg = base;
    cfg.arch = architecture_by_name(name);
    if (cfg.arch.family == ArchFamily::kVgg16Inv) {
      cfg.arch.channel_sequence = {8, 8, 8, 8, 8};
      cfg.arch.hidden_units = 32;
    }
    const auto out = cmd_run(cfg);
    const std::string stem = report_stem(out.report);
    c.expect(out.report.reps.size() == 100, name + ": " + std::to_string(out.report.reps.size()) + " runs");
    const auto reps = parse_reps_csv(read_file(cfg.output_dir / (stem + "_reps.csv")));
    c.expect(reps.size() == 1 && reps[0].reps.size() == 100, name + ": reps CSV rows");
    const MeanSem m = mean_sem(aucs_of(reps[0]));
    c.expect(m.n == 100 && m.mean == out.report.auc.mean && m.sem == out.report.auc.sem,
             name + ": aggregate mean/SEM");
    const std::string agg = read_file(cfg.output_dir / (stem + "_aggregate.csv"));
    c.expect(count_lines(agg) == 2 && agg.find(format_number(m.mean)) != std::string::npos,
             name + ": aggregate CSV");
    const std::string box = read_file(cfg.output_dir / (stem + "_boxplot.csv"));
    c.expect(count_lines(box) == 2, name + ": boxplot CSV");
    c.expect(fs::exists(cfg.output_dir / (stem + "_boxplot.svg")), name + ": boxplot SVG");
  }
  const auto rep = cmd_report(base);
  c.expect(rep.reports.size() == archs.size(), "report rows");
  c.expect(count_lines(read_file(base.output_dir / "boxplot.csv")) == archs.size() + 1, "combined boxplot");

  // Gender folds on the full cohort: subject-disjoint on all 20 folds.
  Scratch gdir("gender");
  RunConfig g = config_in(gdir.path);
  g.seed = 7;
  g.workers = hardware_workers();
  g.synth.sessions = {SessionKind::kSilence};
  g.synth.session_duration_s = 8.0;
  g.task = Task::kGender;
  g.train.max_epochs = 1;
  g.gender.reps_per_fold = 1;
  cmd_synth(g);
  cmd_slice(g);
  const auto windows = load_windows(g);
  const ExperimentConfig ex = g.experiment();
  const auto folds = gender_folds(subjects_of(windows), 20, derive_seed(ex.seed, kGenderFoldSeedStage));
  c.expect(folds.size() == 20, "fold count");
  std::set<std::vector<std::string>> distinct;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto split = gender_fold_split(windows, folds[f], ex.split, 1000 + f);
    std::set<std::string> test_subjects, fit_subjects;
    for (auto i : split.test) test_subjects.insert(windows[i].subject_id);
    for (auto i : split.train) fit_subjects.insert(windows[i].subject_id);
    for (auto i : split.val) fit_subjects.insert(windows[i].subject_id);
    const std::set<std::string> held{folds[f].male[0], folds[f].male[1], folds[f].female[0], folds[f].female[1]};
    c.expect(test_subjects == held, "fold " + std::to_string(f) + " test subjects");
    for (const auto& s : held) c.expect(fit_subjects.count(s) == 0, "fold " + std::to_string(f) + " leaks " + s);
    c.expect(split.train.size() + split.val.size() + split.test.size() == windows.size(), "fold coverage");
    distinct.insert({held.begin(), held.end()});
  }
  c.expect(distinct.size() == 20, "folds not distinct");
  const auto gender_run = cmd_run(g);
  std::map<int, int> per_fold;
  for (const auto& r : gender_run.report.reps) ++per_fold[r.fold];
  c.expect(per_fold.size() == 20, "gender run folds " + std::to_string(per_fold.size()));

  // CNN-2D overrides.
  RunConfig cnn = g;
  cnn.arch = architecture_by_name("cnn2d");
  cnn.gender.cnn2d_n_folds = 10;
  cnn.gender.cnn2d_reps_per_fold = 10;
  const auto plan = plan_runs(cnn.experiment());
  c.expect(plan.folds == 10 && plan.reps_per_fold == 10, "CNN-2D gender plan");
  const auto cnn_gender = cmd_run(cnn);
  per_fold.clear();
  for (const auto& r : cnn_gender.report.reps) ++per_fold[r.fold];
  c.expect(cnn_gender.report.reps.size() == 100 && per_fold.size() == 10, "CNN-2D gender runs");
  for (const auto& [fold, n] : per_fold) c.expect(n == 10, "CNN-2D fold " + std::to_string(fold) + " reps");
  cnn.task = Task::kVerification;
  cnn.reps = 3;
  cnn.cnn2d_verification_reps = 22;
  cnn.verification_targets = 1;
  const auto cnn_verif = cmd_run(cnn);
  c.expect(cnn_verif.report.reps.size() == 22, "CNN-2D verification runs " +
                                                   std::to_string(cnn_verif.report.reps.size()));
  RunConfig pn = cnn;
  pn.arch = architecture_by_name("pulsenet");
  c.expect(plan_runs(pn.experiment()).total() == 3, "non-CNN-2D verification reps");

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {c.ok(), "5 architectures x 100 runs with aggregate and boxplot files; 20 disjoint gender folds; "
                  "CNN-2D 10x10 gender, 22 verification; " +
                      fmt("%.0f", secs) + " s" + (c.ok() ? "" : ": " + c.failures())};
}

// ---------------------------------------------------------------------------
// 7. Determinism.

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return out;
}

std::map<std::string, std::string> full_pipeline(const fs::path& root, int workers) {
  RunConfig c = config_in(root);
  c.seed = 77;
  c.workers = workers;
  c.synth.n_male = 3;
  c.synth.n_female = 3;
  c.train.max_epochs = 2;
  c.reps = 3;
  cmd_synth(c);
  cmd_slice(c);
  cmd_run(c);
  c.task = Task::kGender;
  c.gender.n_folds = 2;
  c.gender.reps_per_fold = 2;
  cmd_run(c);
  c.task = Task::kVerification;
  c.verification_targets = 2;
  c.reps = 2;
  cmd_run(c);
  c.task = Task::kSpeech;
  c.arch = architecture_by_name("cnn2d");
  cmd_run(c);
  cmd_report(c);
  auto files = snapshot(c.output_dir);
  for (auto& [k, v] : snapshot(c.data_dir)) files["data/" + k] = v;
  return files;
}

Outcome criterion_determinism() {
  Scratch a("det1"), b("det4");
  const auto one = full_pipeline(a.path, 1);
  const auto four = full_pipeline(b.path, 4);
  Checker c;
  std::size_t csv = 0;
  c.expect(one.size() == four.size(), "file sets differ");
  for (const auto& [name, text] : one) {
    if (name.size() >= 4 && name.substr(name.size() - 4) == ".csv") ++csv;
    const auto it = four.find(name);
    c.expect(it != four.end() && it->second == text, name + " differs");
  }
  c.expect(csv >= 10, "only " + std::to_string(csv) + " CSV files");
  return {c.ok(), std::to_string(one.size()) + " files (" + std::to_string(csv) +
                      " CSV) byte-identical at 1 and 4 workers" + (c.ok() ? "" : ": " + c.failures())};
}

// ---------------------------------------------------------------------------
// 8. Verification ordering against the shuffled control.

Outcome criterion_verification() {
  const auto t0 = std::chrono::steady_clock::now();
  Scratch dir("verif");
  RunConfig cfg = config_in(dir.path);
  cfg.seed = 8;
  cfg.workers = hardware_workers();
  cfg.synth.sessions = {SessionKind::kSilence, SessionKind::kPin};
  cfg.arch = architecture_by_name("pulsenet");
  cfg.task = Task::kVerification;
  cfg.verification_targets = 4;
  cfg.reps = 3;
  cfg.train.max_epochs = 6;
  cfg.train.class_weighting = true;
  cmd_synth(cfg);
  cmd_slice(cfg);
  const auto real = cmd_run(cfg);
  RunConfig control = cfg;
  control.shuffle_labels = true;
  control.output_dir = dir.path / "control";
  control.windows_path = cfg.windows_file();
  const auto shuffled = cmd_run(control);
  const double gap = real.report.auc.mean - shuffled.report.auc.mean;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {gap >= 0.2, "verification AUC " + fmt("%.4f", real.report.auc.mean) + " vs shuffled " +
                          fmt("%.4f", shuffled.report.auc.mean) + ", gap " + fmt("%.4f", gap) + " (>= 0.2), " +
                          fmt("%.0f", secs) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", criterion_gradients},
      {"metric oracles", criterion_metrics},
      {"windowing arithmetic", criterion_windowing},
      {"SGDR schedule", criterion_sgdr},
      {"planted-signal learnability", criterion_learnability},
      {"harness fidelity", criterion_harness},
      {"determinism", criterion_determinism},
      {"verification ordering", criterion_verification},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %d [PRIMARY] %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
