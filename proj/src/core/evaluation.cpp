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

#include "ppgbench/core/evaluation.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ppgbench/core/error.h"
#include "ppgbench/core/parallel.h"
#include "ppgbench/core/rng.h"

namespace ppgbench {

namespace {

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

// Lexicographic index -> (i, j), i < j.
std::pair<std::size_t, std::size_t> decode_pair(std::uint64_t index, std::size_t n) {
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::uint64_t row = n - 1 - i;
    if (index < row) return {i, i + 1 + static_cast<std::size_t>(index)};
    index -= row;
  }
  throw std::logic_error("decode_pair: index out of range");
}

std::size_t floor_frac(double frac, std::size_t n) {
  return static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 1e-9));
}

void permute_labels(std::vector<int>& labels, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  shuffle(labels.begin(), labels.end(), rng);
}

std::string annotate(const std::string& msg, int rep, int fold) {
  std::string where = "repetition " + std::to_string(rep);
  if (fold >= 0) where += " (fold " + std::to_string(fold) + ")";
  return where + ": " + msg;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("roc_auc: length mismatch");
  std::uint64_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++n_pos;
    } else if (labels[i] == 0) {
      ++n_neg;
    } else {
      throw ValidationError("roc_auc: labels must be 0 or 1");
    }
    if (std::isnan(scores[i])) throw ValidationError("roc_auc: NaN score");
  }
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("roc_auc: undefined with a single class (positives: " +
                               std::to_string(n_pos) + ", negatives: " + std::to_string(n_neg) + ")");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Walk groups of equal scores in ascending order.
  std::uint64_t wins = 0, ties = 0, neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    wins += pos * neg_below;
    ties += pos * neg;
    neg_below += neg;
    i = j;
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double f1_weighted(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ValidationError("f1_weighted: length mismatch");
  if (labels.empty()) throw ValidationError("f1_weighted: empty input");
  std::map<int, std::array<std::uint64_t, 3>> stats;  // tp, fp, fn
  std::map<int, std::uint64_t> support;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++support[labels[i]];
    if (predictions[i] == labels[i]) {
      ++stats[labels[i]][0];
    } else {
      ++stats[predictions[i]][1];
      ++stats[labels[i]][2];
    }
  }
  double total = 0.0;
  for (const auto& [cls, n] : support) {
    const auto& s = stats[cls];
    const double denom = 2.0 * static_cast<double>(s[0]) + static_cast<double>(s[1] + s[2]);
    const double f1 = denom > 0.0 ? 2.0 * static_cast<double>(s[0]) / denom : 0.0;
    total += f1 * static_cast<double>(n) / static_cast<double>(labels.size());
  }
  return total;
}

MeanSem mean_sem(std::span<const double> values) {
  if (values.empty()) throw ValidationError("mean_sem: no values");
  // Welford.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  MeanSem r;
  r.n = values.size();
  r.mean = mean;
  if (r.n >= 2) {
    const double var = m2 / static_cast<double>(r.n - 1);
    r.sem = std::sqrt(var) / std::sqrt(static_cast<double>(r.n));
  }
  return r;
}

void SplitSpec::validate() const {
  if (train_frac < 0.0 || val_frac < 0.0 || test_frac < 0.0) {
    throw ValidationError("split: fractions must be non-negative");
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw ValidationError("split: fractions must sum to 1");
  }
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(spec.seed);
  shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = floor_frac(spec.train_frac, n);
  const std::size_t n_val = std::min(n - n_train, floor_frac(spec.val_frac, n));
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

WindowSplit split_windows(std::span<const WindowSample> windows, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(windows.size(), spec);
  WindowSplit out;
  for (std::size_t i : idx.train) out.train.push_back(windows[i]);
  for (std::size_t i : idx.val) out.val.push_back(windows[i]);
  for (std::size_t i : idx.test) out.test.push_back(windows[i]);
  return out;
}

void GenderFoldSpec::validate() const {
  if (n_folds < 1 || reps_per_fold < 1 || cnn2d_n_folds < 1 || cnn2d_reps_per_fold < 1) {
    throw ValidationError("gender folds: fold and repetition counts must be >= 1");
  }
}

bool GenderFold::holds_out(std::string_view subject) const {
  return subject == male[0] || subject == male[1] || subject == female[0] || subject == female[1];
}

std::uint64_t gender_fold_combinations(std::uint64_t n_male, std::uint64_t n_female) {
  return choose2(n_male) * choose2(n_female);
}

std::vector<GenderFold> gender_folds(std::span<const SubjectInfo> subjects, int n_folds,
                                     std::uint64_t seed) {
  if (n_folds < 1) throw ValidationError("gender folds: n_folds must be >= 1");
  std::vector<std::string> males, females;
  for (const auto& s : subjects) {
    if (s.gender == Gender::kMale) males.push_back(s.subject_id);
    if (s.gender == Gender::kFemale) females.push_back(s.subject_id);
  }
  std::sort(males.begin(), males.end());
  std::sort(females.begin(), females.end());
  if (males.size() < 2 || females.size() < 2) {
    throw ValidationError("gender folds: need at least 2 subjects of each gender (male: " +
                          std::to_string(males.size()) + ", female: " +
                          std::to_string(females.size()) + ")");
  }
  const std::uint64_t fpairs = choose2(females.size());
  const std::uint64_t total = gender_fold_combinations(males.size(), females.size());
  if (total < static_cast<std::uint64_t>(n_folds)) {
    throw ValidationError("gender folds: requested " + std::to_string(n_folds) +
                          " folds but only " + std::to_string(total) +
                          " distinct combinations exist");
  }
  // Floyd's sampling of n_folds distinct combination indices, then a seeded
  // shuffle for the fold order.
  Rng rng = make_rng(seed);
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = total - static_cast<std::uint64_t>(n_folds); j < total; ++j) {
    const std::uint64_t t = uniform_index(rng, j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> picks(chosen.begin(), chosen.end());
  shuffle(picks.begin(), picks.end(), rng);

  std::vector<GenderFold> folds;
  for (std::uint64_t p : picks) {
    const auto [m0, m1] = decode_pair(p / fpairs, males.size());
    const auto [f0, f1] = decode_pair(p % fpairs, females.size());
    folds.push_back({{males[m0], males[m1]}, {females[f0], females[f1]}});
  }
  return folds;
}

std::vector<SubjectInfo> subjects_of(std::span<const WindowSample> windows) {
  std::map<std::string, Gender> seen;
  for (const auto& w : windows) {
    auto [it, inserted] = seen.emplace(w.subject_id, w.gender);
    if (!inserted && it->second != w.gender) {
      throw ValidationError("subject " + w.subject_id + " has windows with conflicting genders");
    }
  }
  std::vector<SubjectInfo> out;
  for (const auto& [id, g] : seen) out.push_back({id, g});
  return out;
}

std::string_view to_string(Task t) {
  switch (t) {
    case Task::kSpeech: return "speech";
    case Task::kGender: return "gender";
    case Task::kVerification: return "verification";
  }
  return "speech";
}

Task parse_task(std::string_view s) {
  if (s == "speech") return Task::kSpeech;
  if (s == "gender") return Task::kGender;
  if (s == "verification") return Task::kVerification;
  throw ValidationError("unknown task '" + std::string(s) + "' (valid: speech, gender, verification)");
}

void ExperimentConfig::validate() const {
  arch.validate();
  window.validate();
  if (arch.family == ArchFamily::kCnn2d) stft.validate();
  train.validate();
  split.validate();
  gender.validate();
  if (reps < 1) throw ValidationError("experiment: reps must be >= 1");
  if (cnn2d_verification_reps < 1) {
    throw ValidationError("experiment: cnn2d verification reps must be >= 1");
  }
  if (verification_targets < 0) throw ValidationError("experiment: verification_targets < 0");
  if (workers < 1) throw ValidationError("experiment: workers must be >= 1");
}

void ExperimentReport::aggregate() {
  if (reps.empty()) throw ValidationError("report: no repetitions");
  std::vector<double> a, f;
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_fold;
  for (const auto& r : reps) {
    a.push_back(r.auc);
    f.push_back(r.f1);
    if (r.fold >= 0) {
      by_fold[r.fold].first.push_back(r.auc);
      by_fold[r.fold].second.push_back(r.f1);
    }
  }
  auc = mean_sem(a);
  f1 = mean_sem(f);
  if (!by_fold.empty()) {
    std::vector<double> fa, ff;
    for (const auto& [fold, vals] : by_fold) {
      fa.push_back(mean_sem(vals.first).mean);
      ff.push_back(mean_sem(vals.second).mean);
    }
    auc_by_fold = mean_sem(fa);
    f1_by_fold = mean_sem(ff);
  } else {
    auc_by_fold.reset();
    f1_by_fold.reset();
  }
}

RunPlan plan_runs(const ExperimentConfig& cfg) {
  const bool cnn2d = cfg.arch.family == ArchFamily::kCnn2d;
  RunPlan p;
  switch (cfg.task) {
    case Task::kSpeech:
      p.reps_per_fold = cfg.reps;
      break;
    case Task::kGender:
      p.folds = cnn2d ? cfg.gender.cnn2d_n_folds : cfg.gender.n_folds;
      p.reps_per_fold = cnn2d ? cfg.gender.cnn2d_reps_per_fold : cfg.gender.reps_per_fold;
      break;
    case Task::kVerification:
      p.reps_per_fold = cnn2d ? cfg.cnn2d_verification_reps : cfg.reps;
      break;
  }
  return p;
}

PreparedInputs prepare_inputs(std::span<const WindowSample> windows, const ExperimentConfig& cfg) {
  if (windows.empty()) throw ValidationError("experiment: no windows");
  const std::size_t win_len = windows.front().samples.size();
  const double rate = windows.front().sample_rate_hz;
  const bool fusion = cfg.window.sub_window_s.has_value();
  PreparedInputs out;
  out.input_len = fusion ? sub_window_layout(win_len, rate, cfg.window).length : win_len;
  out.sample_rate_hz = rate;

  // Only the input recipe matters here, so a throwaway model carries it.
  Model recipe;
  recipe.spec = cfg.arch;
  recipe.stft = cfg.stft;
  recipe.window_len = out.input_len;
  recipe.sample_rate_hz = rate;

  out.parts.reserve(windows.size());
  for (const WindowSample& w : windows) {
    if (w.samples.size() != win_len || w.sample_rate_hz != rate) {
      throw ValidationError("experiment: windows differ in length or sample rate");
    }
    std::vector<std::vector<double>> parts;
    if (fusion) {
      const WindowSample sub = w.sub_windows.empty() ? subdivide(w, cfg.window) : w;
      for (const auto& s : sub.sub_windows) parts.push_back(recipe.prepare_input(s));
    } else {
      parts.push_back(recipe.prepare_input(w.samples));
    }
    out.parts.push_back(std::move(parts));
  }
  return out;
}

Metrics run_binary_experiment(const PreparedInputs& inputs, std::span<const int> labels,
                              const SplitIndices& split, const ExperimentConfig& cfg,
                              std::uint64_t seed) {
  if (labels.size() != inputs.parts.size()) throw ValidationError("experiment: label count mismatch");
  Model model = build_model(cfg.arch, inputs.input_len, inputs.sample_rate_hz, cfg.stft);
  model.graph.init_parameters(derive_seed(seed, 11));

  std::vector<LabeledInput> train_set;
  for (std::size_t i : split.train) {
    for (const auto& part : inputs.parts[i]) train_set.push_back({part, labels[i]});
  }
  auto items = [&](const std::vector<std::size_t>& idx) {
    std::vector<EvalItem> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back({inputs.parts[i], labels[i]});
    return out;
  };
  const std::vector<EvalItem> val_set = items(split.val);
  const std::vector<EvalItem> test_set = items(split.test);

  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(seed, 12);
  train(model.graph, train_set, val_set, tc);

  const auto scored = score_items(model.graph, test_set);
  std::vector<double> scores(test_set.size());
  std::vector<int> decisions(test_set.size()), truth(test_set.size());
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    scores[i] = scored[i].score;
    decisions[i] = scored[i].decision;
    truth[i] = test_set[i].label;
  }
  return {roc_auc(scores, truth), f1_weighted(decisions, truth)};
}

SplitIndices gender_fold_split(std::span<const WindowSample> windows, const GenderFold& fold,
                               const SplitSpec& split, std::uint64_t seed) {
  split.validate();
  SplitIndices out;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    (fold.holds_out(windows[i].subject_id) ? out.test : rest).push_back(i);
  }
  Rng rng = make_rng(seed);
  shuffle(rest.begin(), rest.end(), rng);
  const double train_share = split.train_frac / (split.train_frac + split.val_frac);
  const std::size_t n_train = floor_frac(train_share, rest.size());
  out.train.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_train), rest.end());
  for (const auto* part : {&out.train, &out.val}) {
    for (std::size_t i : *part) {
      if (fold.holds_out(windows[i].subject_id)) {
        throw std::logic_error("gender fold: held-out subject " + windows[i].subject_id +
                               " leaked into training data");
      }
    }
  }
  return out;
}

SplitIndices stratified_split_indices(std::span<const int> labels, const SplitSpec& spec) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  SplitIndices out;
  for (const auto& [label, members] : by_class) {
    SplitSpec sub = spec;
    sub.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(label) + 1);
    SplitIndices part = split_indices(members.size(), sub);
    // Small classes: refill an empty part from the largest one.
    std::vector<std::size_t>* parts[3] = {&part.train, &part.val, &part.test};
    while (members.size() >= 3) {
      auto empty = std::find_if(std::begin(parts), std::end(parts), [](auto* v) { return v->empty(); });
      if (empty == std::end(parts)) break;
      auto largest = std::max_element(std::begin(parts), std::end(parts),
                                      [](auto* a, auto* b) { return a->size() < b->size(); });
      (*empty)->push_back((*largest)->back());
      (*largest)->pop_back();
    }
    for (auto i : part.train) out.train.push_back(members[i]);
    for (auto i : part.val) out.val.push_back(members[i]);
    for (auto i : part.test) out.test.push_back(members[i]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Metrics verification_harness(std::span<const WindowSample> windows, const PreparedInputs& inputs,
                             std::string_view target_subject, const ExperimentConfig& cfg,
                             std::uint64_t seed) {
  std::vector<int> labels(windows.size());
  std::size_t genuine = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    labels[i] = windows[i].subject_id == target_subject ? 1 : 0;
    genuine += static_cast<std::size_t>(labels[i]);
  }
  if (genuine == 0) {
    throw ValidationError("verification: no windows for subject '" + std::string(target_subject) + "'");
  }
  if (cfg.shuffle_labels) permute_labels(labels, derive_seed(seed, 2));
  SplitSpec split = cfg.split;
  split.seed = derive_seed(seed, 1);
  return run_binary_experiment(inputs, labels, stratified_split_indices(labels, split), cfg, seed);
}

ExperimentReport run_task(std::span<const WindowSample> windows, const ExperimentConfig& cfg) {
  cfg.validate();
  if (windows.empty()) throw ValidationError("experiment: no windows");
  if (cfg.arch.family == ArchFamily::kCnn2d) {
    // Surface shape problems before any job starts.
    (void)build_model(cfg.arch, windows.front().samples.size(), windows.front().sample_rate_hz, cfg.stft);
  }
  const PreparedInputs inputs = prepare_inputs(windows, cfg);
  const RunPlan plan = plan_runs(cfg);
  const auto n_jobs = static_cast<std::size_t>(plan.total());

  ExperimentReport report;
  report.task = cfg.task;
  report.architecture = display_name(cfg.arch);
  report.window_s = cfg.window.sub_window_s.value_or(cfg.window.window_s);
  report.reps.resize(n_jobs);

  std::vector<GenderFold> folds;
  std::vector<std::string> targets;
  std::vector<int> base_labels(windows.size());
  switch (cfg.task) {
    case Task::kSpeech:
      for (std::size_t i = 0; i < windows.size(); ++i) base_labels[i] = static_cast<int>(windows[i].label);
      break;
    case Task::kGender:
      for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].gender == Gender::kUnknown) {
          throw ValidationError("gender task: subject " + windows[i].subject_id + " has unknown gender");
        }
        base_labels[i] = windows[i].gender == Gender::kFemale ? 1 : 0;
      }
      folds = gender_folds(subjects_of(windows), plan.folds, derive_seed(cfg.seed, kGenderFoldSeedStage));
      break;
    case Task::kVerification:
      for (const auto& s : subjects_of(windows)) targets.push_back(s.subject_id);
      if (cfg.verification_targets > 0 &&
          static_cast<std::size_t>(cfg.verification_targets) < targets.size()) {
        targets.resize(static_cast<std::size_t>(cfg.verification_targets));
      }
      break;
  }

  parallel_for(n_jobs, cfg.workers, [&](std::size_t job) {
    const std::uint64_t seed = derive_seed(cfg.seed, job);
    RepResult& out = report.reps[job];
    if (plan.folds > 0) {
      out.fold = static_cast<int>(job) / plan.reps_per_fold;
      out.rep = static_cast<int>(job) % plan.reps_per_fold;
    } else {
      out.rep = static_cast<int>(job);
    }
    try {
      Metrics m;
      if (cfg.task == Task::kVerification) {
        double auc = 0.0, f1 = 0.0;
        for (std::size_t t = 0; t < targets.size(); ++t) {
          const Metrics mt = verification_harness(windows, inputs, targets[t], cfg, derive_seed(seed, 100 + t));
          auc += mt.auc;
          f1 += mt.f1;
        }
        m = {auc / static_cast<double>(targets.size()), f1 / static_cast<double>(targets.size())};
      } else {
        std::vector<int> labels = base_labels;
        if (cfg.shuffle_labels) permute_labels(labels, derive_seed(seed, 2));
        SplitIndices split;
        if (cfg.task == Task::kGender) {
          split = gender_fold_split(windows, folds[static_cast<std::size_t>(out.fold)], cfg.split,
                                    derive_seed(seed, 1));
        } else {
          SplitSpec spec = cfg.split;
          spec.seed = derive_seed(seed, 1);
          split = split_indices(windows.size(), spec);
        }
        m = run_binary_experiment(inputs, labels, split, cfg, seed);
      }
      out.auc = m.auc;
      out.f1 = m.f1;
    } catch (const ValidationError& e) {
      throw ValidationError(annotate(e.what(), out.rep, out.fold));
    } catch (const std::exception& e) {
      throw std::runtime_error(annotate(e.what(), out.rep, out.fold));
    }
  });
  report.aggregate();
  return report;
}

}  // namespace ppgbench
