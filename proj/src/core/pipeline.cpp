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

#include "ppgbench/core/pipeline.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <cstdio>
#include <set>
#include <sstream>

#include "ppgbench/core/error.h"
#include "ppgbench/core/report.h"
#include "ppgbench/core/rng.h"

namespace ppgbench {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

json paths(const std::vector<fs::path>& files) {
  json a = json::array();
  for (const auto& f : files) a.push_back(f.string());
  return a;
}

json mean_sem_json(const MeanSem& m) { return json{{"mean", m.mean}, {"sem", m.sem}, {"n", m.n}}; }

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = standard_normal(rng);
  return v;
}

// Distinct values spaced well beyond the probe step so no max or relu
// boundary sits within epsilon of an input.
std::vector<double> spaced_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (static_cast<double>(i) - n / 2.0) * 0.013 + 0.0041;
  shuffle(v.begin(), v.end(), rng);
  return v;
}

GradcheckRow check_row(const std::string& name, Graph& g, std::uint64_t seed, bool spaced,
                       std::size_t max_coordinates, bool check_input) {
  g.init_parameters(seed);
  Rng rng = make_rng(derive_seed(seed, 1));
  const std::size_t n = shape_size(g.input_shape());
  std::vector<std::vector<double>> inputs;
  for (int i = 0; i < 2; ++i) inputs.push_back(spaced ? spaced_vec(n, rng) : random_vec(n, rng));
  const std::vector<int> labels = {0, 1};
  GradCheckOptions o;
  o.seed = seed;
  o.max_coordinates = max_coordinates;
  o.check_input = check_input;
  const GradCheckResult r = grad_check(g, inputs, labels, o);
  GradcheckRow row{name, r.max_rel_error, r.coordinates, r.skipped_kinks, false};
  const double checked = r.coordinates == 0 ? 1.0
                                            : static_cast<double>(r.coordinates - r.skipped_kinks) /
                                                  static_cast<double>(r.coordinates);
  row.pass = r.max_rel_error < kGradcheckTolerance && checked >= kGradcheckMinChecked;
  return row;
}

// Single op followed by a dense head to two logits.
template <class Build>
GradcheckRow layer_row(const std::string& name, Shape in_shape, Build build, std::uint64_t seed,
                       bool spaced) {
  Graph g;
  const NodeId x = g.input(std::move(in_shape));
  const NodeId h = build(g, x);
  const std::size_t n = shape_size(g.shape(h));
  const NodeId w = g.param({2, n}, n, "head.weight");
  const NodeId b = g.param({2}, n, "head.bias");
  g.set_output(g.dense(h, w, b));
  return check_row(name, g, seed, spaced, 10000, true);
}

GradcheckRow cross_entropy_row(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const std::vector<double> logits = random_vec(8, rng);
  const std::vector<int> labels = {0, 1, 1, 0};
  const LossResult base = softmax_cross_entropy(logits, 2, labels);
  GradcheckRow row{"softmax_cross_entropy", 0.0, logits.size(), 0, false};
  for (std::size_t i = 0; i < logits.size(); ++i) {
    auto p = logits, m = logits;
    p[i] += 1e-4;
    m[i] -= 1e-4;
    const double num =
        (softmax_cross_entropy(p, 2, labels).loss - softmax_cross_entropy(m, 2, labels).loss) / 2e-4;
    row.max_rel_error = std::max(row.max_rel_error, relative_error(base.grad[i], num));
  }
  row.pass = row.max_rel_error < kGradcheckTolerance;
  return row;
}

void require_windows_file(const RunConfig& cfg) {
  if (!fs::exists(cfg.windows_file())) {
    throw ValidationError("windows file " + cfg.windows_file().string() +
                          " does not exist (run 'slice' first)");
  }
}

}  // namespace

std::vector<WindowSample> load_windows(const RunConfig& cfg) {
  require_windows_file(cfg);
  auto ws = read_windows_jsonl(cfg.windows_file());
  if (ws.empty()) throw ValidationError("windows file " + cfg.windows_file().string() + " is empty");
  return ws;
}

SynthSummary cmd_synth(const RunConfig& cfg) {
  cfg.validate();
  CohortConfig cc = cfg.synth;
  cc.seed = derive_seed(cfg.seed, kSynthSeedStage);
  const auto data = synth_dataset(cc);
  ensure_dir(cfg.data_dir);
  SynthSummary s;
  s.subjects = static_cast<std::size_t>(cc.n_male + cc.n_female);
  s.sessions = data.size();
  for (const auto& d : data) {
    const fs::path rec = cfg.data_dir / record_file_name(d.record);
    const fs::path ali = cfg.data_dir / alignment_file_name(d.record);
    save_ppg_record(d.record, rec);
    save_alignment(d.track, ali);
    s.files.push_back(rec);
    s.files.push_back(ali);
  }
  return s;
}

SliceSummary cmd_slice(const RunConfig& cfg) {
  cfg.validate();
  if (!fs::is_directory(cfg.data_dir)) {
    throw ValidationError("data directory " + cfg.data_dir.string() + " does not exist");
  }
  const auto data = load_dataset_dir(cfg.data_dir);
  if (data.empty()) throw ValidationError("data directory " + cfg.data_dir.string() + " has no records");
  SliceSummary s;
  std::vector<WindowSample> windows;
  for (const auto& d : data) {
    SliceResult r = slice_windows(d.record, d.track, cfg.window);
    s.counts += r.counts;
    for (auto& w : r.warnings) s.warnings.push_back(d.record.subject_id + "/" + d.record.session_id + ": " + w);
    windows.insert(windows.end(), std::make_move_iterator(r.windows.begin()),
                   std::make_move_iterator(r.windows.end()));
  }
  s.records = data.size();
  const std::size_t labeled = s.counts.speech + s.counts.non_speech;
  s.speech_share = labeled ? static_cast<double>(s.counts.speech) / static_cast<double>(labeled) : 0.0;

  ensure_dir(cfg.output_dir);
  if (cfg.windows_file().has_parent_path()) ensure_dir(cfg.windows_file().parent_path());
  write_windows_jsonl(windows, cfg.windows_file());
  s.files.push_back(cfg.windows_file());
  const fs::path summary = cfg.output_dir / "slice_summary.json";
  write_file(summary, to_json(s).dump(2) + "\n");
  s.files.push_back(summary);

  if (cfg.spectrogram_dump > 0) {
    const fs::path dir = cfg.output_dir / "spectrograms";
    ensure_dir(dir);
    const std::size_t n = std::min<std::size_t>(windows.size(), static_cast<std::size_t>(cfg.spectrogram_dump));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& w = windows[i];
      const Spectrogram spec = log_compress(stft(normalize_window(w.samples), cfg.stft, w.sample_rate_hz),
                                            cfg.stft.log_floor);
      char name[64];
      std::snprintf(name, sizeof name, "window_%05zu.csv", i);
      write_spectrogram_csv(spec, dir / name);
      s.files.push_back(dir / name);
    }
  }
  return s;
}

RunOutputs cmd_run(const RunConfig& cfg) {
  cfg.validate();
  const auto windows = load_windows(cfg);
  RunOutputs out;
  out.report = run_task(windows, cfg.experiment());
  ensure_dir(cfg.output_dir);
  const std::string stem = report_stem(out.report);
  const std::span<const ExperimentReport> one(&out.report, 1);
  const std::vector<std::pair<std::string, std::string>> files = {
      {stem + "_reps.csv", reps_csv(one)},
      {stem + "_aggregate.csv", aggregate_csv(one)},
      {stem + "_boxplot.csv", boxplot_csv(one)},
      {stem + "_boxplot.svg", boxplot_svg(one, std::string(to_string(out.report.task)) + " AUC, " +
                                                   out.report.architecture)},
  };
  for (const auto& [name, text] : files) {
    write_file(cfg.output_dir / name, text);
    out.files.push_back(cfg.output_dir / name);
  }
  return out;
}

SweepOutputs cmd_sweep(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.kernel_grid.empty()) throw ValidationError("sweep: kernel grid is empty");
  if (cfg.arch.family != ArchFamily::kPulseNet) {
    throw ValidationError("sweep: kernel grid applies to pulsenet architectures only");
  }
  const auto windows = load_windows(cfg);
  SweepOutputs out;
  for (const auto& k : cfg.kernel_grid) {
    SweepRow row;
    row.kernel_sizes = k;
    ArchitectureSpec spec = cfg.arch;
    spec.kernel_sizes = k;
    row.architecture = display_name(spec);
    ExperimentConfig e = cfg.experiment();
    e.arch = spec;
    // Every cell shares one seed so cells differ only by kernel sizes.
    e.seed = derive_seed(cfg.seed, kSweepSeedStage);
    try {
      const ExperimentReport r = run_task(windows, e);
      row.auc = r.auc;
      row.f1 = r.f1;
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
    out.rows.push_back(std::move(row));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.auc.has_value() != b.auc.has_value()) return a.auc.has_value();
    return a.auc && a.auc->mean > b.auc->mean;
  });
  std::ostringstream csv;
  csv << "rank,kernel_sizes,architecture,auc_mean,auc_sem,f1_mean,f1_sem,error\n";
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& r = out.rows[i];
    csv << i + 1 << ',' << csv_field(std::to_string(r.kernel_sizes[0]) + "," + std::to_string(r.kernel_sizes[1]) +
                                      "," + std::to_string(r.kernel_sizes[2]))
        << ',' << csv_field(r.architecture) << ',';
    if (r.auc) {
      csv << format_number(r.auc->mean) << ',' << format_number(r.auc->sem) << ','
          << format_number(r.f1->mean) << ',' << format_number(r.f1->sem) << ",";
    } else {
      csv << ",,,," << csv_field(r.error);
    }
    csv << '\n';
  }
  ensure_dir(cfg.output_dir);
  write_file(cfg.output_dir / "sweep.csv", csv.str());
  out.files.push_back(cfg.output_dir / "sweep.csv");
  return out;
}

std::vector<GradcheckRow> cmd_gradcheck(const RunConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = derive_seed(cfg.seed, kGradcheckSeedStage);
  std::vector<GradcheckRow> rows;
  auto conv_w = [](Graph& g, Shape s, std::size_t fan) {
    return std::make_pair(g.param(s, fan, "w"), g.param({s[0]}, fan, "b"));
  };
  rows.push_back(layer_row("conv1d", {2, 20}, [&](Graph& g, NodeId x) {
    auto [w, b] = conv_w(g, {3, 2, 5}, 10);
    return g.conv1d(x, w, b);
  }, derive_seed(seed, 1), false));
  rows.push_back(layer_row("conv2d", {2, 7, 6}, [&](Graph& g, NodeId x) {
    auto [w, b] = conv_w(g, {3, 2, 3, 3}, 18);
    return g.conv2d(x, w, b);
  }, derive_seed(seed, 2), false));
  rows.push_back(layer_row("maxpool1d", {2, 9}, [](Graph& g, NodeId x) { return g.maxpool(x, 2, 1); },
                           derive_seed(seed, 3), true));
  rows.push_back(layer_row("maxpool2d", {2, 5, 4}, [](Graph& g, NodeId x) { return g.maxpool(x, 2, 2); },
                           derive_seed(seed, 4), true));
  rows.push_back(layer_row("global_maxpool", {3, 7}, [](Graph& g, NodeId x) { return g.global_maxpool(x); },
                           derive_seed(seed, 5), true));
  rows.push_back(layer_row("dense", {6}, [&](Graph& g, NodeId x) {
    const NodeId w = g.param({4, 6}, 6, "w");
    const NodeId b = g.param({4}, 6, "b");
    return g.dense(x, w, b);
  }, derive_seed(seed, 6), false));
  rows.push_back(layer_row("relu", {10}, [](Graph& g, NodeId x) { return g.relu(x); }, derive_seed(seed, 7), true));
  rows.push_back(layer_row("concat", {2, 6}, [&](Graph& g, NodeId x) {
    auto [w, b] = conv_w(g, {2, 2, 3}, 6);
    const NodeId parts[] = {g.relu(x), g.conv1d(x, w, b)};
    return g.concat(parts);
  }, derive_seed(seed, 8), true));
  rows.push_back(cross_entropy_row(derive_seed(seed, 9)));

  std::uint64_t k = 20;
  for (const auto& name : architecture_names()) {
    const ArchitectureSpec spec = architecture_by_name(name);
    const std::size_t len = name == "pulsenet_var2" ? 80 : 200;
    Model m = build_model(spec, len, kNominalSampleRateHz, cfg.stft);
    const std::size_t coords = spec.family == ArchFamily::kVgg16Inv ? kGradcheckLargeGraphCoordinates : 10000;
    rows.push_back(check_row(name, m.graph, derive_seed(seed, k++), false, coords, false));
  }
  return rows;
}

ReportOutputs cmd_report(const RunConfig& cfg) {
  cfg.validate();
  if (!fs::is_directory(cfg.output_dir)) {
    throw ValidationError("output directory " + cfg.output_dir.string() + " does not exist");
  }
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(cfg.output_dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 9 && name.ends_with("_reps.csv")) inputs.push_back(e.path());
  }
  if (inputs.empty()) throw ValidationError("no *_reps.csv files in " + cfg.output_dir.string());
  std::sort(inputs.begin(), inputs.end());

  ReportOutputs out;
  for (const auto& p : inputs) {
    auto rs = parse_reps_csv(read_file(p));
    out.reports.insert(out.reports.end(), rs.begin(), rs.end());
  }
  // Table order: tasks in declaration order, then architecture list order, then window.
  auto arch_rank = [](const std::string& display) {
    const auto names = architecture_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (display_name(architecture_by_name(names[i])) == display) return i;
    }
    return names.size();
  };
  std::stable_sort(out.reports.begin(), out.reports.end(), [&](const ExperimentReport& a, const ExperimentReport& b) {
    if (a.window_s != b.window_s) return a.window_s > b.window_s;
    if (arch_rank(a.architecture) != arch_rank(b.architecture)) return arch_rank(a.architecture) < arch_rank(b.architecture);
    if (a.architecture != b.architecture) return a.architecture < b.architecture;
    return a.task < b.task;
  });

  std::vector<std::pair<std::string, std::string>> files = {
      {"table1.csv", aggregate_csv(out.reports)},
      {"table1.md", table1_markdown(out.reports)},
      {"boxplot.csv", boxplot_csv(out.reports)},
  };
  for (Task t : {Task::kSpeech, Task::kGender, Task::kVerification}) {
    std::vector<ExperimentReport> sel;
    for (const auto& r : out.reports) {
      if (r.task == t) sel.push_back(r);
    }
    if (sel.empty()) continue;
    files.emplace_back("boxplot_" + std::string(to_string(t)) + ".svg",
                       boxplot_svg(sel, std::string(to_string(t)) + ": test AUC per architecture"));
  }
  for (const auto& [name, text] : files) {
    write_file(cfg.output_dir / name, text);
    out.files.push_back(cfg.output_dir / name);
  }
  return out;
}

json to_json(const SynthSummary& s) {
  return json{{"subjects", s.subjects}, {"sessions", s.sessions}, {"files", s.files.size()}};
}

json to_json(const SliceSummary& s) {
  return json{{"records", s.records},
              {"candidates", s.counts.candidates},
              {"speech", s.counts.speech},
              {"non_speech", s.counts.non_speech},
              {"discarded", s.counts.discarded},
              {"speech_share", s.speech_share},
              {"non_speech_share", s.counts.speech + s.counts.non_speech ? 1.0 - s.speech_share : 0.0},
              {"warnings", s.warnings}};
}

json to_json(const RunOutputs& s) {
  json j{{"task", to_string(s.report.task)},
         {"architecture", s.report.architecture},
         {"window_s", s.report.window_s},
         {"runs", s.report.reps.size()},
         {"auc", mean_sem_json(s.report.auc)},
         {"f1", mean_sem_json(s.report.f1)},
         {"files", paths(s.files)}};
  if (s.report.auc_by_fold) {
    j["auc_by_fold"] = mean_sem_json(*s.report.auc_by_fold);
    j["f1_by_fold"] = mean_sem_json(*s.report.f1_by_fold);
  }
  return j;
}

json to_json(const SweepOutputs& s) {
  json rows = json::array();
  for (const auto& r : s.rows) {
    json j{{"kernel_sizes", r.kernel_sizes}, {"architecture", r.architecture}};
    if (r.auc) {
      j["auc"] = mean_sem_json(*r.auc);
      j["f1"] = mean_sem_json(*r.f1);
    } else {
      j["error"] = r.error;
    }
    rows.push_back(j);
  }
  return json{{"rows", rows}, {"files", paths(s.files)}};
}

json to_json(const std::vector<GradcheckRow>& rows) {
  json a = json::array();
  bool all = true;
  for (const auto& r : rows) {
    a.push_back(json{{"name", r.name},
                     {"max_rel_error", r.max_rel_error},
                     {"coordinates", r.coordinates},
                     {"skipped_kinks", r.skipped_kinks},
                     {"pass", r.pass}});
    all = all && r.pass;
  }
  return json{{"rows", a}, {"pass", all}, {"tolerance", kGradcheckTolerance}};
}

json to_json(const ReportOutputs& s) {
  json reports = json::array();
  for (const auto& r : s.reports) {
    reports.push_back(json{{"task", to_string(r.task)},
                           {"architecture", r.architecture},
                           {"window_s", r.window_s},
                           {"runs", r.reps.size()},
                           {"auc", mean_sem_json(r.auc)},
                           {"f1", mean_sem_json(r.f1)}});
  }
  return json{{"reports", reports}, {"files", paths(s.files)}};
}

}  // namespace ppgbench
