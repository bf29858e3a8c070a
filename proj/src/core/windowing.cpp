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

#include "ppgbench/core/windowing.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "ppgbench/core/error.h"

namespace ppgbench {

using nlohmann::json;

namespace {

// Slack on label thresholds so that an exactly-2% silence window still counts.
constexpr double kThresholdSlack = 1e-9;

}  // namespace

void WindowConfig::validate() const {
  if (!(window_s > 0.0)) throw ValidationError("window: window_s must be > 0");
  if (!(stride_s > 0.0)) throw ValidationError("window: stride_s must be > 0");
  if (sub_window_s) {
    if (!(*sub_window_s > 0.0) || !(*sub_window_s < window_s)) {
      throw ValidationError("window: sub_window_s must lie in (0, window_s)");
    }
  }
  if (!(sub_overlap_frac >= 0.0 && sub_overlap_frac < 1.0)) {
    throw ValidationError("window: sub_overlap_frac must lie in [0, 1)");
  }
  if (!(silence_discard_frac >= 0.0 && silence_discard_frac <= 1.0)) {
    throw ValidationError("window: silence_discard_frac must lie in [0, 1]");
  }
  if (!(nonspeech_max_speech_frac >= 0.0 && nonspeech_max_speech_frac < 1.0)) {
    throw ValidationError("window: nonspeech_max_speech_frac must lie in [0, 1)");
  }
}

SliceCounts& SliceCounts::operator+=(const SliceCounts& o) {
  candidates += o.candidates;
  speech += o.speech;
  non_speech += o.non_speech;
  discarded += o.discarded;
  return *this;
}

double speech_fraction(const AlignmentTrack& track, double t0, double t1) {
  if (!(t0 < t1)) throw ValidationError("speech_fraction: need t0 < t1");
  double covered = 0.0;
  for (const Segment& s : track.segments) {
    if (s.end_s <= t0) continue;
    if (s.start_s >= t1) break;
    covered += std::min(s.end_s, t1) - std::max(s.start_s, t0);
  }
  return std::clamp(covered / (t1 - t0), 0.0, 1.0);
}

SliceResult slice_windows(const PpgRecord& record, const AlignmentTrack& track,
                          const WindowConfig& cfg) {
  cfg.validate();
  record.validate();
  SliceResult out;
  const double rate = record.sample_rate_hz;
  const auto win_len = static_cast<std::size_t>(std::llround(cfg.window_s * rate));
  const auto stride = static_cast<std::size_t>(std::llround(cfg.stride_s * rate));
  if (win_len == 0 || stride == 0) {
    throw ValidationError("window: window or stride rounds to zero samples");
  }
  const std::size_t n = record.samples.size();
  if (n < win_len) {
    out.warnings.push_back("record " + record.subject_id + "/" + record.session_id +
                           " is shorter than one window; no windows emitted");
    return out;
  }
  for (std::size_t start = 0; start + win_len <= n; start += stride) {
    ++out.counts.candidates;
    const double t0 = static_cast<double>(start) / rate;
    const double t1 = static_cast<double>(start + win_len) / rate;
    const double frac = speech_fraction(track, t0, t1);
    WindowLabel label;
    if (frac >= 1.0 - cfg.silence_discard_frac - kThresholdSlack) {
      label = WindowLabel::kSpeech;
      ++out.counts.speech;
    } else if (frac <= cfg.nonspeech_max_speech_frac + kThresholdSlack) {
      label = WindowLabel::kNonSpeech;
      ++out.counts.non_speech;
    } else {
      ++out.counts.discarded;
      continue;
    }
    WindowSample w;
    w.subject_id = record.subject_id;
    w.session_id = record.session_id;
    w.gender = record.gender;
    w.sample_rate_hz = rate;
    w.start_s = t0;
    w.label = label;
    w.samples.assign(record.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     record.samples.begin() + static_cast<std::ptrdiff_t>(start + win_len));
    if (cfg.sub_window_s) w = subdivide(std::move(w), cfg);
    out.windows.push_back(std::move(w));
  }
  return out;
}

SubWindowLayout sub_window_layout(std::size_t window_len, double sample_rate_hz,
                                  const WindowConfig& cfg) {
  if (!cfg.sub_window_s) throw ValidationError("subdivide: sub_window_s is not set");
  const double sub = *cfg.sub_window_s;
  SubWindowLayout lay;
  lay.length = static_cast<std::size_t>(std::llround(sub * sample_rate_hz));
  lay.stride =
      static_cast<std::size_t>(std::llround(sub * (1.0 - cfg.sub_overlap_frac) * sample_rate_hz));
  if (lay.stride == 0) throw ValidationError("subdivide: sub-window stride rounds to 0 samples");
  if (lay.length == 0 || lay.length > window_len) {
    throw ValidationError("subdivide: sub-window does not fit inside the window");
  }
  lay.count = (window_len - lay.length) / lay.stride + 1;
  return lay;
}

WindowSample subdivide(WindowSample window, const WindowConfig& cfg) {
  const SubWindowLayout lay = sub_window_layout(window.samples.size(), window.sample_rate_hz, cfg);
  window.sub_windows.clear();
  window.sub_windows.reserve(lay.count);
  for (std::size_t i = 0; i < lay.count; ++i) {
    const auto first = window.samples.begin() + static_cast<std::ptrdiff_t>(i * lay.stride);
    window.sub_windows.emplace_back(first, first + static_cast<std::ptrdiff_t>(lay.length));
  }
  return window;
}

FusedScore fuse_subwindow_scores(std::span<const std::vector<double>> logits) {
  if (logits.empty()) throw ValidationError("fuse: no sub-window scores");
  const std::size_t classes = logits.front().size();
  if (classes < 2) throw ValidationError("fuse: need at least two classes");
  std::vector<double> summed(classes, 0.0);
  for (const auto& row : logits) {
    if (row.size() != classes) throw ValidationError("fuse: inconsistent class count");
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    for (std::size_t c = 0; c < classes; ++c) summed[c] += row[c] - lse;
  }
  FusedScore out;
  out.decision = static_cast<int>(std::max_element(summed.begin(), summed.end()) - summed.begin());
  const double mx = summed[static_cast<std::size_t>(out.decision)];
  double z = 0.0;
  for (double v : summed) z += std::exp(v - mx);
  out.score = std::exp(summed[1] - mx) / z;
  return out;
}

std::vector<double> normalize_window(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("normalize: empty window");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(samples.size(), 0.0);
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) return out;
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = (samples[i] - mean) / sd;
  return out;
}

std::string window_to_json(const WindowSample& w) {
  json doc;
  doc["subject_id"] = w.subject_id;
  doc["session_id"] = w.session_id;
  doc["gender"] = to_string(w.gender);
  doc["sample_rate_hz"] = w.sample_rate_hz;
  doc["start_s"] = w.start_s;
  doc["label"] = w.label == WindowLabel::kSpeech ? "speech" : "non_speech";
  doc["samples"] = w.samples;
  if (!w.sub_windows.empty()) doc["sub_windows"] = w.sub_windows;
  return doc.dump();
}

WindowSample window_from_json(std::string_view line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("window: invalid JSON: ") + e.what());
  }
  auto need = [&](const char* key) -> const json& {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("window: missing field '") + key + "'");
    return *it;
  };
  WindowSample w;
  try {
    w.subject_id = need("subject_id").get<std::string>();
    w.session_id = need("session_id").get<std::string>();
    w.gender = parse_gender(need("gender").get<std::string>());
    w.sample_rate_hz = need("sample_rate_hz").get<double>();
    w.start_s = need("start_s").get<double>();
    const auto label = need("label").get<std::string>();
    if (label == "speech") {
      w.label = WindowLabel::kSpeech;
    } else if (label == "non_speech") {
      w.label = WindowLabel::kNonSpeech;
    } else {
      throw ParseError("window: unknown label '" + label + "'");
    }
    w.samples = need("samples").get<std::vector<double>>();
    if (auto it = doc.find("sub_windows"); it != doc.end()) {
      w.sub_windows = it->get<std::vector<std::vector<double>>>();
    }
  } catch (const json::type_error& e) {
    throw ParseError(std::string("window: wrong field type: ") + e.what());
  }
  if (w.samples.empty()) throw ParseError("window: empty samples");
  return w;
}

void write_windows_jsonl(const std::vector<WindowSample>& windows,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& w : windows) out << window_to_json(w) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<WindowSample> read_windows_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open windows file " + path.string());
  std::vector<WindowSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(window_from_json(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ppgbench
