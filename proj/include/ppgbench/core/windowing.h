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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppgbench/core/signal_data.h"

namespace ppgbench {

struct WindowConfig {
  double window_s = 1.0;
  double stride_s = 1.0;
  std::optional<double> sub_window_s;  // 0.4 when sub-window fusion is enabled
  double sub_overlap_frac = 0.7;
  // A window is speech when at most this fraction of it is silence.
  double silence_discard_frac = 0.02;
  // A window is non-speech when at most this fraction of it is speech.
  double nonspeech_max_speech_frac = 0.0;

  void validate() const;
};

enum class WindowLabel { kNonSpeech = 0, kSpeech = 1 };

struct WindowSample {
  std::string subject_id;
  std::string session_id;
  Gender gender = Gender::kUnknown;
  double sample_rate_hz = kNominalSampleRateHz;
  double start_s = 0.0;
  std::vector<double> samples;
  WindowLabel label = WindowLabel::kNonSpeech;
  std::vector<std::vector<double>> sub_windows;

  friend bool operator==(const WindowSample&, const WindowSample&) = default;
};

struct SliceCounts {
  std::size_t candidates = 0;
  std::size_t speech = 0;
  std::size_t non_speech = 0;
  std::size_t discarded = 0;

  SliceCounts& operator+=(const SliceCounts& o);
};

struct SliceResult {
  std::vector<WindowSample> windows;
  SliceCounts counts;
  std::vector<std::string> warnings;
};

// Fraction of [t0, t1) covered by speech segments.
double speech_fraction(const AlignmentTrack& track, double t0, double t1);

// Windows start at 0, stride, 2*stride, ... and are labelled speech,
// non-speech, or dropped according to the config thresholds.
SliceResult slice_windows(const PpgRecord& record, const AlignmentTrack& track,
                          const WindowConfig& cfg);

struct SubWindowLayout {
  std::size_t length = 0;
  std::size_t stride = 0;
  std::size_t count = 0;
};

SubWindowLayout sub_window_layout(std::size_t window_len, double sample_rate_hz,
                                  const WindowConfig& cfg);

WindowSample subdivide(WindowSample window, const WindowConfig& cfg);

struct FusedScore {
  double score = 0.5;  // normalized probability of class 1
  int decision = 0;    // argmax of the summed log-probabilities
};

// Sums per-class log-softmax across sub-windows. Each entry of `logits`
// holds one sub-window's class logits (two classes, class 1 positive).
FusedScore fuse_subwindow_scores(std::span<const std::vector<double>> logits);

std::vector<double> normalize_window(std::span<const double> samples);

std::string window_to_json(const WindowSample& w);
WindowSample window_from_json(std::string_view line);
void write_windows_jsonl(const std::vector<WindowSample>& windows,
                         const std::filesystem::path& path);
std::vector<WindowSample> read_windows_jsonl(const std::filesystem::path& path);

}  // namespace ppgbench
