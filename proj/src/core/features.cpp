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

#include "ppgbench/core/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

#include "ppgbench/core/error.h"

namespace ppgbench {

namespace {

// FFTW planning is not thread-safe; execution on new arrays is.
fftw_plan plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  std::vector<std::complex<double>> scratch(n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  const fftw_plan plan =
      fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan) throw std::runtime_error("fftw: cannot plan a transform of size " + std::to_string(n));
  plans.emplace(n, plan);
  return plan;
}

}  // namespace

std::string_view to_string(WindowFunction w) {
  return w == WindowFunction::kHann ? "hann" : "rect";
}

WindowFunction parse_window_function(std::string_view s) {
  if (s == "hann") return WindowFunction::kHann;
  if (s == "rect") return WindowFunction::kRect;
  throw ValidationError("unknown window function '" + std::string(s) + "'");
}

void StftConfig::validate() const {
  if (frame_len == 0 || hop == 0 || hop > frame_len) {
    throw ValidationError("stft: need 0 < hop <= frame_len");
  }
  if (!(log_floor > 0.0)) throw ValidationError("stft: log_floor must be > 0");
}

void dft_inplace(std::vector<std::complex<double>>& data) {
  if (data.empty()) return;
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(data.size()), p, p);
}

std::vector<double> analysis_window(WindowFunction fn, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (fn == WindowFunction::kHann) {
    // Periodic Hann.
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n));
    }
  }
  return w;
}

Spectrogram stft(std::span<const double> samples, const StftConfig& cfg, double sample_rate_hz) {
  cfg.validate();
  if (samples.size() < cfg.frame_len) {
    throw ShapeError("stft: input of " + std::to_string(samples.size()) +
                          " samples is shorter than one frame (" + std::to_string(cfg.frame_len) +
                          ")");
  }
  Spectrogram spec;
  spec.bins = cfg.frame_len / 2 + 1;
  spec.frames = (samples.size() - cfg.frame_len) / cfg.hop + 1;
  spec.bin_hz = sample_rate_hz / static_cast<double>(cfg.frame_len);
  spec.values.assign(spec.bins * spec.frames, 0.0);
  spec.frame_times.resize(spec.frames);

  const std::vector<double> win = analysis_window(cfg.window_fn, cfg.frame_len);
  std::vector<std::complex<double>> buf(cfg.frame_len);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const std::size_t off = f * cfg.hop;
    for (std::size_t i = 0; i < cfg.frame_len; ++i) buf[i] = samples[off + i] * win[i];
    dft_inplace(buf);
    for (std::size_t b = 0; b < spec.bins; ++b) spec.values[b * spec.frames + f] = std::abs(buf[b]);
    spec.frame_times[f] =
        (static_cast<double>(off) + static_cast<double>(cfg.frame_len) / 2.0) / sample_rate_hz;
  }
  return spec;
}

Spectrogram log_compress(Spectrogram spec, double floor) {
  if (!(floor > 0.0)) throw ValidationError("log_compress: floor must be > 0");
  for (double& v : spec.values) v = std::log(std::max(v, floor));
  return spec;
}

void write_spectrogram_csv(const Spectrogram& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  for (std::size_t b = 0; b < spec.bins; ++b) {
    for (std::size_t f = 0; f < spec.frames; ++f) {
      if (f) out << ',';
      out << spec.at(b, f);
    }
    out << '\n';
  }
}

}  // namespace ppgbench
