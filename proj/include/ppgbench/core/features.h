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

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace ppgbench {

enum class WindowFunction { kHann, kRect };

std::string_view to_string(WindowFunction w);
WindowFunction parse_window_function(std::string_view s);

struct StftConfig {
  std::size_t frame_len = 64;
  std::size_t hop = 8;
  WindowFunction window_fn = WindowFunction::kHann;
  double log_floor = 1e-10;

  void validate() const;
};

// Magnitude spectrogram, bins-major: values[bin * frames + frame].
struct Spectrogram {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<double> values;
  double bin_hz = 0.0;
  std::vector<double> frame_times;  // frame centres, seconds

  double at(std::size_t bin, std::size_t frame) const { return values[bin * frames + frame]; }
};

// In-place forward DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N), unnormalized (FFTW).
void dft_inplace(std::vector<std::complex<double>>& data);

std::vector<double> analysis_window(WindowFunction fn, std::size_t n);

// Bins 0..frame_len/2 of |DFT(window * frame)| for frames at
// 0, hop, 2*hop, ...; frames = (len - frame_len)/hop + 1.
Spectrogram stft(std::span<const double> samples, const StftConfig& cfg,
                 double sample_rate_hz = 200.0);

Spectrogram log_compress(Spectrogram spec, double floor);

void write_spectrogram_csv(const Spectrogram& spec, const std::filesystem::path& path);

}  // namespace ppgbench
