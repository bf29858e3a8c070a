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

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ppgbench/core/autodiff.h"
#include "ppgbench/core/features.h"

namespace ppgbench {

enum class ArchFamily { kPulseNet, kVgg16Inv, kCnn2d };

std::string_view to_string(ArchFamily f);
ArchFamily parse_arch_family(std::string_view s);

struct ArchitectureSpec {
  ArchFamily family = ArchFamily::kPulseNet;
  std::array<std::size_t, 3> kernel_sizes{50, 30, 20};
  std::size_t branch_channels = 32;
  std::size_t hidden_units = 64;
  std::vector<std::size_t> channel_sequence{512, 512, 256, 128, 64};
  std::vector<std::size_t> block_channels{16, 32, 64};
  std::size_t n_classes = 2;

  void validate() const;
  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

// Preset names: pulsenet, pulsenet_var1, pulsenet_var2, vgg16_inv, cnn2d.
std::vector<std::string> architecture_names();
ArchitectureSpec architecture_by_name(std::string_view name);
// Row label in result tables, e.g. "PulseNet [50,10,4]".
std::string display_name(const ArchitectureSpec& spec);

nlohmann::json to_json(const ArchitectureSpec& spec);
ArchitectureSpec architecture_from_json(const nlohmann::json& doc);

// Three parallel conv1d branches -> ReLU -> global max-pool -> concat ->
// dense(hidden) -> ReLU -> dense(n_classes). Input [1 x input_len].
Graph build_pulsenet(const ArchitectureSpec& spec, std::size_t input_len);

// Five conv blocks in the VGG16 2-2-3-3-3 layout (conv k=3 + ReLU, then
// max-pool 2), followed by three dense layers. Input [1 x input_len].
Graph build_vgg16_inv(const ArchitectureSpec& spec, std::size_t input_len);
std::size_t vgg16_inv_min_input();

// Three blocks of conv2d 3x3 -> ReLU -> max-pool 2x2, global max-pool,
// dense(n_classes). Input [1 x bins x frames].
Graph build_cnn2d(const ArchitectureSpec& spec, std::size_t bins, std::size_t frames);

std::size_t param_count(const Graph& graph);

// A built network plus the recipe for turning a raw window into its input.
struct Model {
  ArchitectureSpec spec;
  StftConfig stft;
  std::size_t window_len = 0;
  double sample_rate_hz = 200.0;
  Graph graph;

  // z-normalized window, or its log-magnitude STFT for cnn2d.
  std::vector<double> prepare_input(std::span<const double> samples) const;
  // Class logits for one raw window.
  std::vector<double> logits(std::span<const double> samples);
};

Model build_model(const ArchitectureSpec& spec, std::size_t window_len, double sample_rate_hz,
                  const StftConfig& stft = {});

// Checkpoint: JSON with the architecture spec, input recipe, and one entry
// per parameter tensor {name, shape, values}.
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_to_json(const Model& model);
Model checkpoint_from_json(std::string_view text);

}  // namespace ppgbench
