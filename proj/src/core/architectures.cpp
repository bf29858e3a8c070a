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

#include "ppgbench/core/architectures.h"

#include <fstream>
#include <sstream>

#include "ppgbench/core/error.h"
#include "ppgbench/core/windowing.h"

namespace ppgbench {

using nlohmann::json;

namespace {

constexpr std::size_t kVggConvsPerBlock[5] = {2, 2, 3, 3, 3};
constexpr std::size_t kVggKernel = 3;
constexpr std::size_t kPool = 2;
constexpr char kCheckpointFormat[] = "ppgbench-checkpoint/1";

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + items[i];
  return s;
}

// Length after the VGG conv/pool stack, or 0 if a conv no longer fits.
std::size_t vgg_output_length(std::size_t len) {
  for (std::size_t convs : kVggConvsPerBlock) {
    for (std::size_t c = 0; c < convs; ++c) {
      if (len < kVggKernel) return 0;
      len -= kVggKernel - 1;
    }
    len /= std::min(kPool, len);
  }
  return len;
}

}  // namespace

std::string_view to_string(ArchFamily f) {
  switch (f) {
    case ArchFamily::kPulseNet: return "pulsenet";
    case ArchFamily::kVgg16Inv: return "vgg16_inv";
    case ArchFamily::kCnn2d: return "cnn2d";
  }
  return "pulsenet";
}

ArchFamily parse_arch_family(std::string_view s) {
  if (s == "pulsenet") return ArchFamily::kPulseNet;
  if (s == "vgg16_inv") return ArchFamily::kVgg16Inv;
  if (s == "cnn2d") return ArchFamily::kCnn2d;
  throw ValidationError("unknown architecture family '" + std::string(s) +
                        "' (valid: pulsenet, vgg16_inv, cnn2d)");
}

void ArchitectureSpec::validate() const {
  if (n_classes < 2) throw ValidationError("architecture: n_classes must be >= 2");
  switch (family) {
    case ArchFamily::kPulseNet:
      for (std::size_t k : kernel_sizes) {
        if (k < 2) throw ValidationError("pulsenet: kernel sizes must be >= 2");
      }
      if (branch_channels < 1 || hidden_units < 1) {
        throw ValidationError("pulsenet: channel and hidden sizes must be >= 1");
      }
      break;
    case ArchFamily::kVgg16Inv:
      if (channel_sequence.size() != 5) {
        throw ValidationError("vgg16_inv: channel_sequence needs 5 entries, one per block");
      }
      for (std::size_t c : channel_sequence) {
        if (c < 1) throw ValidationError("vgg16_inv: channel counts must be >= 1");
      }
      if (hidden_units < 1) throw ValidationError("vgg16_inv: hidden_units must be >= 1");
      break;
    case ArchFamily::kCnn2d:
      if (block_channels.size() != 3) {
        throw ValidationError("cnn2d: block_channels needs 3 entries");
      }
      for (std::size_t c : block_channels) {
        if (c < 1) throw ValidationError("cnn2d: channel counts must be >= 1");
      }
      break;
  }
}

std::vector<std::string> architecture_names() {
  return {"pulsenet", "pulsenet_var1", "pulsenet_var2", "vgg16_inv", "cnn2d"};
}

ArchitectureSpec architecture_by_name(std::string_view name) {
  ArchitectureSpec s;
  if (name == "pulsenet") {
    s.kernel_sizes = {50, 30, 20};
  } else if (name == "pulsenet_var1") {
    s.kernel_sizes = {50, 10, 4};
  } else if (name == "pulsenet_var2") {
    s.kernel_sizes = {15, 8, 2};
  } else if (name == "vgg16_inv") {
    s.family = ArchFamily::kVgg16Inv;
  } else if (name == "cnn2d") {
    s.family = ArchFamily::kCnn2d;
  } else {
    throw ValidationError("unknown architecture '" + std::string(name) +
                          "' (valid: " + join(architecture_names()) + ")");
  }
  return s;
}

std::string display_name(const ArchitectureSpec& spec) {
  switch (spec.family) {
    case ArchFamily::kPulseNet: {
      const auto& k = spec.kernel_sizes;
      if (k == std::array<std::size_t, 3>{50, 30, 20}) return "PulseNet";
      std::ostringstream s;
      s << "PulseNet [" << k[0] << ',' << k[1] << ',' << k[2] << ']';
      return s.str();
    }
    case ArchFamily::kVgg16Inv: return "VGG16-Inv";
    case ArchFamily::kCnn2d: return "CNN-2D";
  }
  return "?";
}

json to_json(const ArchitectureSpec& spec) {
  return json{{"family", to_string(spec.family)},
              {"kernel_sizes", spec.kernel_sizes},
              {"branch_channels", spec.branch_channels},
              {"hidden_units", spec.hidden_units},
              {"channel_sequence", spec.channel_sequence},
              {"block_channels", spec.block_channels},
              {"n_classes", spec.n_classes}};
}

ArchitectureSpec architecture_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("architecture: expected an object");
  ArchitectureSpec s;
  try {
    if (auto it = doc.find("name"); it != doc.end()) s = architecture_by_name(it->get<std::string>());
    if (auto it = doc.find("family"); it != doc.end()) {
      s.family = parse_arch_family(it->get<std::string>());
    }
    if (auto it = doc.find("kernel_sizes"); it != doc.end()) {
      const auto k = it->get<std::vector<std::size_t>>();
      if (k.size() != 3) throw ParseError("architecture: kernel_sizes needs 3 entries");
      s.kernel_sizes = {k[0], k[1], k[2]};
    }
    if (auto it = doc.find("branch_channels"); it != doc.end()) s.branch_channels = it->get<std::size_t>();
    if (auto it = doc.find("hidden_units"); it != doc.end()) s.hidden_units = it->get<std::size_t>();
    if (auto it = doc.find("channel_sequence"); it != doc.end()) {
      s.channel_sequence = it->get<std::vector<std::size_t>>();
    }
    if (auto it = doc.find("block_channels"); it != doc.end()) {
      s.block_channels = it->get<std::vector<std::size_t>>();
    }
    if (auto it = doc.find("n_classes"); it != doc.end()) s.n_classes = it->get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("architecture: ") + e.what());
  }
  s.validate();
  return s;
}

Graph build_pulsenet(const ArchitectureSpec& spec, std::size_t input_len) {
  spec.validate();
  if (spec.family != ArchFamily::kPulseNet) throw ValidationError("build_pulsenet: wrong family");
  for (std::size_t k : spec.kernel_sizes) {
    if (k > input_len) {
      throw ShapeError("pulsenet: kernel size " + std::to_string(k) + " exceeds input length " +
                       std::to_string(input_len));
    }
  }
  Graph g;
  const NodeId x = g.input({1, input_len});
  const std::size_t ch = spec.branch_channels;
  std::vector<NodeId> pooled;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t k = spec.kernel_sizes[i];
    const std::string tag = "branch" + std::to_string(i + 1);
    const NodeId w = g.param({ch, 1, k}, k, tag + ".weight");
    const NodeId b = g.param({ch}, k, tag + ".bias");
    pooled.push_back(g.global_maxpool(g.relu(g.conv1d(x, w, b))));
  }
  const NodeId cat = g.concat(pooled);
  const std::size_t feat = 3 * ch;
  const NodeId w1 = g.param({spec.hidden_units, feat}, feat, "fc1.weight");
  const NodeId b1 = g.param({spec.hidden_units}, feat, "fc1.bias");
  const NodeId h = g.relu(g.dense(cat, w1, b1));
  const NodeId w2 = g.param({spec.n_classes, spec.hidden_units}, spec.hidden_units, "fc2.weight");
  const NodeId b2 = g.param({spec.n_classes}, spec.hidden_units, "fc2.bias");
  g.set_output(g.dense(h, w2, b2));
  return g;
}

std::size_t vgg16_inv_min_input() {
  std::size_t n = 1;
  while (vgg_output_length(n) == 0) ++n;
  return n;
}

Graph build_vgg16_inv(const ArchitectureSpec& spec, std::size_t input_len) {
  spec.validate();
  if (spec.family != ArchFamily::kVgg16Inv) throw ValidationError("build_vgg16_inv: wrong family");
  if (vgg_output_length(input_len) == 0) {
    throw ShapeError("vgg16_inv: input length " + std::to_string(input_len) +
                     " too short; requires at least " + std::to_string(vgg16_inv_min_input()));
  }
  Graph g;
  NodeId cur = g.input({1, input_len});
  std::size_t in_ch = 1;
  for (std::size_t blk = 0; blk < 5; ++blk) {
    const std::size_t out_ch = spec.channel_sequence[blk];
    for (std::size_t c = 0; c < kVggConvsPerBlock[blk]; ++c) {
      const std::string tag = "block" + std::to_string(blk + 1) + ".conv" + std::to_string(c + 1);
      const std::size_t fan_in = in_ch * kVggKernel;
      const NodeId w = g.param({out_ch, in_ch, kVggKernel}, fan_in, tag + ".weight");
      const NodeId b = g.param({out_ch}, fan_in, tag + ".bias");
      cur = g.relu(g.conv1d(cur, w, b));
      in_ch = out_ch;
    }
    cur = g.maxpool(cur, kPool, 1);
  }
  std::size_t feat = shape_size(g.shape(cur));
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t out = i < 2 ? spec.hidden_units : spec.n_classes;
    const std::string tag = "fc" + std::to_string(i + 1);
    const NodeId w = g.param({out, feat}, feat, tag + ".weight");
    const NodeId b = g.param({out}, feat, tag + ".bias");
    cur = g.dense(cur, w, b);
    if (i < 2) cur = g.relu(cur);
    feat = out;
  }
  g.set_output(cur);
  return g;
}

Graph build_cnn2d(const ArchitectureSpec& spec, std::size_t bins, std::size_t frames) {
  spec.validate();
  if (spec.family != ArchFamily::kCnn2d) throw ValidationError("build_cnn2d: wrong family");
  // Walk the shape chain first so the error names the input size.
  std::size_t h = bins, w = frames;
  for (std::size_t blk = 0; blk < 3; ++blk) {
    if (h < 3 || w < 3) {
      throw ShapeError("cnn2d: spectrogram " + std::to_string(bins) + "x" + std::to_string(frames) +
                       " is too small for three 3x3 conv blocks");
    }
    h -= 2;
    w -= 2;
    h /= std::min(kPool, h);
    w /= std::min(kPool, w);
  }
  Graph g;
  NodeId cur = g.input({1, bins, frames});
  std::size_t in_ch = 1;
  for (std::size_t blk = 0; blk < 3; ++blk) {
    const std::size_t out_ch = spec.block_channels[blk];
    const std::string tag = "block" + std::to_string(blk + 1) + ".conv";
    const std::size_t fan_in = in_ch * 9;
    const NodeId wt = g.param({out_ch, in_ch, 3, 3}, fan_in, tag + ".weight");
    const NodeId b = g.param({out_ch}, fan_in, tag + ".bias");
    cur = g.maxpool(g.relu(g.conv2d(cur, wt, b)), kPool, 2);
    in_ch = out_ch;
  }
  cur = g.global_maxpool(cur);
  const NodeId wf = g.param({spec.n_classes, in_ch}, in_ch, "fc.weight");
  const NodeId bf = g.param({spec.n_classes}, in_ch, "fc.bias");
  g.set_output(g.dense(cur, wf, bf));
  return g;
}

std::size_t param_count(const Graph& graph) { return graph.param_count(); }

std::vector<double> Model::prepare_input(std::span<const double> samples) const {
  if (samples.size() != window_len) {
    throw ShapeError("model expects windows of " + std::to_string(window_len) + " samples, got " +
                     std::to_string(samples.size()));
  }
  std::vector<double> x = normalize_window(samples);
  if (spec.family != ArchFamily::kCnn2d) return x;
  return log_compress(ppgbench::stft(x, stft, sample_rate_hz), stft.log_floor).values;
}

std::vector<double> Model::logits(std::span<const double> samples) {
  const Tensor& out = graph.forward(prepare_input(samples));
  return out.values;
}

Model build_model(const ArchitectureSpec& spec, std::size_t window_len, double sample_rate_hz,
                  const StftConfig& stft_cfg) {
  Model m;
  m.spec = spec;
  m.stft = stft_cfg;
  m.window_len = window_len;
  m.sample_rate_hz = sample_rate_hz;
  switch (spec.family) {
    case ArchFamily::kPulseNet:
      m.graph = build_pulsenet(spec, window_len);
      break;
    case ArchFamily::kVgg16Inv:
      m.graph = build_vgg16_inv(spec, window_len);
      break;
    case ArchFamily::kCnn2d: {
      stft_cfg.validate();
      if (window_len < stft_cfg.frame_len) {
        throw ShapeError("cnn2d: window of " + std::to_string(window_len) +
                         " samples is shorter than one STFT frame");
      }
      const std::size_t bins = stft_cfg.frame_len / 2 + 1;
      const std::size_t frames = (window_len - stft_cfg.frame_len) / stft_cfg.hop + 1;
      m.graph = build_cnn2d(spec, bins, frames);
      break;
    }
  }
  return m;
}

std::string checkpoint_to_json(const Model& model) {
  json params = json::array();
  for (NodeId p : model.graph.params()) {
    const Tensor& t = model.graph.tensor(p);
    params.push_back(json{{"name", model.graph.param_name(p)}, {"shape", t.shape}, {"values", t.values}});
  }
  json doc{{"format", kCheckpointFormat},
           {"architecture", to_json(model.spec)},
           {"window_len", model.window_len},
           {"sample_rate_hz", model.sample_rate_hz},
           {"stft",
            {{"frame_len", model.stft.frame_len},
             {"hop", model.stft.hop},
             {"window_fn", to_string(model.stft.window_fn)},
             {"log_floor", model.stft.log_floor}}},
           {"parameters", std::move(params)}};
  return doc.dump();
}

Model checkpoint_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", "") != kCheckpointFormat) {
      throw ParseError("checkpoint: unsupported or missing format tag");
    }
    StftConfig stft;
    const json& js = doc.at("stft");
    stft.frame_len = js.at("frame_len").get<std::size_t>();
    stft.hop = js.at("hop").get<std::size_t>();
    stft.window_fn = parse_window_function(js.at("window_fn").get<std::string>());
    stft.log_floor = js.at("log_floor").get<double>();
    Model m = build_model(architecture_from_json(doc.at("architecture")),
                          doc.at("window_len").get<std::size_t>(),
                          doc.at("sample_rate_hz").get<double>(), stft);
    const json& params = doc.at("parameters");
    if (!params.is_array() || params.size() != m.graph.params().size()) {
      throw ParseError("checkpoint: parameter list does not match the architecture");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const NodeId id = m.graph.params()[i];
      Tensor& t = m.graph.tensor(id);
      if (params[i].at("name").get<std::string>() != m.graph.param_name(id) ||
          params[i].at("shape").get<Shape>() != t.shape) {
        throw ParseError("checkpoint: parameter " + std::to_string(i) + " (" +
                         m.graph.param_name(id) + ") has the wrong name or shape");
      }
      auto values = params[i].at("values").get<std::vector<double>>();
      if (values.size() != t.size()) throw ParseError("checkpoint: value count mismatch");
      t.values = std::move(values);
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << checkpoint_to_json(model);
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace ppgbench
