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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ppgbench {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major real array with an optional gradient buffer.
struct Tensor {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  bool has_grad() const { return !grad.empty(); }
  void ensure_grad() { grad.assign(values.size(), 0.0); }
};

using NodeId = std::size_t;

enum class OpKind {
  kInput,
  kParam,
  kConv1d,
  kConv2d,
  kMaxPool1d,
  kMaxPool2d,
  kGlobalMaxPool,
  kDense,
  kRelu,
  kConcat,
};

// Static computation graph over a single sample. Nodes are appended in
// topological order; forward() walks them in order and backward() walks them
// once in reverse. Parameter gradients accumulate across backward() calls
// until zero_grad().
class Graph {
 public:
  NodeId input(Shape shape);
  // fan_in sets the uniform init bound sqrt(6 / fan_in).
  NodeId param(Shape shape, std::size_t fan_in, std::string name);

  // x: [C_in, L], w: [C_out, C_in, k], b: [C_out] -> [C_out, L - k + 1].
  NodeId conv1d(NodeId x, NodeId w, NodeId b);
  // x: [C_in, H, W], w: [C_out, C_in, kh, kw], b: [C_out].
  NodeId conv2d(NodeId x, NodeId w, NodeId b);
  // Non-overlapping max over blocks of `pool` along each spatial axis. The
  // remainder is truncated; an axis shorter than `pool` is pooled over its
  // full extent. Ties resolve to the lowest index.
  NodeId maxpool(NodeId x, std::size_t pool, int dims);
  // Max over all spatial positions per channel: [C, ...] -> [C].
  NodeId global_maxpool(NodeId x);
  // Flattens x; w: [out, in], b: [out].
  NodeId dense(NodeId x, NodeId w, NodeId b);
  NodeId relu(NodeId x);
  // Flattened concatenation in argument order.
  NodeId concat(std::span<const NodeId> xs);

  void set_output(NodeId id);
  NodeId output_id() const { return output_; }
  NodeId input_id() const { return input_; }

  const Shape& input_shape() const;
  const Shape& output_shape() const;
  const Shape& shape(NodeId id) const { return nodes_.at(id).out.shape; }
  OpKind kind(NodeId id) const { return nodes_.at(id).op; }
  std::size_t node_count() const { return nodes_.size(); }

  // Layers that own a weight tensor (conv and dense).
  std::size_t weight_layer_count() const;

  const Tensor& forward(std::span<const double> input);
  // Back-propagates d(objective)/d(output) from the last forward().
  void backward(std::span<const double> output_grad);
  void zero_grad();

  void set_input_requires_grad(bool on) { input_requires_grad_ = on; }
  std::span<const double> input_grad() const;

  const std::vector<NodeId>& params() const { return params_; }
  const std::string& param_name(NodeId id) const { return nodes_.at(id).name; }
  Tensor& tensor(NodeId id) { return nodes_.at(id).out; }
  const Tensor& tensor(NodeId id) const { return nodes_.at(id).out; }

  std::size_t param_count() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> values);
  std::vector<double> flat_gradients() const;

  void init_parameters(std::uint64_t seed);

  // Hash of the piecewise-linear regime of the last forward(): relu signs and
  // pooling argmaxes. Equal signatures mean the graph is locally linear
  // between the two evaluations.
  std::uint64_t activation_signature() const;

 private:
  struct Node {
    OpKind op = OpKind::kInput;
    std::vector<NodeId> inputs;
    Tensor out;
    std::size_t pool = 0;
    std::size_t fan_in = 0;
    std::vector<std::size_t> argmax;
    std::string name;
  };

  NodeId add(Node n);
  Node& node(NodeId id) { return nodes_.at(id); }
  void forward_node(Node& n);
  void backward_node(Node& n);
  bool needs_grad(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<NodeId> params_;
  NodeId input_ = static_cast<NodeId>(-1);
  NodeId output_ = static_cast<NodeId>(-1);
  bool input_requires_grad_ = false;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as the logits
};

// Mean over the batch of -w_i * log softmax(logits_i)[label_i] / sum(w) when
// weights are given, plain mean otherwise. logits is [batch x classes].
LossResult softmax_cross_entropy(std::span<const double> logits, std::size_t classes,
                                 std::span<const int> labels,
                                 std::span<const double> weights = {});

std::vector<double> softmax(std::span<const double> logits);

// p <- p - lr * g
void sgd_step(std::span<double> params, std::span<const double> grads, double lr);
void sgd_step(Graph& graph, double lr);

struct GradCheckOptions {
  double epsilon = 1e-4;
  std::size_t max_coordinates = 10000;  // larger graphs use a seeded subset
  std::uint64_t seed = 0;
  bool check_input = false;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  // Coordinates whose +-epsilon probe changed the activation signature; they
  // straddle a relu/pool kink and are left out of max_rel_error.
  std::size_t skipped_kinks = 0;
};

// Relative error between analytic gradient a and central difference n,
// |a - n| / max(|a|, |n|, 1e-6).
double relative_error(double analytic, double numeric);

// Compares reverse-mode gradients of the mean cross-entropy over the given
// batch against central finite differences.
GradCheckResult grad_check(Graph& graph, std::span<const std::vector<double>> inputs,
                           std::span<const int> labels, const GradCheckOptions& opts = {});

}  // namespace ppgbench
