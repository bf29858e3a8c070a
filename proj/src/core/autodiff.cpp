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

#include "ppgbench/core/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ppgbench/core/error.h"
#include "ppgbench/core/rng.h"

namespace ppgbench {

namespace {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}


}  // namespace

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream s;
  s << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) s << (i ? "x" : "") << shape[i];
  s << ']';
  return s.str();
}

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)), values(shape_size(shape), fill) {}

Tensor::Tensor(Shape s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
  if (values.size() != shape_size(shape)) {
    throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape " +
                     shape_string(shape));
  }
}

NodeId Graph::add(Node n) {
  for (NodeId in : n.inputs) {
    if (in >= nodes_.size()) throw ShapeError("graph: unknown input node");
  }
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

NodeId Graph::input(Shape shape) {
  if (input_ != static_cast<NodeId>(-1)) throw ShapeError("graph: input already declared");
  if (shape.empty() || shape_size(shape) == 0) throw ShapeError("graph: empty input shape");
  Node n;
  n.op = OpKind::kInput;
  n.out = Tensor(std::move(shape));
  input_ = add(std::move(n));
  return input_;
}

NodeId Graph::param(Shape shape, std::size_t fan_in, std::string name) {
  if (shape.empty() || shape_size(shape) == 0) throw ShapeError("graph: empty parameter shape");
  Node n;
  n.op = OpKind::kParam;
  n.out = Tensor(std::move(shape));
  n.out.ensure_grad();
  n.fan_in = std::max<std::size_t>(fan_in, 1);
  n.name = std::move(name);
  const NodeId id = add(std::move(n));
  params_.push_back(id);
  return id;
}

NodeId Graph::conv1d(NodeId x, NodeId w, NodeId b) {
  const Shape& xs = shape(x);
  const Shape& ws = shape(w);
  const Shape& bs = shape(b);
  if (xs.size() != 2 || ws.size() != 3 || bs.size() != 1) {
    throw ShapeError("conv1d: expected input [C,L], kernel [O,C,K], bias [O]");
  }
  if (ws[1] != xs[0] || bs[0] != ws[0]) {
    throw ShapeError("conv1d: channel mismatch between input " + shape_string(xs) +
                     " and kernel " + shape_string(ws));
  }
  if (ws[2] > xs[1]) {
    throw ShapeError("conv1d: kernel size " + std::to_string(ws[2]) + " exceeds input length " +
                     std::to_string(xs[1]));
  }
  Node n;
  n.op = OpKind::kConv1d;
  n.inputs = {x, w, b};
  n.out = Tensor(Shape{ws[0], xs[1] - ws[2] + 1});
  return add(std::move(n));
}

NodeId Graph::conv2d(NodeId x, NodeId w, NodeId b) {
  const Shape& xs = shape(x);
  const Shape& ws = shape(w);
  const Shape& bs = shape(b);
  if (xs.size() != 3 || ws.size() != 4 || bs.size() != 1) {
    throw ShapeError("conv2d: expected input [C,H,W], kernel [O,C,KH,KW], bias [O]");
  }
  if (ws[1] != xs[0] || bs[0] != ws[0]) {
    throw ShapeError("conv2d: channel mismatch between input " + shape_string(xs) +
                     " and kernel " + shape_string(ws));
  }
  if (ws[2] > xs[1] || ws[3] > xs[2]) {
    throw ShapeError("conv2d: kernel " + shape_string(ws) + " larger than input " +
                     shape_string(xs));
  }
  Node n;
  n.op = OpKind::kConv2d;
  n.inputs = {x, w, b};
  n.out = Tensor(Shape{ws[0], xs[1] - ws[2] + 1, xs[2] - ws[3] + 1});
  return add(std::move(n));
}

NodeId Graph::maxpool(NodeId x, std::size_t pool, int dims) {
  if (pool < 1) throw ValidationError("maxpool: pool size must be >= 1");
  const Shape& xs = shape(x);
  Node n;
  n.inputs = {x};
  n.pool = pool;
  if (dims == 1) {
    if (xs.size() != 2) throw ShapeError("maxpool1d: expected input [C,L]");
    const std::size_t p = std::min(pool, xs[1]);
    n.op = OpKind::kMaxPool1d;
    n.out = Tensor(Shape{xs[0], xs[1] / p});
  } else if (dims == 2) {
    if (xs.size() != 3) throw ShapeError("maxpool2d: expected input [C,H,W]");
    const std::size_t ph = std::min(pool, xs[1]);
    const std::size_t pw = std::min(pool, xs[2]);
    n.op = OpKind::kMaxPool2d;
    n.out = Tensor(Shape{xs[0], xs[1] / ph, xs[2] / pw});
  } else {
    throw ValidationError("maxpool: dims must be 1 or 2");
  }
  n.argmax.resize(n.out.size());
  return add(std::move(n));
}

NodeId Graph::global_maxpool(NodeId x) {
  const Shape& xs = shape(x);
  if (xs.size() < 2) throw ShapeError("global_maxpool: expected input [C, ...]");
  Node n;
  n.op = OpKind::kGlobalMaxPool;
  n.inputs = {x};
  n.out = Tensor(Shape{xs[0]});
  n.argmax.resize(xs[0]);
  return add(std::move(n));
}

NodeId Graph::dense(NodeId x, NodeId w, NodeId b) {
  const std::size_t in = shape_size(shape(x));
  const Shape& ws = shape(w);
  const Shape& bs = shape(b);
  if (ws.size() != 2 || bs.size() != 1 || ws[1] != in || bs[0] != ws[0]) {
    throw ShapeError("dense: weights " + shape_string(ws) + " do not match input of size " +
                     std::to_string(in));
  }
  Node n;
  n.op = OpKind::kDense;
  n.inputs = {x, w, b};
  n.out = Tensor(Shape{ws[0]});
  return add(std::move(n));
}

NodeId Graph::relu(NodeId x) {
  Node n;
  n.op = OpKind::kRelu;
  n.inputs = {x};
  n.out = Tensor(shape(x));
  return add(std::move(n));
}

NodeId Graph::concat(std::span<const NodeId> xs) {
  if (xs.empty()) throw ShapeError("concat: no inputs");
  std::size_t total = 0;
  for (NodeId x : xs) total += shape_size(shape(x));
  Node n;
  n.op = OpKind::kConcat;
  n.inputs.assign(xs.begin(), xs.end());
  n.out = Tensor(Shape{total});
  return add(std::move(n));
}

void Graph::set_output(NodeId id) {
  if (id >= nodes_.size()) throw ShapeError("graph: unknown output node");
  output_ = id;
}

const Shape& Graph::input_shape() const {
  if (input_ == static_cast<NodeId>(-1)) throw ShapeError("graph: no input declared");
  return nodes_[input_].out.shape;
}

const Shape& Graph::output_shape() const {
  if (output_ == static_cast<NodeId>(-1)) throw ShapeError("graph: no output set");
  return nodes_[output_].out.shape;
}

std::size_t Graph::weight_layer_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) {
    return n.op == OpKind::kConv1d || n.op == OpKind::kConv2d || n.op == OpKind::kDense;
  }));
}

void Graph::forward_node(Node& n) {
  double* y = n.out.values.data();
  switch (n.op) {
    case OpKind::kInput:
    case OpKind::kParam:
      return;
    case OpKind::kConv1d: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      const Tensor& w = nodes_[n.inputs[1]].out;
      const Tensor& b = nodes_[n.inputs[2]].out;
      const std::size_t co = w.shape[0], ci = w.shape[1], k = w.shape[2];
      const std::size_t len = x.shape[1], lo = n.out.shape[1];
      for (std::size_t o = 0; o < co; ++o) {
        double* yr = y + o * lo;
        std::fill(yr, yr + lo, b.values[o]);
        for (std::size_t c = 0; c < ci; ++c) {
          const double* xr = x.values.data() + c * len;
          const double* wr = w.values.data() + (o * ci + c) * k;
          for (std::size_t j = 0; j < k; ++j) axpy(wr[j], xr + j, yr, lo);
        }
      }
      return;
    }
    case OpKind::kConv2d: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      const Tensor& w = nodes_[n.inputs[1]].out;
      const Tensor& b = nodes_[n.inputs[2]].out;
      const std::size_t co = w.shape[0], ci = w.shape[1], kh = w.shape[2], kw = w.shape[3];
      const std::size_t h = x.shape[1], wd = x.shape[2];
      const std::size_t ho = n.out.shape[1], wo = n.out.shape[2];
      for (std::size_t o = 0; o < co; ++o) {
        double* yo = y + o * ho * wo;
        std::fill(yo, yo + ho * wo, b.values[o]);
        for (std::size_t c = 0; c < ci; ++c) {
          const double* xc = x.values.data() + c * h * wd;
          const double* wk = w.values.data() + (o * ci + c) * kh * kw;
          for (std::size_t i = 0; i < kh; ++i) {
            for (std::size_t j = 0; j < kw; ++j) {
              const double wv = wk[i * kw + j];
              for (std::size_t r = 0; r < ho; ++r) axpy(wv, xc + (r + i) * wd + j, yo + r * wo, wo);
            }
          }
        }
      }
      return;
    }
    case OpKind::kMaxPool1d: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      const std::size_t ch = x.shape[0], len = x.shape[1], lo = n.out.shape[1];
      const std::size_t p = std::min(n.pool, len);
      for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t t = 0; t < lo; ++t) {
          std::size_t best = c * len + t * p;
          for (std::size_t q = 1; q < p; ++q) {
            const std::size_t idx = c * len + t * p + q;
            if (x.values[idx] > x.values[best]) best = idx;
          }
          n.argmax[c * lo + t] = best;
          y[c * lo + t] = x.values[best];
        }
      }
      return;
    }
    case OpKind::kMaxPool2d: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      const std::size_t ch = x.shape[0], h = x.shape[1], wd = x.shape[2];
      const std::size_t ho = n.out.shape[1], wo = n.out.shape[2];
      const std::size_t ph = std::min(n.pool, h), pw = std::min(n.pool, wd);
      for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t r = 0; r < ho; ++r) {
          for (std::size_t s = 0; s < wo; ++s) {
            std::size_t best = c * h * wd + r * ph * wd + s * pw;
            for (std::size_t i = 0; i < ph; ++i) {
              for (std::size_t j = 0; j < pw; ++j) {
                const std::size_t idx = c * h * wd + (r * ph + i) * wd + s * pw + j;
                if (x.values[idx] > x.values[best]) best = idx;
              }
            }
            const std::size_t out = (c * ho + r) * wo + s;
            n.argmax[out] = best;
            y[out] = x.values[best];
          }
        }
      }
      return;
    }
    case OpKind::kGlobalMaxPool: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      const std::size_t ch = x.shape[0];
      const std::size_t per = x.size() / ch;
      for (std::size_t c = 0; c < ch; ++c) {
        std::size_t best = c * per;
        for (std::size_t i = 1; i < per; ++i) {
          if (x.values[c * per + i] > x.values[best]) best = c * per + i;
        }
        n.argmax[c] = best;
        y[c] = x.values[best];
      }
      return;
    }
    case OpKind::kDense: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      const Tensor& w = nodes_[n.inputs[1]].out;
      const Tensor& b = nodes_[n.inputs[2]].out;
      const std::size_t out = w.shape[0], in = w.shape[1];
      for (std::size_t o = 0; o < out; ++o) {
        y[o] = b.values[o] + dot(w.values.data() + o * in, x.values.data(), in);
      }
      return;
    }
    case OpKind::kRelu: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x.values[i] > 0.0 ? x.values[i] : 0.0;
      return;
    }
    case OpKind::kConcat: {
      std::size_t off = 0;
      for (NodeId in : n.inputs) {
        const Tensor& x = nodes_[in].out;
        std::copy(x.values.begin(), x.values.end(), y + off);
        off += x.size();
      }
      return;
    }
  }
}

bool Graph::needs_grad(NodeId id) const {
  const Node& n = nodes_[id];
  if (n.op == OpKind::kParam) return true;
  if (n.op == OpKind::kInput) return input_requires_grad_;
  return n.out.has_grad();
}

void Graph::backward_node(Node& n) {
  const double* dy = n.out.grad.data();
  auto grad_of = [&](std::size_t i) -> double* {
    return needs_grad(n.inputs[i]) ? nodes_[n.inputs[i]].out.grad.data() : nullptr;
  };
  switch (n.op) {
    case OpKind::kInput:
    case OpKind::kParam:
      return;
    case OpKind::kConv1d: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      const Tensor& w = nodes_[n.inputs[1]].out;
      double* dx = grad_of(0);
      double* dw = grad_of(1);
      double* db = grad_of(2);
      const std::size_t co = w.shape[0], ci = w.shape[1], k = w.shape[2];
      const std::size_t len = x.shape[1], lo = n.out.shape[1];
      for (std::size_t o = 0; o < co; ++o) {
        const double* dyr = dy + o * lo;
        if (db) {
          double s = 0.0;
          for (std::size_t t = 0; t < lo; ++t) s += dyr[t];
          db[o] += s;
        }
        for (std::size_t c = 0; c < ci; ++c) {
          const double* xr = x.values.data() + c * len;
          const double* wr = w.values.data() + (o * ci + c) * k;
          double* dwr = dw ? dw + (o * ci + c) * k : nullptr;
          double* dxr = dx ? dx + c * len : nullptr;
          for (std::size_t j = 0; j < k; ++j) {
            if (dwr) dwr[j] += dot(dyr, xr + j, lo);
            if (dxr) axpy(wr[j], dyr, dxr + j, lo);
          }
        }
      }
      return;
    }
    case OpKind::kConv2d: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      const Tensor& w = nodes_[n.inputs[1]].out;
      double* dx = grad_of(0);
      double* dw = grad_of(1);
      double* db = grad_of(2);
      const std::size_t co = w.shape[0], ci = w.shape[1], kh = w.shape[2], kw = w.shape[3];
      const std::size_t h = x.shape[1], wd = x.shape[2];
      const std::size_t ho = n.out.shape[1], wo = n.out.shape[2];
      for (std::size_t o = 0; o < co; ++o) {
        const double* dyo = dy + o * ho * wo;
        if (db) {
          double s = 0.0;
          for (std::size_t t = 0; t < ho * wo; ++t) s += dyo[t];
          db[o] += s;
        }
        for (std::size_t c = 0; c < ci; ++c) {
          const double* xc = x.values.data() + c * h * wd;
          const double* wk = w.values.data() + (o * ci + c) * kh * kw;
          double* dwk = dw ? dw + (o * ci + c) * kh * kw : nullptr;
          double* dxc = dx ? dx + c * h * wd : nullptr;
          for (std::size_t i = 0; i < kh; ++i) {
            for (std::size_t j = 0; j < kw; ++j) {
              double acc = 0.0;
              for (std::size_t r = 0; r < ho; ++r) {
                if (dwk) acc += dot(dyo + r * wo, xc + (r + i) * wd + j, wo);
                if (dxc) axpy(wk[i * kw + j], dyo + r * wo, dxc + (r + i) * wd + j, wo);
              }
              if (dwk) dwk[i * kw + j] += acc;
            }
          }
        }
      }
      return;
    }
    case OpKind::kMaxPool1d:
    case OpKind::kMaxPool2d:
    case OpKind::kGlobalMaxPool: {
      double* dx = grad_of(0);
      if (!dx) return;
      for (std::size_t i = 0; i < n.argmax.size(); ++i) dx[n.argmax[i]] += dy[i];
      return;
    }
    case OpKind::kDense: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      const Tensor& w = nodes_[n.inputs[1]].out;
      double* dx = grad_of(0);
      double* dw = grad_of(1);
      double* db = grad_of(2);
      const std::size_t out = w.shape[0], in = w.shape[1];
      for (std::size_t o = 0; o < out; ++o) {
        if (db) db[o] += dy[o];
        if (dw) axpy(dy[o], x.values.data(), dw + o * in, in);
        if (dx) axpy(dy[o], w.values.data() + o * in, dx, in);
      }
      return;
    }
    case OpKind::kRelu: {
      const Tensor& x = nodes_[n.inputs[0]].out;
      double* dx = grad_of(0);
      if (!dx) return;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x.values[i] > 0.0) dx[i] += dy[i];
      }
      return;
    }
    case OpKind::kConcat: {
      std::size_t off = 0;
      for (std::size_t i = 0; i < n.inputs.size(); ++i) {
        const std::size_t sz = nodes_[n.inputs[i]].out.size();
        if (double* dx = grad_of(i)) {
          for (std::size_t j = 0; j < sz; ++j) dx[j] += dy[off + j];
        }
        off += sz;
      }
      return;
    }
  }
}

const Tensor& Graph::forward(std::span<const double> input) {
  if (input_ == static_cast<NodeId>(-1) || output_ == static_cast<NodeId>(-1)) {
    throw ShapeError("graph: input and output must be declared before forward");
  }
  Tensor& in = nodes_[input_].out;
  if (input.size() != in.size()) {
    throw ShapeError("graph: input has " + std::to_string(input.size()) +
                     " values, expected shape " + shape_string(in.shape));
  }
  std::copy(input.begin(), input.end(), in.values.begin());
  for (NodeId id = 0; id <= output_; ++id) forward_node(nodes_[id]);
  return nodes_[output_].out;
}

void Graph::backward(std::span<const double> output_grad) {
  if (output_grad.size() != nodes_.at(output_).out.size()) {
    throw ShapeError("graph: output gradient has the wrong size");
  }
  // Decide which intermediate nodes carry gradients and clear them.
  for (NodeId id = 0; id <= output_; ++id) {
    Node& n = nodes_[id];
    if (n.op == OpKind::kParam) continue;
    bool want = false;
    if (n.op == OpKind::kInput) {
      want = input_requires_grad_;
    } else {
      for (NodeId in : n.inputs) want = want || needs_grad(in);
    }
    if (want) {
      n.out.grad.assign(n.out.size(), 0.0);
    } else {
      n.out.grad.clear();
    }
  }
  Node& out = nodes_[output_];
  if (!out.out.has_grad()) return;
  std::copy(output_grad.begin(), output_grad.end(), out.out.grad.begin());
  for (NodeId id = output_ + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.op != OpKind::kParam && n.op != OpKind::kInput && n.out.has_grad()) backward_node(n);
  }
}

void Graph::zero_grad() {
  for (NodeId p : params_) std::fill(nodes_[p].out.grad.begin(), nodes_[p].out.grad.end(), 0.0);
}

std::span<const double> Graph::input_grad() const {
  if (!input_requires_grad_) throw ShapeError("graph: input gradients are not enabled");
  return nodes_.at(input_).out.grad;
}

std::size_t Graph::param_count() const {
  std::size_t total = 0;
  for (NodeId p : params_) total += nodes_[p].out.size();
  return total;
}

std::vector<double> Graph::flat_parameters() const {
  std::vector<double> out;
  out.reserve(param_count());
  for (NodeId p : params_) {
    const auto& v = nodes_[p].out.values;
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

void Graph::set_flat_parameters(std::span<const double> values) {
  if (values.size() != param_count()) {
    throw ShapeError("graph: expected " + std::to_string(param_count()) + " parameters, got " +
                     std::to_string(values.size()));
  }
  std::size_t off = 0;
  for (NodeId p : params_) {
    auto& v = nodes_[p].out.values;
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(off),
              values.begin() + static_cast<std::ptrdiff_t>(off + v.size()), v.begin());
    off += v.size();
  }
}

std::vector<double> Graph::flat_gradients() const {
  std::vector<double> out;
  out.reserve(param_count());
  for (NodeId p : params_) {
    const auto& g = nodes_[p].out.grad;
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

void Graph::init_parameters(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  for (NodeId p : params_) {
    Node& n = nodes_[p];
    const double bound = std::sqrt(6.0 / static_cast<double>(n.fan_in));
    for (double& v : n.out.values) v = uniform(rng, -bound, bound);
    std::fill(n.out.grad.begin(), n.out.grad.end(), 0.0);
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (out[i] = std::exp(logits[i] - mx));
  for (double& v : out) v /= z;
  return out;
}

LossResult softmax_cross_entropy(std::span<const double> logits, std::size_t classes,
                                 std::span<const int> labels, std::span<const double> weights) {
  if (classes == 0 || logits.size() != labels.size() * classes) {
    throw ShapeError("cross_entropy: logits do not match batch x classes");
  }
  if (!weights.empty() && weights.size() != labels.size()) {
    throw ShapeError("cross_entropy: one weight per sample required");
  }
  const std::size_t batch = labels.size();
  LossResult r;
  r.grad.assign(logits.size(), 0.0);
  if (batch == 0) return r;
  double wsum = 0.0;
  for (std::size_t i = 0; i < batch; ++i) wsum += weights.empty() ? 1.0 : weights[i];
  if (!(wsum > 0.0)) throw ValidationError("cross_entropy: sample weights sum to zero");
  for (std::size_t i = 0; i < batch; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ValidationError("cross_entropy: label " + std::to_string(y) + " out of range [0, " +
                            std::to_string(classes) + ")");
    }
    const double* row = logits.data() + i * classes;
    const double mx = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
    const double lse = mx + std::log(z);
    const double w = (weights.empty() ? 1.0 : weights[i]) / wsum;
    r.loss += w * (lse - row[y]);
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(row[c] - lse);
      r.grad[i * classes + c] = w * (p - (static_cast<int>(c) == y ? 1.0 : 0.0));
    }
  }
  return r;
}

void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) throw ShapeError("sgd_step: size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

void sgd_step(Graph& graph, double lr) {
  for (NodeId p : graph.params()) {
    Tensor& t = graph.tensor(p);
    sgd_step(t.values, t.grad, lr);
  }
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

std::uint64_t Graph::activation_signature() const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (const Node& n : nodes_) {
    if (n.op == OpKind::kRelu) {
      const auto& in = nodes_[n.inputs[0]].out.values;
      std::uint64_t word = 0;
      for (std::size_t i = 0; i < in.size(); ++i) {
        word = (word << 1) | (in[i] > 0.0 ? 1u : 0u);
        if ((i & 63) == 63) {
          h = mix64(h ^ word);
          word = 0;
        }
      }
      h = mix64(h ^ word ^ in.size());
    } else if (n.op == OpKind::kMaxPool1d || n.op == OpKind::kMaxPool2d ||
               n.op == OpKind::kGlobalMaxPool) {
      for (std::size_t a : n.argmax) h = mix64(h ^ a);
    }
  }
  return h;
}

namespace {

struct Probe {
  double loss = 0.0;
  std::uint64_t signature = 0;
};

Probe batch_loss(Graph& g, std::span<const std::vector<double>> inputs,
                 std::span<const int> labels) {
  const std::size_t classes = g.output_shape()[0];
  std::vector<double> logits;
  logits.reserve(inputs.size() * classes);
  Probe p;
  for (const auto& x : inputs) {
    const Tensor& out = g.forward(x);
    logits.insert(logits.end(), out.values.begin(), out.values.end());
    p.signature = mix64(p.signature ^ g.activation_signature());
  }
  p.loss = softmax_cross_entropy(logits, classes, labels).loss;
  return p;
}

}  // namespace

GradCheckResult grad_check(Graph& graph, std::span<const std::vector<double>> inputs,
                           std::span<const int> labels, const GradCheckOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw ValidationError("grad_check: epsilon must be > 0");
  if (inputs.size() != labels.size() || inputs.empty()) {
    throw ValidationError("grad_check: need one label per input and a non-empty batch");
  }
  GradCheckResult res;
  const std::size_t classes = graph.output_shape().size() == 1 ? graph.output_shape()[0] : 0;
  if (classes == 0) throw ShapeError("grad_check: graph output must be a logit vector");
  const double inv_b = 1.0 / static_cast<double>(inputs.size());

  // Analytic gradients of the batch-mean loss.
  graph.set_input_requires_grad(false);
  graph.zero_grad();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor& out = graph.forward(inputs[i]);
    const int y = labels[i];
    LossResult l = softmax_cross_entropy(out.values, classes, std::span<const int>(&y, 1));
    for (double& v : l.grad) v *= inv_b;
    graph.backward(l.grad);
  }
  const std::vector<double> analytic = graph.flat_gradients();

  struct Coord {
    NodeId node;
    std::size_t index;
    std::size_t flat;
  };
  std::vector<Coord> coords;
  {
    std::size_t flat = 0;
    for (NodeId p : graph.params()) {
      for (std::size_t i = 0; i < graph.tensor(p).size(); ++i) coords.push_back({p, i, flat++});
    }
  }
  if (coords.size() > opts.max_coordinates) {
    Rng rng = make_rng(opts.seed);
    for (std::size_t i = 0; i < opts.max_coordinates; ++i) {
      const std::size_t j = i + uniform_index(rng, coords.size() - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(opts.max_coordinates);
  }

  const std::uint64_t base_sig = batch_loss(graph, inputs, labels).signature;
  const double eps = opts.epsilon;
  for (const Coord& c : coords) {
    double& v = graph.tensor(c.node).values[c.index];
    const double orig = v;
    v = orig + eps;
    const Probe lp = batch_loss(graph, inputs, labels);
    v = orig - eps;
    const Probe lm = batch_loss(graph, inputs, labels);
    v = orig;
    ++res.coordinates;
    if (lp.signature != base_sig || lm.signature != base_sig) {
      ++res.skipped_kinks;
      continue;
    }
    const double numeric = (lp.loss - lm.loss) / (2.0 * eps);
    res.max_rel_error = std::max(res.max_rel_error, relative_error(analytic[c.flat], numeric));
  }

  if (opts.check_input) {
    // d(mean loss)/d(inputs[0]) with the rest of the batch held fixed.
    graph.set_input_requires_grad(true);
    const Tensor& out = graph.forward(inputs[0]);
    const int y = labels[0];
    LossResult l = softmax_cross_entropy(out.values, classes, std::span<const int>(&y, 1));
    for (double& v : l.grad) v *= inv_b;
    graph.zero_grad();
    graph.backward(l.grad);
    const std::vector<double> dx(graph.input_grad().begin(), graph.input_grad().end());
    graph.set_input_requires_grad(false);
    std::vector<std::vector<double>> perturbed(inputs.begin(), inputs.end());
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double orig = perturbed[0][i];
      perturbed[0][i] = orig + eps;
      const Probe lp = batch_loss(graph, perturbed, labels);
      perturbed[0][i] = orig - eps;
      const Probe lm = batch_loss(graph, perturbed, labels);
      perturbed[0][i] = orig;
      ++res.coordinates;
      if (lp.signature != base_sig || lm.signature != base_sig) {
        ++res.skipped_kinks;
        continue;
      }
      res.max_rel_error =
          std::max(res.max_rel_error, relative_error(dx[i], (lp.loss - lm.loss) / (2.0 * eps)));
    }
  }
  graph.zero_grad();
  return res;
}

}  // namespace ppgbench
