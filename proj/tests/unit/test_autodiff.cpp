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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ppgbench/core/autodiff.h"
#include "ppgbench/core/error.h"
#include "ppgbench/core/rng.h"

using namespace ppgbench;

namespace {

std::vector<double> randn(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * standard_normal(rng);
  return v;
}

// Values spaced at least `gap` apart, shuffled: keeps max-pool and relu off
// their kinks under a 1e-4 perturbation.
std::vector<double> untied(std::size_t n, Rng& rng, double gap = 0.01) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (static_cast<double>(i) - n / 2.0) * gap + 0.003;
  shuffle(v.begin(), v.end(), rng);
  return v;
}

// Graph plus a small dense head producing 2 logits.
struct Harness {
  Graph g;
  NodeId x = 0;
  void head(NodeId h) {
    const std::size_t n = shape_size(g.shape(h));
    const NodeId w = g.param({2, n}, n, "head.w");
    const NodeId b = g.param({2}, n, "head.b");
    g.set_output(g.dense(h, w, b));
  }
  double check(const std::vector<std::vector<double>>& inputs, std::uint64_t seed = 1) {
    g.init_parameters(seed);
    std::vector<int> labels(inputs.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
    GradCheckOptions o;
    o.check_input = true;
    const auto r = grad_check(g, inputs, labels, o);
    CHECK(r.coordinates == g.param_count() + shape_size(g.input_shape()));
    return r.max_rel_error;
  }
};

}  // namespace

TEST_CASE("conv1d forward examples") {
  Graph g;
  const NodeId x = g.input({1, 3});
  const NodeId w = g.param({1, 1, 2}, 2, "w");
  const NodeId b = g.param({1}, 2, "b");
  g.set_output(g.conv1d(x, w, b));
  g.tensor(w).values = {1, 1};
  g.tensor(b).values = {0};
  const auto& y = g.forward(std::vector<double>{1, 2, 3});
  CHECK(y.shape == Shape{1, 2});
  CHECK(y.values == std::vector<double>{3, 5});

  Graph id;
  const NodeId xi = id.input({1, 4});
  const NodeId wi = id.param({1, 1, 1}, 1, "w");
  const NodeId bi = id.param({1}, 1, "b");
  id.set_output(id.conv1d(xi, wi, bi));
  id.tensor(wi).values = {1};
  id.tensor(bi).values = {0};
  const std::vector<double> in = {4, -1, 0.5, 9};
  CHECK(id.forward(in).values == in);

  Graph bad;
  const NodeId xb = bad.input({1, 3});
  const NodeId wb = bad.param({1, 1, 4}, 4, "w");
  const NodeId bb = bad.param({1}, 4, "b");
  CHECK_THROWS_AS((void)bad.conv1d(xb, wb, bb), ShapeError);
}

TEST_CASE("conv2d forward examples") {
  Graph g;
  const NodeId x = g.input({1, 2, 2});
  const NodeId w = g.param({1, 1, 2, 2}, 4, "w");
  const NodeId b = g.param({1}, 4, "b");
  g.set_output(g.conv2d(x, w, b));
  g.tensor(w).values.assign(4, 1.0);
  g.tensor(b).values = {0};
  const auto& y = g.forward(std::vector<double>(4, 1.0));
  CHECK(y.shape == Shape{1, 1, 1});
  CHECK(y.values[0] == 4.0);

  Graph d;
  const NodeId xd = d.input({1, 4, 5});
  const NodeId wd = d.param({1, 1, 3, 3}, 9, "w");
  const NodeId bd = d.param({1}, 9, "b");
  d.set_output(d.conv2d(xd, wd, bd));
  d.tensor(wd).values.assign(9, 0.0);
  d.tensor(wd).values[4] = 1.0;  // centre delta
  d.tensor(bd).values = {0};
  std::vector<double> in(20);
  std::iota(in.begin(), in.end(), 0.0);
  const auto& yd = d.forward(in);
  REQUIRE(yd.shape == Shape{1, 2, 3});
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(yd.values[r * 3 + c] == in[(r + 1) * 5 + c + 1]);
}

TEST_CASE("maxpool forward examples") {
  Graph g;
  const NodeId x = g.input({1, 4});
  g.set_output(g.maxpool(x, 2, 1));
  CHECK(g.forward(std::vector<double>{1, 3, 2, 2}).values == std::vector<double>{3, 2});

  Graph one;
  const NodeId x1 = one.input({2, 3});
  one.set_output(one.maxpool(x1, 1, 1));
  const std::vector<double> in = {1, -2, 3, 0, 5, 4};
  CHECK(one.forward(in).values == in);

  Graph trunc;
  const NodeId xt = trunc.input({1, 5});
  trunc.set_output(trunc.maxpool(xt, 2, 1));
  CHECK(trunc.forward(std::vector<double>{1, 0, 0, 2, 9}).values == std::vector<double>{1, 2});

  Graph clamp;
  const NodeId xc = clamp.input({1, 3, 1});
  clamp.set_output(clamp.maxpool(xc, 2, 2));
  CHECK(clamp.output_shape() == Shape{1, 1, 1});
  CHECK(clamp.forward(std::vector<double>{1, 7, 2}).values == std::vector<double>{7});

  Graph bad;
  const NodeId xb = bad.input({1, 4});
  CHECK_THROWS_AS((void)bad.maxpool(xb, 0, 1), ValidationError);
}

TEST_CASE("maxpool routes gradient to the first maximum") {
  Graph g;
  const NodeId x = g.input({1, 4});
  g.set_output(g.maxpool(x, 4, 1));
  g.set_input_requires_grad(true);
  g.zero_grad();
  g.forward(std::vector<double>{1, 5, 5, 2});
  g.backward(std::vector<double>{1.0});
  const auto dx = g.input_grad();
  CHECK(std::vector<double>(dx.begin(), dx.end()) == std::vector<double>{0, 1, 0, 0});
}

TEST_CASE("dense and relu forward examples") {
  Graph g;
  const NodeId x = g.input({3});
  const NodeId w = g.param({3, 3}, 3, "w");
  const NodeId b = g.param({3}, 3, "b");
  g.set_output(g.dense(x, w, b));
  g.tensor(w).values = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  g.tensor(b).values = {0, 0, 0};
  const std::vector<double> in = {0.5, -2, 7};
  CHECK(g.forward(in).values == in);
  g.tensor(w).values.assign(9, 0.0);
  g.tensor(b).values = {1, 2, 3};
  CHECK(g.forward(in).values == std::vector<double>{1, 2, 3});

  Graph r;
  r.set_output(r.relu(r.input({3})));
  CHECK(r.forward(std::vector<double>{-1, 0, 2}).values == std::vector<double>{0, 0, 2});
  CHECK(r.forward(std::vector<double>{1, 2, 3}).values == std::vector<double>{1, 2, 3});
}

TEST_CASE("gradient checks for every op") {
  auto rng = make_rng(77);
  SUBCASE("conv1d 2->3, k=5, length 20") {
    Harness h;
    h.x = h.g.input({2, 20});
    const NodeId w = h.g.param({3, 2, 5}, 10, "w");
    const NodeId b = h.g.param({3}, 10, "b");
    h.head(h.g.conv1d(h.x, w, b));
    CHECK(h.check({randn(40, rng), randn(40, rng), randn(40, rng)}) < 1e-4);
  }
  SUBCASE("conv2d") {
    Harness h;
    h.x = h.g.input({2, 6, 5});
    const NodeId w = h.g.param({3, 2, 3, 2}, 12, "w");
    const NodeId b = h.g.param({3}, 12, "b");
    h.head(h.g.conv2d(h.x, w, b));
    CHECK(h.check({randn(60, rng), randn(60, rng)}) < 1e-4);
  }
  SUBCASE("maxpool 1-D and 2-D away from ties") {
    Harness h1;
    h1.x = h1.g.input({2, 9});
    h1.head(h1.g.maxpool(h1.x, 2, 1));
    CHECK(h1.check({untied(18, rng), untied(18, rng)}) < 1e-4);
    Harness h2;
    h2.x = h2.g.input({2, 5, 4});
    h2.head(h2.g.maxpool(h2.x, 2, 2));
    CHECK(h2.check({untied(40, rng), untied(40, rng)}) < 1e-4);
  }
  SUBCASE("global maxpool") {
    Harness h;
    h.x = h.g.input({3, 7});
    h.head(h.g.global_maxpool(h.x));
    CHECK(h.check({untied(21, rng), untied(21, rng)}) < 1e-4);
  }
  SUBCASE("relu away from zero") {
    Harness h;
    h.x = h.g.input({10});
    h.head(h.g.relu(h.x));
    CHECK(h.check({untied(10, rng, 0.1), untied(10, rng, 0.1)}) < 1e-4);
  }
  SUBCASE("concat") {
    Harness h;
    h.x = h.g.input({2, 4});
    const NodeId a = h.g.relu(h.x);
    const NodeId w = h.g.param({2, 2, 2}, 4, "w");
    const NodeId b = h.g.param({2}, 4, "b");
    const NodeId c = h.g.conv1d(h.x, w, b);
    const NodeId parts[] = {a, c};
    h.head(h.g.concat(parts));
    CHECK(h.check({untied(8, rng, 0.1), untied(8, rng, 0.1)}) < 1e-4);
  }
  SUBCASE("dense alone, random 4x2 batch") {
    Graph g;
    const NodeId x = g.input({5});
    const NodeId w = g.param({2, 5}, 5, "w");
    const NodeId b = g.param({2}, 5, "b");
    g.set_output(g.dense(x, w, b));
    g.init_parameters(3);
    const std::vector<std::vector<double>> in = {randn(5, rng), randn(5, rng), randn(5, rng), randn(5, rng)};
    const std::vector<int> y = {0, 1, 1, 0};
    CHECK(grad_check(g, in, y).max_rel_error < 1e-4);
  }
}

TEST_CASE("grad_check edge cases") {
  Graph g;
  g.set_output(g.relu(g.input({2})));
  const std::vector<std::vector<double>> in = {{1.0, -1.0}};
  const std::vector<int> y = {0};
  const auto r = grad_check(g, in, y);
  CHECK(r.max_rel_error == 0.0);
  CHECK(r.coordinates == 0);
  GradCheckOptions o;
  o.epsilon = 0.0;
  CHECK_THROWS_AS((void)grad_check(g, in, y, o), ValidationError);
  o.epsilon = -1e-4;
  CHECK_THROWS_AS((void)grad_check(g, in, y, o), ValidationError);
}

TEST_CASE("grad_check samples a seeded subset above the coordinate cap") {
  Graph g;
  const NodeId x = g.input({40});
  const NodeId w = g.param({2, 40}, 40, "w");
  const NodeId b = g.param({2}, 40, "b");
  g.set_output(g.dense(x, w, b));
  g.init_parameters(4);
  auto rng = make_rng(4);
  const std::vector<std::vector<double>> in = {randn(40, rng)};
  const std::vector<int> y = {1};
  GradCheckOptions o;
  o.max_coordinates = 25;
  const auto r = grad_check(g, in, y, o);
  CHECK(r.coordinates == 25);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("softmax cross-entropy") {
  const std::vector<double> z = {0, 0};
  const std::vector<int> y0 = {0};
  const auto l = softmax_cross_entropy(z, 2, y0);
  CHECK(l.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(l.grad == std::vector<double>{-0.5, 0.5});

  const std::vector<double> big = {1e6, 0};
  const auto lb = softmax_cross_entropy(big, 2, y0);
  CHECK(std::isfinite(lb.loss));
  CHECK(lb.loss == doctest::Approx(0.0));
  const std::vector<int> y1 = {1};
  CHECK(softmax_cross_entropy(big, 2, y1).loss == doctest::Approx(1e6));

  const std::vector<int> bad = {2};
  CHECK_THROWS_AS((void)softmax_cross_entropy(z, 2, bad), ValidationError);

  auto rng = make_rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto logits = randn(8, rng, 30);
    const std::vector<int> lab = {0, 1, 1, 0};
    CHECK(softmax_cross_entropy(logits, 2, lab).loss >= 0.0);
    const auto p = softmax(std::span<const double>(logits).first(2));
    CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-12);
  }

  SUBCASE("gradient is (softmax - onehot)/batch, checked by differences") {
    const auto logits = randn(8, rng);
    const std::vector<int> lab = {1, 0, 0, 1};
    const auto base = softmax_cross_entropy(logits, 2, lab);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      auto p = logits, m = logits;
      p[i] += 1e-5;
      m[i] -= 1e-5;
      const double num = (softmax_cross_entropy(p, 2, lab).loss - softmax_cross_entropy(m, 2, lab).loss) / 2e-5;
      CHECK(relative_error(base.grad[i], num) < 1e-6);
    }
  }
}

TEST_CASE("sgd_step") {
  std::vector<double> p = {1.0, -3.0};
  const std::vector<double> g = {2.0, 0.5};
  sgd_step(p, g, 0.0);
  CHECK(p == std::vector<double>{1.0, -3.0});
  sgd_step(p, g, 0.1);
  CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-15));
  std::vector<double> a = {0.3, 0.7}, b = a;
  sgd_step(a, g, 0.05);
  sgd_step(a, g, 0.05);
  sgd_step(b, g, 0.1);
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-15));
  const std::vector<double> short_g = {1.0};
  CHECK_THROWS_AS(sgd_step(p, short_g, 0.1), ValidationError);
}

TEST_CASE("forward determinism and parameter round trip") {
  auto build = [] {
    Graph g;
    const NodeId x = g.input({2, 30});
    const NodeId w = g.param({4, 2, 5}, 10, "w");
    const NodeId b = g.param({4}, 10, "b");
    const NodeId h = g.global_maxpool(g.relu(g.conv1d(x, w, b)));
    const NodeId w2 = g.param({2, 4}, 4, "w2");
    const NodeId b2 = g.param({2}, 4, "b2");
    g.set_output(g.dense(h, w2, b2));
    return g;
  };
  Graph a = build(), b = build();
  a.init_parameters(12);
  b.init_parameters(12);
  CHECK(a.flat_parameters() == b.flat_parameters());
  auto rng = make_rng(1);
  const auto in = randn(60, rng);
  CHECK(a.forward(in).values == b.forward(in).values);
  b.init_parameters(13);
  CHECK(a.flat_parameters() != b.flat_parameters());
  b.set_flat_parameters(a.flat_parameters());
  CHECK(a.forward(in).values == b.forward(in).values);
  for (double v : a.flat_parameters()) CHECK(std::abs(v) <= std::sqrt(6.0 / 4.0));
}

TEST_CASE("parameter gradients accumulate until zero_grad") {
  Graph g;
  const NodeId x = g.input({3});
  const NodeId w = g.param({2, 3}, 3, "w");
  const NodeId b = g.param({2}, 3, "b");
  g.set_output(g.dense(x, w, b));
  g.init_parameters(1);
  const std::vector<double> in = {1, 2, 3}, dy = {0.5, -1};
  g.zero_grad();
  g.forward(in);
  g.backward(dy);
  const auto once = g.flat_gradients();
  g.forward(in);
  g.backward(dy);
  const auto twice = g.flat_gradients();
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice[i] == doctest::Approx(2 * once[i]));
  g.zero_grad();
  for (double v : g.flat_gradients()) CHECK(v == 0.0);
}

TEST_CASE("composition matches a brute-force full-Jacobian oracle") {
  // dense(3->3) -> relu -> dense(3->2): 12 + 8 = 20 parameters.
  auto rng = make_rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Graph g;
    const NodeId x = g.input({3});
    const NodeId w1 = g.param({3, 3}, 3, "w1");
    const NodeId b1 = g.param({3}, 3, "b1");
    const NodeId w2 = g.param({2, 3}, 3, "w2");
    const NodeId b2 = g.param({2}, 3, "b2");
    g.set_output(g.dense(g.relu(g.dense(x, w1, b1)), w2, b2));
    g.init_parameters(100 + trial);
    REQUIRE(g.param_count() == 20);
    const auto in = randn(3, rng);
    const int y = trial % 2;

    const auto theta = g.flat_parameters();
    auto W1 = [&](int i, int j) { return theta[i * 3 + j]; };
    auto B1 = [&](int i) { return theta[9 + i]; };
    auto W2 = [&](int i, int j) { return theta[12 + i * 3 + j]; };
    double pre[3], h[3], z[2];
    for (int i = 0; i < 3; ++i) {
      pre[i] = B1(i);
      for (int j = 0; j < 3; ++j) pre[i] += W1(i, j) * in[j];
      h[i] = pre[i] > 0 ? pre[i] : 0;
    }
    for (int i = 0; i < 2; ++i) {
      z[i] = theta[18 + i];
      for (int j = 0; j < 3; ++j) z[i] += W2(i, j) * h[j];
    }
    // Full Jacobian dz/dtheta, built entry by entry.
    double J[2][20] = {};
    for (int o = 0; o < 2; ++o) {
      for (int i = 0; i < 3; ++i) {
        const double gate = pre[i] > 0 ? 1.0 : 0.0;
        for (int j = 0; j < 3; ++j) J[o][i * 3 + j] = W2(o, i) * gate * in[j];
        J[o][9 + i] = W2(o, i) * gate;
      }
      for (int j = 0; j < 3; ++j) J[o][12 + o * 3 + j] = h[j];
      J[o][18 + o] = 1.0;
    }
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
    const double dz[2] = {e0 / (e0 + e1) - (y == 0), e1 / (e0 + e1) - (y == 1)};

    g.zero_grad();
    const auto& out = g.forward(in);
    CHECK(out.values[0] == doctest::Approx(z[0]).epsilon(1e-12));
    const int lab[] = {y};
    g.backward(softmax_cross_entropy(out.values, 2, lab).grad);
    const auto grad = g.flat_gradients();
    for (int k = 0; k < 20; ++k) {
      const double oracle = J[0][k] * dz[0] + J[1][k] * dz[1];
      CHECK(grad[k] == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("grad_check skips probes that straddle a kink") {
  Graph g;
  const NodeId x = g.input({2});
  const NodeId h = g.relu(x);
  const NodeId w = g.param({2, 2}, 2, "w");
  const NodeId b = g.param({2}, 2, "b");
  g.set_output(g.dense(h, w, b));
  g.init_parameters(2);
  const std::vector<std::vector<double>> in = {{5e-5, 0.7}};
  const std::vector<int> y = {1};
  GradCheckOptions o;
  o.check_input = true;
  const auto r = grad_check(g, in, y, o);
  CHECK(r.coordinates == 8);
  CHECK(r.skipped_kinks == 1);
  CHECK(r.max_rel_error < 1e-6);

  g.forward(in[0]);
  const auto s0 = g.activation_signature();
  g.forward(std::vector<double>{1e-3, 0.7});
  CHECK(g.activation_signature() == s0);
  g.forward(std::vector<double>{-1e-3, 0.7});
  CHECK(g.activation_signature() != s0);
}
