#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kgamc/error.hpp"
#include "kgamc/nn/init.hpp"
#include "kgamc/nn/ops.hpp"
#include "support.hpp"

using namespace kgamc;
namespace kt = kgamc::testing;
using namespace kgamc::nn;
using kgamc::testing::gradcheck;
using kgamc::testing::random_projection;
using kgamc::testing::random_tensor;

namespace {

constexpr int kSeeds = 20;
constexpr double kTol = 1e-6;

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Values kept away from zero so the kinks of relu / leaky_relu are not probed.
Tensor<double> away_from_zero(Shape shape, std::mt19937_64& rng) {
  auto t = random_tensor(std::move(shape), rng);
  for (auto& v : t.data) v = v >= 0 ? v + 0.1 : v - 0.1;
  return t;
}

void expect_grad_ok(const kt::GradReport& r, int seed) {
  EXPECT_LT(r.max_rel_error, kTol) << "seed " << seed << ": " << r.worst;
  EXPECT_GT(r.checked, 0u);
}

}  // namespace

TEST(Gradcheck, Elementwise) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(seed);
    const Shape s{pick(rng, 1, 5), pick(rng, 1, 6)};
    const auto a = random_tensor(s, rng), b = random_tensor(s, rng);
    expect_grad_ok(gradcheck([&](const auto& in) {
                     return random_projection(add(in[0], scale(sub(in[1], in[0]), 1.7)), seed);
                   }, {a, b}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) { return random_projection(leaky_relu(in[0]), seed); },
                             {away_from_zero(s, rng)}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) { return random_projection(relu(in[0]), seed); },
                             {away_from_zero(s, rng)}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) { return mean(in[0]); }, {a}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) {
                     return random_projection(reshape(in[0], Shape{s[1], s[0]}), seed);
                   }, {a}), seed);
  }
}

TEST(Gradcheck, MatmulAndLinear) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const std::size_t n = pick(rng, 1, 5), k = pick(rng, 1, 6), m = pick(rng, 1, 4);
    const auto a = random_tensor({n, k}, rng), b = random_tensor({k, m}, rng);
    const auto bt = random_tensor({m, k}, rng), bias = random_tensor({m}, rng);
    expect_grad_ok(gradcheck([&](const auto& in) { return random_projection(matmul(in[0], in[1]), seed); },
                             {a, b}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) {
                     return random_projection(matmul_nt(in[0], in[1]), seed);
                   }, {a, bt}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) {
                     return random_projection(linear(in[0], in[1], in[2]), seed);
                   }, {a, b, bias}), seed);
  }
}

TEST(Gradcheck, Conv1d) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(200 + seed);
    const std::size_t cin = pick(rng, 1, 3), cout = pick(rng, 1, 3), n = pick(rng, 1, 2);
    const std::size_t k = pick(rng, 1, 5), t = pick(rng, k, 10), stride = pick(rng, 1, 2);
    const bool same = seed % 2 == 0;
    const auto x = random_tensor({cin, n, t}, rng);
    const auto w = random_tensor({cout, cin, k}, rng), b = random_tensor({cout}, rng);
    expect_grad_ok(gradcheck([&](const auto& in) {
                     return random_projection(conv1d(in[0], in[1], in[2], stride, same), seed);
                   }, {x, w, b}), seed);
  }
}

TEST(Gradcheck, PoolSoftmaxAndLosses) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(300 + seed);
    const std::size_t c = pick(rng, 1, 4), n = pick(rng, 1, 3), t = pick(rng, 1, 7);
    expect_grad_ok(gradcheck([&](const auto& in) { return random_projection(global_avg_pool(in[0]), seed); },
                             {random_tensor({c, n, t}, rng)}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) { return random_projection(global_avg_pool(in[0]), seed); },
                             {random_tensor({c, t}, rng)}), seed);
    const std::size_t rows = pick(rng, 1, 5), m = pick(rng, 2, 6);
    const auto logits = random_tensor({rows, m}, rng, 2.0);
    expect_grad_ok(gradcheck([&](const auto& in) { return random_projection(softmax(in[0]), seed); },
                             {logits}), seed);
    std::vector<int> labels(rows);
    for (auto& y : labels) y = static_cast<int>(pick(rng, 0, m - 1));
    expect_grad_ok(gradcheck([&](const auto& in) { return softmax_cross_entropy(in[0], labels); },
                             {logits}), seed);
  }
}

TEST(Gradcheck, NormsAndCosines) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(400 + seed);
    const std::size_t n = pick(rng, 1, 5), m = pick(rng, 2, 5), d = pick(rng, 2, 6);
    const auto a = random_tensor({n, d}, rng), b = random_tensor({m, d}, rng);
    expect_grad_ok(gradcheck([&](const auto& in) { return random_projection(l2_normalize(in[0]), seed); },
                             {a}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) {
                     return random_projection(cosine_matrix(in[0], in[1]), seed);
                   }, {a, b}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) { return mean_offdiag(cosine_matrix(in[0], in[0])); },
                             {b}), seed);
    const auto u = random_tensor({d}, rng), v = random_tensor({d}, rng);
    expect_grad_ok(gradcheck([&](const auto& in) { return cosine_sim(in[0], in[1]); }, {u, v}), seed);
  }
}

TEST(Gradcheck, RowOpsAndConcat) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(500 + seed);
    const std::size_t n = pick(rng, 2, 5), d = pick(rng, 1, 4), d2 = pick(rng, 1, 4);
    const auto a = random_tensor({n, d}, rng), b = random_tensor({n, d2}, rng);
    const auto c = random_tensor({n + 1, d}, rng);
    std::vector<double> w(n);
    for (auto& x : w) x = std::uniform_real_distribution<double>(-2, 2)(rng);
    std::vector<std::size_t> rows{n - 1, 0, n - 1};
    expect_grad_ok(gradcheck([&](const auto& in) { return random_projection(scale_rows(in[0], w), seed); },
                             {a}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) { return random_projection(select_rows(in[0], rows), seed); },
                             {a}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) {
                     return random_projection(concat<double>({in[0], in[1]}, 1), seed);
                   }, {a, b}), seed);
    expect_grad_ok(gradcheck([&](const auto& in) {
                     return random_projection(concat<double>({in[0], in[1]}, 0), seed);
                   }, {a, c}), seed);
  }
}

TEST(Gradcheck, ComposedFloatWithinLooseTolerance) {
  // Same graph in float; compare its analytic gradient with the double one.
  std::mt19937_64 rng(7);
  const auto xd = random_tensor({4, 6}, rng), wd = random_tensor({6, 3}, rng), bd = random_tensor({3}, rng);
  auto to_float = [](const Tensor<double>& t) {
    return Tensor<float>(t.shape, std::vector<float>(t.data.begin(), t.data.end()));
  };
  const std::vector<int> labels{0, 2, 1, 2};
  auto xf = parameter(to_float(xd)), wf = parameter(to_float(wd)), bf = parameter(to_float(bd));
  backward(softmax_cross_entropy(l2_normalize(leaky_relu(linear(xf, wf, bf))), std::span<const int>(labels)));
  auto x = parameter(xd), w = parameter(wd), b = parameter(bd);
  backward(softmax_cross_entropy(l2_normalize(leaky_relu(linear(x, w, b))), std::span<const int>(labels)));
  const auto gf = wf.grad();
  const auto g = w.grad();
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_LT(std::abs(gf[i] - g[i]) / std::max(std::abs(g[i]), 1e-3), 1e-3);
  }
  const auto report = gradcheck([&](const auto& in) {
    return softmax_cross_entropy(l2_normalize(leaky_relu(linear(in[0], in[1], in[2]))),
                                 std::span<const int>(labels));
  }, {xd, wd, bd});
  EXPECT_LT(report.max_rel_error, kTol) << report.worst;
}

TEST(Backward, SumGivesOnes) {
  auto x = parameter(Tensor<double>({2, 3}, 0.5));
  backward(sum(x));
  for (double g : x.grad().data) EXPECT_EQ(g, 1.0);
}

TEST(Backward, TwiceAccumulates) {
  std::mt19937_64 rng(1);
  auto x = parameter(random_tensor({3, 4}, rng));
  auto w = parameter(random_tensor({4, 2}, rng));
  const auto loss = random_projection(leaky_relu(matmul(x, w)), 5);
  backward(loss);
  const auto once = w.grad();
  backward(loss);
  const auto twice = w.grad();
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(twice[i], 2 * once[i], 1e-12);
  w.zero_grad();
  for (double g : w.grad().data) EXPECT_EQ(g, 0.0);
}

TEST(Backward, NoGradGuardRecordsNothing) {
  auto x = parameter(Tensor<double>({2}, 1.0));
  Var<double> y;
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    y = sum(scale(x, 3.0));
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_TRUE(y.node()->is_leaf());
  EXPECT_EQ(y.item(), 6.0);
}

TEST(Conv1d, MatchesOracle) {
  for (int seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(600 + seed);
    const std::size_t cin = pick(rng, 1, 4), cout = pick(rng, 1, 4), k = pick(rng, 1, 9);
    const std::size_t n = pick(rng, 1, 3), t = pick(rng, 1, 32), stride = pick(rng, 1, 3);
    const auto x = random_tensor({cin, n, t}, rng);
    const auto w = random_tensor({cout, cin, k}, rng), b = random_tensor({cout}, rng);
    const auto got = conv1d(constant(x), constant(w), constant(b), stride, true).value();
    const auto want = kt::conv1d_oracle(x, w, b, stride);
    ASSERT_EQ(got.shape, want.shape) << "seed " << seed;
    EXPECT_EQ(got.dim(2), (t + stride - 1) / stride);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-12) << "seed " << seed;
  }
}

TEST(Conv1d, IdentityKernelAndShapes) {
  std::mt19937_64 rng(3);
  const auto x = random_tensor({3, 10}, rng);
  Tensor<double> w({3, 3, 1});
  for (std::size_t c = 0; c < 3; ++c) w[c * 3 + c] = 1.0;
  const auto y = conv1d(constant(x), constant(w), constant(Tensor<double>({3})), 1, true).value();
  EXPECT_EQ(y.shape, x.shape);
  EXPECT_EQ(y.data, x.data);
  EXPECT_EQ(conv_output_length(8, 3, 2, true), 4u);
  EXPECT_EQ(conv_output_length(8, 3, 1, false), 6u);
  EXPECT_THROW(conv1d(constant(x), constant(Tensor<double>({3, 2, 1})), constant(Tensor<double>({3})), 1, true),
               ShapeError);
}

TEST(Ops, ForwardValues) {
  const auto x = constant(Tensor<double>({1, 3}, {2.0, -1.0, 0.0}));
  const auto lr = leaky_relu(x).value();
  EXPECT_EQ(lr[0], 2.0);
  EXPECT_DOUBLE_EQ(lr[1], -0.01);
  EXPECT_EQ(lr[2], 0.0);

  Tensor<double> eye({2, 2}, {1, 0, 0, 1});
  const auto xin = constant(Tensor<double>({3, 2}, {1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(linear(xin, constant(eye), constant(Tensor<double>({2}))).value().data, xin.value().data);
  const auto scalar = linear(constant(Tensor<double>({1, 1}, {3.0})), constant(Tensor<double>({1, 1}, {2.0})),
                             constant(Tensor<double>({1}, {0.5})));
  EXPECT_EQ(scalar.item(), 6.5);

  const auto uniform = softmax(constant(Tensor<double>({2, 4}, 0.3))).value();
  for (double p : uniform.data) EXPECT_DOUBLE_EQ(p, 0.25);

  const auto pooled = global_avg_pool(constant(Tensor<double>({2, 5}, 1.5))).value();
  EXPECT_EQ(pooled.shape, (Shape{2}));
  EXPECT_DOUBLE_EQ(pooled[0], 1.5);
  const auto single = global_avg_pool(constant(Tensor<double>({2, 1}, {4.0, 5.0}))).value();
  EXPECT_EQ(single.data, (std::vector<double>{4.0, 5.0}));
}

TEST(Ops, GlobalPoolGradientIsUniform) {
  auto x = parameter(Tensor<double>({2, 4}, 1.0));
  backward(sum(global_avg_pool(x)));
  for (double g : x.grad().data) EXPECT_DOUBLE_EQ(g, 0.25);
}

TEST(Ops, SoftmaxProperties) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(700 + seed);
    auto t = random_tensor({pick(rng, 1, 6), pick(rng, 1, 12)}, rng, 10.0);
    const auto p = softmax(constant(t)).value();
    const std::size_t m = t.dim(1);
    for (std::size_t i = 0; i < t.dim(0); ++i) {
      double s = 0;
      for (std::size_t k = 0; k < m; ++k) s += p[i * m + k];
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
    for (auto& v : t.data) v += 123.0;
    const auto shifted = softmax(constant(t)).value();
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(shifted[i], p[i], 1e-12);
  }
}

TEST(Ops, L2NormalizeProperties) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(800 + seed);
    auto t = random_tensor({pick(rng, 1, 6), pick(rng, 1, 9)}, rng, 1e3);
    const std::size_t d = t.dim(1);
    const auto y = l2_normalize(constant(t)).value();
    for (std::size_t i = 0; i < t.dim(0); ++i) {
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) s += y[i * d + k] * y[i * d + k];
      EXPECT_NEAR(std::sqrt(s), 1.0, 1e-9);
    }
  }
  const auto unit = Tensor<double>({1, 2}, {0.6, 0.8});
  EXPECT_EQ(l2_normalize(constant(unit)).value().data, unit.data);
  auto zero = parameter(Tensor<double>({1, 3}));
  const auto out = l2_normalize(zero);
  for (double v : out.value().data) EXPECT_EQ(v, 0.0);
  backward(random_projection(out, 1));
  for (double g : zero.grad().data) EXPECT_EQ(g, 0.0);
}

TEST(Ops, CosineValues) {
  const auto u = constant(Tensor<double>({3}, {1, 2, 3}));
  const auto neg = constant(Tensor<double>({3}, {-1, -2, -3}));
  const auto orth = constant(Tensor<double>({3}, {3, 0, -1}));
  EXPECT_NEAR(cosine_sim(u, u).item(), 1.0, 1e-15);
  EXPECT_NEAR(cosine_sim(u, neg).item(), -1.0, 1e-15);
  EXPECT_NEAR(cosine_sim(u, orth).item(), 0.0, 1e-15);
  const auto m = cosine_matrix(constant(Tensor<double>({2, 2}, {1, 0, 0, 0})),
                               constant(Tensor<double>({1, 2}, {1, 1}))).value();
  EXPECT_NEAR(m[0], std::sqrt(0.5), 1e-15);
  EXPECT_EQ(m[1], 0.0);
}

TEST(Ops, ShapeErrorsNameBothShapes) {
  const auto a = constant(Tensor<double>({2, 3}));
  const auto b = constant(Tensor<double>({4, 5}));
  try {
    matmul(a, b);
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(to_string(Shape{2, 3})), std::string::npos) << msg;
    EXPECT_NE(msg.find(to_string(Shape{4, 5})), std::string::npos) << msg;
  }
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(mean_offdiag(constant(Tensor<double>({1, 1}))), ShapeError);
}

TEST(Init, GlorotBoundsAndDeterminism) {
  std::mt19937_64 r1(9), r2(9);
  const auto a = glorot_uniform<double>({30, 20}, 30, 20, r1);
  const auto b = glorot_uniform<double>({30, 20}, 30, 20, r2);
  EXPECT_EQ(a.data, b.data);
  const double bound = std::sqrt(6.0 / 50.0);
  double lo = 1, hi = -1;
  for (double v : a.data) {
    EXPECT_LE(std::abs(v), bound);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LT(lo, -0.8 * bound);
  EXPECT_GT(hi, 0.8 * bound);
}
