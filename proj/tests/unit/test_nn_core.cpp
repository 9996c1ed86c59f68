#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fequiv/activation.hpp"
#include "fequiv/basin.hpp"
#include "fequiv/errors.hpp"
#include "fequiv/io.hpp"
#include "fequiv/network.hpp"
#include "fequiv/rng.hpp"
#include "oracles.hpp"

using namespace fequiv;

namespace {

NetworkParams random_params(const Architecture& arch, std::uint64_t seed, double scale = 1.0) {
  return initialize(arch, InitScheme::uniform(-scale, scale, seed));
}

NetworkParams abs_net() {
  const Architecture arch(1, {2}, Activation::relu());
  NetworkParams p = NetworkParams::zeros(arch);
  p.layers[0].weights.data = {1.0, -1.0};
  p.layers[1].weights.data = {1.0, 1.0};
  return p;
}

}  // namespace

TEST(Architecture, CountsMatchLayerSums) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::size_t> hidden;
    const std::size_t depth = 1 + rng.below(4);
    for (std::size_t l = 0; l < depth; ++l) hidden.push_back(1 + rng.below(9));
    const Architecture arch(1 + rng.below(5), hidden, Activation::tanh(), 1 + rng.below(3));
    const auto widths = oracle::widths_of(arch);
    EXPECT_EQ(arch.param_count(), oracle::param_count(widths));
    std::size_t u = 0;
    for (auto h : hidden) u += h;
    EXPECT_EQ(arch.hidden_neuron_count(), u);
    for (std::size_t l = 1; l <= depth + 1; ++l) {
      EXPECT_EQ(arch.layer_param_count(l), widths[l - 1] * widths[l] + widths[l]);
    }
  }
}

TEST(Architecture, RejectsInvalidShapes) {
  EXPECT_THROW(Architecture(0, {2}, Activation::relu()), StructuralError);
  EXPECT_THROW(Architecture(1, {}, Activation::relu()), StructuralError);
  EXPECT_THROW(Architecture(1, {2, 0}, Activation::relu()), StructuralError);
  EXPECT_THROW(Architecture(1, {2, 2}, std::vector<Activation>{Activation::relu()}), StructuralError);
}

TEST(Activation, Table1Flags) {
  EXPECT_TRUE(Activation::relu().is_positive_homogeneous());
  EXPECT_TRUE(Activation::leaky_relu(0.3).is_positive_homogeneous());
  EXPECT_FALSE(Activation::tanh().is_positive_homogeneous());
  EXPECT_FALSE(Activation::sigmoid().is_positive_homogeneous());
  EXPECT_TRUE(Activation::tanh().is_odd());
  EXPECT_FALSE(Activation::sigmoid().is_odd());
  EXPECT_FALSE(Activation::relu().is_odd());
  EXPECT_FALSE(Activation::leaky_relu(0.3).is_odd());
  EXPECT_THROW(Activation::leaky_relu(0.0), DomainError);
  EXPECT_THROW(Activation::parse("softplus"), DomainError);
  EXPECT_EQ(Activation::parse("leaky_relu:0.25"), Activation::leaky_relu(0.25));
}

TEST(Activation, LipschitzConstantBoundsDifferenceQuotients) {
  Rng rng(2);
  for (const auto& act : {Activation::relu(), Activation::leaky_relu(0.1), Activation::leaky_relu(3.0),
                          Activation::tanh(), Activation::sigmoid(), Activation::identity()}) {
    for (double m : {0.5, 2.0, 10.0}) {
      const double lip = act.lipschitz_on(m);
      for (int i = 0; i < 2000; ++i) {
        const double x = rng.uniform(-m, m);
        const double y = rng.uniform(-m, m);
        if (x == y) continue;
        EXPECT_LE(std::abs(act.apply(x) - act.apply(y)) / std::abs(x - y), lip * (1 + 1e-12))
            << act.name();
      }
    }
  }
}

TEST(Activation, DerivativeMatchesDifferenceAwayFromKinks) {
  Rng rng(3);
  for (const auto& act : {Activation::relu(), Activation::leaky_relu(0.1), Activation::tanh(),
                          Activation::sigmoid(), Activation::identity()}) {
    for (int i = 0; i < 200; ++i) {
      double x = rng.uniform(-3, 3);
      if (std::abs(x) < 1e-3) x = 0.5;
      const double fd = (act.apply(x + 1e-6) - act.apply(x - 1e-6)) / 2e-6;
      EXPECT_NEAR(act.derivative(x), fd, 1e-6) << act.name();
    }
  }
  EXPECT_EQ(Activation::relu().derivative(0.0), 0.0);
}

TEST(Forward, IdentityComposition) {
  const Architecture arch(1, {1}, Activation::identity());
  NetworkParams p = NetworkParams::zeros(arch);
  p.layers[0].weights.data = {1.0};
  p.layers[1].weights.data = {1.0};
  const std::vector<double> x = {3.0};
  EXPECT_EQ(forward(arch, p, x), std::vector<double>{3.0});
}

TEST(Forward, ReluComputesAbsoluteValue) {
  const Architecture arch(1, {2}, Activation::relu());
  const NetworkParams p = abs_net();
  for (double x : {-2.0, -0.5, 0.0, 1.5}) {
    EXPECT_EQ(forward(arch, p, std::vector<double>{x})[0], std::abs(x));
  }
}

TEST(Forward, MatchesScalarOracle) {
  const Architecture arch(2, {3, 3}, Activation::tanh());
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const NetworkParams p = random_params(arch, rng.next_u64(), 2.0);
    const auto theta = p.flatten();
    for (int i = 0; i < 20; ++i) {
      std::vector<double> x = {rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7)};
      const auto y = forward(arch, p, x);
      const auto want = oracle::forward(oracle::widths_of(arch), oracle::acts_of(arch), theta, x);
      EXPECT_NEAR(y[0], want[0], 1e-12);
    }
  }
}

TEST(Forward, MixedActivationsMatchOracle) {
  Rng rng(5);
  const Architecture arch(3, {4, 2, 5},
                          std::vector<Activation>{Activation::leaky_relu(0.2), Activation::sigmoid(),
                                                  Activation::relu()},
                          2);
  for (int t = 0; t < 50; ++t) {
    const NetworkParams p = random_params(arch, rng.next_u64());
    std::vector<double> x = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto y = forward(arch, p, x);
    const auto want = oracle::forward(oracle::widths_of(arch), oracle::acts_of(arch), p.flatten(), x);
    EXPECT_NEAR(y[0], want[0], 1e-12);
    EXPECT_NEAR(y[1], want[1], 1e-12);
  }
}

TEST(Forward, ShapeAndNumericErrors) {
  const Architecture arch(1, {2}, Activation::relu());
  NetworkParams p = abs_net();
  EXPECT_THROW(forward(arch, p, std::vector<double>{1.0, 2.0}), StructuralError);
  NetworkParams bad = p;
  bad.layers[0].bias.push_back(0.0);
  EXPECT_THROW(forward(arch, bad, std::vector<double>{1.0}), StructuralError);
  p.layers[0].weights.data[0] = std::numeric_limits<double>::max();
  p.layers[1].weights.data[0] = std::numeric_limits<double>::max();
  try {
    forward(arch, p, std::vector<double>{10.0});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.layer(), 1u);
  }
}

TEST(Forward, DoesNotMutateParams) {
  const Architecture arch(2, {3}, Activation::tanh());
  const NetworkParams p = random_params(arch, 9);
  const NetworkParams copy = p;
  forward(arch, p, std::vector<double>{0.1, 0.2});
  EXPECT_TRUE(bit_equal(p, copy));
}

TEST(Gradient, HandChainRule) {
  const Architecture arch(1, {1}, Activation::identity());
  NetworkParams p = NetworkParams::zeros(arch);
  p.layers[0].weights.data = {1.0};
  p.layers[1].weights.data = {1.0};
  const auto g = gradient(arch, p, Loss::squared_error(), std::vector<double>{1.0},
                          std::vector<double>{0.0});
  // f = w2 (w1 x + b1) + b2 = 1, loss (f - 0)^2
  EXPECT_DOUBLE_EQ(g.layers[0].weights.data[0], 2.0);
  EXPECT_DOUBLE_EQ(g.layers[1].weights.data[0], 2.0);
  EXPECT_DOUBLE_EQ(g.layers[0].bias[0], 2.0);
  EXPECT_DOUBLE_EQ(g.layers[1].bias[0], 2.0);
}

TEST(Gradient, ConstantLossGivesZeros) {
  const Architecture arch(2, {3, 2}, Activation::sigmoid());
  const NetworkParams p = random_params(arch, 11);
  const auto g = gradient(arch, p, Loss::constant(4.0), std::vector<double>{0.3, -0.2},
                          std::vector<double>{1.0});
  EXPECT_EQ(linf_norm(g), 0.0);
}

TEST(Gradient, MatchesCentralFiniteDifferences) {
  Rng rng(12);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Activation act = t % 2 == 0 ? Activation::tanh() : Activation::sigmoid();
    const Architecture arch(2, {2 + rng.below(3), 1 + rng.below(3)}, act);
    const NetworkParams p = random_params(arch, rng.next_u64());
    const std::vector<double> x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const std::vector<double> target = {rng.uniform(-1, 1)};
    const auto g = gradient(arch, p, Loss::squared_error(), x, target).flatten();
    auto theta = p.flatten();
    auto loss_at = [&](const std::vector<double>& th) {
      const auto y = oracle::forward(oracle::widths_of(arch), oracle::acts_of(arch), th, x);
      return (y[0] - target[0]) * (y[0] - target[0]);
    };
    constexpr double h = 1e-5;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      auto plus = theta;
      auto minus = theta;
      plus[k] += h;
      minus[k] -= h;
      const double fd = (loss_at(plus) - loss_at(minus)) / (2 * h);
      worst = std::max(worst, std::abs(g[k] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Gradient, AccumulateScalesAndReturnsLoss) {
  const Architecture arch(1, {2}, Activation::tanh());
  const NetworkParams p = random_params(arch, 13);
  NetworkParams acc = NetworkParams::zeros(arch);
  const std::vector<double> x = {0.4};
  const std::vector<double> t = {0.1};
  const double loss = accumulate_gradient(arch, p, Loss::squared_error(), x, t, 0.5, acc);
  const double y = forward(arch, p, x)[0];
  EXPECT_DOUBLE_EQ(loss, (y - 0.1) * (y - 0.1));
  const auto full = gradient(arch, p, Loss::squared_error(), x, t).flatten();
  const auto half = acc.flatten();
  for (std::size_t k = 0; k < full.size(); ++k) EXPECT_DOUBLE_EQ(half[k], 0.5 * full[k]);
}

TEST(HiddenRange, Examples) {
  const Architecture arch(1, {3, 2}, Activation::relu());
  const std::vector<double> rho = {1.0};
  EXPECT_DOUBLE_EQ(hidden_range_bound(arch, 1.0, 1.0, 1, rho), 2.0);
  EXPECT_DOUBLE_EQ(hidden_range_bound(arch, 1.0, 1.0, 2, rho), 12.0);
  EXPECT_THROW(hidden_range_bound(arch, 1.0, 1.0, 0, rho), DomainError);
  EXPECT_THROW(hidden_range_bound(arch, 1.0, 1.0, 3, rho), DomainError);
}

TEST(HiddenRange, MonteCarloNeverExceedsBound) {
  const Architecture arch(1, {2, 2}, Activation::relu());
  const double b1 = hidden_range_bound(arch, 1.0, 1.0, 1);
  const double b2 = hidden_range_bound(arch, 1.0, 1.0, 2);
  Rng rng(14);
  double max1 = 0.0;
  double max2 = 0.0;
  for (int t = 0; t < 100000; ++t) {
    const NetworkParams p = random_params(arch, rng.next_u64());
    const std::vector<double> x = {rng.uniform(-1.0, 1.0)};
    const auto pre = hidden_preactivations(arch, p, x);
    for (double v : pre[0]) max1 = std::max(max1, std::abs(v));
    for (double v : pre[1]) max2 = std::max(max2, std::abs(v));
  }
  EXPECT_LE(max1, b1);
  EXPECT_LE(max2, b2);
}

TEST(NetworkJson, RoundTripsBitExactly) {
  Rng rng(15);
  const Architecture arch(2, {3, 4},
                          std::vector<Activation>{Activation::leaky_relu(0.1), Activation::tanh()}, 2);
  NetworkParams p = random_params(arch, rng.next_u64(), 1e3);
  p.layers[0].bias[0] = -0.0;
  p.layers[1].weights.data[2] = 4.9406564584124654e-324;
  p.layers[2].bias[1] = 0.1 + 0.2;
  const std::string text = network_to_json(arch, p).dump();
  const auto [arch2, p2] = network_from_json(Json::parse(text));
  EXPECT_EQ(arch2, arch);
  EXPECT_TRUE(bit_equal(p2, p));
}

TEST(NetworkJson, RejectsBadDocuments) {
  const Architecture arch(1, {2}, Activation::relu());
  Json j = network_to_json(arch, abs_net());
  Json extra = j;
  extra["note"] = 1;
  EXPECT_THROW(network_from_json(extra), ConfigError);
  Json short_w = j;
  short_w["layers"][0]["W"] = Json::array({1.0});
  EXPECT_THROW(network_from_json(short_w), StructuralError);
  Json bad_act = j;
  bad_act["arch"]["activations"] = Json::array({"softsign"});
  EXPECT_THROW(network_from_json(bad_act), DomainError);
}

TEST(Rng, DeterministicStreams) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(split_seed(1, 0), split_seed(1, 1));
  Rng c(7);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) mean += c.uniform();
  EXPECT_NEAR(mean / 100000, 0.5, 0.005);
}
