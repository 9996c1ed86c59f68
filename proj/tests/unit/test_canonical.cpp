#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "fequiv/basin.hpp"
#include "fequiv/canonical.hpp"
#include "fequiv/errors.hpp"
#include "fequiv/transforms.hpp"

using namespace fequiv;

namespace {

NetworkParams random_params(const Architecture& arch, std::uint64_t seed) {
  return initialize(arch, InitScheme::uniform(-1.0, 1.0, seed));
}

// Rows of hidden layer l as (b, W-row) tuples.
std::vector<std::vector<double>> bias_first_rows(const NetworkParams& p, std::size_t l) {
  const Layer& layer = p.layers[l - 1];
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < layer.bias.size(); ++i) {
    std::vector<double> r{layer.bias[i]};
    for (double v : layer.weights.row(i)) r.push_back(v);
    rows.push_back(r);
  }
  return rows;
}

// Fully duplicates neuron `src` of hidden layer l into neuron `dst`.
void duplicate_neuron(const Architecture& arch, NetworkParams& p, std::size_t l, std::size_t src,
                      std::size_t dst) {
  Layer& layer = p.layers[l - 1];
  for (std::size_t c = 0; c < layer.weights.cols; ++c) layer.weights(dst, c) = layer.weights(src, c);
  layer.bias[dst] = layer.bias[src];
  Matrix& next = p.layers[l].weights;
  for (std::size_t r = 0; r < next.rows; ++r) next(r, dst) = next(r, src);
  (void)arch;
}

std::set<std::vector<double>> brute_force_images(const Architecture& arch, const NetworkParams& p) {
  // Enumerates every spec with std::next_permutation, independent of
  // all_permutation_specs.
  std::set<std::vector<double>> images;
  std::vector<std::vector<std::size_t>> idx;
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    std::vector<std::size_t> v(arch.width(l));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    idx.push_back(v);
  }
  std::function<void(std::size_t)> rec = [&](std::size_t l) {
    if (l == idx.size()) {
      PermutationSpec spec;
      for (const auto& v : idx) spec.perms.emplace_back(v);
      images.insert(apply_permutation(arch, p, spec).flatten());
      return;
    }
    std::sort(idx[l].begin(), idx[l].end());
    do {
      rec(l + 1);
    } while (std::next_permutation(idx[l].begin(), idx[l].end()));
  };
  rec(0);
  return images;
}

}  // namespace

TEST(Canonicalize, SortedInputIsFixed) {
  const Architecture arch(1, {3}, Activation::relu());
  NetworkParams p = NetworkParams::zeros(arch);
  p.layers[0].bias = {3.0, 2.0, 1.0};
  p.layers[0].weights.data = {0.1, 0.2, 0.3};
  p.layers[1].weights.data = {1.0, 2.0, 3.0};
  const auto form = canonicalize(arch, p);
  EXPECT_TRUE(form.witness.is_identity());
  EXPECT_TRUE(bit_equal(form.params, p));
}

TEST(Canonicalize, SortsBiasByHand) {
  const Architecture arch(1, {3}, Activation::relu());
  NetworkParams p = NetworkParams::zeros(arch);
  p.layers[0].bias = {1.0, 3.0, 2.0};
  p.layers[0].weights.data = {10.0, 30.0, 20.0};
  p.layers[1].weights.data = {-1.0, -3.0, -2.0};
  const auto form = canonicalize(arch, p);
  EXPECT_EQ(form.params.layers[0].bias, (std::vector<double>{3.0, 2.0, 1.0}));
  EXPECT_EQ(form.params.layers[0].weights.data, (std::vector<double>{30.0, 20.0, 10.0}));
  EXPECT_EQ(form.params.layers[1].weights.data, (std::vector<double>{-3.0, -2.0, -1.0}));
  EXPECT_EQ(form.witness.perms[0], Permutation({1, 2, 0}));
}

TEST(Canonicalize, InvariantsHoldOnRandomNets) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const Architecture arch(1 + rng.below(3), {1 + rng.below(5), 1 + rng.below(5)}, Activation::tanh());
    const auto p = random_params(arch, rng.next_u64());
    const auto form = canonicalize(arch, p);
    EXPECT_TRUE(bit_equal(apply_permutation(arch, p, form.witness), form.params));
    for (std::size_t l = 1; l <= arch.depth(); ++l) {
      const auto rows = bias_first_rows(form.params, l);
      for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i - 1], rows[i]);
    }
    const auto again = canonicalize(arch, form.params);
    EXPECT_TRUE(bit_equal(again.params, form.params));
  }
}

TEST(Canonicalize, OrbitCollapse) {
  Rng rng(2);
  std::size_t mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const Architecture arch(1 + rng.below(3), {1 + rng.below(6), 1 + rng.below(6), 1 + rng.below(4)},
                            Activation::sigmoid());
    const auto p = random_params(arch, rng.next_u64());
    const auto q = apply_permutation(arch, p, PermutationSpec::random(arch, rng));
    if (!bit_equal(canonicalize(arch, p).params, canonicalize(arch, q).params)) ++mismatches;
  }
  EXPECT_EQ(mismatches, 0u);
}

TEST(Canonicalize, OrbitCollapseWithTiedRows) {
  // Coarse grid values force many exact ties, including whole duplicated rows
  // whose outgoing columns differ.
  Rng rng(3);
  std::size_t mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const Architecture arch(1, {1 + rng.below(4), 1 + rng.below(4), 1 + rng.below(3)}, Activation::relu());
    auto theta = random_params(arch, rng.next_u64()).flatten();
    for (double& v : theta) v = std::round(v);
    const auto p = NetworkParams::unflatten(arch, theta);
    const auto q = apply_permutation(arch, p, PermutationSpec::random(arch, rng));
    const auto cp = canonicalize(arch, p);
    const auto cq = canonicalize(arch, q);
    if (!bit_equal(cp.params, cq.params)) ++mismatches;
    EXPECT_TRUE(bit_equal(apply_permutation(arch, q, cq.witness), cq.params));
  }
  EXPECT_EQ(mismatches, 0u);
}

TEST(SymmetryProfile, AllIdenticalAndAllDistinct) {
  const Architecture arch(1, {3}, Activation::relu());
  NetworkParams same = NetworkParams::zeros(arch);
  same.layers[0].weights.data = {0.5, 0.5, 0.5};
  same.layers[0].bias = {1.0, 1.0, 1.0};
  auto prof = symmetry_profile(arch, same);
  EXPECT_EQ(prof.distinct_perm_counts[0], 1);
  EXPECT_TRUE(std::isinf(prof.delta_min));
  NetworkParams diff = same;
  diff.layers[0].bias = {1.0, 2.0, 3.0};
  prof = symmetry_profile(arch, diff);
  EXPECT_EQ(prof.distinct_perm_counts[0], 6);
  EXPECT_EQ(prof.delta_min, 1.0);
}

TEST(SymmetryProfile, TwoEqualRowsAndOneApart) {
  const Architecture arch(1, {3}, Activation::relu());
  NetworkParams p = NetworkParams::zeros(arch);
  p.layers[0].weights.data = {0.2, 0.2, 0.7};
  p.layers[0].bias = {0.1, 0.1, 0.1};
  const auto prof = symmetry_profile(arch, p);
  EXPECT_EQ(prof.distinct_perm_counts[0], 3);
  EXPECT_DOUBLE_EQ(prof.delta_min, 0.5);
  EXPECT_EQ(prof.total_multiplicity, 3);
  // Orderings of the rows alone, enumerated.
  std::set<std::vector<std::pair<double, double>>> orders;
  std::vector<std::size_t> idx = {0, 1, 2};
  do {
    std::vector<std::pair<double, double>> o;
    for (auto i : idx) o.emplace_back(p.layers[0].weights.data[i], p.layers[0].bias[i]);
    orders.insert(o);
  } while (std::next_permutation(idx.begin(), idx.end()));
  EXPECT_EQ(orders.size(), 3u);
}

TEST(SymmetryProfile, ToleranceGroupsNearRows) {
  const Architecture arch(1, {3}, Activation::relu());
  NetworkParams p = NetworkParams::zeros(arch);
  p.layers[0].weights.data = {0.2, 0.2 + 1e-9, 0.7};
  EXPECT_EQ(symmetry_profile(arch, p).distinct_perm_counts[0], 6);
  EXPECT_EQ(symmetry_profile(arch, p, 1e-6).distinct_perm_counts[0], 3);
  EXPECT_THROW(symmetry_profile(arch, p, -1.0), DomainError);
}

TEST(SymmetryProfile, BoundsOnCounts) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const Architecture arch(1, {1 + rng.below(5), 1 + rng.below(5)}, Activation::tanh());
    auto theta = random_params(arch, rng.next_u64()).flatten();
    for (double& v : theta) v = std::round(v);
    const auto prof = symmetry_profile(arch, NetworkParams::unflatten(arch, theta));
    for (std::size_t l = 1; l <= arch.depth(); ++l) {
      EXPECT_GE(prof.distinct_perm_counts[l - 1], 1);
      EXPECT_LE(prof.distinct_perm_counts[l - 1], factorial(arch.width(l)));
    }
  }
}

TEST(Orbit, DistinctImagesMatchMultiplicity) {
  Rng rng(5);
  for (int t = 0; t < 40; ++t) {
    const Architecture arch(1 + rng.below(2), {1 + rng.below(4), 1 + rng.below(4)}, Activation::tanh());
    auto p = random_params(arch, rng.next_u64());
    if (t % 2 == 1 && arch.width(1) >= 2) duplicate_neuron(arch, p, 1, 0, 1);
    if (t % 4 == 3 && arch.width(2) >= 3) {
      duplicate_neuron(arch, p, 2, 0, 1);
      duplicate_neuron(arch, p, 2, 0, 2);
    }
    const auto prof = symmetry_profile(arch, p);
    const auto brute = brute_force_images(arch, p);
    EXPECT_EQ(prof.total_multiplicity, brute.size());
    EXPECT_EQ(distinct_permutation_images(arch, p).size(), brute.size());
  }
}

TEST(Orbit, RowTiesWithDifferentOutgoingColumnsGiveMoreImages) {
  const Architecture arch(1, {2}, Activation::relu());
  NetworkParams p = NetworkParams::zeros(arch);
  p.layers[0].weights.data = {1.0, 1.0};
  p.layers[1].weights.data = {1.0, 2.0};
  EXPECT_EQ(symmetry_profile(arch, p).total_multiplicity, 1);
  EXPECT_EQ(distinct_permutation_images(arch, p).size(), 2u);
}

TEST(Orbit, DistinctImagesAreDeltaSeparated) {
  Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    const Architecture arch(1, {1 + rng.below(4), 1 + rng.below(4)}, Activation::tanh());
    auto p = random_params(arch, rng.next_u64());
    if (t % 2 == 0 && arch.width(1) >= 2) duplicate_neuron(arch, p, 1, 0, 1);
    const double delta = symmetry_profile(arch, p).delta_min;
    const auto images = distinct_permutation_images(arch, p);
    for (std::size_t i = 0; i < images.size(); ++i) {
      for (std::size_t j = i + 1; j < images.size(); ++j) {
        EXPECT_GE(linf_distance(images[i], images[j]), delta);
      }
    }
  }
}

TEST(EffectiveVolume, Examples) {
  const auto one = effective_volume(Architecture(1, {1}, Activation::relu()), 1.0);
  EXPECT_EQ(one.log_effective, one.log_total);
  const auto v = effective_volume(Architecture(1, {2}, Activation::relu()), 1.0);
  EXPECT_NEAR(*v.total, 128.0, 1e-12);
  EXPECT_NEAR(*v.effective, 64.0, 1e-12);
  EXPECT_THROW(effective_volume(Architecture(1, {2}, Activation::relu()), 0.0), DomainError);
}

TEST(EffectiveVolume, WidthSweepValues) {
  // 2^(3d+1) / d! evaluated exactly in integers and converted once.
  const std::map<std::size_t, double> expected = {
      {2, 64.0}, {4, 8192.0 / 24.0}, {8, 33554432.0 / 40320.0}};
  for (const auto& [d, want] : expected) {
    const auto v = effective_volume(Architecture(1, {d}, Activation::relu()), 1.0);
    EXPECT_NEAR(*v.effective, want, 1e-9 * want);
  }
  const auto v16 = effective_volume(Architecture(1, {16}, Activation::relu()), 1.0);
  EXPECT_NEAR(*v16.effective, std::ldexp(1.0, 49) / 20922789888000.0, 1e-9);
  const auto v32 = effective_volume(Architecture(1, {32}, Activation::relu()), 1.0);
  const double want32 = std::exp(97 * std::log(2.0) - std::lgamma(33.0));
  EXPECT_NEAR(*v32.effective, want32, 1e-12 * want32);
  EXPECT_LT(*v32.effective, 1e-6);
  // Not monotone at small widths: d=4 and d=8 exceed d=2.
  EXPECT_GT(*effective_volume(Architecture(1, {8}, Activation::relu()), 1.0).effective, 64.0);
}

TEST(EffectiveVolume, FactorialTimesEffectiveIsTotal) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const Architecture arch(1 + rng.below(3), {1 + rng.below(30), 1 + rng.below(30)}, Activation::relu());
    const double b = rng.uniform(0.5, 3.0);
    const auto v = effective_volume(arch, b);
    double logfact = 0.0;
    for (std::size_t l = 1; l <= 2; ++l) {
      for (std::size_t k = 2; k <= arch.width(l); ++k) logfact += std::log(static_cast<double>(k));
    }
    EXPECT_NEAR(v.log_effective + logfact, v.log_total, 1e-12 * std::max(1.0, std::abs(v.log_total)));
  }
}

TEST(Factorial, ExactValues) {
  EXPECT_EQ(factorial(0), 1);
  EXPECT_EQ(factorial(5), 120);
  EXPECT_EQ(factorial(25).str(), "15511210043330985984000000");
}
