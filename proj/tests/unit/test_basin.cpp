#include <gtest/gtest.h>

#include <cmath>

#include "fequiv/basin.hpp"
#include "fequiv/errors.hpp"
#include "fequiv/rng.hpp"
#include "fequiv/transforms.hpp"

using namespace fequiv;

namespace {

NetworkParams teacher_t3(const Architecture& arch) {
  NetworkParams t = NetworkParams::zeros(arch);
  t.layers[0].weights.data = {0.8, -0.8};
  t.layers[0].bias = {0.6, 0.6};
  t.layers[1].weights.data = {1.0, 1.0};
  return t;
}

double linf(const NetworkParams& a, const NetworkParams& b) { return linf_distance(a.flatten(), b.flatten()); }

}  // namespace

TEST(Init, DegenerateUniformIsZero) {
  const Architecture arch(3, {4, 2}, Activation::tanh());
  for (double v : initialize(arch, InitScheme::uniform(0.0, 0.0, 5)).flatten()) EXPECT_EQ(v, 0.0);
}

TEST(Init, Variances) {
  const Architecture arch(2, {4}, Activation::tanh());
  EXPECT_DOUBLE_EQ(init_variance(arch, InitScheme::xavier(), 1), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(init_variance(arch, InitScheme::he(), 1), 1.0);
  EXPECT_DOUBLE_EQ(init_variance(arch, InitScheme::uniform(-1, 1), 2), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(init_variance(arch, InitScheme::normal(0, 0.5), 2), 0.25);
  const Architecture one(1, {2}, Activation::tanh());
  EXPECT_DOUBLE_EQ(init_variance(one, InitScheme::xavier(), 1), 2.0 / 3.0);
}

TEST(Init, EmpiricalVarianceMatches) {
  const Architecture arch(1, {2}, Activation::tanh());
  const auto scheme = InitScheme::xavier(3);
  double s = 0.0;
  double s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double w = initialize(arch, scheme.with_seed(split_seed(3, i))).layers[0].weights(0, 0);
    s += w;
    s2 += w * w;
  }
  const double var = s2 / n - (s / n) * (s / n);
  EXPECT_NEAR(var, 2.0 / 3.0, 0.03);
}

TEST(Init, SchemesAreExchangeableAcrossNeurons) {
  // For every scheme, neuron 0 and neuron 1 of a layer are identically
  // distributed, so each ordering of their first weights is equally likely.
  const Architecture arch(2, {3}, Activation::relu());
  for (const auto& base : {InitScheme::uniform(-1, 1, 1), InitScheme::normal(0.2, 1, 2), InitScheme::xavier(3),
                           InitScheme::he(4)}) {
    const int n = 100000;
    int greater = 0;
    double mean0 = 0.0;
    double mean1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto p = initialize(arch, base.with_seed(split_seed(base.seed, i)));
      greater += p.layers[0].weights(0, 0) > p.layers[0].weights(1, 0);
      mean0 += p.layers[0].bias[0];
      mean1 += p.layers[0].bias[1];
    }
    const double frac = double(greater) / n;
    EXPECT_NEAR(frac, 0.5, 4.0 * std::sqrt(0.25 / n)) << base.kind_name();
    const double sd = std::sqrt(init_variance(arch, base, 1) / n);
    EXPECT_NEAR((mean0 - mean1) / n, 0.0, 4.0 * std::sqrt(2.0) * sd) << base.kind_name();
  }
}

TEST(Init, Validation) {
  EXPECT_THROW(InitScheme::uniform(1, -1).validate(), DomainError);
  EXPECT_THROW(InitScheme::normal(0, 0).validate(), DomainError);
  EXPECT_EQ(InitScheme::parse_kind("he"), InitKind::kHe);
  EXPECT_THROW(InitScheme::parse_kind("orthogonal"), DomainError);
}

TEST(Dataset, CsvRoundTrip) {
  const Architecture arch(2, {3}, Activation::tanh());
  const auto teacher = initialize(arch, InitScheme::normal(0, 1, 7));
  const auto data = teacher_student_dataset(arch, teacher, 10, 2.0, 8);
  const auto back = Dataset::from_csv(data.to_csv(), 2);
  EXPECT_EQ(back.inputs, data.inputs);
  EXPECT_EQ(back.targets, data.targets);
  for (const auto& x : data.inputs) {
    for (double v : x) EXPECT_LE(std::abs(v), 2.0);
  }
  EXPECT_EQ(mean_squared_error(arch, teacher, data), 0.0);
  EXPECT_EQ(xor_dataset().size(), 4u);
}

TEST(Train, ConvergesAtIterationZeroOnOwnData) {
  const Architecture arch(2, {3}, Activation::tanh());
  const auto theta = initialize(arch, InitScheme::normal(0, 1, 9));
  const auto data = teacher_student_dataset(arch, theta, 20, 1.0, 10);
  const auto run = train(arch, theta, data, TrainConfig{});
  EXPECT_TRUE(run.converged());
  EXPECT_EQ(run.iterations, 0u);
  EXPECT_EQ(run.final_loss, 0.0);
}

TEST(Train, PermutedTeacherHasZeroLoss) {
  const Architecture arch(1, {2}, Activation::relu());
  const auto teacher = teacher_t3(arch);
  const auto data = teacher_student_dataset(arch, teacher, 16, 2.0, 11);
  PermutationSpec swap;
  swap.perms.emplace_back(std::vector<std::size_t>{1, 0});
  const auto student = apply_permutation(arch, teacher, swap);
  EXPECT_FALSE(bit_equal(student, teacher));
  EXPECT_EQ(mean_squared_error(arch, student, data), 0.0);
  const auto run = train(arch, student, data, TrainConfig{});
  EXPECT_EQ(run.iterations, 0u);
  EXPECT_TRUE(run.converged());
}

TEST(Train, DivergenceIsAStatus) {
  const Architecture arch(1, {2}, Activation::identity());
  const auto teacher = initialize(arch, InitScheme::normal(0, 1, 1));
  const auto data = teacher_student_dataset(arch, teacher, 8, 5.0, 2);
  TrainConfig cfg;
  cfg.step_size = 10.0;
  const auto run = train(arch, initialize(arch, InitScheme::normal(0, 1, 3)), data, cfg);
  EXPECT_EQ(run.status, TrainStatus::kDiverged);
  EXPECT_THROW((TrainConfig{0.0, 10, 1e-6}.validate()), DomainError);
}

TEST(Train, ConvergedRunsSatisfyThreshold) {
  const Architecture arch(2, {4}, Activation::tanh());
  const auto data = xor_dataset();
  TrainConfig cfg{0.5, 20000, 1e-6};
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto run = train(arch, initialize(arch, InitScheme::normal(0, 1, s)), data, cfg, s);
    if (run.converged()) EXPECT_LE(run.grad_norm, cfg.grad_threshold);
  }
}

TEST(Train, GradientDescentIsPermutationEquivariant) {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const Architecture arch(2, {3, 3}, Activation::tanh());
    const auto teacher = initialize(arch, InitScheme::normal(0, 1, rng.next_u64()));
    const auto data = teacher_student_dataset(arch, teacher, 12, 1.0, rng.next_u64());
    const auto init = initialize(arch, InitScheme::normal(0, 1, rng.next_u64()));
    const auto spec = PermutationSpec::random(arch, rng);
    TrainConfig cfg{0.1, 300, 0.0};
    const auto a = train(arch, init, data, cfg);
    const auto b = train(arch, apply_permutation(arch, init, spec), data, cfg);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_LE(linf(apply_permutation(arch, a.final_params, spec), b.final_params), 1e-8);
  }
}

TEST(Loss, InvariantUnderPermutation) {
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const Architecture arch(1 + rng.below(3), {1 + rng.below(4), 1 + rng.below(4)}, Activation::sigmoid());
    const auto teacher = initialize(arch, InitScheme::normal(0, 1, rng.next_u64()));
    const auto data = teacher_student_dataset(arch, teacher, 10, 1.0, rng.next_u64());
    const auto p = initialize(arch, InitScheme::normal(0, 1, rng.next_u64()));
    const auto q = apply_permutation(arch, p, PermutationSpec::random(arch, rng));
    EXPECT_NEAR(mean_squared_error(arch, p, data), mean_squared_error(arch, q, data), 1e-12);
  }
}

TEST(OrbitMembership, Examples) {
  const Architecture arch(2, {3}, Activation::tanh());
  Rng rng(14);
  const auto star = initialize(arch, InitScheme::uniform(-1, 1, 15));
  const auto image = apply_permutation(arch, star, PermutationSpec::random(arch, rng));
  EXPECT_TRUE(orbit_membership(arch, image, star, 0.0));
  const double delta = symmetry_profile(arch, star).delta_min;
  auto moved = star;
  moved.layers[0].bias[1] += delta;
  EXPECT_FALSE(orbit_membership(arch, moved, star, delta / 4));
  auto far = star.flatten();
  for (double& v : far) v += 10.0;
  EXPECT_FALSE(orbit_membership(arch, NetworkParams::unflatten(arch, far), star, 1.0));
  const Architecture other(2, {4}, Activation::tanh());
  EXPECT_THROW(orbit_membership(arch, star, NetworkParams::zeros(other), 1.0), StructuralError);
}

TEST(OrbitMembership, AgreesWithOrbitDistanceBelowHalfDelta) {
  Rng rng(16);
  const Architecture arch(1, {3}, Activation::relu());
  for (int t = 0; t < 200; ++t) {
    const auto star = initialize(arch, InitScheme::uniform(-1, 1, rng.next_u64()));
    const double delta = symmetry_profile(arch, star).delta_min;
    const double tol = 0.45 * delta;
    auto theta = apply_permutation(arch, star, PermutationSpec::random(arch, rng)).flatten();
    for (double& v : theta) v += rng.uniform(-0.6, 0.6) * delta;
    const auto p = NetworkParams::unflatten(arch, theta);
    EXPECT_EQ(orbit_membership(arch, p, star, tol), orbit_distance(arch, p, star) <= tol);
  }
}

TEST(Amplification, OrbitOverSingleMatchesMultiplicity) {
  const Architecture arch(1, {2}, Activation::relu());
  NetworkParams star = NetworkParams::zeros(arch);
  star.layers[0].weights.data = {0.3, -0.3};
  star.layers[0].bias = {0.2, -0.2};
  star.layers[1].weights.data = {0.1, -0.1};
  const auto r = amplification_check(arch, star, InitScheme::uniform(-0.5, 0.5, 17), 100000);
  EXPECT_EQ(r.predicted_ratio, 2.0);
  EXPECT_EQ(r.orbit_size, 2u);
  EXPECT_LE(r.max_images_per_draw, 1u);
  EXPECT_GT(r.single_hits, 100u);
  EXPECT_LE(std::abs(r.ratio - 2.0), 3.0 * r.ratio_stderr);
}

TEST(Amplification, SingletonOrbit) {
  const Architecture arch(1, {2}, Activation::relu());
  NetworkParams star = NetworkParams::zeros(arch);
  star.layers[0].weights.data = {0.3, 0.3};
  star.layers[1].weights.data = {0.1, 0.1};
  EXPECT_THROW(amplification_check(arch, star, InitScheme::uniform(-1, 1, 1), 10), DomainError);
  const auto r = amplification_check(arch, star, InitScheme::uniform(-0.5, 0.5, 18), 20000, 0.3);
  EXPECT_EQ(r.orbit_hits, r.single_hits);
  EXPECT_EQ(r.predicted_ratio, 1.0);
}

TEST(Basin, XorFindsSeveralClusters) {
  const Architecture arch(2, {4}, Activation::tanh());
  const auto s = basin_experiment(arch, InitScheme::normal(0, 1, 19), xor_dataset(), 200, TrainConfig{0.5, 5000, 1e-5});
  std::size_t total = 0;
  for (const auto& c : s.clusters) total += c.count;
  EXPECT_EQ(total, s.n_converged);
  EXPECT_GE(s.clusters.size(), 2u);
  EXPECT_GE(s.observed_orbit_fraction, 0.0);
  EXPECT_LE(s.observed_orbit_fraction, 1.0);
  EXPECT_LE(s.single_hits, s.orbit_hits);
}

TEST(Basin, InitsNearOrbitAllLandInOrbit) {
  const Architecture arch(1, {2}, Activation::relu());
  const auto teacher = teacher_t3(arch);
  const auto data = teacher_student_dataset(arch, teacher, 16, 2.0, 20);
  Rng rng(21);
  std::size_t hits = 0;
  const std::size_t n = 50;
  for (std::size_t i = 0; i < n; ++i) {
    auto theta = apply_permutation(arch, teacher, PermutationSpec::random(arch, rng)).flatten();
    for (double& v : theta) v += rng.uniform(-0.01, 0.01);
    const auto run = train(arch, NetworkParams::unflatten(arch, theta), data, TrainConfig{0.1, 10000, 1e-7});
    hits += run.converged() && orbit_membership(arch, run.final_params, teacher, 0.05);
  }
  EXPECT_EQ(double(hits) / n, 1.0);
}

TEST(Basin, ReluTeacherHitsSplitEvenlyBetweenImages) {
  // Given a run lands in the orbit, each of the two images is equally likely,
  // so single hits ~ Binomial(orbit hits, 1/2).
  const Architecture arch(1, {2}, Activation::relu());
  const auto teacher = teacher_t3(arch);
  const auto data = teacher_student_dataset(arch, teacher, 16, 2.0, 20240601);
  BasinOptions opt;
  opt.reference = teacher;
  opt.cluster_tolerance = 0.79;
  opt.threads = 4;
  const auto s = basin_experiment(arch, InitScheme::uniform(-1, 1, 20240601), data, 2000,
                                  TrainConfig{0.1, 10000, 1e-5}, opt);
  ASSERT_GT(s.orbit_hits, 100u);
  EXPECT_LT(opt.cluster_tolerance.value(), s.profile->delta_min / 2);
  const double n = double(s.orbit_hits);
  EXPECT_LE(std::abs(double(s.single_hits) - n / 2), 1.96 * std::sqrt(n / 4))
      << s.single_hits << " of " << s.orbit_hits;
}

TEST(Basin, DuplicatedTeacherOrbitEqualsSingle) {
  const Architecture arch(1, {2}, Activation::relu());
  NetworkParams teacher = NetworkParams::zeros(arch);
  teacher.layers[0].weights.data = {0.8, 0.8};
  teacher.layers[0].bias = {0.6, 0.6};
  teacher.layers[1].weights.data = {0.5, 0.5};
  const auto data = teacher_student_dataset(arch, teacher, 16, 2.0, 22);
  BasinOptions opt;
  opt.reference = teacher;
  opt.cluster_tolerance = 0.5;
  const auto s = basin_experiment(arch, InitScheme::uniform(-1, 1, 23), data, 200, TrainConfig{0.1, 5000, 1e-5},
                                  opt);
  EXPECT_EQ(s.profile->total_multiplicity, 1);
  EXPECT_EQ(s.orbit_hits, s.single_hits);
}

TEST(Basin, ThreadCountDoesNotChangeResults) {
  const Architecture arch(2, {3}, Activation::tanh());
  BasinOptions one;
  BasinOptions four;
  four.threads = 4;
  const TrainConfig cfg{0.5, 2000, 1e-5};
  const auto a = basin_experiment(arch, InitScheme::normal(0, 1, 24), xor_dataset(), 40, cfg, one);
  const auto b = basin_experiment(arch, InitScheme::normal(0, 1, 24), xor_dataset(), 40, cfg, four);
  ASSERT_EQ(a.clusters.size(), b.clusters.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_TRUE(bit_equal(a.runs[i].final_params, b.runs[i].final_params));
    EXPECT_EQ(a.runs[i].cluster_id, b.runs[i].cluster_id);
  }
}

TEST(Basin, NoConvergedRunsIsFlagged) {
  const Architecture arch(2, {3}, Activation::tanh());
  const auto s = basin_experiment(arch, InitScheme::normal(0, 1, 25), xor_dataset(), 5, TrainConfig{0.01, 1, 1e-12});
  EXPECT_TRUE(s.no_converged_runs);
  EXPECT_TRUE(s.clusters.empty());
  EXPECT_FALSE(s.theta_star.has_value());
}
