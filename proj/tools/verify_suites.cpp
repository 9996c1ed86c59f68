#include "verify_suites.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "fequiv/basin.hpp"
#include "fequiv/bounds.hpp"
#include "fequiv/canonical.hpp"
#include "fequiv/empirical.hpp"
#include "fequiv/equivalence.hpp"
#include "fequiv/errors.hpp"
#include "fequiv/rng.hpp"
#include "fequiv/transforms.hpp"

namespace fequiv::cli {

namespace {

constexpr std::uint64_t kSuiteSeed = 20240601;

Activation random_activation(Rng& rng) {
  switch (rng.below(5)) {
    case 0: return Activation::relu();
    case 1: return Activation::leaky_relu(0.1);
    case 2: return Activation::tanh();
    case 3: return Activation::sigmoid();
    default: return Activation::identity();
  }
}

Architecture random_architecture(Rng& rng, std::size_t max_depth, std::size_t max_width) {
  const std::size_t depth = 1 + rng.below(max_depth);
  std::vector<std::size_t> widths;
  std::vector<Activation> acts;
  for (std::size_t l = 0; l < depth; ++l) {
    widths.push_back(1 + rng.below(max_width));
    acts.push_back(random_activation(rng));
  }
  return Architecture(1 + rng.below(3), widths, acts, 1 + rng.below(2));
}

double max_output_gap(const Architecture& arch, const NetworkParams& a, const NetworkParams& b,
                      const std::vector<std::vector<double>>& xs) {
  double gap = 0.0;
  for (const auto& x : xs) {
    const auto ya = forward(arch, a, x);
    const auto yb = forward(arch, b, x);
    gap = std::max(gap, linf_distance(ya, yb));
  }
  return gap;
}

std::vector<PropertyResult> suite_permutation_invariance() {
  Rng rng(kSuiteSeed);
  double worst = 0.0;
  double worst_loss = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Architecture arch = random_architecture(rng, 3, 8);
    const NetworkParams theta = initialize(arch, InitScheme::normal(0.0, 1.0, rng.next_u64()));
    const auto xs = ball_samples(arch.input_dim(), 1.0, 200, rng.next_u64());
    Dataset data;
    for (const auto& x : xs) {
      data.inputs.push_back(x);
      data.targets.push_back(std::vector<double>(arch.output_dim(), 0.5));
    }
    const double loss = mean_squared_error(arch, theta, data);
    for (int k = 0; k < 5; ++k) {
      const auto spec = PermutationSpec::random(arch, rng);
      const auto permuted = apply_permutation(arch, theta, spec);
      worst = std::max(worst, max_output_gap(arch, theta, permuted, xs));
      worst_loss = std::max(worst_loss, std::abs(mean_squared_error(arch, permuted, data) - loss));
    }
  }
  return {{"permutation_preserves_outputs", worst <= 1e-9, {{"max_gap", worst}, {"tolerance", 1e-9}}},
          {"permutation_preserves_loss", worst_loss <= 1e-12,
           {{"max_gap", worst_loss}, {"tolerance", 1e-12}}}};
}

std::vector<PropertyResult> suite_table1() {
  Rng rng(kSuiteSeed + 1);
  const std::vector<Activation> acts = {Activation::relu(), Activation::leaky_relu(0.2),
                                        Activation::tanh(), Activation::sigmoid()};
  std::map<std::string, std::string> scaling_pattern;
  std::map<std::string, std::string> flip_pattern;
  bool scaling_ok = true;
  bool flip_ok = true;
  for (const auto& act : acts) {
    const Architecture arch(2, {3}, act, 1);
    const NetworkParams theta = initialize(arch, InitScheme::normal(0.0, 1.0, rng.next_u64()));
    const auto xs = ball_samples(2, 1.0, 100, rng.next_u64());
    try {
      const auto scaled = apply_scaling(arch, theta, {1, {2.0, 0.5, 4.0}});
      const double gap = max_output_gap(arch, theta, scaled, xs);
      scaling_pattern[act.name()] = gap == 0.0 ? "exact" : "inexact";
    } catch (const UnsupportedTransformError&) {
      scaling_pattern[act.name()] = "rejected";
    }
    try {
      const std::vector<int> mask = {-1, 1, -1};
      const auto flipped = apply_sign_flip(arch, theta, 1, mask);
      const double gap = max_output_gap(arch, theta, flipped, xs);
      flip_pattern[act.name()] = gap <= 1e-15 ? "exact" : "inexact";
    } catch (const UnsupportedTransformError&) {
      flip_pattern[act.name()] = "rejected";
    }
    const bool homogeneous = act.is_positive_homogeneous();
    scaling_ok &= scaling_pattern[act.name()] == (homogeneous ? "exact" : "rejected");
    flip_ok &= flip_pattern[act.name()] == (act.kind() == ActivationKind::kTanh ? "exact" : "rejected");
  }
  return {{"scaling_gate", scaling_ok, Json(scaling_pattern)},
          {"sign_flip_gate", flip_ok, Json(flip_pattern)}};
}

std::vector<PropertyResult> suite_canonical() {
  Rng rng(kSuiteSeed + 2);
  std::size_t mismatches = 0;
  std::size_t witness_failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Architecture arch = random_architecture(rng, 3, 6);
    NetworkParams theta = initialize(arch, InitScheme::uniform(-1.0, 1.0, rng.next_u64()));
    const auto spec = PermutationSpec::random(arch, rng);
    const auto a = canonicalize(arch, theta);
    const auto b = canonicalize(arch, apply_permutation(arch, theta, spec));
    if (!bit_equal(a.params, b.params)) ++mismatches;
    if (!bit_equal(apply_permutation(arch, theta, a.witness), a.params)) ++witness_failures;
  }
  // Orbit counting with fully duplicated neurons.
  std::size_t count_failures = 0;
  const Architecture arch(1, {3, 2}, Activation::tanh(), 1);
  for (int trial = 0; trial < 20; ++trial) {
    NetworkParams theta = initialize(arch, InitScheme::uniform(-1.0, 1.0, rng.next_u64()));
    if (trial % 2 == 0) {
      // Neuron 1 of layer 1 duplicates neuron 0, incoming and outgoing.
      theta.layers[0].weights(1, 0) = theta.layers[0].weights(0, 0);
      theta.layers[0].bias[1] = theta.layers[0].bias[0];
      for (std::size_t r = 0; r < 2; ++r) theta.layers[1].weights(r, 1) = theta.layers[1].weights(r, 0);
    }
    const auto profile = symmetry_profile(arch, theta);
    const auto images = distinct_permutation_images(arch, theta);
    if (profile.total_multiplicity != images.size()) ++count_failures;
  }
  return {{"orbit_collapse", mismatches == 0, {{"mismatches", mismatches}, {"trials", 200}}},
          {"witness_maps_to_canonical", witness_failures == 0, {{"failures", witness_failures}}},
          {"orbit_size_matches_multiplicity", count_failures == 0, {{"failures", count_failures}}}};
}

std::vector<PropertyResult> suite_sandwich() {
  bool sandwich = true;
  bool volume = true;
  Json rows = Json::array();
  for (std::size_t d = 1; d <= 2; ++d) {
    const auto space = grid_sample(d, d == 1 ? 21 : 9, 1.0);
    for (double eps : {0.05, 0.1, 0.15, 0.2, 0.3, 0.45, 0.6, 0.8, 1.0, 1.5}) {
      const auto m2 = exact_packing_number(space, 2.0 * eps);
      const auto n = exact_covering_number(space, eps);
      const auto mh = exact_packing_number(space, eps / 2.0);
      const double vol = volume_covering_bound(d, std::pow(2.0, static_cast<double>(d)), eps);
      sandwich &= m2 <= n && n <= mh;
      volume &= static_cast<double>(mh) <= vol;
      rows.push_back({{"dim", d}, {"epsilon", eps}, {"M_2eps", m2}, {"N_eps", n}, {"M_half_eps", mh},
                      {"volume_bound", vol}});
    }
  }
  return {{"packing_covering_sandwich", sandwich, rows}, {"packing_below_volume_bound", volume, Json()}};
}

std::vector<PropertyResult> suite_amplification() {
  const Architecture arch(1, {2}, Activation::relu(), 1);
  NetworkParams star = NetworkParams::zeros(arch);
  star.layers[0].weights.data = {0.5, -0.5};
  star.layers[0].bias = {0.5, -0.5};
  star.layers[1].weights.data = {0.3, -0.2};
  star.layers[1].bias = {0.1};
  const auto scheme = InitScheme::uniform(-1.0, 1.0, kSuiteSeed + 3);
  const auto r = amplification_check(arch, star, scheme, 50000);
  const bool within = std::abs(r.ratio - r.predicted_ratio) <= 3.0 * r.ratio_stderr;

  NetworkParams dup = star;
  dup.layers[0].weights.data = {0.5, 0.5};
  dup.layers[0].bias = {0.5, 0.5};
  dup.layers[1].weights.data = {0.3, 0.3};
  const auto rd = amplification_check(arch, dup, scheme, 50000, 0.5);
  return {{"orbit_over_single_matches_multiplicity", within && r.max_images_per_draw <= 1,
           amplification_to_json(r)},
          {"singleton_orbit_ratio_is_one", rd.orbit_hits == rd.single_hits && rd.orbit_size == 1,
           amplification_to_json(rd)}};
}

std::vector<PropertyResult> suite_equivariance() {
  const Architecture arch(1, {3}, Activation::tanh(), 1);
  NetworkParams teacher = NetworkParams::zeros(arch);
  teacher.layers[0].weights.data = {1.0, -0.7, 0.4};
  teacher.layers[0].bias = {0.2, 0.1, -0.3};
  teacher.layers[1].weights.data = {0.8, -0.5, 0.6};
  teacher.layers[1].bias = {0.05};
  const Dataset data = teacher_student_dataset(arch, teacher, 16, 1.0, kSuiteSeed + 4);
  TrainConfig config;
  config.step_size = 0.1;
  config.max_iters = 300;
  Rng rng(kSuiteSeed + 5);
  double worst = 0.0;
  for (int run = 0; run < 10; ++run) {
    const NetworkParams init = initialize(arch, InitScheme::xavier(rng.next_u64()));
    const auto spec = PermutationSpec::random(arch, rng);
    const auto a = train(arch, init, data, config);
    const auto b = train(arch, apply_permutation(arch, init, spec), data, config);
    worst = std::max(worst, linf_distance(apply_permutation(arch, a.final_params, spec), b.final_params));
  }
  return {{"gradient_descent_equivariant", worst <= 1e-8, {{"max_gap", worst}, {"tolerance", 1e-8}}}};
}

std::vector<PropertyResult> suite_bounds() {
  const Architecture arch(2, {3, 4}, Activation::relu(), 1);
  const BoundConfig base(arch, 1.0, 1.0, 1.0);
  double worst_halving = 0.0;
  double prev = deep_covering_bound(base);
  for (double eps : {0.5, 0.25, 0.125}) {
    const double cur = deep_covering_bound(base.with_epsilon(eps));
    const double step = cur - prev;
    worst_halving = std::max(worst_halving, std::abs(step - static_cast<double>(arch.param_count()) * std::log(2.0)));
    prev = cur;
  }
  const auto terms = deep_covering_terms(base);
  const double discount = -(std::lgamma(4.0) + std::lgamma(5.0));
  bool stirling = true;
  for (std::size_t d = 1; d <= 170; ++d) stirling &= stirling_bracket(d).strict;
  return {{"epsilon_halving_adds_S_log2", worst_halving <= 1e-9, {{"max_error", worst_halving}}},
          {"factorial_discount", std::abs(terms.factorial_discount - discount) <= 1e-12,
           {{"value", terms.factorial_discount}, {"expected", discount}}},
          {"stirling_strict_up_to_170", stirling, Json()}};
}

std::vector<PropertyResult> suite_volume() {
  Json rows = Json::array();
  bool formula = true;
  std::vector<double> logs;
  for (std::size_t d : {2, 4, 8, 16, 32}) {
    const Architecture arch(1, {d}, Activation::relu(), 1);
    const auto v = effective_volume(arch, 1.0);
    const double expected = static_cast<double>(3 * d + 1) * std::log(2.0) - std::lgamma(static_cast<double>(d) + 1.0);
    formula &= std::abs(v.log_effective - expected) <= 1e-9 * std::max(1.0, std::abs(expected));
    logs.push_back(v.log_effective);
    rows.push_back({{"d", d}, {"log_effective_volume", v.log_effective}});
  }
  bool tail_decreasing = logs[2] > logs[3] && logs[3] > logs[4];
  return {{"effective_volume_formula", formula, rows},
          {"decreasing_from_d8", tail_decreasing, Json()},
          {"below_1e-6_at_d32", std::exp(logs[4]) < 1e-6, {{"value", std::exp(logs[4])}}}};
}

const std::map<std::string, std::function<std::vector<PropertyResult>()>>& registry() {
  static const std::map<std::string, std::function<std::vector<PropertyResult>()>> suites = {
      {"theorem1", suite_permutation_invariance},     {"table1", suite_table1},
      {"canonical", suite_canonical},   {"sandwich", suite_sandwich},
      {"amplification", suite_amplification}, {"equivariance", suite_equivariance},
      {"bounds", suite_bounds},         {"volume", suite_volume},
  };
  return suites;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

std::vector<PropertyResult> run_suite(const std::string& name) {
  const auto& suites = registry();
  const auto it = suites.find(name);
  if (it == suites.end()) {
    std::string list;
    for (const auto& n : suite_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown suite '" + name + "'; available suites: " + list);
  }
  return it->second();
}

}  // namespace fequiv::cli
