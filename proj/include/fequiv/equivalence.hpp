#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fequiv/network.hpp"
#include "fequiv/transforms.hpp"

namespace fequiv {

// Deterministic quasi-uniform points in the closed L2 ball of radius
// `radius` in R^dim: the origin, the 2*dim scaled axis points, then a
// randomly shifted Halton sequence mapped into the ball. Returns exactly n
// points (a prefix of that list when n is small).
std::vector<std::vector<double>> ball_samples(std::size_t dim, double radius, std::size_t n,
                                              std::uint64_t seed);

struct SupDistance {
  double value = 0.0;
  std::vector<double> argmax;  // sample attaining `value`
};

struct SamplingOptions {
  double input_radius = 1.0;
  std::size_t n_samples = 4096;
  std::uint64_t seed = 0;
};

// max over the sample of |f_a(x) - f_b(x)|_inf; a lower bound on the true
// sup distance over the ball.
SupDistance sup_distance(const Architecture& arch_a, const NetworkParams& params_a,
                         const Architecture& arch_b, const NetworkParams& params_b,
                         const SamplingOptions& options);

double sampled_sup_distance(const Architecture& arch_a, const NetworkParams& params_a,
                            const Architecture& arch_b, const NetworkParams& params_b,
                            const SamplingOptions& options);

enum class VerdictKind { kStructurallyEqualByPermutation, kNumericallyEquivalent, kDistinguished };

std::string to_string(VerdictKind kind);

struct EquivalenceVerdict {
  VerdictKind kind = VerdictKind::kDistinguished;
  double sup_distance_estimate = 0.0;
  // Present for kStructurallyEqualByPermutation: maps the first network onto
  // the second.
  std::optional<PermutationSpec> witness;
  // Present for kDistinguished.
  std::optional<std::vector<double>> distinguishing_input;
};

struct EquivalenceOptions {
  SamplingOptions sampling;
  double tolerance = 1e-7;
};

// Canonical forms first; sampling only when the canonical forms differ.
// kNumericallyEquivalent is not a proof of equivalence.
EquivalenceVerdict decide_equivalence(const Architecture& arch, const NetworkParams& a,
                                      const NetworkParams& b, const EquivalenceOptions& options);

// Same, checking that both architectures agree first.
EquivalenceVerdict decide_equivalence(const Architecture& arch_a, const NetworkParams& a,
                                      const Architecture& arch_b, const NetworkParams& b,
                                      const EquivalenceOptions& options);

}  // namespace fequiv
