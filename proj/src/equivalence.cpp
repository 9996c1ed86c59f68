#include "fequiv/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "fequiv/canonical.hpp"
#include "fequiv/errors.hpp"
#include "fequiv/rng.hpp"

namespace fequiv {

namespace {

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101};

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<std::vector<double>> ball_samples(std::size_t dim, double radius, std::size_t n,
                                              std::uint64_t seed) {
  if (dim == 0) throw StructuralError("ball_samples: dimension must be >= 1");
  if (!(radius >= 0.0)) throw DomainError("ball radius must be nonnegative");
  if (dim + 1 > std::size(kPrimes)) throw DomainError("ball_samples: dimension too large");
  std::vector<std::vector<double>> pts;
  pts.reserve(n);
  if (n == 0) return pts;
  pts.emplace_back(dim, 0.0);
  for (std::size_t i = 0; i < dim && pts.size() < n; ++i) {
    for (double s : {radius, -radius}) {
      if (pts.size() >= n) break;
      std::vector<double> p(dim, 0.0);
      p[i] = s;
      pts.push_back(std::move(p));
    }
  }
  Rng rng(seed);
  std::vector<double> shift(dim + 1);
  for (double& s : shift) s = rng.uniform();
  for (std::uint64_t k = 1; pts.size() < n; ++k) {
    std::vector<double> u(dim + 1);
    for (std::size_t j = 0; j <= dim; ++j) {
      u[j] = std::fmod(radical_inverse(k, kPrimes[j]) + shift[j], 1.0);
    }
    // Gaussian direction from the first dim coordinates, radius from the last.
    std::vector<double> p(dim);
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double t = std::clamp(u[j], 1e-12, 1.0 - 1e-12);
      p[j] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * t - 1.0);
      norm += p[j] * p[j];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double r = radius * std::pow(u[dim], 1.0 / static_cast<double>(dim));
    for (double& v : p) v = v / norm * r;
    pts.push_back(std::move(p));
  }
  return pts;
}

SupDistance sup_distance(const Architecture& arch_a, const NetworkParams& params_a,
                         const Architecture& arch_b, const NetworkParams& params_b,
                         const SamplingOptions& options) {
  if (arch_a.input_dim() != arch_b.input_dim() || arch_a.output_dim() != arch_b.output_dim()) {
    throw StructuralError("networks have different input or output dimensions");
  }
  if (options.n_samples == 0) throw DomainError("need at least one sample");
  SupDistance out;
  for (const auto& x : ball_samples(arch_a.input_dim(), options.input_radius, options.n_samples,
                                    options.seed)) {
    const auto ya = forward(arch_a, params_a, x);
    const auto yb = forward(arch_b, params_b, x);
    const double d = linf_distance(ya, yb);
    if (out.argmax.empty() || d > out.value) {
      out.value = d;
      out.argmax = x;
    }
  }
  return out;
}

double sampled_sup_distance(const Architecture& arch_a, const NetworkParams& params_a,
                            const Architecture& arch_b, const NetworkParams& params_b,
                            const SamplingOptions& options) {
  return sup_distance(arch_a, params_a, arch_b, params_b, options).value;
}

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kStructurallyEqualByPermutation:
      return "structurally_equal_by_permutation";
    case VerdictKind::kNumericallyEquivalent:
      return "numerically_equivalent";
    case VerdictKind::kDistinguished:
      return "distinguished";
  }
  return "distinguished";
}

EquivalenceVerdict decide_equivalence(const Architecture& arch, const NetworkParams& a,
                                      const NetworkParams& b, const EquivalenceOptions& options) {
  check_shapes(arch, a);
  check_shapes(arch, b);
  EquivalenceVerdict verdict;
  const CanonicalForm ca = canonicalize(arch, a);
  const CanonicalForm cb = canonicalize(arch, b);
  if (bit_equal(ca.params, cb.params)) {
    verdict.kind = VerdictKind::kStructurallyEqualByPermutation;
    verdict.sup_distance_estimate = 0.0;
    verdict.witness = compose(cb.witness.inverse(), ca.witness);
    return verdict;
  }
  SupDistance sup = sup_distance(arch, a, arch, b, options.sampling);
  verdict.sup_distance_estimate = sup.value;
  if (sup.value <= options.tolerance) {
    verdict.kind = VerdictKind::kNumericallyEquivalent;
  } else {
    verdict.kind = VerdictKind::kDistinguished;
    verdict.distinguishing_input = std::move(sup.argmax);
  }
  return verdict;
}

EquivalenceVerdict decide_equivalence(const Architecture& arch_a, const NetworkParams& a,
                                      const Architecture& arch_b, const NetworkParams& b,
                                      const EquivalenceOptions& options) {
  if (!(arch_a == arch_b)) throw StructuralError("architectures differ");
  return decide_equivalence(arch_a, a, b, options);
}

}  // namespace fequiv
