#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fequiv/network.hpp"

namespace fequiv {

// Inputs shared by every covering-number formula.
class BoundConfig {
 public:
  // rho defaults to each activation's Lipschitz constant on its hidden-range
  // interval [-B^(i), B^(i)].
  BoundConfig(Architecture arch, double weight_bound, double input_radius, double epsilon,
              std::optional<std::vector<double>> rho = std::nullopt);

  const Architecture& arch() const noexcept { return arch_; }
  double weight_bound() const noexcept { return weight_bound_; }
  double input_radius() const noexcept { return input_radius_; }
  double epsilon() const noexcept { return epsilon_; }
  const std::vector<double>& rho() const noexcept { return rho_; }

  double rho_bar() const noexcept;
  // s_i = B sqrt(d_i d_{i-1}), i = 1..L
  double spectral_proxy(std::size_t i) const;
  double s_bar() const noexcept;

  BoundConfig with_epsilon(double epsilon) const;

 private:
  Architecture arch_;
  double weight_bound_;
  double input_radius_;
  double epsilon_;
  std::vector<double> rho_;
};

// log of (16 B^2 (B_x+1) sqrt(d0) d1 / eps)^S * rho^{S_h} / d1! for L = 1.
double shallow_covering_bound(const BoundConfig& cfg);

struct DeepBoundTerms {
  double base = 0.0;                // S log(4(L+1)(B_x+1)(2B)^{L+2} rho_bar prod_{j=0}^{L} d_j / eps)
  double factorial_discount = 0.0;  // -sum_l log(d_l!)
  double total = 0.0;               // base + factorial_discount
};

DeepBoundTerms deep_covering_terms(const BoundConfig& cfg);

// log of the deep covering bound, i.e. deep_covering_terms(cfg).total.
double deep_covering_bound(const BoundConfig& cfg);

struct StirlingBracket {
  double lower = 0.0;
  double value = 0.0;  // d! rounded to double (inf above 170)
  double upper = 0.0;
  double log_lower = 0.0;
  double log_value = 0.0;
  double log_upper = 0.0;
  boost::multiprecision::cpp_int exact;
  // lower < d! < upper, decided in 50-digit arithmetic.
  bool strict = false;
};

// sqrt(2 pi d)(d/e)^d exp(1/(12d+1)) < d! < sqrt(2 pi d)(d/e)^d exp(1/(12d)).
StirlingBracket stirling_bracket(std::size_t d);

enum class EntropyRow { kSpectral2017, kPacBayes2017, kLin2019, kPdim2019, kPermutation };
inline constexpr std::size_t kEntropyRowCount = 5;
std::string to_string(EntropyRow row);

// Order-level metric entropies (natural log, absolute constants set to 1).
struct EntropyComparison {
  std::array<double, kEntropyRowCount> values{};
  // True where a logarithm's argument was <= 1 and the entry was floored at 0.
  std::array<bool, kEntropyRowCount> floored{};

  double operator[](EntropyRow row) const { return values[static_cast<std::size_t>(row)]; }
  bool is_floored(EntropyRow row) const { return floored[static_cast<std::size_t>(row)]; }
};

EntropyComparison entropy_comparison(const BoundConfig& cfg);

struct DudleyResult {
  double value = 0.0;
  bool converged = true;
  double error_estimate = 0.0;
  // Where the entropy first reaches 0 (the integration actually stops here).
  double support_end = 0.0;
};

// 12 * integral_0^limit sqrt(entropy(eps) / n) d eps. The entropy must be
// nonnegative and nonincreasing. The integral is split at the point where the
// entropy reaches 0 and evaluated on dyadic pieces toward 0; if the pieces do
// not decay the result is flagged unconverged and carries the partial sum.
DudleyResult dudley_rademacher_bound(const std::function<double(double)>& entropy, double n,
                                     double limit, double abs_tolerance = 1e-6);

// V (2 / eps)^d
double volume_covering_bound(std::size_t dim, double volume, double epsilon);
double log_volume_covering_bound(std::size_t dim, double volume, double epsilon);

struct PdimCovering {
  double value = 0.0;  // may be +inf when not representable
  double log_value = 0.0;
  bool exact_sum = false;  // false: (e n B / (eps d))^d closed form
};

// sum_{i=1}^{d} C(n, i) (B/eps)^i, or (e n B / (eps d))^d when n and d are
// large (n >= d).
PdimCovering pdim_uniform_covering_bound(std::size_t pdim, std::size_t n, double range,
                                         double epsilon);

}  // namespace fequiv
