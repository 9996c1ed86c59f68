#include "fequiv/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fequiv/canonical.hpp"
#include "fequiv/errors.hpp"

namespace fequiv {

namespace mp = boost::multiprecision;
using BigFloat = mp::cpp_bin_float_50;

namespace {

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

void require_positive_epsilon(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("epsilon must be positive");
}

double to_double_or_inf(const BigFloat& x) {
  if (x > BigFloat(std::numeric_limits<double>::max())) {
    return std::numeric_limits<double>::infinity();
  }
  return x.convert_to<double>();
}

}  // namespace

BoundConfig::BoundConfig(Architecture arch, double weight_bound, double input_radius,
                         double epsilon, std::optional<std::vector<double>> rho)
    : arch_(std::move(arch)),
      weight_bound_(weight_bound),
      input_radius_(input_radius),
      epsilon_(epsilon) {
  if (!(weight_bound_ >= 1.0) || !std::isfinite(weight_bound_)) {
    throw DomainError("weight bound B must be >= 1");
  }
  if (!(input_radius_ > 0.0) || !std::isfinite(input_radius_)) {
    throw DomainError("input radius B_x must be positive");
  }
  require_positive_epsilon(epsilon_);
  if (rho) {
    if (rho->size() != arch_.depth()) throw ConfigError("need one rho per hidden layer");
    for (double r : *rho) {
      if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("rho must be positive");
    }
    rho_ = std::move(*rho);
  } else {
    rho_ = default_lipschitz_constants(arch_, weight_bound_, input_radius_);
  }
}

double BoundConfig::rho_bar() const noexcept {
  double p = 1.0;
  for (double r : rho_) p *= r;
  return p;
}

double BoundConfig::spectral_proxy(std::size_t i) const {
  if (i == 0 || i > arch_.depth()) throw DomainError("hidden layer index out of range");
  return weight_bound_ *
         std::sqrt(static_cast<double>(arch_.width(i)) * static_cast<double>(arch_.width(i - 1)));
}

double BoundConfig::s_bar() const noexcept {
  double p = 1.0;
  for (std::size_t i = 1; i <= arch_.depth(); ++i) p *= spectral_proxy(i);
  return p;
}

BoundConfig BoundConfig::with_epsilon(double epsilon) const {
  BoundConfig copy = *this;
  require_positive_epsilon(epsilon);
  copy.epsilon_ = epsilon;
  return copy;
}

double shallow_covering_bound(const BoundConfig& cfg) {
  const Architecture& arch = cfg.arch();
  if (arch.depth() != 1) throw ConfigError("shallow bound needs exactly one hidden layer");
  require_positive_epsilon(cfg.epsilon());
  const double d0 = static_cast<double>(arch.input_dim());
  const double d1 = static_cast<double>(arch.width(1));
  const double B = cfg.weight_bound();
  const double S = static_cast<double>(arch.param_count());
  const double Sh = static_cast<double>(arch.layer_param_count(1));
  const double base = 16.0 * B * B * (cfg.input_radius() + 1.0) * std::sqrt(d0) * d1 / cfg.epsilon();
  return S * std::log(base) + Sh * std::log(cfg.rho().front()) - log_factorial(arch.width(1));
}

DeepBoundTerms deep_covering_terms(const BoundConfig& cfg) {
  const Architecture& arch = cfg.arch();
  require_positive_epsilon(cfg.epsilon());
  const double L = static_cast<double>(arch.depth());
  const double B = cfg.weight_bound();
  // Accumulate the base in log space; prod d_j overflows for wide nets.
  double log_base = std::log(4.0 * (L + 1.0) * (cfg.input_radius() + 1.0)) +
                    (L + 2.0) * std::log(2.0 * B) + std::log(cfg.rho_bar()) -
                    std::log(cfg.epsilon());
  for (std::size_t j = 0; j <= arch.depth(); ++j) {
    log_base += std::log(static_cast<double>(arch.width(j)));
  }
  DeepBoundTerms terms;
  terms.base = static_cast<double>(arch.param_count()) * log_base;
  for (std::size_t w : arch.hidden_widths()) terms.factorial_discount -= log_factorial(w);
  terms.total = terms.base + terms.factorial_discount;
  return terms;
}

double deep_covering_bound(const BoundConfig& cfg) { return deep_covering_terms(cfg).total; }

StirlingBracket stirling_bracket(std::size_t d) {
  if (d == 0) throw DomainError("Stirling bracket needs d >= 1");
  const BigFloat n(d);
  const BigFloat core = mp::sqrt(2 * boost::math::constants::pi<BigFloat>() * n) *
                        mp::pow(n / boost::math::constants::e<BigFloat>(), n);
  const BigFloat lower = core * mp::exp(BigFloat(1) / (12 * n + 1));
  const BigFloat upper = core * mp::exp(BigFloat(1) / (12 * n));
  StirlingBracket out;
  out.exact = factorial(d);
  const BigFloat exact(out.exact);
  out.strict = lower < exact && exact < upper;
  out.lower = to_double_or_inf(lower);
  out.value = to_double_or_inf(exact);
  out.upper = to_double_or_inf(upper);
  out.log_lower = mp::log(lower).convert_to<double>();
  out.log_value = mp::log(exact).convert_to<double>();
  out.log_upper = mp::log(upper).convert_to<double>();
  return out;
}

std::string to_string(EntropyRow row) {
  switch (row) {
    case EntropyRow::kSpectral2017:
      return "spectral_2017";
    case EntropyRow::kPacBayes2017:
      return "pacbayes_2017";
    case EntropyRow::kLin2019:
      return "lin_2019";
    case EntropyRow::kPdim2019:
      return "pdim_2019";
    case EntropyRow::kPermutation:
      return "this_paper";
  }
  return "";
}

EntropyComparison entropy_comparison(const BoundConfig& cfg) {
  require_positive_epsilon(cfg.epsilon());
  const Architecture& arch = cfg.arch();
  const double L = static_cast<double>(arch.depth());
  const double S = static_cast<double>(arch.param_count());
  const double U = static_cast<double>(arch.hidden_neuron_count());
  const double W = static_cast<double>(arch.max_hidden_width());
  const double Bx = cfg.input_radius();
  const double eps = cfg.epsilon();
  const double rs = cfg.rho_bar() * cfg.s_bar();

  EntropyComparison out;
  auto set = [&](EntropyRow row, double value, bool floored) {
    const auto i = static_cast<std::size_t>(row);
    out.floored[i] = floored || value < 0.0;
    out.values[i] = out.floored[i] ? 0.0 : value;
  };

  const double log_w = std::log(W);
  set(EntropyRow::kSpectral2017, Bx * Bx * rs * rs * U * log_w / (eps * eps), log_w <= 0.0);

  const double log_wl = std::log(W * L);
  set(EntropyRow::kPacBayes2017, Bx * Bx * rs * rs * S * L * L * log_wl / (eps * eps),
      log_wl <= 0.0);

  set(EntropyRow::kLin2019, Bx * rs * S * S * L / eps, false);

  const double log_s = std::log(S);
  const double log_ratio = std::log(Bx / eps);
  set(EntropyRow::kPdim2019, L * S * log_s * log_ratio, log_s <= 0.0 || log_ratio <= 0.0);

  double log_fact = 0.0;
  for (std::size_t w : arch.hidden_widths()) log_fact += log_factorial(w);
  const double log_arg =
      std::log(cfg.rho_bar()) + std::log(cfg.s_bar()) + (std::log(Bx) - log_fact - std::log(eps)) / L;
  set(EntropyRow::kPermutation, L * S * log_arg, log_arg <= 0.0);
  return out;
}

DudleyResult dudley_rademacher_bound(const std::function<double(double)>& entropy, double n,
                                     double limit, double abs_tolerance) {
  if (!(n >= 1.0)) throw DomainError("sample size must be >= 1");
  if (!(limit >= 0.0) || !std::isfinite(limit)) throw DomainError("integration limit must be finite and >= 0");
  if (!(abs_tolerance > 0.0)) throw DomainError("tolerance must be positive");
  DudleyResult out;
  if (limit == 0.0) return out;

  auto root_entropy = [&](double eps) { return std::sqrt(std::max(0.0, entropy(eps))); };

  // End of the support: the smallest eps where the entropy hits 0.
  double end = limit;
  if (entropy(limit) <= 0.0) {
    double lo = 0.0;
    double hi = limit;
    if (entropy(limit * 1e-300) <= 0.0) {
      out.support_end = 0.0;
      return out;
    }
    lo = limit * 1e-300;
    for (int it = 0; it < 2000 && hi - lo > 1e-15 * limit; ++it) {
      const double mid = 0.5 * (lo + hi);
      (entropy(mid) > 0.0 ? lo : hi) = mid;
    }
    end = hi;
  }
  out.support_end = end;

  // Target on the unscaled integral, independent of n, so results scale
  // exactly as n^{-1/2}.
  const double target = abs_tolerance / 12.0;
  // tanh-sinh copes with the sqrt singularity where the entropy reaches 0.
  boost::math::quadrature::tanh_sinh<double> quad;
  double sum = 0.0;
  double err = 0.0;
  double prev_piece = -1.0;
  double tail = std::numeric_limits<double>::infinity();
  double b = end;
  constexpr int kMaxLevels = 1000;
  for (int level = 0; level < kMaxLevels && b > 1e-290; ++level) {
    const double a = 0.5 * b;
    double piece_err = 0.0;
    double piece = 0.0;
    try {
      piece = quad.integrate(root_entropy, a, b, 1e-12, &piece_err);
    } catch (const boost::math::evaluation_error&) {
      tail = std::numeric_limits<double>::infinity();
      break;
    } catch (const std::domain_error&) {
      // Integrand overflowed: the integral diverges toward 0.
      tail = std::numeric_limits<double>::infinity();
      break;
    }
    sum += piece;
    err += piece_err;
    if (prev_piece > 0.0 && piece <= prev_piece) {
      const double ratio = piece / prev_piece;
      tail = ratio < 1.0 ? piece * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
    } else if (piece == 0.0) {
      tail = 0.0;
    }
    if (tail + err < 0.1 * target) break;
    prev_piece = piece;
    b = a;
  }
  const double scale = 12.0 / std::sqrt(n);
  out.value = scale * sum;
  out.error_estimate = scale * (err + tail);
  out.converged = out.error_estimate <= abs_tolerance;
  return out;
}

double volume_covering_bound(std::size_t dim, double volume, double epsilon) {
  return std::exp(log_volume_covering_bound(dim, volume, epsilon));
}

double log_volume_covering_bound(std::size_t dim, double volume, double epsilon) {
  if (dim == 0) throw DomainError("dimension must be >= 1");
  if (!(volume > 0.0)) throw DomainError("volume must be positive");
  require_positive_epsilon(epsilon);
  return std::log(volume) + static_cast<double>(dim) * std::log(2.0 / epsilon);
}

PdimCovering pdim_uniform_covering_bound(std::size_t pdim, std::size_t n, double range,
                                         double epsilon) {
  if (pdim == 0) throw DomainError("pseudo-dimension must be >= 1");
  if (n == 0) throw DomainError("sample size must be >= 1");
  if (!(range > 0.0)) throw DomainError("range bound must be positive");
  require_positive_epsilon(epsilon);
  PdimCovering out;
  const double ratio = range / epsilon;
  constexpr std::size_t kExactMaxN = 100000;
  constexpr std::size_t kExactMaxDim = 1000;
  if (n < pdim || (n <= kExactMaxN && pdim <= kExactMaxDim)) {
    out.exact_sum = true;
    const BigFloat r(ratio);
    BigFloat binom = 1;
    BigFloat power = 1;
    BigFloat sum = 0;
    for (std::size_t i = 1; i <= std::min(pdim, n); ++i) {
      binom = binom * BigFloat(n - i + 1) / BigFloat(i);
      power *= r;
      sum += binom * power;
    }
    out.value = to_double_or_inf(sum);
    out.log_value = mp::log(sum).convert_to<double>();
  } else {
    const double d = static_cast<double>(pdim);
    out.log_value = d * (1.0 + std::log(static_cast<double>(n)) + std::log(ratio) - std::log(d));
    out.value = out.log_value > 709.0 ? std::numeric_limits<double>::infinity()
                                      : std::exp(out.log_value);
  }
  return out;
}

}  // namespace fequiv
