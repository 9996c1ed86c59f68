#include "fequiv/basin.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <mutex>
#include <thread>

#include "fequiv/errors.hpp"
#include "fequiv/io.hpp"
#include "fequiv/rng.hpp"

namespace fequiv {

InitScheme InitScheme::uniform(double a, double b, std::uint64_t seed) {
  InitScheme s;
  s.kind = InitKind::kUniform;
  s.a = a;
  s.b = b;
  s.seed = seed;
  return s;
}

InitScheme InitScheme::normal(double mean, double stddev, std::uint64_t seed) {
  InitScheme s;
  s.kind = InitKind::kNormal;
  s.mean = mean;
  s.stddev = stddev;
  s.seed = seed;
  return s;
}

InitScheme InitScheme::xavier(std::uint64_t seed) {
  InitScheme s;
  s.kind = InitKind::kXavier;
  s.seed = seed;
  return s;
}

InitScheme InitScheme::he(std::uint64_t seed) {
  InitScheme s;
  s.kind = InitKind::kHe;
  s.seed = seed;
  return s;
}

InitKind InitScheme::parse_kind(const std::string& name) {
  if (name == "uniform") return InitKind::kUniform;
  if (name == "normal") return InitKind::kNormal;
  if (name == "xavier") return InitKind::kXavier;
  if (name == "he") return InitKind::kHe;
  throw DomainError("unknown init scheme '" + name + "' (uniform, normal, xavier, he)");
}

std::string InitScheme::kind_name() const {
  switch (kind) {
    case InitKind::kUniform: return "uniform";
    case InitKind::kNormal: return "normal";
    case InitKind::kXavier: return "xavier";
    case InitKind::kHe: return "he";
  }
  return "unknown";
}

void InitScheme::validate() const {
  if (kind == InitKind::kUniform && !(a <= b && std::isfinite(a) && std::isfinite(b))) {
    throw DomainError("uniform init needs finite a <= b");
  }
  if (kind == InitKind::kNormal && !(stddev > 0.0 && std::isfinite(stddev) && std::isfinite(mean))) {
    throw DomainError("normal init needs a positive standard deviation");
  }
}

InitScheme InitScheme::with_seed(std::uint64_t s) const {
  InitScheme copy = *this;
  copy.seed = s;
  return copy;
}

double init_variance(const Architecture& arch, const InitScheme& scheme, std::size_t layer) {
  if (layer < 1 || layer > arch.depth() + 1) throw StructuralError("layer out of range");
  const auto fan_in = static_cast<double>(arch.width(layer - 1));
  const auto fan_out = static_cast<double>(arch.width(layer));
  switch (scheme.kind) {
    case InitKind::kUniform: return (scheme.b - scheme.a) * (scheme.b - scheme.a) / 12.0;
    case InitKind::kNormal: return scheme.stddev * scheme.stddev;
    case InitKind::kXavier: return 2.0 / (fan_in + fan_out);
    case InitKind::kHe: return 2.0 / fan_in;
  }
  return 0.0;
}

NetworkParams initialize(const Architecture& arch, const InitScheme& scheme) {
  scheme.validate();
  Rng rng(scheme.seed);
  NetworkParams params = NetworkParams::zeros(arch);
  for (std::size_t l = 1; l <= arch.depth() + 1; ++l) {
    const double sd = std::sqrt(init_variance(arch, scheme, l));
    auto draw = [&]() {
      switch (scheme.kind) {
        case InitKind::kUniform: return rng.uniform(scheme.a, scheme.b);
        case InitKind::kNormal: return rng.normal(scheme.mean, scheme.stddev);
        case InitKind::kXavier:
        case InitKind::kHe: return rng.normal(0.0, sd);
      }
      return 0.0;
    };
    Layer& layer = params.layers[l - 1];
    for (double& w : layer.weights.data) w = draw();
    for (double& b : layer.bias) b = draw();
  }
  return params;
}

void Dataset::check(const Architecture& arch) const {
  if (inputs.size() != targets.size()) throw StructuralError("dataset inputs and targets differ in count");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != arch.input_dim()) {
      throw StructuralError("dataset row " + std::to_string(i) + " has input dimension " +
                            std::to_string(inputs[i].size()) + ", network expects " +
                            std::to_string(arch.input_dim()));
    }
    if (targets[i].size() != arch.output_dim()) {
      throw StructuralError("dataset row " + std::to_string(i) + " has target dimension " +
                            std::to_string(targets[i].size()) + ", network expects " +
                            std::to_string(arch.output_dim()));
    }
  }
}

std::string Dataset::to_csv() const {
  std::ostringstream out;
  const std::size_t din = inputs.empty() ? 0 : inputs.front().size();
  const std::size_t dout = targets.empty() ? 0 : targets.front().size();
  for (std::size_t k = 0; k < din; ++k) out << (k ? "," : "") << 'x' << k;
  for (std::size_t k = 0; k < dout; ++k) out << ',' << 'y' << k;
  out << '\n';
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t k = 0; k < inputs[i].size(); ++k) out << (k ? "," : "") << format_double(inputs[i][k]);
    for (double y : targets[i]) out << ',' << format_double(y);
    out << '\n';
  }
  return out.str();
}

Dataset Dataset::from_csv(const std::string& text, std::size_t input_dim) {
  Dataset data;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> values;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.find_first_not_of(" \r", used) != std::string::npos) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw DomainError("dataset line " + std::to_string(line_no) + ": cannot parse '" + cell + "'");
      }
    }
    if (values.size() <= input_dim) {
      throw StructuralError("dataset line " + std::to_string(line_no) + " has no target columns");
    }
    data.inputs.emplace_back(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(input_dim));
    data.targets.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(input_dim), values.end());
  }
  return data;
}

Dataset teacher_student_dataset(const Architecture& arch, const NetworkParams& teacher,
                                std::size_t n, double input_radius, std::uint64_t seed) {
  if (n == 0) throw DomainError("dataset size must be positive");
  Rng rng(seed);
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(arch.input_dim());
    for (double& v : x) v = rng.uniform(-input_radius, input_radius);
    data.targets.push_back(forward(arch, teacher, x));
    data.inputs.push_back(std::move(x));
  }
  return data;
}

Dataset xor_dataset() {
  Dataset data;
  data.inputs = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}};
  data.targets = {{0.0}, {1.0}, {1.0}, {0.0}};
  return data;
}

double mean_squared_error(const Architecture& arch, const NetworkParams& params,
                          const Dataset& data) {
  data.check(arch);
  if (data.size() == 0) throw DomainError("dataset is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto y = forward(arch, params, data.inputs[i]);
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double e = y[k] - data.targets[i][k];
      total += e * e;
    }
  }
  return total / static_cast<double>(data.size());
}

void TrainConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw DomainError("step size must be positive");
  if (!(grad_threshold >= 0.0)) throw DomainError("gradient threshold must be nonnegative");
}

std::string to_string(TrainStatus status) {
  switch (status) {
    case TrainStatus::kConverged: return "converged";
    case TrainStatus::kMaxIters: return "max_iters";
    case TrainStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

namespace {

void zero(NetworkParams& p) {
  for (auto& layer : p.layers) {
    std::fill(layer.weights.data.begin(), layer.weights.data.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
}

// Loss and gradient of the mean squared error; a NumericError during the
// pass is reported as an infinite loss.
double loss_and_gradient(const Architecture& arch, const NetworkParams& params, const Dataset& data,
                         const Loss& loss, NetworkParams& grad) {
  zero(grad);
  const double scale = 1.0 / static_cast<double>(data.size());
  double total = 0.0;
  try {
    for (std::size_t i = 0; i < data.size(); ++i) {
      total += accumulate_gradient(arch, params, loss, data.inputs[i], data.targets[i], scale, grad);
    }
  } catch (const NumericError&) {
    return std::numeric_limits<double>::infinity();
  }
  return total * scale;
}

}  // namespace

TrainRun train(const Architecture& arch, const NetworkParams& init, const Dataset& data,
               const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  check_shapes(arch, init);
  data.check(arch);
  if (data.size() == 0) throw DomainError("dataset is empty");

  TrainRun run;
  run.seed = seed;
  run.init = init;
  NetworkParams theta = init;
  NetworkParams grad = NetworkParams::zeros(arch);
  const Loss loss = Loss::squared_error();
  for (std::size_t it = 0;; ++it) {
    const double value = loss_and_gradient(arch, theta, data, loss, grad);
    run.iterations = it;
    run.final_loss = value;
    if (!std::isfinite(value) || value > kDivergenceLoss) {
      run.status = TrainStatus::kDiverged;
      run.grad_norm = std::numeric_limits<double>::infinity();
      break;
    }
    run.grad_norm = linf_norm(grad);
    if (run.grad_norm <= config.grad_threshold) {
      run.status = TrainStatus::kConverged;
      break;
    }
    if (it == config.max_iters) {
      run.status = TrainStatus::kMaxIters;
      break;
    }
    for (std::size_t l = 0; l < theta.layers.size(); ++l) {
      auto& w = theta.layers[l].weights.data;
      const auto& gw = grad.layers[l].weights.data;
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= config.step_size * gw[k];
      auto& b = theta.layers[l].bias;
      const auto& gb = grad.layers[l].bias;
      for (std::size_t k = 0; k < b.size(); ++k) b[k] -= config.step_size * gb[k];
    }
  }
  run.final_params = std::move(theta);
  if (run.status != TrainStatus::kDiverged) {
    run.canonical = canonicalize(arch, run.final_params).params;
  } else {
    run.canonical = run.final_params;
  }
  return run;
}

bool orbit_membership(const Architecture& arch, const NetworkParams& theta,
                      const NetworkParams& theta_star, double tolerance) {
  check_shapes(arch, theta);
  check_shapes(arch, theta_star);
  if (!(tolerance >= 0.0)) throw DomainError("tolerance must be nonnegative");
  if (linf_distance(canonicalize(arch, theta).params, canonicalize(arch, theta_star).params) <=
      tolerance) {
    return true;
  }
  // Rows that nearly tie in their leading entries can sort differently in
  // theta and theta*; an enumerable orbit is then checked image by image.
  double orbit_count = 1.0;
  for (std::size_t w : arch.hidden_widths()) orbit_count *= std::tgamma(static_cast<double>(w) + 1.0);
  if (orbit_count > static_cast<double>(kOrbitEnumerationLimit)) return false;
  return orbit_distance(arch, theta, theta_star) <= tolerance;
}

double orbit_distance(const Architecture& arch, const NetworkParams& theta,
                      const NetworkParams& theta_star) {
  check_shapes(arch, theta);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& image : distinct_permutation_images(arch, theta_star)) {
    best = std::min(best, linf_distance(theta, image));
  }
  return best;
}

AmplificationResult amplification_check(const Architecture& arch, const NetworkParams& theta_star,
                                        const InitScheme& scheme, std::size_t n_draws,
                                        std::optional<double> radius) {
  check_shapes(arch, theta_star);
  scheme.validate();
  if (n_draws == 0) throw DomainError("need at least one draw");
  AmplificationResult result;
  result.n_draws = n_draws;
  const SymmetryProfile profile = symmetry_profile(arch, theta_star);
  if (radius) {
    if (!(*radius > 0.0)) throw DomainError("radius must be positive");
    result.radius = *radius;
  } else {
    if (!std::isfinite(profile.delta_min)) {
      throw DomainError("theta* has no distinct rows (delta is infinite); give a radius");
    }
    result.radius = profile.delta_min / 2.0;
  }
  result.predicted_ratio = profile.total_multiplicity.convert_to<double>();

  const auto images = distinct_permutation_images(arch, theta_star);
  result.orbit_size = images.size();
  // images[0] is theta* itself (the identity comes first in enumeration order).
  for (std::size_t i = 0; i < n_draws; ++i) {
    const NetworkParams draw = initialize(arch, scheme.with_seed(split_seed(scheme.seed, i)));
    std::size_t hit_count = 0;
    bool single = false;
    for (std::size_t k = 0; k < images.size(); ++k) {
      if (linf_distance(draw, images[k]) < result.radius) {
        ++hit_count;
        if (k == 0) single = true;
      }
    }
    if (single) ++result.single_hits;
    if (hit_count > 0) ++result.orbit_hits;
    result.max_images_per_draw = std::max(result.max_images_per_draw, hit_count);
  }
  const auto n = static_cast<double>(n_draws);
  result.p_single = static_cast<double>(result.single_hits) / n;
  result.p_orbit = static_cast<double>(result.orbit_hits) / n;
  if (result.single_hits > 0) {
    result.ratio = result.p_orbit / result.p_single;
    // Single hits are a subset of orbit hits, which fixes the covariance term.
    const double var = result.ratio * result.ratio *
                       ((1.0 - result.p_single) / result.p_single -
                        (1.0 - result.p_orbit) / result.p_orbit) /
                       n;
    result.ratio_stderr = std::sqrt(std::max(var, 0.0));
  } else {
    result.ratio = std::numeric_limits<double>::quiet_NaN();
    result.ratio_stderr = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

namespace {

// Runs join the first cluster whose representative is within that cluster's
// tolerance; a run that joins none starts a new cluster.
template <typename ToleranceFn>
std::vector<BasinCluster> leader_clusters(const std::vector<TrainRun>& runs, ToleranceFn&& tolerance_for,
                                          std::vector<int>& assignment) {
  std::vector<BasinCluster> clusters;
  assignment.assign(runs.size(), -1);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].converged()) continue;
    int found = -1;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (linf_distance(runs[i].canonical, clusters[c].representative) <= clusters[c].tolerance) {
        found = static_cast<int>(c);
        break;
      }
    }
    if (found < 0) {
      clusters.push_back({runs[i].canonical, 0, tolerance_for(runs[i].canonical)});
      found = static_cast<int>(clusters.size() - 1);
    }
    ++clusters[static_cast<std::size_t>(found)].count;
    assignment[i] = found;
  }
  return clusters;
}

bool lex_less(const NetworkParams& a, const NetworkParams& b) {
  const auto fa = a.flatten();
  const auto fb = b.flatten();
  return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(), fb.end(),
                                      [](double x, double y) {
                                        return total_order_key(x) < total_order_key(y);
                                      });
}

}  // namespace

BasinSummary basin_experiment(const Architecture& arch, const InitScheme& scheme,
                              const Dataset& data, std::size_t n_runs, const TrainConfig& config,
                              const BasinOptions& options) {
  if (n_runs == 0) throw DomainError("n_runs must be at least 1");
  scheme.validate();
  config.validate();
  data.check(arch);
  if (options.reference) check_shapes(arch, *options.reference);
  if (options.cluster_tolerance && !(*options.cluster_tolerance >= 0.0)) {
    throw DomainError("cluster tolerance must be nonnegative");
  }

  BasinSummary summary;
  summary.n_runs = n_runs;
  summary.runs.resize(n_runs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < n_runs; i = next++) {
      try {
        const std::uint64_t seed = split_seed(scheme.seed, i);
        const NetworkParams init = initialize(arch, scheme.with_seed(seed));
        summary.runs[i] = train(arch, init, data, config, seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, n_runs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& run : summary.runs) {
    if (run.converged()) ++summary.n_converged;
    if (run.status == TrainStatus::kDiverged) ++summary.n_diverged;
  }
  if (summary.n_converged == 0) {
    summary.no_converged_runs = true;
    summary.cluster_tolerance = options.cluster_tolerance.value_or(options.provisional_tolerance);
    return summary;
  }

  std::vector<int> assignment;
  const double provisional = options.provisional_tolerance;
  // delta/4 of a representative, its rows matched at the provisional
  // tolerance; the provisional value when the representative has no two
  // distinct rows.
  auto auto_tolerance = [&](const NetworkParams& rep) {
    const double delta = symmetry_profile(arch, rep, provisional).delta_min;
    return std::isfinite(delta) && delta > 0.0 ? delta / 4.0 : provisional;
  };
  std::vector<BasinCluster> clusters;
  if (options.cluster_tolerance) {
    const double fixed = *options.cluster_tolerance;
    clusters = leader_clusters(summary.runs, [&](const NetworkParams&) { return fixed; }, assignment);
  } else {
    clusters = leader_clusters(summary.runs, auto_tolerance, assignment);
  }

  // Order clusters by size, then by representative, so ids do not depend on
  // anything but the set of runs.
  std::vector<std::size_t> order(clusters.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (clusters[x].count != clusters[y].count) return clusters[x].count > clusters[y].count;
    return lex_less(clusters[x].representative, clusters[y].representative);
  });
  std::vector<int> new_id(clusters.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    new_id[order[rank]] = static_cast<int>(rank);
    summary.clusters.push_back(clusters[order[rank]]);
  }
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    if (assignment[i] >= 0) summary.runs[i].cluster_id = new_id[static_cast<std::size_t>(assignment[i])];
  }

  const NetworkParams theta_star =
      options.reference ? *options.reference : summary.clusters.front().representative;
  double tolerance = summary.clusters.front().tolerance;
  if (options.cluster_tolerance) {
    tolerance = *options.cluster_tolerance;
  } else if (options.reference) {
    tolerance = auto_tolerance(*options.reference);
  }
  summary.cluster_tolerance = tolerance;
  summary.theta_star = theta_star;
  summary.profile = symmetry_profile(arch, theta_star, options.reference ? 0.0 : provisional);
  const NetworkParams star_canonical = canonicalize(arch, theta_star).params;
  for (const auto& run : summary.runs) {
    if (!run.converged()) continue;
    if (linf_distance(run.canonical, star_canonical) <= tolerance ||
        orbit_membership(arch, run.final_params, theta_star, tolerance)) {
      ++summary.orbit_hits;
    }
    if (linf_distance(run.final_params, theta_star) <= tolerance) ++summary.single_hits;
  }
  const auto n = static_cast<double>(n_runs);
  summary.observed_orbit_fraction = static_cast<double>(summary.orbit_hits) / n;
  summary.single_fraction = static_cast<double>(summary.single_hits) / n;
  summary.predicted_orbit_fraction =
      summary.single_fraction * summary.profile->total_multiplicity.convert_to<double>();
  if (options.amplification_draws > 0 &&
      (std::isfinite(summary.profile->delta_min))) {
    summary.amplification =
        amplification_check(arch, theta_star, scheme, options.amplification_draws);
  }
  return summary;
}

}  // namespace fequiv
