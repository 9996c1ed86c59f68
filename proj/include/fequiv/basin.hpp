#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fequiv/canonical.hpp"
#include "fequiv/network.hpp"

namespace fequiv {

enum class InitKind { kUniform, kNormal, kXavier, kHe };

// Random initialization with one distribution for all weights of a layer and
// one for all biases of that layer. Xavier draws N(0, 2/(fan_in+fan_out)) and
// He draws N(0, 2/fan_in), biases included.
struct InitScheme {
  InitKind kind = InitKind::kUniform;
  double a = -1.0;  // uniform lower end
  double b = 1.0;   // uniform upper end
  double mean = 0.0;
  double stddev = 1.0;
  std::uint64_t seed = 0;

  static InitScheme uniform(double a, double b, std::uint64_t seed = 0);
  static InitScheme normal(double mean, double stddev, std::uint64_t seed = 0);
  static InitScheme xavier(std::uint64_t seed = 0);
  static InitScheme he(std::uint64_t seed = 0);

  // "uniform", "normal", "xavier", "he"
  static InitKind parse_kind(const std::string& name);
  std::string kind_name() const;

  // Throws DomainError for a > b or a non-positive stddev.
  void validate() const;

  InitScheme with_seed(std::uint64_t s) const;
};

// Variance of the distribution used for layer l (1..L+1).
double init_variance(const Architecture& arch, const InitScheme& scheme, std::size_t layer);

// Entries drawn layer by layer, weights row-major then biases.
NetworkParams initialize(const Architecture& arch, const InitScheme& scheme);

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;

  std::size_t size() const noexcept { return inputs.size(); }
  // Throws StructuralError on ragged rows or a mismatch with `arch`.
  void check(const Architecture& arch) const;

  // Header x0..x{d-1},y0..y{k-1}; values with 17 significant digits.
  std::string to_csv() const;
  static Dataset from_csv(const std::string& text, std::size_t input_dim);
};

// Inputs uniform on [-input_radius, input_radius]^d0, targets f(x; teacher).
Dataset teacher_student_dataset(const Architecture& arch, const NetworkParams& teacher,
                                std::size_t n, double input_radius, std::uint64_t seed);

// {(0,0)->0, (0,1)->1, (1,0)->1, (1,1)->0}
Dataset xor_dataset();

// Mean over samples of the squared error summed over outputs.
double mean_squared_error(const Architecture& arch, const NetworkParams& params,
                          const Dataset& data);

struct TrainConfig {
  double step_size = 0.05;
  std::size_t max_iters = 5000;
  double grad_threshold = 1e-6;

  // Throws DomainError for a non-positive step size or negative threshold.
  void validate() const;
};

enum class TrainStatus { kConverged, kMaxIters, kDiverged };
std::string to_string(TrainStatus status);

inline constexpr double kDivergenceLoss = 1e12;

struct TrainRun {
  std::uint64_t seed = 0;
  NetworkParams init;
  NetworkParams final_params;
  double final_loss = 0.0;
  double grad_norm = 0.0;  // L-inf norm of the gradient at final_params
  std::size_t iterations = 0;
  TrainStatus status = TrainStatus::kMaxIters;
  NetworkParams canonical;
  int cluster_id = -1;

  bool converged() const noexcept { return status == TrainStatus::kConverged; }
};

// Full-batch gradient descent with a fixed step on mean_squared_error.
// Stops as soon as the gradient L-inf norm is <= grad_threshold (possibly at
// iteration 0); a loss above kDivergenceLoss or a non-finite loss marks the
// run diverged.
TrainRun train(const Architecture& arch, const NetworkParams& init, const Dataset& data,
               const TrainConfig& config, std::uint64_t seed = 0);

inline constexpr std::size_t kOrbitEnumerationLimit = 40320;

// True when |canonical(theta) - canonical(theta_star)|_inf <= tolerance, or,
// for orbits of at most kOrbitEnumerationLimit elements, when theta is within
// tolerance of some permutation image of theta_star.
bool orbit_membership(const Architecture& arch, const NetworkParams& theta,
                      const NetworkParams& theta_star, double tolerance);

// Smallest L-inf distance from theta to a member of the permutation orbit of
// theta_star, by enumerating the orbit.
double orbit_distance(const Architecture& arch, const NetworkParams& theta,
                      const NetworkParams& theta_star);

struct AmplificationResult {
  std::size_t n_draws = 0;
  double radius = 0.0;
  std::size_t orbit_size = 0;  // distinct permutation images of theta*
  std::size_t single_hits = 0;
  std::size_t orbit_hits = 0;
  std::size_t max_images_per_draw = 0;  // > 1 means overlapping balls
  double p_single = 0.0;
  double p_orbit = 0.0;
  double ratio = 0.0;            // p_orbit / p_single (NaN without single hits)
  double ratio_stderr = 0.0;     // delta-method standard error of the ratio
  double predicted_ratio = 0.0;  // prod_l d_l^*
};

// Draws initializations and counts how many fall in the open L-inf ball of
// `radius` around theta* and around any of its permutation images. The radius
// defaults to delta/2 from theta*'s symmetry profile; DomainError if that is
// infinite and no radius is given.
AmplificationResult amplification_check(const Architecture& arch, const NetworkParams& theta_star,
                                        const InitScheme& scheme, std::size_t n_draws,
                                        std::optional<double> radius = std::nullopt);

struct BasinOptions {
  // Leave unset for the default: each cluster matches runs within delta/4 of
  // its representative, delta taken from the representative's symmetry
  // profile with rows identified at `provisional_tolerance`.
  std::optional<double> cluster_tolerance;
  double provisional_tolerance = 1e-4;
  // Use this solution as theta* instead of the largest cluster.
  std::optional<NetworkParams> reference;
  std::size_t amplification_draws = 0;
  std::size_t threads = 1;
};

struct BasinCluster {
  NetworkParams representative;  // canonical params of the first member
  std::size_t count = 0;
  double tolerance = 0.0;
};

struct BasinSummary {
  std::size_t n_runs = 0;
  std::size_t n_converged = 0;
  std::size_t n_diverged = 0;
  bool no_converged_runs = false;
  // Tolerance of the orbit and single-representative hit counts.
  double cluster_tolerance = 0.0;
  std::vector<BasinCluster> clusters;  // by count descending
  std::optional<NetworkParams> theta_star;
  std::optional<SymmetryProfile> profile;
  std::size_t orbit_hits = 0;   // converged runs in the orbit of theta*
  std::size_t single_hits = 0;  // converged runs within tolerance of theta* itself
  double observed_orbit_fraction = 0.0;
  double single_fraction = 0.0;
  double predicted_orbit_fraction = 0.0;  // single_fraction * prod d_l^*
  std::optional<AmplificationResult> amplification;
  std::vector<TrainRun> runs;
};

// Run i initializes from scheme.with_seed(split_seed(scheme.seed, i)). Results
// do not depend on options.threads.
BasinSummary basin_experiment(const Architecture& arch, const InitScheme& scheme,
                              const Dataset& data, std::size_t n_runs, const TrainConfig& config,
                              const BasinOptions& options = {});

}  // namespace fequiv
