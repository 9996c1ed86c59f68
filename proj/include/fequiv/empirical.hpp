#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fequiv/network.hpp"

namespace fequiv {

enum class MetricKind { kLinfParams, kSampledSupFunction };

// Finite point set under the L-inf metric. For kSampledSupFunction the points
// are function values on a fixed evaluation grid, so L-inf is the sup over
// that grid.
struct MetricSpaceSample {
  std::vector<std::vector<double>> points;
  MetricKind metric = MetricKind::kLinfParams;
  std::string provenance;

  double distance(std::size_t i, std::size_t j) const;
  // Throws StructuralError if point dimensions differ.
  void check() const;
};

// Regular grid with `per_dim` points per axis over [-half_width, half_width]^dim.
MetricSpaceSample grid_sample(std::size_t dim, std::size_t per_dim, double half_width);

// Size of a greedy eps-cover built by farthest-point traversal from point 0;
// ties go to the lowest index. Upper-bounds the sample's covering number.
std::size_t greedy_covering_estimate(const MetricSpaceSample& space, double epsilon);

// Size of a maximal packing (pairwise distance > 2 eps) built by scanning the
// points in order.
std::size_t greedy_packing_estimate(const MetricSpaceSample& space, double epsilon);

// Exact covering number with centers drawn from the sample (set-cover
// branch and bound). Throws DomainError above `max_points`.
std::size_t exact_covering_number(const MetricSpaceSample& space, double epsilon,
                                  std::size_t max_points = 160);

// Exact packing number: largest subset with pairwise distance > 2 eps
// (maximum independent set, branch and bound).
std::size_t exact_packing_number(const MetricSpaceSample& space, double epsilon,
                                 std::size_t max_points = 160);

struct FunctionClassOptions {
  std::size_t budget = 1'000'000;
  bool canonical_dedup = false;
  std::uint64_t eval_seed = 0;
};

struct FunctionClassSample {
  MetricSpaceSample space;
  std::size_t parameter_points = 0;  // grid size, resolution^S
  std::size_t distinct_after_dedup = 0;
  double dedup_ratio = 1.0;           // parameter_points / distinct_after_dedup
  std::vector<std::vector<double>> eval_points;
};

// Enumerates theta on the uniform grid {-B, ..., B}^S with `resolution` values
// per parameter, evaluates each network at `n_eval_points` fixed inputs of the
// B_x ball, and returns the value vectors. Throws DomainError (with the
// required budget in the message) when resolution^S exceeds the budget.
FunctionClassSample function_class_sample(const Architecture& arch, double weight_bound,
                                          std::size_t resolution, double input_radius,
                                          std::size_t n_eval_points,
                                          const FunctionClassOptions& options = {});

}  // namespace fequiv
