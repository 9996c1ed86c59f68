#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fequiv/network.hpp"
#include "fequiv/transforms.hpp"

namespace fequiv {

// The permutation-orbit representative of a parameter vector.
//
// Within every hidden layer the rows of (b^(l) | W^(l)) are in non-increasing
// lexicographic order, bias first. Rows that tie completely are ordered so that
// the downstream layers are lexicographically largest, which makes the form a
// function of the orbit rather than of the particular element.
struct CanonicalForm {
  NetworkParams params;
  // apply_permutation(original, witness) == params, bit for bit.
  PermutationSpec witness;
};

CanonicalForm canonicalize(const Architecture& arch, const NetworkParams& params);

struct SymmetryProfile {
  // d_l^*: distinct row orderings of (W^(l); b^(l)), l = 1..L.
  std::vector<boost::multiprecision::cpp_int> distinct_perm_counts;
  // Smallest L-inf gap between distinct rows of any hidden layer; +inf when
  // every layer has only identical rows.
  double delta_min = 0.0;
  // prod_l d_l^*.
  boost::multiprecision::cpp_int total_multiplicity = 1;
};

// Rows are "identical" when bit-equal (tolerance 0) or, with a positive
// tolerance, when linked by a chain of rows at L-inf distance <= tolerance.
SymmetryProfile symmetry_profile(const Architecture& arch, const NetworkParams& params,
                                 double row_tolerance = 0.0);

// Distinct members of the permutation orbit of `params` (bitwise distinct),
// in the order first produced by all_permutation_specs.
std::vector<NetworkParams> distinct_permutation_images(const Architecture& arch,
                                                       const NetworkParams& params,
                                                       std::size_t limit = 1'000'000);

struct VolumeReport {
  double log_total = 0.0;      // S log(2B)
  double log_effective = 0.0;  // S log(2B) - sum_l log(d_l!)
  std::optional<double> total;      // present when representable
  std::optional<double> effective;  // present when representable
};

// Volume of [-B, B]^S and of its canonical region (divided by prod d_l!).
VolumeReport effective_volume(const Architecture& arch, double weight_bound);

// n! as an arbitrary-precision integer.
boost::multiprecision::cpp_int factorial(std::size_t n);

}  // namespace fequiv
