#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "fequiv/basin.hpp"
#include "fequiv/canonical.hpp"
#include "fequiv/equivalence.hpp"
#include "fequiv/network.hpp"
#include "fequiv/transforms.hpp"

namespace fequiv {

using Json = nlohmann::ordered_json;

// printf "%.17g"; round-trips every finite double. inf/nan print as
// "inf"/"-inf"/"nan".
std::string format_double(double value);

// Finite doubles as JSON numbers, non-finite ones as the strings "inf",
// "-inf" and "nan".
Json double_to_json(double value);
double double_from_json(const Json& j);

// {"d0": .., "hidden": [..], "out": .., "activations": [..]}
Json architecture_to_json(const Architecture& arch);
Architecture architecture_from_json(const Json& j);

// {"arch": {...}, "layers": [{"W": [row-major], "b": [...]}, ...]}
Json network_to_json(const Architecture& arch, const NetworkParams& params);
std::pair<Architecture, NetworkParams> network_from_json(const Json& j);

// List of 0-based gather-index arrays, one per hidden layer.
Json permutation_spec_to_json(const PermutationSpec& spec);
PermutationSpec permutation_spec_from_json(const Json& j);

// {"d_star": [...], "delta_min": float | "inf", "multiplicity": "decimal"}
Json symmetry_profile_to_json(const SymmetryProfile& profile);

Json verdict_to_json(const EquivalenceVerdict& verdict);
Json amplification_to_json(const AmplificationResult& result);
Json basin_summary_to_json(const Architecture& arch, const BasinSummary& summary);

// One row per run: seed,status,iterations,final_loss,grad_norm,cluster_id.
std::string basin_runs_csv(const BasinSummary& summary);

// Throws ConfigError naming the first key of `j` that is not in `allowed`.
void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed,
                         const std::string& context);

// Throws DomainError with the path when the file cannot be read or parsed.
std::string read_text_file(const std::string& path);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace fequiv
