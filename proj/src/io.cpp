#include "fequiv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fequiv/errors.hpp"

namespace fequiv {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Json double_to_json(double value) {
  if (std::isfinite(value)) return value;
  return format_double(value);
}

double double_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw DomainError("expected a number, got " + j.dump());
}

void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed,
                         const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(context + ": unknown field '" + key + "'");
    }
  }
}

namespace {

const Json& require(const Json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) throw DomainError(context + ": missing field '" + key + "'");
  return j.at(key);
}

std::vector<double> doubles(const Json& j, const std::string& context) {
  if (!j.is_array()) throw DomainError(context + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw DomainError(context + ": non-numeric entry " + v.dump());
    out.push_back(v.get<double>());
  }
  return out;
}

std::size_t count(const Json& j, const std::string& context) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw DomainError(context + ": expected a nonnegative integer, got " + j.dump());
  }
  return j.get<std::size_t>();
}

}  // namespace

Json architecture_to_json(const Architecture& arch) {
  Json j;
  j["d0"] = arch.input_dim();
  j["hidden"] = arch.hidden_widths();
  j["out"] = arch.output_dim();
  Json acts = Json::array();
  for (const auto& a : arch.activations()) acts.push_back(a.name());
  j["activations"] = acts;
  return j;
}

Architecture architecture_from_json(const Json& j) {
  reject_unknown_keys(j, {"d0", "hidden", "out", "activations"}, "arch");
  const std::size_t d0 = count(require(j, "d0", "arch"), "arch.d0");
  std::vector<std::size_t> hidden;
  const Json& h = require(j, "hidden", "arch");
  if (!h.is_array()) throw DomainError("arch.hidden: expected an array");
  for (const auto& w : h) hidden.push_back(count(w, "arch.hidden"));
  const std::size_t out = j.contains("out") ? count(j.at("out"), "arch.out") : 1;
  const Json& a = require(j, "activations", "arch");
  std::vector<Activation> acts;
  if (a.is_string()) {
    acts.assign(hidden.size(), Activation::parse(a.get<std::string>()));
  } else if (a.is_array()) {
    for (const auto& name : a) {
      if (!name.is_string()) throw DomainError("arch.activations: expected names");
      acts.push_back(Activation::parse(name.get<std::string>()));
    }
  } else {
    throw DomainError("arch.activations: expected a name or a list of names");
  }
  return Architecture(d0, std::move(hidden), std::move(acts), out);
}

Json network_to_json(const Architecture& arch, const NetworkParams& params) {
  check_shapes(arch, params);
  Json j;
  j["arch"] = architecture_to_json(arch);
  Json layers = Json::array();
  for (const auto& layer : params.layers) {
    for (double v : layer.weights.data) {
      if (!std::isfinite(v)) throw NumericError(0, "cannot serialize a non-finite weight");
    }
    for (double v : layer.bias) {
      if (!std::isfinite(v)) throw NumericError(0, "cannot serialize a non-finite bias");
    }
    Json lj;
    lj["W"] = layer.weights.data;
    lj["b"] = layer.bias;
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j;
}

std::pair<Architecture, NetworkParams> network_from_json(const Json& j) {
  reject_unknown_keys(j, {"arch", "layers"}, "network");
  Architecture arch = architecture_from_json(require(j, "arch", "network"));
  const Json& layers = require(j, "layers", "network");
  if (!layers.is_array() || layers.size() != arch.depth() + 1) {
    throw StructuralError("network: expected " + std::to_string(arch.depth() + 1) + " layers");
  }
  NetworkParams params = NetworkParams::zeros(arch);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string ctx = "network.layers[" + std::to_string(l) + "]";
    reject_unknown_keys(layers[l], {"W", "b"}, ctx);
    auto w = doubles(require(layers[l], "W", ctx), ctx + ".W");
    auto b = doubles(require(layers[l], "b", ctx), ctx + ".b");
    Layer& layer = params.layers[l];
    if (w.size() != layer.weights.data.size()) {
      throw StructuralError(ctx + ".W: expected " + std::to_string(layer.weights.data.size()) +
                            " entries, got " + std::to_string(w.size()));
    }
    if (b.size() != layer.bias.size()) {
      throw StructuralError(ctx + ".b: expected " + std::to_string(layer.bias.size()) +
                            " entries, got " + std::to_string(b.size()));
    }
    layer.weights.data = std::move(w);
    layer.bias = std::move(b);
  }
  return {std::move(arch), std::move(params)};
}

Json permutation_spec_to_json(const PermutationSpec& spec) {
  Json j = Json::array();
  for (const auto& p : spec.perms) j.push_back(p.index());
  return j;
}

PermutationSpec permutation_spec_from_json(const Json& j) {
  if (!j.is_array()) throw DomainError("permutation spec: expected a list of index arrays");
  PermutationSpec spec;
  for (const auto& p : j) {
    if (!p.is_array()) throw DomainError("permutation spec: expected an index array");
    std::vector<std::size_t> idx;
    for (const auto& v : p) idx.push_back(count(v, "permutation spec"));
    spec.perms.emplace_back(std::move(idx));
  }
  return spec;
}

Json symmetry_profile_to_json(const SymmetryProfile& profile) {
  Json j;
  Json d = Json::array();
  for (const auto& c : profile.distinct_perm_counts) {
    if (c <= std::numeric_limits<std::uint64_t>::max()) {
      d.push_back(c.convert_to<std::uint64_t>());
    } else {
      d.push_back(c.str());
    }
  }
  j["d_star"] = d;
  j["delta_min"] = double_to_json(profile.delta_min);
  j["multiplicity"] = profile.total_multiplicity.str();
  return j;
}

Json verdict_to_json(const EquivalenceVerdict& verdict) {
  Json j;
  j["verdict"] = to_string(verdict.kind);
  j["sup_distance_estimate"] = double_to_json(verdict.sup_distance_estimate);
  j["witness"] = verdict.witness ? permutation_spec_to_json(*verdict.witness) : Json(nullptr);
  if (verdict.distinguishing_input) {
    Json x = Json::array();
    for (double v : *verdict.distinguishing_input) x.push_back(double_to_json(v));
    j["distinguishing_input"] = x;
  } else {
    j["distinguishing_input"] = nullptr;
  }
  return j;
}

Json amplification_to_json(const AmplificationResult& r) {
  Json j;
  j["n_draws"] = r.n_draws;
  j["radius"] = double_to_json(r.radius);
  j["orbit_size"] = r.orbit_size;
  j["single_hits"] = r.single_hits;
  j["orbit_hits"] = r.orbit_hits;
  j["max_images_per_draw"] = r.max_images_per_draw;
  j["p_single"] = double_to_json(r.p_single);
  j["p_orbit"] = double_to_json(r.p_orbit);
  j["ratio"] = double_to_json(r.ratio);
  j["ratio_stderr"] = double_to_json(r.ratio_stderr);
  j["predicted_ratio"] = double_to_json(r.predicted_ratio);
  return j;
}

Json basin_summary_to_json(const Architecture& arch, const BasinSummary& s) {
  Json j;
  j["n_runs"] = s.n_runs;
  j["n_converged"] = s.n_converged;
  j["n_diverged"] = s.n_diverged;
  j["no_converged_runs"] = s.no_converged_runs;
  j["cluster_tolerance"] = double_to_json(s.cluster_tolerance);
  Json clusters = Json::array();
  for (std::size_t c = 0; c < s.clusters.size(); ++c) {
    Json cj;
    cj["id"] = c;
    cj["count"] = s.clusters[c].count;
    cj["tolerance"] = double_to_json(s.clusters[c].tolerance);
    cj["representative"] = network_to_json(arch, s.clusters[c].representative)["layers"];
    clusters.push_back(cj);
  }
  j["clusters"] = clusters;
  j["theta_star"] = s.theta_star ? network_to_json(arch, *s.theta_star)["layers"] : Json(nullptr);
  j["symmetry_profile"] = s.profile ? symmetry_profile_to_json(*s.profile) : Json(nullptr);
  j["orbit_hits"] = s.orbit_hits;
  j["single_hits"] = s.single_hits;
  j["observed_orbit_fraction"] = double_to_json(s.observed_orbit_fraction);
  j["single_fraction"] = double_to_json(s.single_fraction);
  j["predicted_orbit_fraction"] = double_to_json(s.predicted_orbit_fraction);
  j["amplification"] = s.amplification ? amplification_to_json(*s.amplification) : Json(nullptr);
  return j;
}

std::string basin_runs_csv(const BasinSummary& summary) {
  std::ostringstream out;
  out << "run,seed,status,iterations,final_loss,grad_norm,cluster_id\n";
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    const auto& r = summary.runs[i];
    out << i << ',' << r.seed << ',' << to_string(r.status) << ',' << r.iterations << ','
        << format_double(r.final_loss) << ',' << format_double(r.grad_norm) << ',' << r.cluster_id
        << '\n';
  }
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DomainError("write to '" + path + "' failed");
}

}  // namespace fequiv
