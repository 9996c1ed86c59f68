#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fequiv/basin.hpp"
#include "fequiv/bounds.hpp"
#include "fequiv/canonical.hpp"
#include "fequiv/empirical.hpp"
#include "fequiv/equivalence.hpp"
#include "fequiv/errors.hpp"
#include "fequiv/io.hpp"
#include "fequiv/transforms.hpp"

namespace py = pybind11;
using namespace fequiv;

namespace {

// Networks cross the boundary as JSON text in the CLI's network format.
std::pair<Architecture, NetworkParams> load(const std::string& text) {
  return network_from_json(Json::parse(text));
}

std::string dump(const Architecture& arch, const NetworkParams& params) {
  return network_to_json(arch, params).dump();
}

Architecture make_arch(std::size_t d0, const std::vector<std::size_t>& hidden, const std::string& activation) {
  return Architecture(d0, hidden, Activation::parse(activation));
}

MetricSpaceSample sample_of(std::vector<std::vector<double>> points) {
  MetricSpaceSample s;
  s.points = std::move(points);
  s.check();
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Permutation symmetry, covering bounds and basin experiments for feed-forward networks";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<StructuralError>(m, "StructuralError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<UnsupportedTransformError>(m, "UnsupportedTransformError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("forward", [](const std::string& net, const std::vector<double>& x) {
    const auto [arch, params] = load(net);
    return forward(arch, params, x);
  }, py::arg("net"), py::arg("x"));

  m.def("apply_permutation", [](const std::string& net, const std::string& spec) {
    const auto [arch, params] = load(net);
    return dump(arch, apply_permutation(arch, params, permutation_spec_from_json(Json::parse(spec))));
  }, py::arg("net"), py::arg("spec"));

  m.def("canonicalize", [](const std::string& net) {
    const auto [arch, params] = load(net);
    const auto form = canonicalize(arch, params);
    Json out;
    out["network"] = network_to_json(arch, form.params);
    out["witness"] = permutation_spec_to_json(form.witness);
    out["symmetry_profile"] = symmetry_profile_to_json(symmetry_profile(arch, form.params));
    return out.dump();
  }, py::arg("net"));

  m.def("check_equivalence", [](const std::string& a, const std::string& b, double radius,
                                std::size_t samples, std::uint64_t seed, double tolerance) {
    const auto [arch_a, pa] = load(a);
    const auto [arch_b, pb] = load(b);
    EquivalenceOptions opt;
    opt.sampling = {radius, samples, seed};
    opt.tolerance = tolerance;
    return verdict_to_json(decide_equivalence(arch_a, pa, arch_b, pb, opt)).dump();
  }, py::arg("a"), py::arg("b"), py::arg("radius") = 1.0, py::arg("samples") = 4096, py::arg("seed") = 0,
     py::arg("tolerance") = 1e-7);

  m.def("shallow_covering_bound", [](std::size_t d0, std::size_t d1, double B, double Bx, double eps,
                                     const std::string& activation) {
    return shallow_covering_bound(BoundConfig(make_arch(d0, {d1}, activation), B, Bx, eps));
  }, py::arg("d0"), py::arg("d1"), py::arg("weight_bound"), py::arg("input_radius"), py::arg("epsilon"),
     py::arg("activation") = "relu");

  m.def("deep_covering_bound", [](std::size_t d0, const std::vector<std::size_t>& hidden, double B, double Bx,
                                  double eps, const std::string& activation) {
    return deep_covering_bound(BoundConfig(make_arch(d0, hidden, activation), B, Bx, eps));
  }, py::arg("d0"), py::arg("hidden"), py::arg("weight_bound"), py::arg("input_radius"), py::arg("epsilon"),
     py::arg("activation") = "relu");

  m.def("entropy_comparison", [](std::size_t d0, const std::vector<std::size_t>& hidden, double B, double Bx,
                                 double eps, const std::string& activation) {
    const auto e = entropy_comparison(BoundConfig(make_arch(d0, hidden, activation), B, Bx, eps));
    py::dict out;
    for (std::size_t i = 0; i < kEntropyRowCount; ++i) {
      out[py::str(to_string(static_cast<EntropyRow>(i)))] = e.values[i];
    }
    return out;
  }, py::arg("d0"), py::arg("hidden"), py::arg("weight_bound"), py::arg("input_radius"), py::arg("epsilon"),
     py::arg("activation") = "relu");

  m.def("stirling_bracket", [](std::size_t d) {
    const auto s = stirling_bracket(d);
    return py::make_tuple(s.lower, py::int_(py::str(s.exact.str())), s.upper);
  }, py::arg("d"));

  m.def("effective_volume", [](std::size_t d0, const std::vector<std::size_t>& hidden, double B) {
    const auto v = effective_volume(make_arch(d0, hidden, "relu"), B);
    return py::make_tuple(v.log_total, v.log_effective);
  }, py::arg("d0"), py::arg("hidden"), py::arg("weight_bound"));

  m.def("greedy_covering_estimate", [](std::vector<std::vector<double>> pts, double eps) {
    return greedy_covering_estimate(sample_of(std::move(pts)), eps);
  }, py::arg("points"), py::arg("epsilon"));
  m.def("exact_covering_number", [](std::vector<std::vector<double>> pts, double eps) {
    return exact_covering_number(sample_of(std::move(pts)), eps);
  }, py::arg("points"), py::arg("epsilon"));
  m.def("exact_packing_number", [](std::vector<std::vector<double>> pts, double eps) {
    return exact_packing_number(sample_of(std::move(pts)), eps);
  }, py::arg("points"), py::arg("epsilon"));

  m.def("amplification_check", [](const std::string& net, double a, double b, std::uint64_t seed,
                                  std::size_t n_draws) {
    const auto [arch, params] = load(net);
    py::gil_scoped_release release;
    return amplification_to_json(amplification_check(arch, params, InitScheme::uniform(a, b, seed), n_draws))
        .dump();
  }, py::arg("net"), py::arg("a"), py::arg("b"), py::arg("seed"), py::arg("n_draws"));
}
