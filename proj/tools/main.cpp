#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "fequiv/basin.hpp"
#include "fequiv/bounds.hpp"
#include "fequiv/canonical.hpp"
#include "fequiv/empirical.hpp"
#include "fequiv/equivalence.hpp"
#include "fequiv/errors.hpp"
#include "fequiv/io.hpp"
#include "fequiv/rng.hpp"
#include "fequiv/transforms.hpp"
#include "run_config.hpp"
#include "verify_suites.hpp"

namespace fequiv::cli {
namespace {

using K = ParamKind;

std::vector<Param> arch_params() {
  return {{"d0", K::kInt, 1, "input dimension"},
          {"hidden", K::kIntList, Json::array({2}), "hidden widths, comma separated"},
          {"out_dim", K::kInt, 1, "output dimension"},
          {"activation", K::kString, "relu", "relu, leaky_relu[:slope], tanh, sigmoid, identity"}};
}

std::vector<Param> concat(std::vector<Param> a, const std::vector<Param>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Architecture arch_from(const RunConfig& cfg, std::optional<std::size_t> width = std::nullopt) {
  std::vector<std::size_t> hidden = cfg.get_sizes("hidden");
  if (width) {
    for (auto& w : hidden) w = *width;
  }
  return Architecture(cfg.get_size("d0"), hidden, Activation::parse(cfg.get_string("activation")),
                      cfg.get_size("out_dim"));
}

std::pair<Architecture, NetworkParams> load_network(const std::string& path) {
  return network_from_json(read_json_file(path));
}

std::string join_sizes(const std::vector<std::size_t>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
  return s;
}

// A table of rows rendered either as CSV (config echoed on a leading '#'
// line) or as JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  std::string render(const RunConfig& cfg, const std::string& format) const {
    if (format == "json") {
      Json out;
      out["config"] = cfg.echo();
      Json rs = Json::array();
      for (const auto& row : rows) {
        Json r;
        for (std::size_t c = 0; c < columns.size(); ++c) r[columns[c]] = row[c];
        rs.push_back(r);
      }
      out["rows"] = rs;
      return dump_json(out);
    }
    if (format != "csv") throw ConfigError("format must be csv or json");
    std::ostringstream s;
    s << "# config: " << cfg.echo().dump() << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) s << (c ? "," : "") << columns[c];
    s << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) s << ',';
        const Json& v = row[c];
        if (v.is_null()) continue;
        if (v.is_number_float()) {
          s << format_double(v.get<double>());
        } else if (v.is_string()) {
          s << v.get<std::string>();
        } else {
          s << v.dump();
        }
      }
      s << '\n';
    }
    return s.str();
  }
};

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); }

// ---- transform ----------------------------------------------------------

NetworkParams apply_transform_spec(const Architecture& arch, const NetworkParams& params,
                                   const Json& spec) {
  if (spec.is_array()) return apply_permutation(arch, params, permutation_spec_from_json(spec));
  reject_unknown_keys(spec, {"type", "perms", "seed", "layer", "factors", "mask"}, "transform spec");
  if (!spec.contains("type")) throw DomainError("transform spec: missing field 'type'");
  const std::string type = spec.at("type").get<std::string>();
  if (type == "permutation") {
    if (!spec.contains("perms")) throw DomainError("transform spec: missing field 'perms'");
    return apply_permutation(arch, params, permutation_spec_from_json(spec.at("perms")));
  }
  if (type == "random_permutation") {
    Rng rng(spec.value("seed", std::uint64_t{0}));
    return apply_permutation(arch, params, PermutationSpec::random(arch, rng));
  }
  const std::size_t layer = spec.value("layer", std::size_t{1});
  if (type == "scaling") {
    if (!spec.contains("factors")) throw DomainError("transform spec: missing field 'factors'");
    return apply_scaling(arch, params, {layer, spec.at("factors").get<std::vector<double>>()});
  }
  if (type == "sign_flip") {
    if (!spec.contains("mask")) throw DomainError("transform spec: missing field 'mask'");
    const auto mask = spec.at("mask").get<std::vector<int>>();
    return apply_sign_flip(arch, params, layer, mask);
  }
  throw DomainError("transform spec: unknown type '" + type +
                    "' (permutation, random_permutation, scaling, sign_flip)");
}

int cmd_transform(const RunConfig& cfg) {
  auto [arch, params] = load_network(cfg.get_string("net"));
  Json spec;
  if (cfg.has("spec")) {
    spec = read_json_file(cfg.get_string("spec"));
  } else {
    spec["type"] = cfg.get_string("kind");
    spec["seed"] = cfg.get_int("seed");
    spec["layer"] = cfg.get_int("layer");
    if (cfg.has("factors")) spec["factors"] = cfg.get_doubles("factors");
    if (cfg.has("mask")) {
      std::vector<int> mask;
      for (double m : cfg.get_doubles("mask")) mask.push_back(static_cast<int>(m));
      spec["mask"] = mask;
    }
  }
  const NetworkParams out = apply_transform_spec(arch, params, spec);
  SamplingOptions sampling;
  sampling.input_radius = cfg.get_double("radius");
  sampling.n_samples = cfg.get_size("samples");
  sampling.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  const double gap = sampled_sup_distance(arch, params, arch, out, sampling);
  emit(output_path(cfg.has("output") ? cfg.get_string("output") : "", "transform.json"),
       dump_json(network_to_json(arch, out)));
  std::cerr << "# config: " << cfg.echo().dump() << '\n';
  std::cerr << "self-check: sampled sup distance to input = " << format_double(gap) << " over "
            << sampling.n_samples << " samples\n";
  return 0;
}

// ---- canonicalize -------------------------------------------------------

int cmd_canonicalize(const RunConfig& cfg) {
  auto [arch, params] = load_network(cfg.get_string("net"));
  const CanonicalForm form = canonicalize(arch, params);
  if (!bit_equal(apply_permutation(arch, params, form.witness), form.params)) {
    throw InvariantViolation("canonical witness does not reproduce the canonical form");
  }
  Json out;
  out["config"] = cfg.echo();
  out["network"] = network_to_json(arch, form.params);
  out["witness"] = permutation_spec_to_json(form.witness);
  out["symmetry_profile"] =
      symmetry_profile_to_json(symmetry_profile(arch, params, cfg.get_double("row_tolerance")));
  emit(output_path(cfg.has("output") ? cfg.get_string("output") : "", "canonicalize.json"),
       dump_json(out));
  return 0;
}

// ---- check-equiv --------------------------------------------------------

int cmd_check_equiv(const RunConfig& cfg) {
  auto [arch_a, a] = load_network(cfg.get_string("net_a"));
  auto [arch_b, b] = load_network(cfg.get_string("net_b"));
  EquivalenceOptions options;
  options.sampling.input_radius = cfg.get_double("radius");
  options.sampling.n_samples = cfg.get_size("samples");
  options.sampling.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  options.tolerance = cfg.get_double("tolerance");
  const auto verdict = decide_equivalence(arch_a, a, arch_b, b, options);
  Json out;
  out["config"] = cfg.echo();
  out["result"] = verdict_to_json(verdict);
  emit(output_path(cfg.has("output") ? cfg.get_string("output") : "", "check_equiv.json"),
       dump_json(out));
  return 0;
}

// ---- bounds / entropy-compare --------------------------------------------

std::vector<Param> bound_params() {
  return concat(arch_params(),
                {{"weight_bound", K::kDouble, 1.0, "B, bound on every weight and bias"},
                 {"input_radius", K::kDouble, 1.0, "B_x, bound on the input norm"},
                 {"epsilon", K::kDoubleList, Json::array({1.0}), "covering radii to sweep"},
                 {"width_sweep", K::kIntList, nullptr, "set every hidden width to each value in turn"},
                 {"rho", K::kDoubleList, nullptr, "Lipschitz constant per hidden layer"},
                 {"format", K::kString, "csv", "csv or json"},
                 {"output", K::kString, nullptr, "output path (default stdout)"}});
}

template <typename RowFn>
Table sweep_bounds(const RunConfig& cfg, std::vector<std::string> extra_columns, RowFn&& row_fn) {
  std::vector<std::optional<std::size_t>> widths;
  if (cfg.has("width_sweep")) {
    for (auto w : cfg.get_sizes("width_sweep")) widths.emplace_back(w);
  } else {
    widths.emplace_back(std::nullopt);
  }
  std::optional<std::vector<double>> rho;
  if (cfg.has("rho")) rho = cfg.get_doubles("rho");
  Table table;
  table.columns = {"d0", "hidden", "out_dim", "activation", "weight_bound", "input_radius",
                   "epsilon", "S", "U"};
  table.columns.insert(table.columns.end(), extra_columns.begin(), extra_columns.end());
  for (const auto& w : widths) {
    const Architecture arch = arch_from(cfg, w);
    for (double eps : cfg.get_doubles("epsilon")) {
      const BoundConfig bc(arch, cfg.get_double("weight_bound"), cfg.get_double("input_radius"), eps, rho);
      std::vector<Json> row = {arch.input_dim(), join_sizes(arch.hidden_widths(), '-'),
                               arch.output_dim(), cfg.get_string("activation"),
                               num(bc.weight_bound()), num(bc.input_radius()), num(eps),
                               arch.param_count(), arch.hidden_neuron_count()};
      row_fn(bc, row);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::vector<std::string> entropy_columns() {
  std::vector<std::string> cols;
  for (std::size_t r = 0; r < kEntropyRowCount; ++r) cols.push_back(to_string(static_cast<EntropyRow>(r)));
  for (std::size_t r = 0; r < kEntropyRowCount; ++r) {
    cols.push_back("floored_" + to_string(static_cast<EntropyRow>(r)));
  }
  return cols;
}

void append_entropies(const BoundConfig& bc, std::vector<Json>& row) {
  const auto e = entropy_comparison(bc);
  for (double v : e.values) row.push_back(num(v));
  for (bool f : e.floored) row.push_back(f);
}

int cmd_bounds(const RunConfig& cfg) {
  const std::size_t depth = cfg.get_sizes("hidden").size();
  std::vector<std::string> cols = entropy_columns();
  for (const char* c : {"shallow_log", "deep_log", "deep_base", "factorial_discount"}) cols.push_back(c);
  for (std::size_t l = 1; l <= depth; ++l) {
    cols.push_back("log_stirling_lower_" + std::to_string(l));
    cols.push_back("log_factorial_" + std::to_string(l));
    cols.push_back("log_stirling_upper_" + std::to_string(l));
  }
  for (const char* c : {"log_volume_total", "log_volume_effective", "volume_effective"}) cols.push_back(c);
  const Table table = sweep_bounds(cfg, cols, [&](const BoundConfig& bc, std::vector<Json>& row) {
    append_entropies(bc, row);
    row.push_back(bc.arch().depth() == 1 ? num(shallow_covering_bound(bc)) : Json(nullptr));
    const auto terms = deep_covering_terms(bc);
    row.push_back(num(terms.total));
    row.push_back(num(terms.base));
    row.push_back(num(terms.factorial_discount));
    for (std::size_t l = 1; l <= bc.arch().depth(); ++l) {
      const auto s = stirling_bracket(bc.arch().width(l));
      row.push_back(num(s.log_lower));
      row.push_back(num(s.log_value));
      row.push_back(num(s.log_upper));
    }
    const auto v = effective_volume(bc.arch(), bc.weight_bound());
    row.push_back(num(v.log_total));
    row.push_back(num(v.log_effective));
    row.push_back(v.effective ? num(*v.effective) : Json(nullptr));
  });
  emit(output_path(cfg.has("output") ? cfg.get_string("output") : "",
                   "bounds." + cfg.get_string("format")),
       table.render(cfg, cfg.get_string("format")));
  return 0;
}

int cmd_entropy_compare(const RunConfig& cfg) {
  const Table table = sweep_bounds(cfg, entropy_columns(), append_entropies);
  emit(output_path(cfg.has("output") ? cfg.get_string("output") : "",
                   "entropy_compare." + cfg.get_string("format")),
       table.render(cfg, cfg.get_string("format")));
  return 0;
}

// ---- covering-sweep -------------------------------------------------------

int cmd_covering_sweep(const RunConfig& cfg) {
  const std::string space_kind = cfg.get_string("space");
  const std::string exact_mode = cfg.get_string("exact");
  if (exact_mode != "auto" && exact_mode != "always" && exact_mode != "never") {
    throw ConfigError("--exact must be auto, always or never");
  }
  MetricSpaceSample space;
  std::optional<Architecture> arch;
  std::size_t dim = 0;
  double half_width = 0.0;
  Json extra;
  if (space_kind == "grid") {
    dim = cfg.get_size("dim");
    half_width = cfg.get_double("half_width");
    space = grid_sample(dim, cfg.get_size("per_dim"), half_width);
  } else if (space_kind == "function") {
    arch = arch_from(cfg);
    FunctionClassOptions options;
    options.budget = cfg.get_size("budget");
    options.canonical_dedup = cfg.get_bool("dedup");
    options.eval_seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
    auto sample = function_class_sample(*arch, cfg.get_double("weight_bound"), cfg.get_size("resolution"),
                                        cfg.get_double("input_radius"), cfg.get_size("n_eval"), options);
    space = std::move(sample.space);
    extra = {{"parameter_points", sample.parameter_points},
             {"distinct_after_dedup", sample.distinct_after_dedup},
             {"dedup_ratio", sample.dedup_ratio}};
  } else {
    throw ConfigError("--space must be grid or function");
  }
  const bool exact = exact_mode == "always" || (exact_mode == "auto" && space.points.size() <= 150);
  Table table;
  table.columns = {"epsilon", "n_points", "greedy_cover", "exact_cover", "greedy_pack", "exact_pack",
                   "theory_bound_log"};
  for (double eps : cfg.get_doubles("epsilon")) {
    std::vector<Json> row = {num(eps), space.points.size(), greedy_covering_estimate(space, eps)};
    row.push_back(exact ? Json(exact_covering_number(space, eps, 256)) : Json(nullptr));
    row.push_back(greedy_packing_estimate(space, eps));
    row.push_back(exact ? Json(exact_packing_number(space, eps, 256)) : Json(nullptr));
    if (arch) {
      const BoundConfig bc(*arch, cfg.get_double("weight_bound"), cfg.get_double("input_radius"), eps);
      row.push_back(num(arch->depth() == 1 ? shallow_covering_bound(bc) : deep_covering_bound(bc)));
    } else {
      const double volume = std::pow(2.0 * half_width, static_cast<double>(dim));
      row.push_back(num(log_volume_covering_bound(dim, volume, eps)));
    }
    table.rows.push_back(std::move(row));
  }
  std::string text = table.render(cfg, cfg.get_string("format"));
  if (!extra.is_null() && cfg.get_string("format") == "csv") text = "# sample: " + extra.dump() + "\n" + text;
  emit(output_path(cfg.has("output") ? cfg.get_string("output") : "",
                   "covering_sweep." + cfg.get_string("format")),
       text);
  return 0;
}

// ---- basin ---------------------------------------------------------------

int cmd_basin(const RunConfig& cfg) {
  const Architecture arch = arch_from(cfg);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  InitScheme scheme;
  scheme.kind = InitScheme::parse_kind(cfg.get_string("scheme"));
  scheme.a = cfg.get_double("a");
  scheme.b = cfg.get_double("b");
  scheme.mean = cfg.get_double("mean");
  scheme.stddev = cfg.get_double("stddev");
  scheme.seed = seed;
  scheme.validate();

  const std::string task = cfg.get_string("task");
  Dataset data;
  if (task == "teacher") {
    NetworkParams teacher;
    if (cfg.has("teacher")) {
      auto [tarch, tparams] = load_network(cfg.get_string("teacher"));
      if (!(tarch == arch)) throw StructuralError("teacher architecture differs from --hidden/--d0");
      teacher = std::move(tparams);
    } else {
      teacher = initialize(arch, InitScheme::normal(0.0, 1.0, split_seed(seed, 1ULL << 63)));
    }
    data = teacher_student_dataset(arch, teacher, cfg.get_size("n_data"), cfg.get_double("data_radius"),
                                   split_seed(seed, (1ULL << 63) + 1));
  } else if (task == "xor") {
    data = xor_dataset();
  } else if (task == "csv") {
    data = Dataset::from_csv(read_text_file(cfg.get_string("dataset")), arch.input_dim());
  } else {
    throw ConfigError("--task must be teacher, xor or csv");
  }
  data.check(arch);

  TrainConfig train_config;
  train_config.step_size = cfg.get_double("step_size");
  train_config.max_iters = cfg.get_size("max_iters");
  train_config.grad_threshold = cfg.get_double("grad_threshold");

  BasinOptions options;
  if (cfg.has("cluster_tolerance")) options.cluster_tolerance = cfg.get_double("cluster_tolerance");
  if (cfg.has("reference")) {
    auto [rarch, rparams] = load_network(cfg.get_string("reference"));
    if (!(rarch == arch)) throw StructuralError("reference architecture differs from --hidden/--d0");
    options.reference = std::move(rparams);
  }
  options.amplification_draws = cfg.get_size("amplification_draws");
  options.threads = cfg.get_size("threads");

  const BasinSummary summary = basin_experiment(arch, scheme, data, cfg.get_size("n_runs"),
                                                train_config, options);
  Json config = cfg.echo();
  config.erase("threads");  // results do not depend on it
  Json out;
  out["config"] = config;
  out["dataset_rows"] = data.size();
  out["summary"] = basin_summary_to_json(arch, summary);
  emit(output_path(cfg.has("output") ? cfg.get_string("output") : "", "basin.json"), dump_json(out));
  const std::string runs_path =
      output_path(cfg.has("runs_csv") ? cfg.get_string("runs_csv") : "", "basin_runs.csv");
  if (!runs_path.empty()) {
    write_text_file(runs_path, "# config: " + config.dump() + "\n" + basin_runs_csv(summary));
  }
  return 0;
}

// ---- verify --------------------------------------------------------------

int cmd_verify(const RunConfig& cfg, const std::string& suite) {
  const auto results = run_suite(suite);
  bool all = true;
  Json props = Json::array();
  for (const auto& r : results) {
    all &= r.passed;
    props.push_back({{"name", r.name}, {"passed", r.passed}, {"metrics", r.metrics}});
  }
  Json out;
  out["config"] = cfg.echo();
  out["config"]["suite"] = suite;
  out["suite"] = suite;
  out["passed"] = all;
  out["properties"] = props;
  emit(output_path(cfg.has("output") ? cfg.get_string("output") : "", "verify_" + suite + ".json"),
       dump_json(out));
  return all ? 0 : 2;
}

struct Subcommand {
  CLI::App* app;
  std::unique_ptr<RunConfig> config;
  std::function<int(const RunConfig&)> run;
};

int report(const char* kind, const std::string& message, int code) {
  Json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Functional-equivalence toolkit for feed-forward networks"};
  app.require_subcommand(1);
  std::vector<Subcommand> subs;
  auto add = [&](const std::string& name, const std::string& help, std::vector<Param> params,
                 std::function<int(const RunConfig&)> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto cfg = std::make_unique<RunConfig>(name, std::move(params));
    cfg->attach(*sub);
    subs.push_back({sub, std::move(cfg), std::move(fn)});
  };
  const Param output{"output", K::kString, nullptr, "output path (default $FEQUIV_OUTPUT_DIR or stdout)"};

  add("transform", "apply a function-preserving transform to a network",
      {{"net", K::kString, nullptr, "network JSON"},
       {"spec", K::kString, nullptr, "transform spec JSON (overrides --kind)"},
       {"kind", K::kString, "random_permutation", "permutation, random_permutation, scaling, sign_flip"},
       {"seed", K::kInt, 0, "seed for random permutations and the self-check sample"},
       {"layer", K::kInt, 1, "hidden layer for scaling and sign flips (1-based)"},
       {"factors", K::kDoubleList, nullptr, "scaling factors"},
       {"mask", K::kDoubleList, nullptr, "sign mask entries (+1/-1)"},
       {"samples", K::kInt, 1024, "inputs in the self-check"},
       {"radius", K::kDouble, 1.0, "input ball radius of the self-check"},
       output},
      cmd_transform);
  add("canonicalize", "canonical permutation representative of a network",
      {{"net", K::kString, nullptr, "network JSON"},
       {"row_tolerance", K::kDouble, 0.0, "row-identity tolerance for the symmetry profile"},
       output},
      cmd_canonicalize);
  add("check-equiv", "decide whether two networks compute the same function",
      {{"net_a", K::kString, nullptr, "first network JSON"},
       {"net_b", K::kString, nullptr, "second network JSON"},
       {"radius", K::kDouble, 1.0, "input ball radius"},
       {"samples", K::kInt, 4096, "number of sampled inputs"},
       {"seed", K::kInt, 0, "sampling seed"},
       {"tolerance", K::kDouble, 1e-7, "numerical equivalence tolerance"},
       output},
      cmd_check_equiv);
  add("bounds", "covering-number bounds, entropies, Stirling brackets and volumes",
      bound_params(), cmd_bounds);
  add("entropy-compare", "metric entropies of the five compared bounds", bound_params(),
      cmd_entropy_compare);
  add("covering-sweep", "greedy and exact covering/packing numbers over an epsilon sweep",
      concat(arch_params(),
             {{"space", K::kString, "grid", "grid or function"},
              {"dim", K::kInt, 2, "grid dimension"},
              {"per_dim", K::kInt, 11, "grid points per axis"},
              {"half_width", K::kDouble, 1.0, "grid covers [-h, h]^dim"},
              {"epsilon", K::kDoubleList,
               Json::array({0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0, 1.5}), "radii"},
              {"exact", K::kString, "auto", "auto (<= 150 points), always, never"},
              {"weight_bound", K::kDouble, 1.0, "B for the function class"},
              {"input_radius", K::kDouble, 1.0, "B_x for the function class"},
              {"resolution", K::kInt, 3, "grid values per parameter"},
              {"n_eval", K::kInt, 64, "evaluation inputs"},
              {"budget", K::kInt, 1000000, "maximum parameter grid size"},
              {"dedup", K::kBool, false, "deduplicate by canonical form"},
              {"seed", K::kInt, 0, "evaluation-point seed"},
              {"format", K::kString, "csv", "csv or json"},
              output}),
      cmd_covering_sweep);
  add("basin", "train from symmetric random inits and cluster the minima",
      concat(arch_params(),
             {{"task", K::kString, "teacher", "teacher, xor or csv"},
              {"dataset", K::kString, nullptr, "dataset CSV for --task csv"},
              {"teacher", K::kString, nullptr, "teacher network JSON (default: drawn from the seed)"},
              {"n_data", K::kInt, 32, "teacher dataset size"},
              {"data_radius", K::kDouble, 1.0, "teacher inputs uniform on [-r, r]^d0"},
              {"scheme", K::kString, "uniform", "uniform, normal, xavier, he"},
              {"a", K::kDouble, -1.0, "uniform lower end"},
              {"b", K::kDouble, 1.0, "uniform upper end"},
              {"mean", K::kDouble, 0.0, "normal mean"},
              {"stddev", K::kDouble, 1.0, "normal standard deviation"},
              {"n_runs", K::kInt, 100, "number of runs"},
              {"step_size", K::kDouble, 0.05, "gradient-descent step"},
              {"max_iters", K::kInt, 2000, "iteration cap"},
              {"grad_threshold", K::kDouble, 1e-6, "convergence threshold on the gradient L-inf norm"},
              {"seed", K::kInt, 0, "top-level seed"},
              {"threads", K::kInt, 1, "worker threads"},
              {"cluster_tolerance", K::kDouble, nullptr, "default: delta/4 after a first pass"},
              {"amplification_draws", K::kInt, 0, "raw init draws for the amplification check"},
              {"reference", K::kString, nullptr, "network JSON used as theta*"},
              {"runs_csv", K::kString, nullptr, "per-run CSV path"},
              output}),
      cmd_basin);

  std::string suite;
  {
    CLI::App* sub = app.add_subcommand("verify", "run a property suite with fixed seeds");
    std::string names;
    for (const auto& n : suite_names()) names += (names.empty() ? "" : ", ") + n;
    sub->add_option("suite", suite, "one of: " + names)->required();
    auto cfg = std::make_unique<RunConfig>("verify", std::vector<Param>{output});
    cfg->attach(*sub);
    subs.push_back({sub, std::move(cfg), [&suite](const RunConfig& c) { return cmd_verify(c, suite); }});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    for (auto& s : subs) {
      if (s.app->parsed()) {
        s.config->resolve();
        return s.run(*s.config);
      }
    }
    return report("ConfigError", "no subcommand given", 1);
  } catch (const InvariantViolation& e) {
    return report("InvariantViolation", e.what(), 2);
  } catch (const NumericError& e) {
    return report("NumericError", std::string(e.what()) + " (layer " + std::to_string(e.layer()) + ")", 1);
  } catch (const StructuralError& e) {
    return report("StructuralError", e.what(), 1);
  } catch (const DomainError& e) {
    return report("DomainError", e.what(), 1);
  } catch (const UnsupportedTransformError& e) {
    return report("UnsupportedTransformError", e.what(), 1);
  } catch (const ConfigError& e) {
    return report("ConfigError", e.what(), 1);
  } catch (const Error& e) {
    return report("Error", e.what(), 1);
  } catch (const nlohmann::json::exception& e) {
    return report("DomainError", e.what(), 1);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), 2);
  }
}

}  // namespace fequiv::cli

int main(int argc, char** argv) { return fequiv::cli::run(argc, argv); }
