#include "run_config.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "fequiv/errors.hpp"

namespace fequiv::cli {

namespace {

std::string flag_name(const std::string& name) {
  std::string flag = "--" + name;
  for (char& c : flag) {
    if (c == '_') c = '-';
  }
  return flag;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> parts;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    if (first == std::string::npos) throw ConfigError("empty entry in list '" + raw + "'");
    parts.push_back(item.substr(first, last - first + 1));
  }
  if (parts.empty()) throw ConfigError("empty list");
  return parts;
}

double parse_double(const std::string& s, const std::string& name) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("--" + name + ": '" + s + "' is not a number");
}

long long parse_int(const std::string& s, const std::string& name) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("--" + name + ": '" + s + "' is not an integer");
}

}  // namespace

RunConfig::RunConfig(std::string subcommand, std::vector<Param> params)
    : subcommand_(std::move(subcommand)), params_(std::move(params)) {}

void RunConfig::attach(CLI::App& app) {
  app.add_option("--config", config_path_, "JSON config file; flags override its values");
  for (const auto& p : params_) {
    options_[p.name] = app.add_option(flag_name(p.name), raw_[p.name], p.help);
  }
}

const Param& RunConfig::param(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw InvariantViolation("unknown parameter '" + name + "' requested");
}

Json RunConfig::check_value(const Param& p, const Json& v) const {
  if (v.is_null()) return v;
  const std::string ctx = subcommand_ + "." + p.name;
  auto fail = [&]() -> Json { throw ConfigError(ctx + ": unexpected value " + v.dump()); };
  switch (p.kind) {
    case ParamKind::kInt:
      if (!v.is_number_integer()) return fail();
      return v;
    case ParamKind::kDouble:
      if (!v.is_number()) return fail();
      return v.get<double>();
    case ParamKind::kString:
      if (!v.is_string()) return fail();
      return v;
    case ParamKind::kBool:
      if (!v.is_boolean()) return fail();
      return v;
    case ParamKind::kIntList: {
      Json list = v.is_array() ? v : Json::array({v});
      for (const auto& e : list) {
        if (!e.is_number_integer() || e.get<long long>() < 0) return fail();
      }
      return list;
    }
    case ParamKind::kDoubleList: {
      Json list = v.is_array() ? v : Json::array({v});
      Json out = Json::array();
      for (const auto& e : list) {
        if (!e.is_number()) return fail();
        out.push_back(e.get<double>());
      }
      return out;
    }
  }
  return fail();
}

Json RunConfig::convert_flag(const Param& p, const std::string& raw) const {
  switch (p.kind) {
    case ParamKind::kInt: return parse_int(raw, p.name);
    case ParamKind::kDouble: return parse_double(raw, p.name);
    case ParamKind::kString: return raw;
    case ParamKind::kBool:
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw ConfigError("--" + p.name + ": expected true or false, got '" + raw + "'");
    case ParamKind::kIntList: {
      Json out = Json::array();
      for (const auto& s : split_list(raw)) {
        const long long v = parse_int(s, p.name);
        if (v < 0) throw ConfigError("--" + p.name + ": negative entry");
        out.push_back(v);
      }
      return out;
    }
    case ParamKind::kDoubleList: {
      Json out = Json::array();
      for (const auto& s : split_list(raw)) out.push_back(parse_double(s, p.name));
      return out;
    }
  }
  throw InvariantViolation("unhandled parameter kind");
}

void RunConfig::resolve() {
  values_ = Json::object();
  for (const auto& p : params_) values_[p.name] = check_value(p, p.default_value);
  if (!config_path_.empty()) {
    const Json file = read_json_file(config_path_);
    if (!file.is_object()) throw ConfigError(config_path_ + ": config must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (key == "subcommand") {
        if (value != subcommand_) {
          throw ConfigError(config_path_ + ": config is for subcommand " + value.dump());
        }
        continue;
      }
      const bool known = std::any_of(params_.begin(), params_.end(),
                                     [&](const Param& p) { return p.name == key; });
      if (!known) throw ConfigError(config_path_ + ": unknown field '" + key + "'");
      values_[key] = check_value(param(key), value);
    }
  }
  for (const auto& p : params_) {
    if (options_.at(p.name)->count() > 0) values_[p.name] = convert_flag(p, raw_.at(p.name));
  }
}

bool RunConfig::has(const std::string& name) const {
  param(name);
  return !values_.at(name).is_null();
}

namespace {
const Json& need(const Json& values, const std::string& sub, const std::string& name) {
  const Json& v = values.at(name);
  if (v.is_null()) throw ConfigError(sub + ": --" + name + " is required");
  return v;
}
}  // namespace

long long RunConfig::get_int(const std::string& name) const {
  param(name);
  return need(values_, subcommand_, name).get<long long>();
}

std::size_t RunConfig::get_size(const std::string& name) const {
  const long long v = get_int(name);
  if (v < 0) throw ConfigError(subcommand_ + ": --" + name + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

double RunConfig::get_double(const std::string& name) const {
  param(name);
  return need(values_, subcommand_, name).get<double>();
}

std::string RunConfig::get_string(const std::string& name) const {
  param(name);
  return need(values_, subcommand_, name).get<std::string>();
}

bool RunConfig::get_bool(const std::string& name) const {
  param(name);
  return need(values_, subcommand_, name).get<bool>();
}

std::vector<std::size_t> RunConfig::get_sizes(const std::string& name) const {
  param(name);
  std::vector<std::size_t> out;
  for (const auto& v : need(values_, subcommand_, name)) out.push_back(v.get<std::size_t>());
  return out;
}

std::vector<double> RunConfig::get_doubles(const std::string& name) const {
  param(name);
  std::vector<double> out;
  for (const auto& v : need(values_, subcommand_, name)) out.push_back(v.get<double>());
  return out;
}

Json RunConfig::echo() const {
  Json j;
  j["subcommand"] = subcommand_;
  for (const auto& [k, v] : values_.items()) j[k] = v;
  return j;
}

std::string output_path(const std::string& explicit_path, const std::string& default_name) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* dir = std::getenv("FEQUIV_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    std::string d = dir;
    if (d.back() != '/') d += '/';
    return d + default_name;
  }
  return {};
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_text_file(path, text);
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace fequiv::cli
