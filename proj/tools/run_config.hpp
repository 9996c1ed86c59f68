#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fequiv/io.hpp"

namespace fequiv::cli {

enum class ParamKind { kInt, kDouble, kString, kBool, kIntList, kDoubleList };

struct Param {
  std::string name;  // config key; the flag is --name with '_' -> '-'
  ParamKind kind;
  Json default_value;  // null: unset unless given
  std::string help;
};

// Parameters of one subcommand resolved from defaults, an optional JSON
// config file and command-line flags, in increasing precedence.
class RunConfig {
 public:
  RunConfig(std::string subcommand, std::vector<Param> params);

  // Registers --config and one flag per parameter on `app`.
  void attach(CLI::App& app);

  // Merges the config file and the flags given on the command line. Throws
  // ConfigError on unknown keys or values of the wrong type.
  void resolve();

  const std::string& subcommand() const noexcept { return subcommand_; }
  bool has(const std::string& name) const;
  long long get_int(const std::string& name) const;
  std::size_t get_size(const std::string& name) const;
  double get_double(const std::string& name) const;
  std::string get_string(const std::string& name) const;
  bool get_bool(const std::string& name) const;
  std::vector<std::size_t> get_sizes(const std::string& name) const;
  std::vector<double> get_doubles(const std::string& name) const;

  // {"subcommand": ..., <every parameter>}; unset optionals appear as null.
  Json echo() const;

 private:
  const Param& param(const std::string& name) const;
  Json convert_flag(const Param& p, const std::string& raw) const;
  Json check_value(const Param& p, const Json& value) const;

  std::string subcommand_;
  std::vector<Param> params_;
  std::string config_path_;
  std::map<std::string, std::string> raw_;
  std::map<std::string, CLI::Option*> options_;
  Json values_;
};

// Where a subcommand writes its main result: the explicit path, else
// $FEQUIV_OUTPUT_DIR/<default_name> when the variable is set, else stdout
// (empty string).
std::string output_path(const std::string& explicit_path, const std::string& default_name);

// Writes to `path`, or to stdout when it is empty.
void emit(const std::string& path, const std::string& text);

std::string dump_json(const Json& j);

}  // namespace fequiv::cli
