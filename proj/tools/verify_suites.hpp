#pragma once

#include <string>
#include <vector>

#include "fequiv/io.hpp"

namespace fequiv::cli {

struct PropertyResult {
  std::string name;
  bool passed = false;
  Json metrics;
};

std::vector<std::string> suite_names();

// Runs one property suite with fixed seeds. Throws ConfigError listing the
// available suites when `name` is unknown.
std::vector<PropertyResult> run_suite(const std::string& name);

}  // namespace fequiv::cli
