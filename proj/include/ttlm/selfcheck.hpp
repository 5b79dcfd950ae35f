#pragma once

#include <string>
#include <vector>

namespace ttlm::check {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // one-line summary: measured values, tolerances
};

struct Check {
  std::string name;
  std::string description;
  CheckResult (*run)(const std::string& data_dir);
};

// The full verification battery. Each entry exercises one engine guarantee
// against an independent oracle (naive references, finite differences,
// counting, byte comparison) and reports pass/fail with measurements.
const std::vector<Check>& registry();

// data_dir == "" uses the build-time default. Unknown names raise UsageError.
CheckResult run_check(const std::string& name, const std::string& data_dir = "");
std::vector<CheckResult> run_all(const std::string& data_dir = "");

std::string default_data_dir();

}  // namespace ttlm::check
