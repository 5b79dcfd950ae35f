// Runs the full verification battery and prints one line per check. Every
// tolerance lives in the check implementations; this binary only reports.
#include <cstdio>
#include <exception>

#include "ttlm/selfcheck.hpp"

int main() {
  int failed = 0;
  const auto& checks = ttlm::check::registry();
  for (const auto& check : checks) {
    ttlm::check::CheckResult r;
    try {
      r = ttlm::check::run_check(check.name);
    } catch (const std::exception& e) {
      r = {check.name, false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %-22s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  return failed == 0 ? 0 : 1;
}
