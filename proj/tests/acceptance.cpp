// Acceptance driver: runs the built-in validation suite for the bundled
// reference system and exits non-zero if any check fails.

#include <cstdio>

#include "magnoise/reproduce.hpp"

int main() {
  const std::vector<magnoise::CheckResult> results =
      magnoise::run_acceptance_suite();
  std::fputs(magnoise::format_check_table(results).c_str(), stdout);
  int failures = 0;
  for (const magnoise::CheckResult& r : results) {
    if (!r.passed) ++failures;
  }
  std::printf("%zu checks, %d failed\n", results.size(), failures);
  return failures;
}
