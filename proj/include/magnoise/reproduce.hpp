#pragma once

#include <string>
#include <vector>

namespace magnoise {

// Outcome of one validation check: a stable slug, pass/fail, and a
// human-readable summary of the measured quantities.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Runs the full built-in validation suite for the bundled reference system
// (the bundled reference parameters with m = 1e-15 kg) and returns one result per check.
// Every check is deterministic; the whole suite runs desk-scale (well under
// two minutes).
std::vector<CheckResult> run_acceptance_suite();

// Renders results as aligned "PASS/FAIL  name  detail" lines.
std::string format_check_table(const std::vector<CheckResult>& results);

}  // namespace magnoise
