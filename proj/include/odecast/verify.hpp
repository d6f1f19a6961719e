#pragma once

#include <iosfwd>
#include <string>
#include <vector>

// Numerical verification harness: executes the theory behind the model
// (discrete equivalences, solver convergence orders, the analytic diffusion
// solution, the Euler error bound, over-smoothing behavior) as oracle
// checks on seeded random instances.

namespace odecast {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;  // worst observed value
  double limit = 0.0;     // bound it is compared against
  std::string detail;
};

std::vector<CheckResult> verify_cgp();
std::vector<CheckResult> verify_cta();
std::vector<CheckResult> verify_gradients();
std::vector<CheckResult> verify_oversmoothing();
std::vector<CheckResult> verify_bound();
// nullptr-safe union of all suites in the order above.
std::vector<CheckResult> verify_suite(const std::string& name);

// One "[PASS]/[FAIL] name measured limit detail" line per check; returns the
// number of failures.
int print_results(const std::vector<CheckResult>& results, std::ostream& os);

}  // namespace odecast
