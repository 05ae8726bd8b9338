#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gce {

// One self-check: a computed quantity against its reference value. For
// equality claims `pass` means |computed - reference| <= tolerance; for
// one-sided claims the computed value is the violation, clamped at zero.
struct CheckResult {
  std::string claim;
  double computed = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  std::size_t mc_trials = 100000;   // Monte Carlo draws per expectation check
  std::size_t stop_trials = 100000; // simulated sequences per stopping check
  std::uint64_t seed = 1234567;
};

// Runs the estimator's internal consistency suite: hand-computed fixture
// values, draw-average unbiasedness (exhaustive and Monte Carlo), stopping
// time simulations against the closed form, finite-difference gradient
// comparisons for every model kind, and the balanced-data identities.
std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

bool all_passed(const std::vector<CheckResult>& checks);

// One line per check: status, claim, computed, reference, tolerance.
void print_report(const std::vector<CheckResult>& checks, std::ostream& out);

} // namespace gce
