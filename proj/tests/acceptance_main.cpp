// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Every gate (chi-square significance 1e-4, 4-standard-error bands, the 5%
// round-count tolerances, the 9.5 C/eps flip bound) is pinned in the suite
// definitions; seeds are committed, so this run is deterministic.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "perfectsim/suites.hpp"

namespace {

struct Criterion {
  std::string label;
  std::function<perfectsim::VerificationReport()> run;
};

}  // namespace

int main() {
  using perfectsim::suite::kDefaultSeed;
  const std::vector<Criterion> criteria = {
      {"1 AR die: uniform over 5 faces, 6/5 proposals per sample",
       [] { return perfectsim::suite::ar_die_criterion(kDefaultSeed); }},
      {"2 Von Neumann: fair output, 1/(2p(1-p)) rounds",
       [] { return perfectsim::suite::von_neumann_criterion(kDefaultSeed); }},
      {"3 Exponential factory: mean exp(-Cp) across the (C,p) grid",
       [] { return perfectsim::suite::exp_factory_criterion(kDefaultSeed); }},
      {"4 Linear factory: mean Cp, flips within 9.5 C/eps",
       [] { return perfectsim::suite::linear_factory_criterion(kDefaultSeed); }},
      {"5 CFTP exactness: reflecting walk, reset walk, 3x3 Ising",
       [] { return perfectsim::suite::cftp_exactness_criterion(kDefaultSeed); }},
      {"6 Truncation sandwich for the die kernel at depths 1..5",
       [] { return perfectsim::suite::truncation_sandwich_criterion(kDefaultSeed); }},
      {"7 Local-correctness identities (closed form, no sampling)",
       [] { return perfectsim::suite::local_identities_criterion(); }},
      {"8 Heat-bath monotonicity and detector soundness",
       [] { return perfectsim::suite::monotonicity_soundness_criterion(kDefaultSeed); }},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    const auto report = criterion.run();
    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    std::size_t passed = 0;
    for (const auto& check : report.checks) {
      if (check.pass) ++passed;
    }
    const bool ok = report.all_pass();
    std::printf("[%s] criterion %s (%zu/%zu checks, %.1fs)\n", ok ? "PASS" : "FAIL",
                criterion.label.c_str(), passed, report.checks.size(), elapsed);
    if (!ok) {
      ++failures;
      for (const auto& check : report.checks) {
        if (!check.pass) {
          std::printf("       FAIL %s: statistic=%.6g threshold=%.6g n=%llu seed=%llu\n",
                      check.name.c_str(), check.statistic, check.threshold,
                      static_cast<unsigned long long>(check.n),
                      static_cast<unsigned long long>(check.seed));
        }
      }
    }
  }
  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria FAILED\n", failures);
  }
  return failures;
}
