#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace perfectsim {

// One verification check: what was measured, the gate it was held to, and
// the seed that reproduces it.
struct CheckRecord {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

struct VerificationReport {
  std::vector<CheckRecord> checks;

  bool all_pass() const {
    for (const auto& check : checks) {
      if (!check.pass) return false;
    }
    return true;
  }

  void add(CheckRecord record) { checks.push_back(std::move(record)); }

  void merge(const VerificationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }

  nlohmann::json to_json() const {
    nlohmann::json out;
    out["checks"] = nlohmann::json::array();
    for (const auto& check : checks) {
      out["checks"].push_back({{"name", check.name},
                               {"statistic", check.statistic},
                               {"threshold", check.threshold},
                               {"pass", check.pass},
                               {"n", check.n},
                               {"seed", check.seed}});
    }
    return out;
  }
};

}  // namespace perfectsim
