#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "perfectsim/errors.hpp"
#include "perfectsim/random.hpp"

namespace perfectsim {

// Explicit finite distribution: ordered (state encoding, probability) pairs.
// Normalization and uniqueness are asserted on construction.
class ProbabilityTable {
 public:
  using Entry = std::pair<std::string, double>;

  explicit ProbabilityTable(std::vector<Entry> entries)
      : entries_(std::move(entries)) {
    double sum = 0.0, comp = 0.0;  // Neumaier compensation
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& [state, prob] = entries_[i];
      if (!(prob >= 0.0)) {
        throw DomainError("ProbabilityTable: negative probability for state " + state);
      }
      if (!index_.emplace(state, i).second) {
        throw DomainError("ProbabilityTable: duplicate state " + state);
      }
      const double t = sum + prob;
      comp += std::abs(sum) >= std::abs(prob) ? (sum - t) + prob : (prob - t) + sum;
      sum = t;
    }
    sum += comp;
    if (entries_.empty() || std::abs(sum - 1.0) > 1e-12) {
      throw DomainError("ProbabilityTable: probabilities must sum to 1 within 1e-12");
    }
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  bool contains(const std::string& state) const { return index_.count(state) > 0; }

  double prob(const std::string& state) const {
    auto it = index_.find(state);
    return it == index_.end() ? 0.0 : entries_[it->second].second;
  }

  // Index of a state in entry order, or npos when absent.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t index_of(const std::string& state) const {
    auto it = index_.find(state);
    return it == index_.end() ? npos : it->second;
  }

  double min_probability() const {
    double lo = 1.0;
    for (const auto& [state, prob] : entries_) lo = std::min(lo, prob);
    return lo;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Inverse-CDF draw from a table: one base uniform, walk the cumulative sums.
inline const std::string& sample_from_table(const ProbabilityTable& table,
                                            RandomStream& stream) {
  const double u = stream.uniform01();
  double cumulative = 0.0;
  for (const auto& [state, prob] : table.entries()) {
    cumulative += prob;
    if (u < cumulative) return state;
  }
  return table.entries().back().first;  // guard against rounding at the tail
}

}  // namespace perfectsim
