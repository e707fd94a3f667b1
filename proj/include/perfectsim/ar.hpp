#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "perfectsim/engine.hpp"
#include "perfectsim/random.hpp"
#include "perfectsim/table.hpp"

namespace perfectsim {

// Acceptance/rejection over a proposal measure and a membership predicate:
// samples the proposal conditioned on the acceptance set. No density ratios;
// the acceptance set is a black box.
template <typename Value>
struct ARProblem {
  std::function<Value(RandomStream&)> proposal;
  std::function<bool(const Value&)> accept;
  // Known mass of the acceptance set under the proposal, when available.
  // Not used for sampling; test oracles read it.
  std::optional<double> acceptance_mass;
};

// Step kernel: draw a candidate, halt on acceptance, otherwise retry the
// identical problem one level down.
template <typename Value>
auto ar_kernel() {
  using Outcome = RecursionOutcome<ARProblem<Value>, Value>;
  return [](const ProblemSpec<ARProblem<Value>>& spec, RandomStream& stream) -> Outcome {
    Value candidate = spec.params.proposal(stream);
    if (spec.params.accept(candidate)) {
      return Outcome::halt(std::move(candidate));
    }
    return Outcome::recurse(spec.params, [](Value x) { return x; });
  };
}

template <typename Value>
SampleRecord<Value> ar_sample(const ARProblem<Value>& problem, RandomStream& stream,
                              const RunLimits& limits = {}) {
  return run(root_problem(problem), ar_kernel<Value>(), stream, limits);
}

// The workhorse example: roll a fair six-sided die, keep faces 1..5.
inline ARProblem<int> die_problem() {
  return {
      [](RandomStream& stream) {
        return 1 + static_cast<int>(stream.uniform01() * 6.0);
      },
      [](const int& face) { return face <= 5; },
      5.0 / 6.0,
  };
}

inline int die_five(RandomStream& stream) {
  return ar_sample(die_problem(), stream).value;
}

// AR over an explicit finite table, conditioning on a set of state encodings.
inline ARProblem<std::string> table_ar_problem(ProbabilityTable table,
                                               std::set<std::string> accept_set) {
  double mass = 0.0;
  for (const auto& state : accept_set) mass += table.prob(state);
  if (!(mass > 0.0)) {
    throw DomainError("table_ar_problem: acceptance set has zero mass under the proposal");
  }
  auto shared = std::make_shared<const ProbabilityTable>(std::move(table));
  auto accepted = std::make_shared<const std::set<std::string>>(std::move(accept_set));
  return {
      [shared](RandomStream& stream) { return sample_from_table(*shared, stream); },
      [accepted](const std::string& state) { return accepted->count(state) > 0; },
      mass,
  };
}

}  // namespace perfectsim
