#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <utility>

#include "perfectsim/engine.hpp"
#include "perfectsim/random.hpp"

namespace perfectsim {

// The only interface a factory may observe the unknown coin through: flips
// and flip accounting. Nothing here exposes the success probability, which
// is the structural form of the factory purity constraint.
template <typename Coin>
concept BernoulliCoin = requires(Coin coin, const Coin const_coin) {
  { coin.flip() } -> std::convertible_to<int>;
  { const_coin.flips_used() } -> std::convertible_to<std::uint64_t>;
};

static_assert(BernoulliCoin<CoinSource>);

// One factory output with its instrumentation: the bit, the recursion depth,
// the unknown-coin flips consumed, and the external base uniforms consumed.
struct FactorySample {
  int bit = 0;
  std::int64_t depth = 0;
  std::uint64_t flips = 0;
  std::uint64_t draws = 0;
};

// Von Neumann's constant factory: two flips per round; (1,0) emits 1, (0,1)
// emits 0, ties retry. Output is Bern(1/2) for every p in (0,1); rounds are
// geometric with success 2p(1-p), so p in {0,1} never halts and surfaces as
// DepthExceeded.
template <BernoulliCoin Coin>
FactorySample von_neumann(Coin& coin, RandomStream& stream, const RunLimits& limits = {}) {
  using Outcome = RecursionOutcome<NoParams, int>;
  const std::uint64_t flips_before = coin.flips_used();
  auto kernel = [&coin](const ProblemSpec<NoParams>&, RandomStream&) -> Outcome {
    const int first = coin.flip();
    const int second = coin.flip();
    if (first == 1 && second == 0) return Outcome::halt(1);
    if (first == 0 && second == 1) return Outcome::halt(0);
    return Outcome::recurse(NoParams{}, [](int x) { return x; });
  };
  auto record = run(root_problem(NoParams{}), kernel, stream, limits);
  return {record.value, record.depth, coin.flips_used() - flips_before,
          record.randomness_units};
}

// Factory for Bern(exp(-C p)), C > 0 known. Each level draws U ~ Exp(C):
// U >= 1 emits 1 with no flip; otherwise a heads emits 0 and a tails defers
// to the child problem with constant C(1-U). Every level halts with
// probability at least exp(-C).
template <BernoulliCoin Coin>
FactorySample exp_factory(Coin& coin, double c, RandomStream& stream,
                          const RunLimits& limits = {}) {
  if (!(c > 0.0)) {
    throw DomainError("exp_factory: C must be positive");
  }
  using Outcome = RecursionOutcome<double, int>;
  const std::uint64_t flips_before = coin.flips_used();
  auto kernel = [&coin](const ProblemSpec<double>& spec, RandomStream& s) -> Outcome {
    const double level_c = spec.params;
    const double wait = exponential(s, level_c);
    if (wait >= 1.0) return Outcome::halt(1);
    if (coin.flip() == 1) return Outcome::halt(0);
    return Outcome::recurse(level_c * (1.0 - wait), [](int x) { return x; });
  };
  auto record = run(root_problem(c), kernel, stream, limits);
  return {record.value, record.depth, coin.flips_used() - flips_before,
          record.randomness_units};
}

// Recursion state of the linear factory: the current target is (Cp)^i, times
// a pending (C-1)p/(1-p) factor when has_tail is set. (i = 0, no tail) is the
// halting state with output 1.
struct LinearFactoryState {
  std::int64_t exponent = 1;
  bool has_tail = false;
  double c = 2.0;
  double eps = 0.5;
};

inline void validate_linear_parameters(double c, double eps) {
  if (!(c > 1.0)) throw DomainError("linear factory: C must exceed 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("linear factory: eps must lie in (0,1)");
}

// First piece: one unknown-coin flip. Heads lowers the exponent; tails
// lowers it and leaves the tail factor pending.
template <BernoulliCoin Coin>
LinearFactoryState lf_piece1(LinearFactoryState state, Coin& coin) {
  if (state.has_tail || state.exponent < 1) {
    throw ContractViolation("lf_piece1: requires no tail and exponent >= 1");
  }
  const int heads = coin.flip();
  state.exponent -= 1;
  state.has_tail = (heads == 0);
  return state;
}

// Second piece: trade the tail factor against a known (C-1)/C coin. Raises
// the exponent either way; heads clears the tail. Repeating until the tail
// clears takes a geometric number of rounds with mean C/(C-1). No unknown
// coin flip is consumed.
inline LinearFactoryState lf_piece2(LinearFactoryState state, RandomStream& stream) {
  if (!state.has_tail) {
    throw ContractViolation("lf_piece2: requires a pending tail factor");
  }
  const int heads = bernoulli(stream, (state.c - 1.0) / state.c);
  state.exponent += 1;
  state.has_tail = (heads == 0);
  return state;
}

inline double lf_piece3_alpha(const LinearFactoryState& state) {
  return std::pow(1.0 + state.eps / 2.0, -static_cast<double>(state.exponent));
}

// Third piece, applicable once i >= 4.6/eps so that (Cp)^i <= alpha with
// alpha = (1+eps/2)^-i. A known alpha-coin either terminates with output 0
// (tails) or rescales the problem: C grows by (1+eps/2) and eps halves,
// keeping the same exponent. Returns nullopt on the terminal-0 branch.
inline std::optional<LinearFactoryState> lf_piece3(LinearFactoryState state,
                                                   RandomStream& stream) {
  if (state.has_tail ||
      static_cast<double>(state.exponent) < 4.6 / state.eps) {
    throw ContractViolation("lf_piece3: requires no tail and exponent >= 4.6/eps");
  }
  const double alpha = lf_piece3_alpha(state);
  if (bernoulli(stream, alpha) == 0) {
    return std::nullopt;
  }
  state.c *= 1.0 + state.eps / 2.0;
  state.eps /= 2.0;
  return state;
}

// Factory for Bern(C p), C > 1 known, under the external contract
// Cp <= 1 - eps. Composition: a pending tail is cleared first (repeated
// piece 2); (i = 0, no tail) outputs 1; i at or past 4.6/eps goes through
// piece 3 (which may output 0 or rescale); otherwise piece 1 flips the coin.
// Contract-violating inputs (Cp > 1 - eps) drift the exponent upward and are
// eventually surfaced by the depth cap.
template <BernoulliCoin Coin>
FactorySample linear_factory(Coin& coin, double c, double eps, RandomStream& stream,
                             const RunLimits& limits = {}) {
  validate_linear_parameters(c, eps);
  using Outcome = RecursionOutcome<LinearFactoryState, int>;
  const std::uint64_t flips_before = coin.flips_used();
  auto identity = [](int x) { return x; };
  auto kernel = [&coin, identity](const ProblemSpec<LinearFactoryState>& spec,
                                  RandomStream& s) -> Outcome {
    const LinearFactoryState& state = spec.params;
    if (state.has_tail) {
      return Outcome::recurse(lf_piece2(state, s), identity);
    }
    if (state.exponent == 0) {
      return Outcome::halt(1);
    }
    if (static_cast<double>(state.exponent) >= 4.6 / state.eps) {
      auto rescaled = lf_piece3(state, s);
      if (!rescaled) return Outcome::halt(0);
      return Outcome::recurse(*rescaled, identity);
    }
    return Outcome::recurse(lf_piece1(state, coin), identity);
  };
  auto record = run(root_problem(LinearFactoryState{1, false, c, eps}), kernel,
                    stream, limits);
  return {record.value, record.depth, coin.flips_used() - flips_before,
          record.randomness_units};
}

}  // namespace perfectsim
