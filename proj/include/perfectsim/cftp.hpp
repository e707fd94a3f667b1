#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "perfectsim/engine.hpp"
#include "perfectsim/random.hpp"

namespace perfectsim {

// A stationary update function phi for a Markov chain over State, consuming a
// fixed number of base uniforms per application. Composing phi with itself t
// times is again stationary; block_size(t) gives the randomness budget of the
// t-fold composite. `space` enumerates the state space when that is feasible
// (required by the exhaustive coalescence detector; may be left empty).
template <typename State>
struct UpdateFunction {
  std::function<State(State, std::span<const double>)> step;
  int draws_per_step = 1;
  std::vector<State> space;

  std::uint64_t block_size(std::uint64_t t) const {
    return t * static_cast<std::uint64_t>(draws_per_step);
  }
};

// t-fold composite: consume the block front to back, one step per sub-block.
template <typename State>
State apply_block(const UpdateFunction<State>& update, State x,
                  std::span<const double> block) {
  const auto stride = static_cast<std::size_t>(update.draws_per_step);
  if (block.size() % stride != 0) {
    throw ContractViolation("apply_block: block length not a multiple of draws_per_step");
  }
  for (std::size_t offset = 0; offset < block.size(); offset += stride) {
    x = update.step(std::move(x), block.subspan(offset, stride));
  }
  return x;
}

inline std::vector<double> draw_block(RandomStream& stream, std::uint64_t n) {
  std::vector<double> block(n);
  for (auto& u : block) u = stream.uniform01();
  return block;
}

// Decision of a coalescence detector: the unique image state when the t-fold
// update provably maps the whole space to one point under the given block.
template <typename State>
struct CoalescenceResult {
  std::optional<State> state;

  bool coalesced() const { return state.has_value(); }
};

// Complete detector for enumerable spaces: applies the composite update to
// every start and checks whether the image is a singleton.
template <typename State>
CoalescenceResult<State> exhaustive_detector(const UpdateFunction<State>& update,
                                             std::uint64_t t,
                                             std::span<const double> block) {
  if (update.space.empty()) {
    throw StateSpaceTooLarge("exhaustive_detector: state space not enumerated");
  }
  if (update.space.size() > 10'000) {
    throw StateSpaceTooLarge("exhaustive_detector: |state space| exceeds 10^4");
  }
  if (block.size() != update.block_size(t)) {
    throw ContractViolation("exhaustive_detector: block length does not match t");
  }
  std::optional<State> image;
  for (const State& start : update.space) {
    State end = apply_block(update, start, block);
    if (!image) {
      image = std::move(end);
    } else if (!(*image == end)) {
      return {};
    }
  }
  return {std::move(image)};
}

// Bounding-chain detector for monotone updates over a partially ordered space
// with global extremes: evolves only bottom and top under the shared block
// and certifies coalescence when they meet. Sound given monotonicity, and
// possibly incomplete; an order inversion along the way is reported
// immediately since it falsifies the monotonicity assumption.
template <typename State, typename PartialLeq>
CoalescenceResult<State> monotone_detector(const UpdateFunction<State>& update,
                                           std::uint64_t t,
                                           std::span<const double> block,
                                           State bottom, State top,
                                           PartialLeq&& leq) {
  if (block.size() != update.block_size(t)) {
    throw ContractViolation("monotone_detector: block length does not match t");
  }
  const auto stride = static_cast<std::size_t>(update.draws_per_step);
  for (std::size_t offset = 0; offset < block.size(); offset += stride) {
    auto sub = block.subspan(offset, stride);
    bottom = update.step(std::move(bottom), sub);
    top = update.step(std::move(top), sub);
    if (!leq(bottom, top)) {
      throw MonotonicityViolation("monotone_detector: evolved bottom is not <= evolved top");
    }
  }
  if (bottom == top) return {std::move(bottom)};
  return {};
}

template <typename State, typename PartialLeq>
auto make_monotone_detector(State bottom, State top, PartialLeq leq) {
  return [bottom = std::move(bottom), top = std::move(top), leq = std::move(leq)](
             const UpdateFunction<State>& update, std::uint64_t t,
             std::span<const double> block) {
    return monotone_detector(update, t, block, bottom, top, leq);
  };
}

inline auto make_exhaustive_detector() {
  return [](const auto& update, std::uint64_t t, std::span<const double> block) {
    return exhaustive_detector(update, t, block);
  };
}

// Single-step protocol: each level draws one step's worth of randomness; on
// coalescence the unique image is the sample, otherwise this level's update
// is applied (with the identical block) to the sample recursed from below.
// Requires positive one-step coalescence probability to halt.
template <typename State, typename Detector>
SampleRecord<State> cftp_single(const UpdateFunction<State>& update, Detector&& detect,
                                RandomStream& stream, const RunLimits& limits = {}) {
  using Outcome = RecursionOutcome<NoParams, State>;
  auto kernel = [&update, &detect](const ProblemSpec<NoParams>&,
                                   RandomStream& s) -> Outcome {
    std::vector<double> block = draw_block(s, update.block_size(1));
    auto result = detect(update, 1, block);
    if (result.coalesced()) {
      return Outcome::halt(std::move(*result.state));
    }
    return Outcome::recurse(NoParams{},
                            [&update, block = std::move(block)](State x) {
                              return apply_block(update, std::move(x), block);
                            });
  };
  return run(root_problem(NoParams{}), kernel, stream, limits);
}

// Doubling protocol: level k uses the t0 * 2^k fold composite with a fresh
// block; on failure to coalesce, the recursed sample is pushed through this
// level's whole stored block. Halts whenever some t gives the composite a
// positive coalescence probability.
template <typename State, typename Detector>
SampleRecord<State> cftp_doubling(const UpdateFunction<State>& update, Detector&& detect,
                                  std::uint64_t t0, RandomStream& stream,
                                  std::int64_t max_doublings = 64) {
  if (t0 < 1) {
    throw DomainError("cftp_doubling: t0 must be positive");
  }
  using Outcome = RecursionOutcome<std::uint64_t, State>;
  auto kernel = [&update, &detect](const ProblemSpec<std::uint64_t>& spec,
                                   RandomStream& s) -> Outcome {
    const std::uint64_t t = spec.params;
    std::vector<double> block = draw_block(s, update.block_size(t));
    auto result = detect(update, t, block);
    if (result.coalesced()) {
      return Outcome::halt(std::move(*result.state));
    }
    return Outcome::recurse(2 * t,
                            [&update, block = std::move(block)](State x) {
                              return apply_block(update, std::move(x), block);
                            });
  };
  return run(root_problem(t0), kernel, stream, RunLimits{max_doublings});
}

// --- Toy chains on {0,1,2} ---------------------------------------------------

// Reset walk: with probability 0.2 jump to 0, else a +-1 reflecting step
// (down on [0.2,0.6), up on [0.6,1)). The reset gives the one-step composite
// a coalescence probability of exactly 0.2, which exercises the single-step
// protocol; most natural chains cannot coalesce in one step.
inline UpdateFunction<int> reset_walk_update() {
  return {
      [](int x, std::span<const double> u) {
        if (u[0] < 0.2) return 0;
        if (u[0] < 0.6) return std::max(x - 1, 0);
        return std::min(x + 1, 2);
      },
      1,
      {0, 1, 2},
  };
}

inline std::vector<std::vector<double>> reset_walk_transition_matrix() {
  return {{0.6, 0.4, 0.0},
          {0.6, 0.0, 0.4},
          {0.2, 0.4, 0.4}};
}

// Symmetric reflecting walk: down if u < 1/3, up if u > 2/3, else hold.
// Stationary distribution is uniform; one step never coalesces, so this one
// exercises the doubling protocol.
inline UpdateFunction<int> reflecting_walk_update() {
  return {
      [](int x, std::span<const double> u) {
        if (u[0] < 1.0 / 3.0) return std::max(x - 1, 0);
        if (u[0] > 2.0 / 3.0) return std::min(x + 1, 2);
        return x;
      },
      1,
      {0, 1, 2},
  };
}

inline std::vector<std::vector<double>> reflecting_walk_transition_matrix() {
  const double third = 1.0 / 3.0;
  return {{2 * third, third, 0.0},
          {third, third, third},
          {0.0, third, 2 * third}};
}

}  // namespace perfectsim
