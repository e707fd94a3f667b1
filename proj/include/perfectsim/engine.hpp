#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "perfectsim/errors.hpp"
#include "perfectsim/random.hpp"

namespace perfectsim {

// Generic driver for recursive perfect-simulation schemes of the form
//
//   draw U from this level's randomness;
//   if U lands in the halting set, return the halting value;
//   otherwise solve a child problem and map its sample back up.
//
// Samplers supply a step kernel producing a RecursionOutcome per level; the
// engine executes the recursion iteratively so deep runs (doubling schedules,
// slow factories) cannot exhaust the machine stack. Provided the kernel is
// locally correct at every level and halts with probability 1, the returned
// value is distributed exactly as the root target; that guarantee is
// distributional and is checked statistically by the verification suites,
// never asserted per call.

// Caps for a single run. Hitting max_depth raises DepthExceeded rather than
// returning a partial (biased) value.
struct RunLimits {
  std::int64_t max_depth = 1'000'000;
};

// The problem at one recursion level: sampler-specific parameters (opaque to
// the engine) plus the level index. Treated as an immutable value; descent
// builds a fresh spec with depth_index + 1.
template <typename Params>
struct ProblemSpec {
  Params params;
  std::int64_t depth_index = 0;
};

template <typename P>
ProblemSpec<std::decay_t<P>> root_problem(P&& params) {
  return {std::forward<P>(params), 0};
}

// Parameter type for kernels that recurse into an unchanged problem.
struct NoParams {};

// One perfect sample plus instrumentation.
template <typename Value>
struct SampleRecord {
  Value value;
  std::int64_t depth = 0;              // largest recursion depth reached
  std::uint64_t randomness_units = 0;  // base uniforms pulled from the stream
  std::uint64_t flips = 0;             // hidden-p coin flips (0 outside factories)
};

// What one kernel invocation decided: halt with a value, or descend into a
// child problem carrying a deferred post-processor. The post-processor is a
// pure map from the child's sample to this level's sample, closed over the
// randomness already drawn at this level.
template <typename Params, typename Value>
class RecursionOutcome {
 public:
  using params_type = Params;
  using value_type = Value;
  using PostProcessor = std::function<Value(Value)>;

  static RecursionOutcome halt(Value value) {
    return RecursionOutcome(Alt(std::in_place_index<0>, HaltCase{std::move(value)}));
  }

  static RecursionOutcome recurse(Params child, PostProcessor post) {
    return RecursionOutcome(Alt(std::in_place_index<1>, RecurseCase{std::move(child), std::move(post)}));
  }

  bool halted() const { return alt_.index() == 0; }

  Value take_value() && { return std::move(std::get<0>(alt_).value); }
  Params take_child() && { return std::move(std::get<1>(alt_).child); }
  PostProcessor take_post() && { return std::move(std::get<1>(alt_).post); }

 private:
  struct HaltCase {
    Value value;
  };
  struct RecurseCase {
    Params child;
    PostProcessor post;
  };
  using Alt = std::variant<HaltCase, RecurseCase>;

  explicit RecursionOutcome(Alt alt) : alt_(std::move(alt)) {}

  Alt alt_;
};

namespace detail {

template <typename Params, typename Kernel>
using kernel_outcome_t =
    std::invoke_result_t<Kernel&, const ProblemSpec<Params>&, RandomStream&>;

}  // namespace detail

// Execute the recursion to completion. Pending post-processors accumulate on
// descent and fold onto the halted value in reverse order of creation, which
// reproduces the unwinding of the call recursion.
template <typename Params, typename Kernel>
auto run(ProblemSpec<Params> root, Kernel&& kernel, RandomStream& stream,
         const RunLimits& limits = {}) {
  using Outcome = detail::kernel_outcome_t<Params, Kernel>;
  using Value = typename Outcome::value_type;

  if (limits.max_depth < 1) {
    throw DomainError("RunLimits.max_depth must be at least 1");
  }
  const std::uint64_t draws_before = stream.draws();
  std::vector<typename Outcome::PostProcessor> pending;
  ProblemSpec<Params> current = std::move(root);
  for (;;) {
    if (current.depth_index >= limits.max_depth) {
      throw DepthExceeded(current.depth_index);
    }
    Outcome outcome = kernel(current, stream);
    if (outcome.halted()) {
      Value value = std::move(outcome).take_value();
      for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
        value = (*it)(std::move(value));
      }
      return SampleRecord<Value>{std::move(value), current.depth_index,
                                 stream.draws() - draws_before, 0};
    }
    pending.push_back(std::move(outcome).take_post());
    current = ProblemSpec<Params>{std::move(outcome).take_child(),
                                  current.depth_index + 1};
  }
}

template <typename Params, typename Kernel>
auto run(Params root_params, Kernel&& kernel, RandomStream& stream,
         const RunLimits& limits = {}) {
  return run(root_problem(std::move(root_params)), std::forward<Kernel>(kernel),
             stream, limits);
}

// Result of a depth-truncated run: a completed record, or Censored when the
// recursion needed to descend past depth_cap. Censoring is an expected
// outcome (it estimates tail probabilities), not an error.
template <typename Value>
struct TruncatedResult {
  std::optional<SampleRecord<Value>> record;

  bool completed() const { return record.has_value(); }
  bool censored() const { return !record.has_value(); }
};

// Identical to run() except the recursion is cut at depth_cap: completes
// exactly when the halting depth T satisfies T <= depth_cap.
template <typename Params, typename Kernel>
auto run_truncated(ProblemSpec<Params> root, Kernel&& kernel, RandomStream& stream,
                   std::int64_t depth_cap) {
  using Outcome = detail::kernel_outcome_t<Params, Kernel>;
  using Value = typename Outcome::value_type;

  if (depth_cap < 0) {
    throw DomainError("run_truncated: depth_cap must be nonnegative");
  }
  const std::uint64_t draws_before = stream.draws();
  std::vector<typename Outcome::PostProcessor> pending;
  ProblemSpec<Params> current = std::move(root);
  for (;;) {
    Outcome outcome = kernel(current, stream);
    if (outcome.halted()) {
      Value value = std::move(outcome).take_value();
      for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
        value = (*it)(std::move(value));
      }
      return TruncatedResult<Value>{SampleRecord<Value>{
          std::move(value), current.depth_index, stream.draws() - draws_before, 0}};
    }
    if (current.depth_index + 1 > depth_cap) {
      return TruncatedResult<Value>{};
    }
    pending.push_back(std::move(outcome).take_post());
    current = ProblemSpec<Params>{std::move(outcome).take_child(),
                                  current.depth_index + 1};
  }
}

template <typename Params, typename Kernel>
auto run_truncated(Params root_params, Kernel&& kernel, RandomStream& stream,
                   std::int64_t depth_cap) {
  return run_truncated(root_problem(std::move(root_params)),
                       std::forward<Kernel>(kernel), stream, depth_cap);
}

}  // namespace perfectsim
