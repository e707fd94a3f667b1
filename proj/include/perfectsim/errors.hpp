#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace perfectsim {

// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid parameter value (probability outside [0,1], nonpositive rate, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

// The recursion reached its depth cap without halting. A perfect sampler
// must never return a truncated value, so this is an error, not a sample.
class DepthExceeded : public Error {
 public:
  explicit DepthExceeded(std::int64_t depth)
      : Error("recursion depth cap reached at depth " + std::to_string(depth) +
              " without halting (suspected non-halting kernel)"),
        depth_(depth) {}
  std::int64_t depth() const { return depth_; }

 private:
  std::int64_t depth_;
};

// State space too large (or not enumerated) for an exhaustive operation.
class StateSpaceTooLarge : public Error {
 public:
  explicit StateSpaceTooLarge(const std::string& what) : Error(what) {}
};

// A supposedly monotone update mapped an ordered pair out of order.
class MonotonicityViolation : public Error {
 public:
  explicit MonotonicityViolation(const std::string& what) : Error(what) {}
};

// An operation was invoked outside its stated precondition (programming error).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(what) {}
};

// Linear solve failed: reducible chain or numerically singular system.
class SingularSystem : public Error {
 public:
  explicit SingularSystem(const std::string& what) : Error(what) {}
};

// Cell counts too small for a valid chi-square test.
class InadequateCounts : public Error {
 public:
  explicit InadequateCounts(const std::string& what) : Error(what) {}
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& what) : Error(what) {}
};

}  // namespace perfectsim
