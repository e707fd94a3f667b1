#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "perfectsim/errors.hpp"

namespace perfectsim {

namespace detail {

// SplitMix64 step (Steele, Lea, Flood). Used for seeding and seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Seedable, reproducible stream of base uniforms in [0,1).
//
// The generator is pinned to xoshiro256++ (Blackman & Vigna), state seeded
// through SplitMix64, with uniforms taken as the top 53 bits: the same seed
// yields the same sequence on every platform, and the period (2^256 - 1)
// comfortably exceeds the 2^64 requirement. Every draw bumps a counter so
// callers can account for exactly how much randomness a run consumed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  // One base uniform in [0,1); increments the draw counter.
  double uniform01() {
    ++draws_;
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t draws() const { return draws_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
  std::uint64_t draws_ = 0;
};

inline RandomStream stream_from_seed(std::uint64_t seed) { return RandomStream(seed); }

// Deterministically derive an independent seed from (base, lane).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t lane) {
  std::uint64_t state = base ^ (lane * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
  return detail::splitmix64(state);
}

inline double uniform01(RandomStream& s) { return s.uniform01(); }

// Known-probability coin: 1 with probability q, from one base uniform.
inline int bernoulli(RandomStream& s, double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw DomainError("bernoulli: q must lie in [0,1]");
  }
  return s.uniform01() < q ? 1 : 0;
}

// Inverse-CDF exponential draw, -ln(1-u)/rate, one base uniform per draw.
inline double exponential(RandomStream& s, double rate) {
  if (!(rate > 0.0)) {
    throw DomainError("exponential: rate must be positive");
  }
  return -std::log1p(-s.uniform01()) / rate;
}

// A hidden-p Bernoulli oracle. The success probability is fixed at
// construction and cannot be read back through the sampling interface:
// consumers observe p only through flip(). Owns its backing stream
// (single-owner, like RandomStream itself).
class CoinSource {
 public:
  CoinSource(double success_probability, RandomStream backing)
      : p_(success_probability), stream_(std::move(backing)) {
    if (!(p_ >= 0.0 && p_ <= 1.0)) {
      throw DomainError("CoinSource: success probability must lie in [0,1]");
    }
  }

  int flip() {
    ++flips_;
    return stream_.uniform01() < p_ ? 1 : 0;
  }

  std::uint64_t flips_used() const { return flips_; }

 private:
  double p_;
  RandomStream stream_;
  std::uint64_t flips_ = 0;
};

inline int flip(CoinSource& c) { return c.flip(); }
inline std::uint64_t flips_used(const CoinSource& c) { return c.flips_used(); }

}  // namespace perfectsim
