#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "perfectsim/factory.hpp"

using namespace perfectsim;

namespace {

// Deterministic coin fed from a fixed bit script; throws when exhausted so a
// factory can never silently read past its stopping time.
struct ScriptedCoin {
  std::vector<int> bits;
  std::size_t next = 0;
  std::uint64_t flips = 0;

  int flip() {
    if (next >= bits.size()) throw std::out_of_range("coin script exhausted");
    ++flips;
    return bits[next++];
  }
  std::uint64_t flips_used() const { return flips; }
};

static_assert(BernoulliCoin<ScriptedCoin>);

std::vector<int> random_bits(RandomStream& stream, std::size_t n, double p) {
  std::vector<int> bits(n);
  for (auto& b : bits) b = stream.uniform01() < p ? 1 : 0;
  return bits;
}

}  // namespace

TEST_CASE("von Neumann emits fair bits whatever the bias") {
  const std::size_t n = 20'000;
  for (double p : {0.1, 0.5}) {
    CoinSource coin(p, stream_from_seed(derive_seed(1000, static_cast<std::uint64_t>(p * 10))));
    RandomStream stream = stream_from_seed(1);
    double ones = 0.0, rounds = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto sample = von_neumann(coin, stream);
      REQUIRE((sample.bit == 0 || sample.bit == 1));
      REQUIRE(sample.flips == 2 * (static_cast<std::uint64_t>(sample.depth) + 1));
      REQUIRE(sample.draws == 0);  // no external randomness
      ones += sample.bit;
      rounds += static_cast<double>(sample.depth + 1);
    }
    const double band = 4.0 * std::sqrt(0.25 / static_cast<double>(n));
    REQUIRE(std::abs(ones / static_cast<double>(n) - 0.5) < band);
    const double expected_rounds = 1.0 / (2.0 * p * (1.0 - p));
    REQUIRE(std::abs(rounds / static_cast<double>(n) / expected_rounds - 1.0) < 0.05);
  }
}

TEST_CASE("von Neumann cannot halt on a deterministic coin") {
  CoinSource stuck(1.0, stream_from_seed(4));
  RandomStream stream = stream_from_seed(4);
  REQUIRE_THROWS_AS(von_neumann(stuck, stream, RunLimits{10'000}), DepthExceeded);
}

TEST_CASE("von Neumann identity: p(1-p) + [p^2+(1-p)^2]/2 = 1/2") {
  for (double p : {0.05, 0.3, 0.5, 0.6}) {
    const double rhs = p * (1 - p) * 1.0 + (p * p + (1 - p) * (1 - p)) * 0.5 + (1 - p) * p * 0.0;
    REQUIRE(std::abs(rhs - 0.5) <= 1e-12);
  }
}

TEST_CASE("von Neumann output is a stopping time of the flip sequence") {
  RandomStream script_source = stream_from_seed(77);
  RandomStream stream = stream_from_seed(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto prefix = random_bits(script_source, 400, 0.37);
    ScriptedCoin a{prefix};
    const auto first = von_neumann(a, stream);

    // Extend the sequence beyond flips_used with arbitrary junk: the
    // output and the flip count must not move.
    auto padded_zero = std::vector<int>(prefix.begin(),
                                        prefix.begin() + static_cast<long>(first.flips));
    auto padded_one = padded_zero;
    padded_zero.insert(padded_zero.end(), 100, 0);
    padded_one.insert(padded_one.end(), 100, 1);
    ScriptedCoin b{padded_zero};
    ScriptedCoin c{padded_one};
    const auto second = von_neumann(b, stream);
    const auto third = von_neumann(c, stream);
    REQUIRE(second.bit == first.bit);
    REQUIRE(third.bit == first.bit);
    REQUIRE(second.flips == first.flips);
    REQUIRE(third.flips == first.flips);
  }
}

TEST_CASE("swapping the flips inside every round flips the output") {
  RandomStream script_source = stream_from_seed(88);
  RandomStream stream = stream_from_seed(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto script = random_bits(script_source, 400, 0.45);
    ScriptedCoin plain{script};
    const auto sample = von_neumann(plain, stream);

    auto swapped = script;
    for (std::size_t i = 0; i + 1 < swapped.size(); i += 2) {
      std::swap(swapped[i], swapped[i + 1]);
    }
    ScriptedCoin exchanged{swapped};
    const auto mirrored = von_neumann(exchanged, stream);
    REQUIRE(mirrored.bit == 1 - sample.bit);
    REQUIRE(mirrored.flips == sample.flips);
  }
}

TEST_CASE("exponential factory hits exp(-Cp)") {
  const std::size_t n = 20'000;
  CoinSource coin(0.5, stream_from_seed(21));
  RandomStream stream = stream_from_seed(22);
  double ones = 0.0;
  for (std::size_t i = 0; i < n; ++i) ones += exp_factory(coin, 1.0, stream).bit;
  const double target = 0.6065306597126334;  // exp(-0.5)
  const double band = 4.0 * std::sqrt(target * (1.0 - target) / static_cast<double>(n));
  REQUIRE(std::abs(ones / static_cast<double>(n) - target) < band);
}

TEST_CASE("exponential factory at p = 0 always emits 1") {
  CoinSource coin(0.0, stream_from_seed(23));
  RandomStream stream = stream_from_seed(24);
  for (int i = 0; i < 10'000; ++i) {
    REQUIRE(exp_factory(coin, 1.5, stream).bit == 1);
  }
}

TEST_CASE("a first wait past 1 emits 1 before any flip") {
  // depth 0 with zero flips identifies the wait >= 1 branch, which must
  // output 1; it occurs with probability exp(-C) per run.
  CoinSource coin(0.5, stream_from_seed(25));
  RandomStream stream = stream_from_seed(26);
  const std::size_t n = 10'000;
  std::size_t immediate = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto sample = exp_factory(coin, 1.0, stream);
    if (sample.depth == 0 && sample.flips == 0) {
      REQUIRE(sample.bit == 1);
      ++immediate;
    }
  }
  const double target = std::exp(-1.0);
  const double band = 4.0 * std::sqrt(target * (1.0 - target) / static_cast<double>(n));
  REQUIRE(std::abs(static_cast<double>(immediate) / static_cast<double>(n) - target) < band);
}

TEST_CASE("exponential factory validates C") {
  CoinSource coin(0.5, stream_from_seed(26));
  RandomStream stream = stream_from_seed(27);
  REQUIRE_THROWS_AS(exp_factory(coin, 0.0, stream), DomainError);
  REQUIRE_THROWS_AS(exp_factory(coin, -2.0, stream), DomainError);
}

TEST_CASE("piece 1 lowers the exponent and may leave a tail") {
  ScriptedCoin heads{{1}};
  auto state = lf_piece1(LinearFactoryState{1, false, 2.0, 0.2}, heads);
  REQUIRE(state.exponent == 0);
  REQUIRE_FALSE(state.has_tail);
  REQUIRE(heads.flips_used() == 1);

  ScriptedCoin tails{{0}};
  state = lf_piece1(LinearFactoryState{3, false, 2.0, 0.2}, tails);
  REQUIRE(state.exponent == 2);
  REQUIRE(state.has_tail);

  ScriptedCoin unused{{1}};
  REQUIRE_THROWS_AS(lf_piece1(LinearFactoryState{3, true, 2.0, 0.2}, unused),
                    ContractViolation);
  REQUIRE_THROWS_AS(lf_piece1(LinearFactoryState{0, false, 2.0, 0.2}, unused),
                    ContractViolation);
}

TEST_CASE("piece 2 raises the exponent and clears the tail geometrically") {
  RandomStream stream = stream_from_seed(31);
  const std::size_t n = 20'000;
  double rounds_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    LinearFactoryState state{1, true, 2.0, 0.2};
    std::size_t rounds = 0;
    while (state.has_tail) {
      const auto before = state.exponent;
      state = lf_piece2(state, stream);
      REQUIRE(state.exponent == before + 1);
      ++rounds;
    }
    rounds_total += static_cast<double>(rounds);
  }
  // Geometric with success (C-1)/C = 1/2: mean C/(C-1) = 2 rounds.
  REQUIRE(std::abs(rounds_total / static_cast<double>(n) / 2.0 - 1.0) < 0.05);

  REQUIRE_THROWS_AS(lf_piece2(LinearFactoryState{1, false, 2.0, 0.2}, stream),
                    ContractViolation);
}

TEST_CASE("piece 3 either terminates with 0 or rescales") {
  const LinearFactoryState ready{23, false, 2.0, 0.2};
  REQUIRE(std::abs(lf_piece3_alpha(ready) - 0.11167815779424749) < 1e-12);

  RandomStream stream = stream_from_seed(33);
  const std::size_t n = 20'000;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto result = lf_piece3(ready, stream);
    if (!result) {
      ++zeros;
      continue;
    }
    REQUIRE(result->exponent == 23);
    REQUIRE(result->c == Catch::Approx(2.2).epsilon(1e-15));
    REQUIRE(result->eps == Catch::Approx(0.1).epsilon(1e-15));
  }
  const double alpha = lf_piece3_alpha(ready);
  const double band = 4.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n));
  REQUIRE(std::abs(static_cast<double>(zeros) / static_cast<double>(n) - (1.0 - alpha)) < band);

  REQUIRE_THROWS_AS(lf_piece3(LinearFactoryState{3, false, 2.0, 0.2}, stream),
                    ContractViolation);
}

TEST_CASE("linear factory hits Cp at the contract boundary") {
  const double c = 1.5, eps = 0.1, p = 0.6;  // Cp = 0.9 = 1 - eps
  CoinSource coin(p, stream_from_seed(41));
  RandomStream stream = stream_from_seed(42);
  const std::size_t n = 10'000;
  double ones = 0.0;
  for (std::size_t i = 0; i < n; ++i) ones += linear_factory(coin, c, eps, stream).bit;
  const double target = c * p;
  const double band = 4.0 * std::sqrt(target * (1.0 - target) / static_cast<double>(n));
  REQUIRE(std::abs(ones / static_cast<double>(n) - target) < band);
}

TEST_CASE("linear factory at p = 0 emits 0 and still halts") {
  CoinSource coin(0.0, stream_from_seed(43));
  RandomStream stream = stream_from_seed(44);
  for (int i = 0; i < 2000; ++i) {
    REQUIRE(linear_factory(coin, 2.0, 0.2, stream).bit == 0);
  }
}

TEST_CASE("linear factory flip count stays under 9.5 C / eps on the whole grid") {
  // Every (p, C, eps) combination with Cp <= 1 - eps, 10^4 runs each.
  const std::size_t n = 10'000;
  std::uint64_t lane = 0;
  for (double c : {1.5, 2.0, 4.0}) {
    for (double eps : {0.1, 0.2, 0.5}) {
      for (int i = 1; i <= 12; ++i) {
        const double p = 0.05 * i;
        if (c * p > 1.0 - eps) continue;
        CoinSource coin(p, stream_from_seed(derive_seed(45, lane)));
        RandomStream stream = stream_from_seed(derive_seed(46, lane));
        ++lane;
        double flips = 0.0;
        for (std::size_t run = 0; run < n; ++run) {
          flips += static_cast<double>(linear_factory(coin, c, eps, stream).flips);
        }
        INFO("c=" << c << " eps=" << eps << " p=" << p);
        REQUIRE(flips / static_cast<double>(n) <= 9.5 * c / eps);
      }
    }
  }
}

TEST_CASE("linear factory output is a stopping time of the flip sequence") {
  RandomStream script_source = stream_from_seed(47);
  for (int trial = 0; trial < 50; ++trial) {
    const auto prefix = random_bits(script_source, 3000, 0.3);  // Cp = 0.6
    const std::uint64_t stream_seed = derive_seed(48, static_cast<std::uint64_t>(trial));
    ScriptedCoin a{prefix};
    RandomStream ext_a = stream_from_seed(stream_seed);
    const auto first = linear_factory(a, 2.0, 0.2, ext_a);

    auto padded = std::vector<int>(prefix.begin(),
                                   prefix.begin() + static_cast<long>(first.flips));
    padded.insert(padded.end(), 200, 1);
    ScriptedCoin b{padded};
    RandomStream ext_b = stream_from_seed(stream_seed);
    const auto second = linear_factory(b, 2.0, 0.2, ext_b);
    REQUIRE(second.bit == first.bit);
    REQUIRE(second.flips == first.flips);
    REQUIRE(second.draws == first.draws);
  }
}

TEST_CASE("linear factory validates its parameters") {
  CoinSource coin(0.2, stream_from_seed(49));
  RandomStream stream = stream_from_seed(50);
  REQUIRE_THROWS_AS(linear_factory(coin, 1.0, 0.2, stream), DomainError);
  REQUIRE_THROWS_AS(linear_factory(coin, 0.5, 0.2, stream), DomainError);
  REQUIRE_THROWS_AS(linear_factory(coin, 2.0, 0.0, stream), DomainError);
  REQUIRE_THROWS_AS(linear_factory(coin, 2.0, 1.0, stream), DomainError);
}
