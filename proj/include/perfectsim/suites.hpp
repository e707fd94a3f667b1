#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "perfectsim/ar.hpp"
#include "perfectsim/cftp.hpp"
#include "perfectsim/checks.hpp"
#include "perfectsim/factory.hpp"
#include "perfectsim/ising.hpp"
#include "perfectsim/oracles.hpp"
#include "perfectsim/report.hpp"

// The committed verification suites. Every check pins its sample size, its
// gate, and a seed derived from the suite seed, so a rerun reproduces each
// statistic exactly. Statistical gates use chi-square significance 1e-4 or
// 4-standard-error bands; with the committed default seed the whole suite is
// deterministic and green.

namespace perfectsim::suite {

inline constexpr std::uint64_t kDefaultSeed = 8675309;
inline constexpr double kSignificance = 1e-4;

namespace detail {

inline CheckRecord chi_square_check(const std::string& name,
                                    const std::vector<std::uint64_t>& observed,
                                    const ProbabilityTable& expected,
                                    std::uint64_t n, std::uint64_t seed) {
  const auto result = chi_square_gof(observed, expected);
  const double critical = chi_square_critical(result.degrees_of_freedom, kSignificance);
  return {name, result.statistic, critical, result.statistic <= critical, n, seed};
}

inline CheckRecord mean_band_check(const std::string& name, double mean, double target,
                                   std::uint64_t n, std::uint64_t seed) {
  const double band = 4.0 * std::sqrt(target * (1.0 - target) / static_cast<double>(n));
  const double gap = std::abs(mean - target);
  return {name, gap, band, gap <= band, n, seed};
}

inline CheckRecord relative_check(const std::string& name, double observed, double target,
                                  double tolerance, std::uint64_t n, std::uint64_t seed) {
  const double gap = std::abs(observed / target - 1.0);
  return {name, gap, tolerance, gap <= tolerance, n, seed};
}

}  // namespace detail

// Criterion 1: the five-sided die is uniform and costs 6/5 proposals a sample.
inline VerificationReport ar_die_criterion(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report;
  constexpr std::uint64_t n = 100'000;
  const std::uint64_t check_seed = derive_seed(seed, 101);
  RandomStream stream = stream_from_seed(check_seed);

  const auto problem = die_problem();
  std::vector<std::uint64_t> counts(5, 0);
  double proposals = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto record = ar_sample(problem, stream);
    ++counts[static_cast<std::size_t>(record.value - 1)];
    proposals += static_cast<double>(record.depth + 1);
  }

  std::vector<ProbabilityTable::Entry> uniform;
  for (int face = 1; face <= 5; ++face) uniform.emplace_back(std::to_string(face), 0.2);
  report.add(detail::chi_square_check("ar_die/chi_square", counts,
                                      ProbabilityTable(std::move(uniform)), n, check_seed));
  report.add(detail::relative_check("ar_die/mean_proposals", proposals / static_cast<double>(n),
                                    6.0 / 5.0, 0.05, n, check_seed));
  return report;
}

// Criterion 2: Von Neumann emits fair bits for every p, in 1/(2p(1-p)) rounds.
inline VerificationReport von_neumann_criterion(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report;
  constexpr std::uint64_t n = 100'000;
  const std::vector<double> p_values = {0.1, 0.3, 0.5};
  for (std::size_t k = 0; k < p_values.size(); ++k) {
    const double p = p_values[k];
    const std::uint64_t check_seed = derive_seed(seed, 201 + k);
    CoinSource coin(p, stream_from_seed(derive_seed(check_seed, 1)));
    RandomStream stream = stream_from_seed(check_seed);
    double ones = 0.0, rounds = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto sample = von_neumann(coin, stream);
      ones += sample.bit;
      rounds += static_cast<double>(sample.depth + 1);
    }
    const std::string tag = "von_neumann/p=" + std::to_string(p);
    report.add(detail::mean_band_check(tag + "/mean", ones / static_cast<double>(n), 0.5,
                                       n, check_seed));
    report.add(detail::relative_check(tag + "/rounds", rounds / static_cast<double>(n),
                                      1.0 / (2.0 * p * (1.0 - p)), 0.05, n, check_seed));
  }
  return report;
}

// Criterion 3: the exponential factory hits exp(-Cp) across the (C,p) grid.
inline VerificationReport exp_factory_criterion(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report;
  constexpr std::uint64_t n = 100'000;
  std::size_t k = 0;
  for (double c : {0.5, 1.0, 2.0}) {
    for (double p : {0.2, 0.5}) {
      const std::uint64_t check_seed = derive_seed(seed, 301 + k++);
      CoinSource coin(p, stream_from_seed(derive_seed(check_seed, 1)));
      RandomStream stream = stream_from_seed(check_seed);
      double ones = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) ones += exp_factory(coin, c, stream).bit;
      const std::string tag =
          "exp_factory/c=" + std::to_string(c) + "/p=" + std::to_string(p);
      report.add(detail::mean_band_check(tag + "/mean", ones / static_cast<double>(n),
                                         std::exp(-c * p), n, check_seed));
    }
  }
  return report;
}

// Criterion 4: the linear factory hits Cp and stays under 9.5 C/eps flips,
// at the contract boundary p = (1-eps)/C and at half that.
inline VerificationReport linear_factory_criterion(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report;
  constexpr std::uint64_t n = 10'000;
  const std::vector<std::pair<double, double>> c_eps = {{2.0, 0.2}, {1.5, 0.1}, {4.0, 0.5}};
  std::size_t k = 0;
  for (const auto& [c, eps] : c_eps) {
    for (double p : {(1.0 - eps) / c, (1.0 - eps) / (2.0 * c)}) {
      const std::uint64_t check_seed = derive_seed(seed, 401 + k++);
      CoinSource coin(p, stream_from_seed(derive_seed(check_seed, 1)));
      RandomStream stream = stream_from_seed(check_seed);
      double ones = 0.0, flips = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto sample = linear_factory(coin, c, eps, stream);
        ones += sample.bit;
        flips += static_cast<double>(sample.flips);
      }
      const std::string tag = "linear_factory/c=" + std::to_string(c) +
                              "/eps=" + std::to_string(eps) + "/p=" + std::to_string(p);
      report.add(detail::mean_band_check(tag + "/mean", ones / static_cast<double>(n),
                                         c * p, n, check_seed));
      const double mean_flips = flips / static_cast<double>(n);
      const double bound = 9.5 * c / eps;
      report.add({tag + "/flips", mean_flips, bound, mean_flips <= bound, n, check_seed});
    }
  }
  return report;
}

namespace detail {

// Aggregate a full Ising table into magnetization bins, coarsest-first order.
inline ProbabilityTable magnetization_table(const ProbabilityTable& full) {
  std::map<int, double> mass;
  for (const auto& [state, prob] : full.entries()) {
    mass[magnetization(decode_spins(state))] += prob;
  }
  std::vector<ProbabilityTable::Entry> entries;
  for (const auto& [m, prob] : mass) entries.emplace_back(std::to_string(m), prob);
  return ProbabilityTable(std::move(entries));
}

}  // namespace detail

// Criterion 5: CFTP output matches the exact stationary law: (a) reflecting
// walk under doubling, (b) reset walk under the single-step protocol,
// (c) 3x3 Ising under monotone doubling at two temperatures. Ising bins by
// full state when every expected cell count clears 5, else by magnetization.
inline VerificationReport cftp_exactness_criterion(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report;

  {
    constexpr std::uint64_t n = 100'000;
    const std::uint64_t check_seed = derive_seed(seed, 501);
    RandomStream stream = stream_from_seed(check_seed);
    const auto update = reflecting_walk_update();
    const auto expected = stationary_of_chain(reflecting_walk_transition_matrix());
    std::vector<std::uint64_t> counts(expected.size(), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto record = cftp_doubling(update, make_exhaustive_detector(), 2, stream);
      ++counts[expected.index_of(std::to_string(record.value))];
    }
    report.add(detail::chi_square_check("cftp_reflecting_doubling/chi_square", counts,
                                        expected, n, check_seed));
  }

  {
    constexpr std::uint64_t n = 100'000;
    const std::uint64_t check_seed = derive_seed(seed, 502);
    RandomStream stream = stream_from_seed(check_seed);
    const auto update = reset_walk_update();
    const auto expected = stationary_of_chain(reset_walk_transition_matrix());
    std::vector<std::uint64_t> counts(expected.size(), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto record = cftp_single(update, make_exhaustive_detector(), stream);
      ++counts[expected.index_of(std::to_string(record.value))];
    }
    report.add(detail::chi_square_check("cftp_reset_single/chi_square", counts,
                                        expected, n, check_seed));
  }

  {
    constexpr std::uint64_t n = 200'000;
    auto graph = std::make_shared<const IsingGraph>(IsingGraph::grid(3, 3));
    std::size_t k = 0;
    for (double beta : {0.2, 0.4}) {
      const std::uint64_t check_seed = derive_seed(seed, 503 + k++);
      RandomStream stream = stream_from_seed(check_seed);
      const auto update = ising_update_function(graph, beta);
      const auto detector = ising_monotone_detector(graph, beta);
      const auto exact = exact_ising_distribution(*graph, beta);
      const std::uint64_t t0 = static_cast<std::uint64_t>(graph->n);

      const bool by_state =
          exact.min_probability() * static_cast<double>(n) >= 5.0;
      const auto expected = by_state ? exact : detail::magnetization_table(exact);
      std::vector<std::uint64_t> counts(expected.size(), 0);
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto record = cftp_doubling(update, detector, t0, stream);
        const std::string key =
            by_state ? encode_spins(record.value.spins)
                     : std::to_string(magnetization(record.value.spins));
        ++counts[expected.index_of(key)];
      }
      const std::string tag = "cftp_ising_3x3/beta=" + std::to_string(beta) +
                              (by_state ? "/by_state" : "/by_magnetization");
      report.add(detail::chi_square_check(tag + "/chi_square", counts, expected, n,
                                          check_seed));
    }
  }

  return report;
}

// Criterion 6: the depth-truncation sandwich for the die kernel at indices 1..5.
inline VerificationReport truncation_sandwich_criterion(std::uint64_t seed = kDefaultSeed) {
  std::vector<ProbabilityTable::Entry> faces;
  for (int face = 1; face <= 5; ++face) faces.emplace_back(std::to_string(face), 0.2);
  return truncation_bound_check(root_problem(die_problem()), ar_kernel<int>(),
                                [](int value) { return std::to_string(value); },
                                ProbabilityTable(std::move(faces)), {1, 2, 3, 4, 5},
                                100'000, derive_seed(seed, 601));
}

// Criterion 7: every closed-form local-correctness identity, no sampling.
inline VerificationReport local_identities_criterion() {
  VerificationReport report;
  for (auto family :
       {IdentityFamily::die, IdentityFamily::von_neumann, IdentityFamily::exp_factory,
        IdentityFamily::linear_piece1, IdentityFamily::linear_piece2,
        IdentityFamily::linear_piece3}) {
    report.merge(local_correctness_check(family));
  }
  return report;
}

// Criterion 8: heat-bath monotonicity on random ordered pairs, and agreement
// of the bounding-chain detector with exhaustive enumeration on the 2x2 grid.
inline VerificationReport monotonicity_soundness_criterion(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report;
  const std::vector<double> betas = {0.0, 0.2, 0.4, 1.0};

  {
    constexpr std::uint64_t trials = 10'000;
    const std::uint64_t check_seed = derive_seed(seed, 801);
    RandomStream stream = stream_from_seed(check_seed);
    auto graph = std::make_shared<const IsingGraph>(IsingGraph::grid(3, 3));
    std::uint64_t violations = 0;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      const double beta = betas[trial % betas.size()];
      std::vector<std::int8_t> lo(static_cast<std::size_t>(graph->n));
      std::vector<std::int8_t> hi(static_cast<std::size_t>(graph->n));
      for (int v = 0; v < graph->n; ++v) {
        const std::int8_t a = stream.uniform01() < 0.5 ? std::int8_t{1} : std::int8_t{-1};
        const std::int8_t b = stream.uniform01() < 0.5 ? std::int8_t{1} : std::int8_t{-1};
        lo[static_cast<std::size_t>(v)] = std::min(a, b);
        hi[static_cast<std::size_t>(v)] = std::max(a, b);
      }
      const double u_site = stream.uniform01();
      const double u_threshold = stream.uniform01();
      const auto low_next = ising_heatbath_update(make_ising_config(graph, beta, lo),
                                                  u_site, u_threshold);
      const auto high_next = ising_heatbath_update(make_ising_config(graph, beta, hi),
                                                   u_site, u_threshold);
      if (!componentwise_leq(low_next, high_next)) ++violations;
    }
    report.add({"ising_heatbath/monotone_pairs", static_cast<double>(violations), 0.0,
                violations == 0, trials, check_seed});
  }

  {
    constexpr std::uint64_t trials = 1'000;
    const std::uint64_t check_seed = derive_seed(seed, 802);
    RandomStream stream = stream_from_seed(check_seed);
    auto graph = std::make_shared<const IsingGraph>(IsingGraph::grid(2, 2));
    std::uint64_t disagreements = 0;
    std::uint64_t certified = 0;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      const double beta = betas[trial % betas.size()];
      const auto update = ising_update_function(graph, beta, /*enumerate_space=*/true);
      const auto t = 1 + static_cast<std::uint64_t>(stream.uniform01() * 12.0);
      const auto block = draw_block(stream, update.block_size(t));
      const auto monotone =
          monotone_detector(update, t, block, ising_all_spins(graph, beta, -1),
                            ising_all_spins(graph, beta, +1), componentwise_leq);
      if (!monotone.coalesced()) continue;
      ++certified;
      const auto exhaustive = exhaustive_detector(update, t, block);
      if (!exhaustive.coalesced() || !(*exhaustive.state == *monotone.state)) {
        ++disagreements;
      }
    }
    report.add({"ising_detectors/monotone_vs_exhaustive", static_cast<double>(disagreements),
                0.0, disagreements == 0 && certified > 0, trials, check_seed});
  }

  return report;
}

// Stationarity of each update function (not an acceptance criterion, part of
// the cftp suite): draw X from the exact law, apply one update with fresh
// randomness, and test that the law is unchanged.
inline VerificationReport stationarity_checks(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report;
  constexpr std::uint64_t n = 100'000;

  const auto toy_check = [&](const std::string& name, const UpdateFunction<int>& update,
                             const ProbabilityTable& pi, std::uint64_t lane) {
    const std::uint64_t check_seed = derive_seed(seed, lane);
    RandomStream stream = stream_from_seed(check_seed);
    std::vector<std::uint64_t> counts(pi.size(), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
      const int start = std::stoi(sample_from_table(pi, stream));
      const double u[] = {stream.uniform01()};
      const int next = update.step(start, std::span<const double>(u));
      ++counts[pi.index_of(std::to_string(next))];
    }
    report.add(detail::chi_square_check("stationarity/" + name, counts, pi, n, check_seed));
  };
  toy_check("reset_walk", reset_walk_update(),
            stationary_of_chain(reset_walk_transition_matrix()), 901);
  toy_check("reflecting_walk", reflecting_walk_update(),
            stationary_of_chain(reflecting_walk_transition_matrix()), 902);

  {
    const std::uint64_t check_seed = derive_seed(seed, 903);
    RandomStream stream = stream_from_seed(check_seed);
    auto graph = std::make_shared<const IsingGraph>(IsingGraph::grid(3, 3));
    const double beta = 0.2;
    const auto pi = exact_ising_distribution(*graph, beta);
    std::vector<std::uint64_t> counts(pi.size(), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto start = make_ising_config(graph, beta,
                                           decode_spins(sample_from_table(pi, stream)));
      const auto next =
          ising_heatbath_update(start, stream.uniform01(), stream.uniform01());
      ++counts[pi.index_of(encode_spins(next.spins))];
    }
    report.add(detail::chi_square_check("stationarity/ising_3x3_beta=0.2", counts, pi, n,
                                        check_seed));
  }
  return report;
}

inline VerificationReport ar_suite(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report = ar_die_criterion(seed);
  report.merge(local_correctness_check(IdentityFamily::die));
  return report;
}

inline VerificationReport factory_suite(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report = von_neumann_criterion(seed);
  report.merge(exp_factory_criterion(seed));
  report.merge(linear_factory_criterion(seed));
  report.merge(local_correctness_check(IdentityFamily::von_neumann));
  report.merge(local_correctness_check(IdentityFamily::exp_factory));
  report.merge(local_correctness_check(IdentityFamily::linear_piece1));
  report.merge(local_correctness_check(IdentityFamily::linear_piece2));
  report.merge(local_correctness_check(IdentityFamily::linear_piece3));
  return report;
}

inline VerificationReport cftp_suite(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report = cftp_exactness_criterion(seed);
  report.merge(monotonicity_soundness_criterion(seed));
  report.merge(stationarity_checks(seed));
  return report;
}

inline VerificationReport bounds_suite(std::uint64_t seed = kDefaultSeed) {
  return truncation_sandwich_criterion(seed);
}

inline VerificationReport full_suite(std::uint64_t seed = kDefaultSeed) {
  VerificationReport report = ar_suite(seed);
  report.merge(factory_suite(seed));
  report.merge(cftp_suite(seed));
  report.merge(bounds_suite(seed));
  return report;
}

}  // namespace perfectsim::suite
