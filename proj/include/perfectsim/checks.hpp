#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "perfectsim/engine.hpp"
#include "perfectsim/errors.hpp"
#include "perfectsim/oracles.hpp"
#include "perfectsim/report.hpp"
#include "perfectsim/table.hpp"

namespace perfectsim {

// --- Closed-form local-correctness identities --------------------------------
//
// Each sampler family has a one-level identity: the law of the output,
// written as (halting branch) + (recursion branch assumed exact), must equal
// the target. These are evaluated in closed form (quadrature for the
// exponential family), never by sampling. Tolerances are scale-aware:
// |lhs - rhs| <= tol * max(1, |lhs|, |rhs|).

enum class IdentityFamily {
  die,
  von_neumann,
  exp_factory,
  linear_piece1,
  linear_piece2,
  linear_piece3,
};

inline const char* to_string(IdentityFamily family) {
  switch (family) {
    case IdentityFamily::die: return "die";
    case IdentityFamily::von_neumann: return "von_neumann";
    case IdentityFamily::exp_factory: return "exp_factory";
    case IdentityFamily::linear_piece1: return "linear_piece1";
    case IdentityFamily::linear_piece2: return "linear_piece2";
    case IdentityFamily::linear_piece3: return "linear_piece3";
  }
  return "unknown";
}

struct IdentityGrid {
  std::vector<double> p_values;
  std::vector<double> c_values;
  std::vector<double> eps_values;
  std::vector<std::int64_t> exponents;
};

inline IdentityGrid default_identity_grid() {
  IdentityGrid grid;
  for (int i = 1; i <= 12; ++i) grid.p_values.push_back(0.05 * i);
  grid.c_values = {1.5, 2.0, 4.0};
  grid.eps_values = {0.1, 0.2, 0.5};
  for (std::int64_t i = 1; i <= 10; ++i) grid.exponents.push_back(i);
  return grid;
}

namespace detail {

inline double scaled_gap(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace detail

inline VerificationReport local_correctness_check(
    IdentityFamily family, const IdentityGrid& grid = default_identity_grid()) {
  VerificationReport report;
  const std::string base = std::string("local_correctness/") + to_string(family);
  double worst = 0.0;
  std::uint64_t points = 0;
  double tolerance = 1e-12;

  switch (family) {
    case IdentityFamily::die: {
      // 1/6 + (1/6)(1/5) = 1/5 for each kept face.
      tolerance = 1e-15;
      worst = std::abs(1.0 / 6.0 + (1.0 / 6.0) * (1.0 / 5.0) - 1.0 / 5.0);
      points = 1;
      break;
    }
    case IdentityFamily::von_neumann: {
      // 1/2 = p(1-p)*1 + [p^2 + (1-p)^2]*(1/2) + (1-p)p*0.
      for (double p : grid.p_values) {
        const double rhs = p * (1 - p) + (p * p + (1 - p) * (1 - p)) * 0.5;
        worst = std::max(worst, detail::scaled_gap(0.5, rhs));
        ++points;
      }
      break;
    }
    case IdentityFamily::exp_factory: {
      // exp(-Cp) = exp(-C) + (1-p) * int_0^1 C e^{-Cu} e^{-C(1-u)p} du.
      tolerance = 1e-10;
      std::vector<double> c_grid = {0.5, 1.0};
      c_grid.insert(c_grid.end(), grid.c_values.begin(), grid.c_values.end());
      for (double c : c_grid) {
        for (double p : grid.p_values) {
          const auto integrand = [c, p](double u) {
            return c * std::exp(-c * u) * std::exp(-c * (1.0 - u) * p);
          };
          const double integral =
              boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                  integrand, 0.0, 1.0, 8, 1e-13);
          const double rhs = std::exp(-c) + (1.0 - p) * integral;
          worst = std::max(worst, detail::scaled_gap(std::exp(-c * p), rhs));
          ++points;
        }
      }
      break;
    }
    case IdentityFamily::linear_piece1: {
      // (Cp)^i = p (Cp)^{i-1} + (1-p)(Cp)^{i-1}(C-1)p/(1-p).
      for (double c : grid.c_values) {
        for (double p : grid.p_values) {
          for (std::int64_t i : grid.exponents) {
            const double cp = c * p;
            const double lhs = std::pow(cp, static_cast<double>(i));
            const double below = std::pow(cp, static_cast<double>(i - 1));
            const double rhs =
                p * below + (1 - p) * below * (c - 1) * p / (1 - p);
            worst = std::max(worst, detail::scaled_gap(lhs, rhs));
            ++points;
          }
        }
      }
      break;
    }
    case IdentityFamily::linear_piece2: {
      // (Cp)^i (C-1)p/(1-p)
      //   = ((C-1)/C)(Cp)^{i+1} + (1/C)(Cp)^{i+1}(C-1)p/(1-p).
      for (double c : grid.c_values) {
        for (double p : grid.p_values) {
          for (std::int64_t i : grid.exponents) {
            const double cp = c * p;
            const double tail = (c - 1) * p / (1 - p);
            const double lhs = std::pow(cp, static_cast<double>(i)) * tail;
            const double above = std::pow(cp, static_cast<double>(i + 1));
            const double rhs = ((c - 1) / c) * above + (1 / c) * above * tail;
            worst = std::max(worst, detail::scaled_gap(lhs, rhs));
            ++points;
          }
        }
      }
      break;
    }
    case IdentityFamily::linear_piece3: {
      // g(p) = alpha * alpha^{-1} g(p) + (1 - alpha) * 0,
      // with g(p) = (Cp)^i and alpha = (1+eps/2)^{-i}.
      for (double c : grid.c_values) {
        for (double p : grid.p_values) {
          for (double eps : grid.eps_values) {
            for (std::int64_t i : grid.exponents) {
              const double g = std::pow(c * p, static_cast<double>(i));
              const double alpha = std::pow(1.0 + eps / 2.0, -static_cast<double>(i));
              const double rhs = alpha * (g / alpha) + (1.0 - alpha) * 0.0;
              worst = std::max(worst, detail::scaled_gap(g, rhs));
              ++points;
            }
          }
        }
      }
      break;
    }
  }

  report.add({base, worst, tolerance, worst <= tolerance, points, 0});
  return report;
}

inline VerificationReport local_correctness_check(
    const std::string& family, const IdentityGrid& grid = default_identity_grid()) {
  static const std::map<std::string, IdentityFamily> names = {
      {"die", IdentityFamily::die},
      {"von_neumann", IdentityFamily::von_neumann},
      {"exp_factory", IdentityFamily::exp_factory},
      {"linear_piece1", IdentityFamily::linear_piece1},
      {"linear_piece2", IdentityFamily::linear_piece2},
      {"linear_piece3", IdentityFamily::linear_piece3},
  };
  auto it = names.find(family);
  if (it == names.end()) throw DomainError("local_correctness_check: unknown family " + family);
  return local_correctness_check(it->second, grid);
}

// --- Depth-truncation sandwich ------------------------------------------------
//
// For each sandwich index i, estimate q_low(c) = P(X = c, T < i) from runs
// truncated at depth i-1 (completed <=> T <= i-1) and q_tail = P(T >= i) from
// the censoring frequency. Both inequalities
//     q_low(c) <= pi(c)      and      pi(c) <= q_low(c) + q_tail
// must hold within 4 binomial standard errors. The two events are disjoint,
// so the combined estimator is itself a binomial frequency.
template <typename Params, typename Kernel, typename Encode>
VerificationReport truncation_bound_check(ProblemSpec<Params> root, Kernel&& kernel,
                                          Encode&& encode, const ProbabilityTable& target,
                                          const std::vector<std::int64_t>& sandwich_indices,
                                          std::uint64_t samples, std::uint64_t seed) {
  VerificationReport report;
  for (std::size_t which = 0; which < sandwich_indices.size(); ++which) {
    const std::int64_t index = sandwich_indices[which];
    if (index < 1) throw DomainError("truncation_bound_check: sandwich index must be >= 1");
    const std::uint64_t check_seed = derive_seed(seed, which);
    RandomStream stream = stream_from_seed(check_seed);

    std::vector<std::uint64_t> completed_counts(target.size(), 0);
    std::uint64_t censored = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
      auto result = run_truncated(root, kernel, stream, index - 1);
      if (result.censored()) {
        ++censored;
        continue;
      }
      const auto cell = target.index_of(encode(result.record->value));
      if (cell == ProbabilityTable::npos) {
        throw DomainError("truncation_bound_check: sample outside the target table");
      }
      ++completed_counts[cell];
    }

    const double n = static_cast<double>(samples);
    const double tail = static_cast<double>(censored) / n;
    double lower_slack = 1.0, upper_slack = 1.0;
    for (std::size_t cell = 0; cell < target.size(); ++cell) {
      const double pi = target.entries()[cell].second;
      const double low = static_cast<double>(completed_counts[cell]) / n;
      const double se_low = std::sqrt(low * (1.0 - low) / n);
      lower_slack = std::min(lower_slack, pi + 4.0 * se_low - low);
      const double both = low + tail;
      const double se_both = std::sqrt(both * (1.0 - both) / n);
      upper_slack = std::min(upper_slack, both + 4.0 * se_both - pi);
    }
    const std::string base = "truncation_sandwich/i=" + std::to_string(index);
    report.add({base + "/lower", lower_slack, 0.0, lower_slack >= 0.0, samples, check_seed});
    report.add({base + "/upper", upper_slack, 0.0, upper_slack >= 0.0, samples, check_seed});
  }
  return report;
}

// --- Empirical summaries ------------------------------------------------------

struct EmpiricalSummary {
  std::uint64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;   // population variance
  double band_low = 0.0;   // mean +- 4 standard errors
  double band_high = 0.0;
  std::map<std::int64_t, std::uint64_t> depth_histogram;
  std::map<std::uint64_t, std::uint64_t> flips_histogram;
};

template <typename Value>
EmpiricalSummary empirical_report(const std::vector<SampleRecord<Value>>& records) {
  static_assert(std::is_convertible_v<Value, double>,
                "empirical_report needs numeric sample values");
  if (records.empty()) throw EmptyInput("empirical_report: no records");
  EmpiricalSummary summary;
  summary.n = records.size();
  double sum = 0.0;
  for (const auto& record : records) {
    sum += static_cast<double>(record.value);
    ++summary.depth_histogram[record.depth];
    ++summary.flips_histogram[record.flips];
  }
  summary.mean = sum / static_cast<double>(summary.n);
  double sq = 0.0;
  for (const auto& record : records) {
    const double d = static_cast<double>(record.value) - summary.mean;
    sq += d * d;
  }
  summary.variance = sq / static_cast<double>(summary.n);
  const double half_band = 4.0 * std::sqrt(summary.variance / static_cast<double>(summary.n));
  summary.band_low = summary.mean - half_band;
  summary.band_high = summary.mean + half_band;
  return summary;
}

}  // namespace perfectsim
