#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "perfectsim/errors.hpp"
#include "perfectsim/ising.hpp"
#include "perfectsim/table.hpp"

// Independent oracles: exact enumeration, direct linear algebra, and the
// chi-square machinery. Nothing here touches a sampler code path.

namespace perfectsim {

// Exact Ising distribution by full enumeration of {-1,+1}^V, weights
// exp(-beta H(x)) normalized by the partition sum. States are encoded
// row-major as '+'/'-' strings, listed in mask order (vertex v is bit v).
inline ProbabilityTable exact_ising_distribution(const IsingGraph& graph, double beta) {
  if (!(beta >= 0.0)) throw DomainError("exact_ising_distribution: beta must be nonnegative");
  if (graph.n > 20) {
    throw StateSpaceTooLarge("exact_ising_distribution: 2^n states exceed the enumeration guard");
  }
  const std::size_t count = std::size_t{1} << graph.n;
  std::vector<double> weights(count);
  std::vector<std::int8_t> spins(static_cast<std::size_t>(graph.n));
  double z = 0.0, comp = 0.0;
  for (std::size_t mask = 0; mask < count; ++mask) {
    for (int v = 0; v < graph.n; ++v) {
      spins[static_cast<std::size_t>(v)] = (mask >> v) & 1 ? std::int8_t{1} : std::int8_t{-1};
    }
    const double w = std::exp(-beta * ising_hamiltonian(graph, spins));
    weights[mask] = w;
    const double t = z + w;
    comp += std::abs(z) >= std::abs(w) ? (z - t) + w : (w - t) + z;
    z = t;
  }
  z += comp;
  std::vector<ProbabilityTable::Entry> entries;
  entries.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    for (int v = 0; v < graph.n; ++v) {
      spins[static_cast<std::size_t>(v)] = (mask >> v) & 1 ? std::int8_t{1} : std::int8_t{-1};
    }
    entries.emplace_back(encode_spins(spins), weights[mask] / z);
  }
  return ProbabilityTable(std::move(entries));
}

// Stationary distribution of a finite chain by a direct solve of pi P = pi,
// sum(pi) = 1 (Gaussian elimination with partial pivoting on P^T - I with
// the last row replaced by the normalization). States are encoded as their
// indices. Reducible or otherwise rank-deficient chains surface as
// SingularSystem, as does any solution failing the residual check.
inline ProbabilityTable stationary_of_chain(const std::vector<std::vector<double>>& transition) {
  const std::size_t n = transition.size();
  if (n == 0 || n > 100) {
    throw DomainError("stationary_of_chain: need between 1 and 100 states");
  }
  for (const auto& row : transition) {
    if (row.size() != n) throw DomainError("stationary_of_chain: matrix must be square");
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw DomainError("stationary_of_chain: negative transition probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw DomainError("stationary_of_chain: rows must sum to 1");
    }
  }

  // Build A = P^T - I with the last row replaced by ones; b = e_n.
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = transition[j][i] - (i == j ? 1.0 : 0.0);
    }
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
  a[n - 1][n] = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    if (std::abs(a[pivot][col]) < 1e-12) {
      throw SingularSystem("stationary_of_chain: singular system (reducible chain?)");
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t row = col + 1; row < n; ++row) {
      const double factor = a[row][col] / a[col][col];
      if (factor == 0.0) continue;
      for (std::size_t j = col; j <= n; ++j) a[row][j] -= factor * a[col][j];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = n; i-- > 0;) {
    double rhs = a[i][n];
    for (std::size_t j = i + 1; j < n; ++j) rhs -= a[i][j] * pi[j];
    pi[i] = rhs / a[i][i];
  }

  double residual = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double column = -pi[j];
    for (std::size_t i = 0; i < n; ++i) column += pi[i] * transition[i][j];
    residual = std::max(residual, std::abs(column));
  }
  if (residual > 1e-10) {
    throw SingularSystem("stationary_of_chain: residual above 1e-10");
  }

  std::vector<ProbabilityTable::Entry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    entries.emplace_back(std::to_string(i), std::max(pi[i], 0.0));
  }
  return ProbabilityTable(std::move(entries));
}

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::int64_t degrees_of_freedom = 0;
  std::uint64_t total = 0;
};

// Pearson goodness-of-fit against an expected table. observed[i] pairs with
// expected.entries()[i]. Requires adequate cell counts: total >= 5 / min p.
inline ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed,
                                      const ProbabilityTable& expected) {
  if (observed.size() != expected.size()) {
    throw DomainError("chi_square_gof: observed cells must match the expected table");
  }
  std::uint64_t total = 0;
  for (auto count : observed) total += count;
  const double min_p = expected.min_probability();
  if (min_p <= 0.0 || static_cast<double>(total) < 5.0 / min_p) {
    throw InadequateCounts("chi_square_gof: expected counts below 5 in some cell");
  }
  double statistic = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected_count = expected.entries()[i].second * static_cast<double>(total);
    const double diff = static_cast<double>(observed[i]) - expected_count;
    statistic += diff * diff / expected_count;
  }
  const auto df = static_cast<std::int64_t>(observed.size()) - 1;
  const double p_value =
      df == 0 ? 1.0
              : boost::math::gamma_q(static_cast<double>(df) / 2.0, statistic / 2.0);
  return {statistic, p_value, df, total};
}

// Upper critical value of the chi-square distribution: the statistic whose
// survival probability equals `significance`.
inline double chi_square_critical(std::int64_t degrees_of_freedom, double significance) {
  if (degrees_of_freedom < 1) throw DomainError("chi_square_critical: df must be >= 1");
  if (!(significance > 0.0 && significance < 1.0)) {
    throw DomainError("chi_square_critical: significance must lie in (0,1)");
  }
  return 2.0 * boost::math::gamma_q_inv(static_cast<double>(degrees_of_freedom) / 2.0,
                                        significance);
}

}  // namespace perfectsim
