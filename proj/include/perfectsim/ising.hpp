#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "perfectsim/cftp.hpp"
#include "perfectsim/errors.hpp"

namespace perfectsim {

// Undirected graph carrying a spin system. Vertices are indexed 0..n-1;
// grid graphs are laid out row-major.
struct IsingGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adjacency;

  static IsingGraph from_edges(int n_vertices, std::vector<std::pair<int, int>> edge_list) {
    if (n_vertices < 1) throw DomainError("IsingGraph: need at least one vertex");
    IsingGraph g;
    g.n = n_vertices;
    g.adjacency.resize(static_cast<std::size_t>(n_vertices));
    for (auto [a, b] : edge_list) {
      if (a < 0 || b < 0 || a >= n_vertices || b >= n_vertices || a == b) {
        throw DomainError("IsingGraph: invalid edge");
      }
      g.adjacency[static_cast<std::size_t>(a)].push_back(b);
      g.adjacency[static_cast<std::size_t>(b)].push_back(a);
    }
    g.edges = std::move(edge_list);
    return g;
  }

  // width x height lattice with nearest-neighbor edges, free boundary.
  static IsingGraph grid(int width, int height) {
    if (width < 1 || height < 1) throw DomainError("IsingGraph::grid: dimensions must be positive");
    std::vector<std::pair<int, int>> edge_list;
    auto at = [width](int row, int col) { return row * width + col; };
    for (int row = 0; row < height; ++row) {
      for (int col = 0; col < width; ++col) {
        if (col + 1 < width) edge_list.emplace_back(at(row, col), at(row, col + 1));
        if (row + 1 < height) edge_list.emplace_back(at(row, col), at(row + 1, col));
      }
    }
    return from_edges(width * height, std::move(edge_list));
  }
};

// Spin configuration with its system parameters. Ferromagnetic only
// (beta >= 0), which is what makes the heat-bath update monotone.
struct IsingConfig {
  std::shared_ptr<const IsingGraph> graph;
  double beta = 0.0;
  std::vector<std::int8_t> spins;

  // Equality is state equality within one system.
  bool operator==(const IsingConfig& other) const { return spins == other.spins; }
};

inline IsingConfig make_ising_config(std::shared_ptr<const IsingGraph> graph, double beta,
                                     std::vector<std::int8_t> spins) {
  if (!graph) throw DomainError("IsingConfig: null graph");
  if (!(beta >= 0.0)) throw DomainError("IsingConfig: beta must be nonnegative");
  if (spins.size() != static_cast<std::size_t>(graph->n)) {
    throw DomainError("IsingConfig: spin vector length must equal vertex count");
  }
  for (auto s : spins) {
    if (s != 1 && s != -1) throw DomainError("IsingConfig: spins must be +1 or -1");
  }
  return {std::move(graph), beta, std::move(spins)};
}

inline IsingConfig ising_all_spins(std::shared_ptr<const IsingGraph> graph, double beta,
                                   std::int8_t spin) {
  std::vector<std::int8_t> spins(static_cast<std::size_t>(graph->n), spin);
  return make_ising_config(std::move(graph), beta, std::move(spins));
}

// H(x) = -sum over edges of x(i) x(j).
inline double ising_hamiltonian(const IsingGraph& graph, std::span<const std::int8_t> spins) {
  double h = 0.0;
  for (auto [a, b] : graph.edges) {
    h -= static_cast<double>(spins[static_cast<std::size_t>(a)]) *
         static_cast<double>(spins[static_cast<std::size_t>(b)]);
  }
  return h;
}

// Row-major encoding: one '+' or '-' per vertex.
inline std::string encode_spins(std::span<const std::int8_t> spins) {
  std::string out;
  out.reserve(spins.size());
  for (auto s : spins) out.push_back(s > 0 ? '+' : '-');
  return out;
}

inline std::vector<std::int8_t> decode_spins(const std::string& encoded) {
  std::vector<std::int8_t> spins(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] != '+' && encoded[i] != '-') {
      throw DomainError("decode_spins: expected a string of '+'/'-'");
    }
    spins[i] = encoded[i] == '+' ? std::int8_t{1} : std::int8_t{-1};
  }
  return spins;
}

inline int magnetization(std::span<const std::int8_t> spins) {
  int m = 0;
  for (auto s : spins) m += s;
  return m;
}

// Single-site heat bath: pick the site from u_site, then resample its spin
// from the conditional distribution given the neighbors. Stationary for the
// Ising measure, and monotone in the componentwise order when beta >= 0
// (a larger neighborhood sum only raises the +1 threshold probability).
inline IsingConfig ising_heatbath_update(IsingConfig config, double u_site,
                                         double u_threshold) {
  const IsingGraph& graph = *config.graph;
  const int site = std::min(static_cast<int>(u_site * graph.n), graph.n - 1);
  double neighbor_sum = 0.0;
  for (int w : graph.adjacency[static_cast<std::size_t>(site)]) {
    neighbor_sum += config.spins[static_cast<std::size_t>(w)];
  }
  const double up = std::exp(config.beta * neighbor_sum);
  const double p_plus = up / (up + 1.0 / up);
  config.spins[static_cast<std::size_t>(site)] =
      (u_threshold < p_plus) ? std::int8_t{1} : std::int8_t{-1};
  return config;
}

// Heat-bath chain as an UpdateFunction: two base uniforms per application
// (site choice, threshold), so block_size(t) = 2t exactly.
inline UpdateFunction<IsingConfig> ising_update_function(
    std::shared_ptr<const IsingGraph> graph, double beta, bool enumerate_space = false) {
  if (!graph) throw DomainError("ising_update_function: null graph");
  if (!(beta >= 0.0)) throw DomainError("ising_update_function: beta must be nonnegative");
  UpdateFunction<IsingConfig> update;
  update.draws_per_step = 2;
  update.step = [](IsingConfig x, std::span<const double> u) {
    return ising_heatbath_update(std::move(x), u[0], u[1]);
  };
  if (enumerate_space) {
    if (graph->n > 13) {
      throw StateSpaceTooLarge("ising_update_function: 2^n states exceed the enumeration guard");
    }
    const std::size_t count = std::size_t{1} << graph->n;
    update.space.reserve(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
      std::vector<std::int8_t> spins(static_cast<std::size_t>(graph->n));
      for (int v = 0; v < graph->n; ++v) {
        spins[static_cast<std::size_t>(v)] = (mask >> v) & 1 ? std::int8_t{1} : std::int8_t{-1};
      }
      update.space.push_back(make_ising_config(graph, beta, std::move(spins)));
    }
  }
  return update;
}

inline bool componentwise_leq(const IsingConfig& a, const IsingConfig& b) {
  if (a.spins.size() != b.spins.size()) return false;
  for (std::size_t i = 0; i < a.spins.size(); ++i) {
    if (a.spins[i] > b.spins[i]) return false;
  }
  return true;
}

// Monotone bounding-chain detector with the all -1 / all +1 extremes.
inline auto ising_monotone_detector(std::shared_ptr<const IsingGraph> graph, double beta) {
  return make_monotone_detector(ising_all_spins(graph, beta, -1),
                                ising_all_spins(graph, beta, +1),
                                [](const IsingConfig& a, const IsingConfig& b) {
                                  return componentwise_leq(a, b);
                                });
}

}  // namespace perfectsim
