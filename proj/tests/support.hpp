#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "consensus_lab/graph.hpp"

namespace testing_support {

using consensus_lab::Edge;
using consensus_lab::Graph;
using consensus_lab::Vertex;

// Random connected graph: a random spanning tree plus each other pair with probability `extra`.
inline Graph random_connected_graph(std::size_t n, double extra, std::mt19937_64& rng) {
  std::vector<Vertex> order(n);
  for (Vertex v = 0; v < n; ++v) order[v] = v;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    const Vertex parent = order[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)];
    edges.emplace_back(parent, order[i]);
  }
  std::bernoulli_distribution add(extra);
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      const bool present = std::any_of(edges.begin(), edges.end(), [&](const Edge& e) {
        return (e.first == u && e.second == v) || (e.first == v && e.second == u);
      });
      if (!present && add(rng)) edges.emplace_back(u, v);
    }
  }
  return Graph(n, std::move(edges));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace testing_support
