#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace consensus_lab {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

/// Simple connected undirected graph on vertices 0..n-1.
///
/// Edges are stored normalised (u < v) and sorted, so two graphs with the same
/// edge set compare equal and iterate their edges in the same order. The
/// constructor rejects self-loops, duplicates, out-of-range endpoints and
/// disconnected inputs with InvalidParameter.
class Graph {
 public:
  Graph(std::size_t vertex_count, std::vector<Edge> edges);

  std::size_t vertex_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t i) const { return edges_[i]; }
  std::span<const Vertex> neighbors(Vertex v) const { return adjacency_[v]; }
  std::size_t degree(Vertex v) const { return adjacency_[v].size(); }

  /// Vertices of degree 1.
  std::vector<Vertex> leaves() const;
  bool is_regular() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adjacency_;
};

// Generated families put clique vertices at the lowest indices.

Graph make_complete(std::size_t n);
Graph make_path(std::size_t n);
Graph make_cycle(std::size_t n);
/// Vertex 0 is the centre.
Graph make_star(std::size_t n);

/// Clique on n-r vertices plus r pendant edges, attached round-robin to
/// clique vertices 0, 1, 2, ... Requires 1 <= r <= n-2.
Graph make_sundew(std::size_t n, std::size_t r);

/// Clique on n-r vertices plus a path of r edges hanging off clique vertex 0.
/// Requires 1 <= r <= n-2.
Graph make_lollipop(std::size_t n, std::size_t r);

/// Clique of size n - q*len with q pendant paths of length len, where
/// len = round(2 log2 n) and q = round(n / log2(n)^2), q reduced until
/// q*len <= n-2. Path i hangs off clique vertex i.
Graph make_jellyfish(std::size_t n);

struct JellyfishShape {
  std::size_t clique_size;
  std::size_t path_count;
  std::size_t path_length;
};
JellyfishShape jellyfish_shape(std::size_t n);

/// Clique on n-r vertices; pendant vertex n-r+j hangs off clique vertex attachment[j].
Graph make_spider(std::size_t n, std::size_t r, std::span<const Vertex> attachment);

Graph make_complete_bipartite(std::size_t a, std::size_t b);
/// C_k x K_2 on 2k vertices.
Graph make_prism(std::size_t k);
/// Vertex i adjacent to i +- s (mod n) for each s in offsets.
Graph make_circulant(std::size_t n, std::span<const std::size_t> offsets);
Graph make_hypercube(std::size_t dimension);

/// Edge-list text: first non-comment line is the vertex count, then one
/// "u v" pair per line. Lines whose first non-blank character is '#' and
/// blank lines are ignored. Throws ParseError naming the offending line.
Graph parse_graph(std::string_view text);

/// Canonical form: "n\n" followed by the sorted "u v" lines with u < v.
std::string write_graph(const Graph& g);

Graph read_graph_file(const std::string& path);

}  // namespace consensus_lab
