#include "consensus_lab/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "consensus_lab/errors.hpp"

namespace consensus_lab {

namespace {

bool is_connected(std::size_t n, const std::vector<std::vector<Vertex>>& adj) {
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<Vertex> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    Vertex v = stack.back();
    stack.pop_back();
    for (Vertex u : adj[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == n;
}

void add_clique(std::vector<Edge>& edges, std::size_t size) {
  for (Vertex u = 0; u < size; ++u)
    for (Vertex v = u + 1; v < size; ++v) edges.emplace_back(u, v);
}

std::size_t clique_size_for(std::size_t n, std::size_t r, const char* family) {
  if (r < 1 || r + 2 > n) {
    throw InvalidParameter(std::string(family) + ": need 1 <= r <= n-2 (n=" + std::to_string(n) +
                           ", r=" + std::to_string(r) + ")");
  }
  return n - r;
}

}  // namespace

Graph::Graph(std::size_t vertex_count, std::vector<Edge> edges) : n_(vertex_count) {
  if (n_ == 0) throw InvalidParameter("graph must have at least one vertex");
  for (auto& [u, v] : edges) {
    if (u >= n_ || v >= n_) {
      throw InvalidParameter("edge (" + std::to_string(u) + "," + std::to_string(v) +
                             ") out of range for n=" + std::to_string(n_));
    }
    if (u == v) throw InvalidParameter("self-loop at vertex " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  auto dup = std::adjacent_find(edges.begin(), edges.end());
  if (dup != edges.end()) {
    throw InvalidParameter("duplicate edge (" + std::to_string(dup->first) + "," +
                           std::to_string(dup->second) + ")");
  }
  edges_ = std::move(edges);

  adjacency_.assign(n_, {});
  for (const auto& [u, v] : edges_) {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  if (!is_connected(n_, adjacency_)) throw InvalidParameter("graph is disconnected");
}

std::vector<Vertex> Graph::leaves() const {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < n_; ++v)
    if (adjacency_[v].size() == 1) out.push_back(v);
  return out;
}

bool Graph::is_regular() const {
  return std::all_of(adjacency_.begin(), adjacency_.end(),
                     [&](const auto& a) { return a.size() == adjacency_[0].size(); });
}

Graph make_complete(std::size_t n) {
  if (n == 0) throw InvalidParameter("complete graph needs n >= 1");
  std::vector<Edge> edges;
  add_clique(edges, n);
  return Graph(n, std::move(edges));
}

Graph make_path(std::size_t n) {
  if (n == 0) throw InvalidParameter("path needs n >= 1");
  std::vector<Edge> edges;
  for (Vertex v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
  return Graph(n, std::move(edges));
}

Graph make_cycle(std::size_t n) {
  if (n < 3) throw InvalidParameter("cycle needs n >= 3");
  std::vector<Edge> edges;
  for (Vertex v = 0; v < n; ++v) edges.emplace_back(v, static_cast<Vertex>((v + 1) % n));
  return Graph(n, std::move(edges));
}

Graph make_star(std::size_t n) {
  if (n == 0) throw InvalidParameter("star needs n >= 1");
  std::vector<Edge> edges;
  for (Vertex v = 1; v < n; ++v) edges.emplace_back(0, v);
  return Graph(n, std::move(edges));
}

Graph make_sundew(std::size_t n, std::size_t r) {
  const std::size_t c = clique_size_for(n, r, "sundew");
  std::vector<Vertex> attachment(r);
  for (std::size_t j = 0; j < r; ++j) attachment[j] = static_cast<Vertex>(j % c);
  return make_spider(n, r, attachment);
}

Graph make_lollipop(std::size_t n, std::size_t r) {
  const std::size_t c = clique_size_for(n, r, "lollipop");
  std::vector<Edge> edges;
  add_clique(edges, c);
  Vertex prev = 0;
  for (std::size_t j = 0; j < r; ++j) {
    const auto v = static_cast<Vertex>(c + j);
    edges.emplace_back(prev, v);
    prev = v;
  }
  return Graph(n, std::move(edges));
}

JellyfishShape jellyfish_shape(std::size_t n) {
  if (n < 4) throw InvalidParameter("jellyfish needs n >= 4");
  const double lg = std::log2(static_cast<double>(n));
  const auto len = static_cast<std::size_t>(std::llround(2.0 * lg));
  auto q = static_cast<std::size_t>(std::llround(static_cast<double>(n) / (lg * lg)));
  while (q > 0 && q * len > n - 2) --q;
  if (q == 0 || len == 0) {
    throw InvalidParameter("jellyfish: n=" + std::to_string(n) + " too small for its paths");
  }
  const std::size_t c = n - q * len;
  if (q > c) throw InvalidParameter("jellyfish: more paths than clique vertices");
  return {c, q, len};
}

Graph make_jellyfish(std::size_t n) {
  const auto shape = jellyfish_shape(n);
  std::vector<Edge> edges;
  add_clique(edges, shape.clique_size);
  auto next = static_cast<Vertex>(shape.clique_size);
  for (std::size_t i = 0; i < shape.path_count; ++i) {
    auto prev = static_cast<Vertex>(i);
    for (std::size_t j = 0; j < shape.path_length; ++j) {
      edges.emplace_back(prev, next);
      prev = next++;
    }
  }
  return Graph(n, std::move(edges));
}

Graph make_spider(std::size_t n, std::size_t r, std::span<const Vertex> attachment) {
  if (r >= n) throw InvalidParameter("spider: need r < n");
  const std::size_t c = n - r;
  if (attachment.size() != r) throw InvalidParameter("spider: attachment must list r clique vertices");
  std::vector<Edge> edges;
  add_clique(edges, c);
  for (std::size_t j = 0; j < r; ++j) {
    if (attachment[j] >= c) throw InvalidParameter("spider: attachment outside the clique");
    edges.emplace_back(attachment[j], static_cast<Vertex>(c + j));
  }
  return Graph(n, std::move(edges));
}

Graph make_complete_bipartite(std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) throw InvalidParameter("complete bipartite needs both sides non-empty");
  std::vector<Edge> edges;
  for (Vertex u = 0; u < a; ++u)
    for (std::size_t v = 0; v < b; ++v) edges.emplace_back(u, static_cast<Vertex>(a + v));
  return Graph(a + b, std::move(edges));
}

Graph make_prism(std::size_t k) {
  if (k < 3) throw InvalidParameter("prism needs k >= 3");
  std::vector<Edge> edges;
  for (Vertex v = 0; v < k; ++v) {
    const auto w = static_cast<Vertex>((v + 1) % k);
    edges.emplace_back(v, w);
    edges.emplace_back(static_cast<Vertex>(v + k), static_cast<Vertex>(w + k));
    edges.emplace_back(v, static_cast<Vertex>(v + k));
  }
  return Graph(2 * k, std::move(edges));
}

Graph make_circulant(std::size_t n, std::span<const std::size_t> offsets) {
  if (n == 0) throw InvalidParameter("circulant needs n >= 1");
  std::vector<Edge> edges;
  for (std::size_t s : offsets) {
    if (s == 0 || 2 * s > n) throw InvalidParameter("circulant offsets must lie in 1..n/2");
    for (Vertex v = 0; v < n; ++v) {
      Vertex u = v;
      Vertex w = static_cast<Vertex>((v + s) % n);
      if (u > w) std::swap(u, w);
      edges.emplace_back(u, w);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Graph(n, std::move(edges));
}

Graph make_hypercube(std::size_t dimension) {
  if (dimension > 20) throw InvalidParameter("hypercube dimension too large");
  const std::size_t n = std::size_t{1} << dimension;
  std::vector<Edge> edges;
  for (Vertex v = 0; v < n; ++v)
    for (std::size_t b = 0; b < dimension; ++b) {
      const auto u = static_cast<Vertex>(v ^ (1u << b));
      if (v < u) edges.emplace_back(v, u);
    }
  return Graph(n, std::move(edges));
}

Graph parse_graph(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t header_line = 0;
  std::size_t n = 0;
  bool have_n = false;
  std::vector<Edge> edges;
  std::vector<std::size_t> edge_lines;

  auto parse_uint = [&](std::string_view tok) -> std::uint64_t {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw ParseError(line_no, "bad token '" + std::string(tok) + "'");
    }
    return value;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty() || tokens.front().front() == '#') {
      if (end == text.size()) break;
      continue;
    }

    if (!have_n) {
      if (tokens.size() != 1) throw ParseError(line_no, "expected a single vertex count");
      n = parse_uint(tokens[0]);
      if (n == 0) throw ParseError(line_no, "vertex count must be positive");
      have_n = true;
      header_line = line_no;
    } else {
      if (tokens.size() != 2) throw ParseError(line_no, "expected 'u v'");
      const auto u = parse_uint(tokens[0]);
      const auto v = parse_uint(tokens[1]);
      if (u >= n || v >= n) throw ParseError(line_no, "vertex out of range");
      if (u == v) throw ParseError(line_no, "self-loop at vertex " + std::to_string(u));
      edges.emplace_back(static_cast<Vertex>(std::min(u, v)), static_cast<Vertex>(std::max(u, v)));
      edge_lines.push_back(line_no);
    }
    if (end == text.size()) break;
  }
  if (!have_n) throw ParseError(line_no, "missing vertex count");

  std::vector<std::size_t> order(edges.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return edges[a] < edges[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (edges[order[k]] == edges[order[k - 1]]) {
      throw ParseError(edge_lines[order[k]], "duplicate edge");
    }
  }
  try {
    return Graph(n, std::move(edges));
  } catch (const InvalidParameter& e) {
    throw ParseError(header_line, e.what());
  }
}

std::string write_graph(const Graph& g) {
  std::ostringstream out;
  out << g.vertex_count() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open graph file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

}  // namespace consensus_lab
