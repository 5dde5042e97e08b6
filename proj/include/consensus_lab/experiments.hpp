#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "consensus_lab/graph.hpp"
#include "consensus_lab/process.hpp"

namespace consensus_lab::experiments {

struct NamedGraph {
  std::string id;
  Graph graph;
};

/// One estimate of E[T] on one graph. CSV columns, in order:
/// graph_id,n,e,p,estimate,stderr,theory,ratio,init
struct BenchRow {
  std::string graph_id;
  std::size_t n = 0;
  std::size_t e = 0;
  double p = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> theory;
  std::optional<double> ratio;  // estimate / theory
  std::string init;
};

inline constexpr const char* kBenchCsvHeader = "graph_id,n,e,p,estimate,stderr,theory,ratio,init";

/// Shortest round-trip decimal form.
std::string format_number(double x);
/// Quotes text containing a comma, quote or line break.
std::string csv_field(const std::string& text);
std::string bench_csv(std::span<const BenchRow> rows);
std::string bench_json(std::span<const BenchRow> rows);

/// Families by name: complete, path, cycle, star, sundew, lollipop,
/// jellyfish. sundew and lollipop need r; their ids read Sd{n}_{r}, Lp{n}_{r}.
NamedGraph make_family(const std::string& name, std::size_t n, std::optional<std::size_t> r = std::nullopt);

/// Paths, cycles, cliques, sundews and lollipops (r = n/3) at n in
/// {10, 32, 128}, plus jellyfish at n in {16, 64, 128}; entries with n above
/// max_n are dropped.
std::vector<NamedGraph> standard_suite(std::size_t max_n = 128);

/// Estimate of E[T]; theory is the exact value when the state space has at
/// most kDenseStateLimit states.
BenchRow bench(const NamedGraph& graph, const EstimateOptions& opts);

/// n^2 ln n + n.
double upper_bound_time(std::size_t n);

struct BoundReport {
  std::vector<BenchRow> rows;  // theory = the bound
  std::vector<std::string> violations;

  bool passed() const noexcept { return violations.empty(); }
};

/// p = 0, m = 2, nonempty start. A graph violates when estimate + 3 SE does
/// not stay below the bound.
BoundReport verify_upper_bound(std::span<const NamedGraph> graphs, std::size_t replications,
                               std::uint64_t seed, std::size_t workers = 0);

struct SundewLollipopResult {
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t e = 0;  // shared by both graphs
  SimStats sundew;
  SimStats lollipop;
  double gap = 0.0;             // mean(sundew) - mean(lollipop)
  double paired_stderr = 0.0;   // SE of the mean per-replication difference
  double combined_stderr = 0.0;  // sqrt(SE_sundew^2 + SE_lollipop^2)
  double normalized_gap = 0.0;  // gap / e
  double sundew_per_edge = 0.0;
  double lollipop_per_edge = 0.0;
  double sundew_reference = 0.0;    // h(r) - ln 2
  double lollipop_reference = 0.0;  // h(r) - ln 4

  /// gap >= 3 max(paired_stderr, combined_stderr) with the sundew slower.
  bool separated() const noexcept;
};

/// Both graphs see the same replication streams. p = 0, m = 2, nonempty start.
SundewLollipopResult sundew_vs_lollipop(std::size_t n, std::size_t r, std::size_t replications,
                                        std::uint64_t seed, std::size_t workers = 0);

struct PathTimeResult {
  std::size_t n = 0;
  std::size_t e = 0;
  SimStats stats;
  double per_n_log_n = 0.0;  // estimate / (n ln n)
  double per_e_h = 0.0;      // estimate / (e h(n))
  double per_edge = 0.0;     // estimate / e
  bool below_n_h = false;    // estimate < n h(n)
};

PathTimeResult path_time(std::size_t n, std::size_t replications, std::uint64_t seed,
                         std::size_t workers = 0);

/// Connected regular graphs on n vertices (3 <= n <= 8): K_n first, then the
/// cycle, K_{n/2,n/2}, prisms, the cube and every other connected circulant,
/// without duplicate edge sets.
std::vector<NamedGraph> curated_regular_graphs(std::size_t n);

struct RegularRow {
  std::string graph_id;
  std::size_t degree = 0;
  double p = 0.0;
  double expected_time = 0.0;
  bool voter_model = false;  // p = 1/2
};

struct RegularComparison {
  std::size_t n = 0;
  std::vector<double> p_grid;
  std::vector<RegularRow> rows;  // grouped by p, K_n first in each group
  std::vector<double> failures;  // grid points where K_n is not strictly fastest

  bool complete_strictly_minimal() const noexcept { return failures.empty(); }
};

/// Exact E[T] with m = 2 and a uniform start.
RegularComparison regular_graph_comparison(std::size_t n, std::span<const double> p_grid);

std::string regular_csv(const RegularComparison& table);

/// MC against the exact chain on one instance (needs m^n <= kDenseStateLimit).
struct ConsistencyCheck {
  std::string graph_id;
  double exact_time = 0.0;
  std::vector<double> exact_winner;  // index l-1
  SimStats stats;
  double time_z = 0.0;        // |MC - exact| / SE
  double worst_winner_z = 0.0;
  bool time_ok = false;       // |MC - exact| <= 4 SE
  bool winner_ok = false;

  bool passed() const noexcept { return time_ok && winner_ok; }
};

ConsistencyCheck mc_exact_consistency(const NamedGraph& graph, const EstimateOptions& opts);

}  // namespace consensus_lab::experiments
