#include "consensus_lab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "consensus_lab/chain.hpp"
#include "consensus_lab/coupon.hpp"
#include "consensus_lab/errors.hpp"

namespace consensus_lab::experiments {

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string bench_csv(std::span<const BenchRow> rows) {
  std::string out = std::string(kBenchCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += csv_field(r.graph_id) + ',' + std::to_string(r.n) + ',' + std::to_string(r.e) + ',' + format_number(r.p) +
           ',' + format_number(r.estimate) + ',' + format_number(r.std_error) + ',' +
           (r.theory ? format_number(*r.theory) : "") + ',' + (r.ratio ? format_number(*r.ratio) : "") +
           ',' + r.init + '\n';
  }
  return out;
}

std::string bench_json(std::span<const BenchRow> rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["graph_id"] = r.graph_id;
    j["n"] = r.n;
    j["e"] = r.e;
    j["p"] = r.p;
    j["estimate"] = r.estimate;
    j["stderr"] = r.std_error;
    j["theory"] = r.theory ? nlohmann::ordered_json(*r.theory) : nlohmann::ordered_json(nullptr);
    j["ratio"] = r.ratio ? nlohmann::ordered_json(*r.ratio) : nlohmann::ordered_json(nullptr);
    j["init"] = r.init;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

NamedGraph make_family(const std::string& name, std::size_t n, std::optional<std::size_t> r) {
  const std::string ns = std::to_string(n);
  auto need_r = [&]() {
    if (!r) throw InvalidParameter("family '" + name + "' needs --r");
    return *r;
  };
  if (name == "complete") return {"K" + ns, make_complete(n)};
  if (name == "path") return {"P" + ns, make_path(n)};
  if (name == "cycle") return {"C" + ns, make_cycle(n)};
  if (name == "star") return {"S" + ns, make_star(n)};
  if (name == "jellyfish") return {"J" + ns, make_jellyfish(n)};
  if (name == "sundew") {
    const auto rr = need_r();
    return {"Sd" + ns + "_" + std::to_string(rr), make_sundew(n, rr)};
  }
  if (name == "lollipop") {
    const auto rr = need_r();
    return {"Lp" + ns + "_" + std::to_string(rr), make_lollipop(n, rr)};
  }
  throw InvalidParameter("unknown family '" + name + "'");
}

std::vector<NamedGraph> standard_suite(std::size_t max_n) {
  std::vector<NamedGraph> suite;
  for (std::size_t n : {10, 32, 128}) {
    if (n > max_n) continue;
    suite.push_back(make_family("path", n));
    suite.push_back(make_family("cycle", n));
    suite.push_back(make_family("complete", n));
    suite.push_back(make_family("sundew", n, n / 3));
    suite.push_back(make_family("lollipop", n, n / 3));
  }
  for (std::size_t n : {16, 64, 128}) {
    if (n <= max_n) suite.push_back(make_family("jellyfish", n));
  }
  return suite;
}

namespace {

bool exact_feasible(std::size_t n, Strategy m) {
  std::size_t states = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (states > kDenseStateLimit / m) return false;
    states *= m;
  }
  return true;
}

std::vector<double> init_distribution(const ConsensusChain& chain, const InitMode& init) {
  if (std::holds_alternative<UniformInit>(init)) return chain.uniform_distribution();
  if (std::holds_alternative<NonemptyInit>(init)) return chain.nonempty_distribution();
  return chain.point_distribution(std::get<FixedInit>(init).state);
}

BenchRow row_from(const NamedGraph& graph, const EstimateOptions& opts, const SimStats& stats) {
  BenchRow row;
  row.graph_id = graph.id;
  row.n = graph.graph.vertex_count();
  row.e = graph.graph.edge_count();
  row.p = opts.p;
  row.estimate = stats.time_mean;
  row.std_error = stats.time_stderr();
  row.init = init_name(opts.init);
  return row;
}

void set_theory(BenchRow& row, double theory) {
  row.theory = theory;
  row.ratio = theory != 0.0 ? std::optional<double>(row.estimate / theory) : std::nullopt;
}

EstimateOptions activation_options(std::size_t replications, std::uint64_t seed, std::size_t workers) {
  EstimateOptions opts;
  opts.p = 0.0;
  opts.m = 2;
  opts.replications = replications;
  opts.seed = seed;
  opts.init = NonemptyInit{};
  opts.workers = workers;
  return opts;
}

}  // namespace

BenchRow bench(const NamedGraph& graph, const EstimateOptions& opts) {
  const SimStats stats = estimate(graph.graph, opts);
  BenchRow row = row_from(graph, opts, stats);
  if (exact_feasible(graph.graph.vertex_count(), opts.m)) {
    const auto chain = build_chain(graph.graph, opts.m, opts.p);
    set_theory(row, expected_absorption_time(chain, init_distribution(chain, opts.init)));
  }
  return row;
}

double upper_bound_time(std::size_t n) {
  const double nn = static_cast<double>(n);
  return nn * nn * std::log(nn) + nn;
}

BoundReport verify_upper_bound(std::span<const NamedGraph> graphs, std::size_t replications,
                               std::uint64_t seed, std::size_t workers) {
  BoundReport report;
  const auto opts = activation_options(replications, seed, workers);
  for (const auto& g : graphs) {
    const SimStats stats = estimate(g.graph, opts);
    BenchRow row = row_from(g, opts, stats);
    const double bound = upper_bound_time(row.n);
    set_theory(row, bound);
    if (!(row.estimate + 3.0 * row.std_error < bound)) report.violations.push_back(g.id);
    report.rows.push_back(std::move(row));
  }
  return report;
}

bool SundewLollipopResult::separated() const noexcept {
  return gap > 0.0 && gap >= 3.0 * std::max(paired_stderr, combined_stderr);
}

SundewLollipopResult sundew_vs_lollipop(std::size_t n, std::size_t r, std::size_t replications,
                                        std::uint64_t seed, std::size_t workers) {
  const Graph sd = make_sundew(n, r);
  const Graph lp = make_lollipop(n, r);
  const auto opts = activation_options(replications, seed, workers);
  const auto sd_runs = simulate_replications(sd, opts);
  const auto lp_runs = simulate_replications(lp, opts);

  SundewLollipopResult res;
  res.n = n;
  res.r = r;
  res.e = sd.edge_count();
  res.sundew = summarize(sd_runs, 2, seed);
  res.lollipop = summarize(lp_runs, 2, seed);
  res.gap = res.sundew.time_mean - res.lollipop.time_mean;

  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < replications; ++i) {
    const double d = static_cast<double>(sd_runs[i].steps) - static_cast<double>(lp_runs[i].steps);
    const double delta = d - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (d - mean);
  }
  const double var = replications > 1 ? m2 / static_cast<double>(replications - 1) : 0.0;
  res.paired_stderr = std::sqrt(var / static_cast<double>(replications));
  res.combined_stderr = std::hypot(res.sundew.time_stderr(), res.lollipop.time_stderr());

  const double e = static_cast<double>(res.e);
  res.normalized_gap = res.gap / e;
  res.sundew_per_edge = res.sundew.time_mean / e;
  res.lollipop_per_edge = res.lollipop.time_mean / e;
  const double hr = coupon::harmonic_interp(static_cast<double>(r));
  res.sundew_reference = hr - std::log(2.0);
  res.lollipop_reference = hr - std::log(4.0);
  return res;
}

PathTimeResult path_time(std::size_t n, std::size_t replications, std::uint64_t seed, std::size_t workers) {
  if (n < 2) throw InvalidParameter("path_time needs n >= 2");
  const Graph g = make_path(n);
  PathTimeResult res;
  res.n = n;
  res.e = g.edge_count();
  res.stats = estimate(g, activation_options(replications, seed, workers));
  const double nn = static_cast<double>(n);
  const double hn = coupon::harmonic(n);
  res.per_n_log_n = res.stats.time_mean / (nn * std::log(nn));
  res.per_e_h = res.stats.time_mean / (static_cast<double>(res.e) * hn);
  res.per_edge = res.stats.time_mean / static_cast<double>(res.e);
  res.below_n_h = res.stats.time_mean < nn * hn;
  return res;
}

namespace {

// Smallest sorted edge list over all vertex relabellings; n <= 8 keeps this cheap.
std::vector<Edge> canonical_edges(const Graph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<Vertex> perm(n);
  std::iota(perm.begin(), perm.end(), Vertex{0});
  std::vector<Edge> best, cur;
  bool first = true;
  do {
    cur.clear();
    for (const auto& [u, v] : g.edges()) {
      const Vertex a = perm[u], b = perm[v];
      cur.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(cur.begin(), cur.end());
    if (first || cur < best) {
      best = cur;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::vector<NamedGraph> curated_regular_graphs(std::size_t n) {
  if (n < 3 || n > 8) throw InvalidParameter("regular-graph comparison runs for 3 <= n <= 8");
  std::vector<NamedGraph> candidates;
  const std::string ns = std::to_string(n);
  candidates.push_back({"K" + ns, make_complete(n)});
  candidates.push_back({"C" + ns, make_cycle(n)});
  if (n % 2 == 0) {
    candidates.push_back({"K" + std::to_string(n / 2) + "_" + std::to_string(n / 2),
                          make_complete_bipartite(n / 2, n / 2)});
  }
  if (n == 8) candidates.push_back({"Q3", make_hypercube(3)});
  if (n % 2 == 0 && n >= 6) candidates.push_back({"prism" + std::to_string(n / 2), make_prism(n / 2)});

  const std::size_t half = n / 2;
  for (std::size_t mask = 1; mask < (std::size_t{1} << half); ++mask) {
    std::vector<std::size_t> offsets;
    std::string id = "circ" + ns;
    for (std::size_t s = 1; s <= half; ++s) {
      if (mask & (std::size_t{1} << (s - 1))) {
        offsets.push_back(s);
        id += "_" + std::to_string(s);
      }
    }
    try {
      candidates.push_back({id, make_circulant(n, offsets)});
    } catch (const InvalidParameter&) {
      // disconnected circulant
    }
  }

  std::vector<NamedGraph> out;
  std::vector<std::vector<Edge>> seen;
  for (auto& c : candidates) {
    if (!c.graph.is_regular()) continue;
    auto canon = canonical_edges(c.graph);
    if (std::find(seen.begin(), seen.end(), canon) != seen.end()) continue;
    seen.push_back(std::move(canon));
    out.push_back(std::move(c));
  }
  return out;
}

RegularComparison regular_graph_comparison(std::size_t n, std::span<const double> p_grid) {
  const auto graphs = curated_regular_graphs(n);
  RegularComparison table;
  table.n = n;
  table.p_grid.assign(p_grid.begin(), p_grid.end());
  for (double p : p_grid) {
    double complete_time = 0.0;
    double best_other = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      const auto chain = build_chain(graphs[i].graph, 2, p);
      const double t = expected_absorption_time(chain, chain.uniform_distribution());
      if (i == 0) {
        complete_time = t;
      } else {
        best_other = std::min(best_other, t);
      }
      table.rows.push_back({graphs[i].id, graphs[i].graph.degree(0), p, t, p == 0.5});
    }
    if (!(complete_time < best_other)) table.failures.push_back(p);
  }
  return table;
}

std::string regular_csv(const RegularComparison& table) {
  std::string out = "graph_id,n,degree,p,expected_time,voter_model\n";
  for (const auto& r : table.rows) {
    out += csv_field(r.graph_id) + ',' + std::to_string(table.n) + ',' + std::to_string(r.degree) + ',' +
           format_number(r.p) + ',' + format_number(r.expected_time) + ',' +
           (r.voter_model ? "1" : "0") + '\n';
  }
  return out;
}

ConsistencyCheck mc_exact_consistency(const NamedGraph& graph, const EstimateOptions& opts) {
  if (!exact_feasible(graph.graph.vertex_count(), opts.m)) {
    throw CapacityError("instance too large for the exact comparison");
  }
  ConsistencyCheck check;
  check.graph_id = graph.id;
  const auto chain = build_chain(graph.graph, opts.m, opts.p);
  const auto init = init_distribution(chain, opts.init);
  check.exact_time = expected_absorption_time(chain, init);
  check.exact_winner = absorption_distribution(chain, init);
  check.stats = estimate(graph.graph, opts);

  const double se = check.stats.time_stderr();
  const double diff = std::abs(check.stats.time_mean - check.exact_time);
  check.time_ok = se > 0.0 ? diff <= 4.0 * se : diff <= 1e-9 * std::max(1.0, check.exact_time);
  check.time_z = se > 0.0 ? diff / se : (check.time_ok ? 0.0 : std::numeric_limits<double>::infinity());

  check.winner_ok = true;
  const double reps = static_cast<double>(check.stats.replications);
  for (Strategy l = 1; l <= opts.m; ++l) {
    const double q = check.exact_winner[l - 1];
    const double freq = check.stats.winner_frequency(l);
    const double wse = std::sqrt(std::max(0.0, q * (1.0 - q)) / reps);
    const double d = std::abs(freq - q);
    double z = 0.0;
    if (wse > 1e-12) {
      z = d / wse;
      if (d > 4.0 * wse) check.winner_ok = false;
    } else if (d > 1e-9) {
      z = std::numeric_limits<double>::infinity();
      check.winner_ok = false;
    }
    check.worst_winner_z = std::max(check.worst_winner_z, z);
  }
  return check;
}

}  // namespace consensus_lab::experiments
