#include "consensus_lab/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "consensus_lab/chain.hpp"
#include "consensus_lab/coupon.hpp"
#include "consensus_lab/dgr.hpp"
#include "consensus_lab/errors.hpp"
#include "consensus_lab/experiments.hpp"
#include "consensus_lab/process.hpp"

namespace consensus_lab {

namespace {

using Json = nlohmann::ordered_json;
namespace ex = experiments;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

// Rows of typed cells; rendered as CSV or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row) { rows.push_back(std::move(row)); }
};

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return ex::csv_field(v.get<std::string>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) return ex::format_number(v.get<double>());
  return v.dump();
}

std::string render(const Table& t, const std::string& format) {
  if (format == "json") {
    auto arr = Json::array();
    for (const auto& row : t.rows) {
      Json obj = Json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = row[i];
      arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
  }
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + ex::csv_field(t.columns[i]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += "\n";
  }
  return out;
}

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Table bench_table(std::span<const ex::BenchRow> rows) {
  Table t{{"graph_id", "n", "e", "p", "estimate", "stderr", "theory", "ratio", "init"}, {}};
  for (const auto& r : rows) {
    t.add({r.graph_id, r.n, r.e, r.p, r.estimate, r.std_error, optional_number(r.theory),
           optional_number(r.ratio), r.init});
  }
  return t;
}

struct GraphArgs {
  std::string file;
  std::string family;
  std::size_t n = 0;
  std::optional<std::size_t> r;
};

void add_graph_options(CLI::App* cmd, GraphArgs& g) {
  auto* file = cmd->add_option("--graph", g.file, "edge-list file");
  auto* fam = cmd->add_option("--family", g.family, "complete|path|cycle|star|sundew|lollipop|jellyfish");
  file->excludes(fam);
  cmd->add_option("--n", g.n, "vertex count for --family");
  cmd->add_option("--r", g.r, "pendant count / path length for sundew and lollipop");
}

ex::NamedGraph load_graph(const GraphArgs& g) {
  if (!g.file.empty()) {
    std::string id = g.file;
    if (const auto slash = id.find_last_of('/'); slash != std::string::npos) id = id.substr(slash + 1);
    if (const auto dot = id.find_last_of('.'); dot != std::string::npos && dot > 0) id = id.substr(0, dot);
    return {id, read_graph_file(g.file)};
  }
  if (g.family.empty()) throw InvalidParameter("give --graph FILE or --family NAME --n INT");
  if (g.n == 0) throw InvalidParameter("--family needs --n");
  return ex::make_family(g.family, g.n, g.r);
}

InitMode parse_init(const std::string& text, std::size_t n, Strategy m) {
  if (text == "uniform") return UniformInit{};
  if (text == "nonempty") return NonemptyInit{};
  if (text.rfind("fixed:", 0) == 0) {
    std::size_t k = 0;
    const std::string digits = text.substr(6);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw InvalidParameter("bad init '" + text + "'");
    }
    k = std::stoul(digits);
    if (k > n) throw InvalidParameter("fixed:K needs K <= n");
    std::vector<Strategy> values(n, m);
    for (std::size_t v = 0; v < k; ++v) values[v] = 1;
    return FixedInit{StrategyState(std::move(values), m)};
  }
  throw InvalidParameter("init must be uniform, nonempty or fixed:K");
}

std::vector<double> parse_gammas(const std::string& text, std::size_t n) {
  if (text == "complete") return dgr::complete_graph_gammas(n);
  if (n < 1) throw InvalidParameter("--n must be positive");
  if (text == "ones") return std::vector<double>(n - 1, 1.0);
  if (text.rfind("const:", 0) == 0) return std::vector<double>(n - 1, std::stod(text.substr(6)));
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw InvalidParameter("empty grid");
  return out;
}

coupon::ArrivalCoupling parse_coupling(const std::string& name, std::size_t n, double rate) {
  if (name == "single") return coupon::ArrivalCoupling::single(n, rate);
  if (name == "independent") return coupon::ArrivalCoupling::independent(n, rate);
  if (name == "bundled") return coupon::ArrivalCoupling::bundled(n, rate);
  throw InvalidParameter("coupling must be single, independent or bundled");
}

coupon::IndexMap parse_index_map(const std::string& name, std::size_t n) {
  if (name == "independent") return coupon::IndexMap::independent(n);
  if (name == "shared") return coupon::IndexMap::shared(n);
  if (name.rfind("blocks:", 0) == 0) return coupon::IndexMap::blocks(n, std::stoul(name.substr(7)));
  if (name.rfind("shifted:", 0) == 0) return coupon::IndexMap::shifted(n, std::stoull(name.substr(8)));
  throw InvalidParameter("targets must be single, independent, shared, blocks:B or shifted:S");
}

class Output {
 public:
  Output(std::ostream& fallback) : fallback_(fallback) {}

  void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
      fallback_ << text;
      return;
    }
    std::ofstream file(path);
    if (!file) throw InvalidParameter("cannot write '" + path + "'");
    file << text;
  }

 private:
  std::ostream& fallback_;
};

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pairwise-consensus process: simulation, exact chains and bounds", "consensus-lab"};
  app.require_subcommand(1);

  GraphArgs graph;
  Strategy m = 2;
  double p = 0.0;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::string init = "uniform";
  std::string out_path;
  std::string format = "csv";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "output file (default stdout)");
    cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_mc = [&](CLI::App* cmd) {
    cmd->add_option("--reps", reps, "replications")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "base seed");
  };
  auto add_process = [&](CLI::App* cmd) {
    add_graph_options(cmd, graph);
    cmd->add_option("--m", m, "number of strategies")->check(CLI::Range(1u, 1000000u));
    cmd->add_option("--p", p, "probability the higher strategy wins")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--init", init, "uniform | nonempty | fixed:K");
    add_common(cmd);
  };

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of E[T] and the winner distribution");
  add_process(simulate);
  add_mc(simulate);

  auto* exact = app.add_subcommand("exact", "Exact E[T] and winner distribution from the full chain");
  add_process(exact);

  auto* bench = app.add_subcommand("bench", "Monte Carlo rows with exact reference values where feasible");
  add_process(bench);
  add_mc(bench);
  bool suite = false;
  std::size_t max_n = 128;
  bench->add_flag("--suite", suite, "run the standard family suite instead of one graph");
  bench->add_option("--max-n", max_n, "largest suite member");

  std::size_t dn = 0;
  std::string gamma_spec = "complete";
  auto* dgr_cmd = app.add_subcommand("dgr", "Mean absorption times of the delayed gambler's ruin");
  dgr_cmd->add_option("--n", dn, "walk length")->required();
  dgr_cmd->add_option("--p", p, "down-step weight")->check(CLI::Range(0.0, 1.0));
  dgr_cmd->add_option("--gamma", gamma_spec, "complete | ones | const:X | comma list");
  add_common(dgr_cmd);

  auto* survivor = app.add_subcommand("survivor", "Closed-form distribution of the surviving strategy");
  survivor->add_option("--n", dn, "vertex count")->required();
  survivor->add_option("--m", m, "number of strategies")->required();
  survivor->add_option("--p", p, "probability the higher strategy wins")->check(CLI::Range(0.0, 1.0));
  add_common(survivor);

  std::size_t cn = 10;
  double rate = 0.0;
  double q = 1.0;
  std::optional<double> q_slow;
  std::string coupling_name = "single";
  std::string targets = "single";
  bool per_run = false;
  auto* coupon_cmd = app.add_subcommand("coupon", "Coupon-collector variants");
  coupon_cmd->add_option("--n", cn, "number of types");
  coupon_cmd->add_option("--rate", rate, "N: each type arrives with probability 1/N (default n)");
  coupon_cmd->add_option("--q", q, "keep probability")->check(CLI::Range(0.0, 1.0));
  coupon_cmd->add_option("--slow-q", q_slow, "keep probability of type 1 (slow-type collector)");
  coupon_cmd->add_option("--coupling", coupling_name, "single | independent | bundled");
  coupon_cmd->add_option("--targets", targets, "single | independent | shared | blocks:B | shifted:S");
  coupon_cmd->add_flag("--per-run", per_run, "emit one row per replication");
  add_mc(coupon_cmd);
  add_common(coupon_cmd);

  auto* verify = app.add_subcommand("verify-bound", "Check E[T] + 3 SE < n^2 ln n + n at p = 0");
  add_graph_options(verify, graph);
  verify->add_flag("--suite", suite, "run the standard family suite");
  verify->add_option("--max-n", max_n, "largest suite member");
  add_mc(verify);
  add_common(verify);

  std::string p_grid = "0,0.1,0.2,0.3,0.4,0.5";
  auto* regular = app.add_subcommand("compare-regular", "Exact E[T] across regular graphs on n vertices");
  regular->add_option("--n", dn, "vertex count (3..8)")->required();
  regular->add_option("--p-grid", p_grid, "comma-separated p values");
  add_common(regular);

  std::size_t sr = 0;
  auto* sl = app.add_subcommand("sundew-lollipop", "Paired comparison of the sundew and the lollipop");
  sl->add_option("--n", dn, "vertex count")->required();
  sl->add_option("--r", sr, "pendant edges / path length")->required();
  add_mc(sl);
  add_common(sl);

  double step = 0.01;
  std::optional<std::size_t> term;
  auto* scan = app.add_subcommand("scan-monotonicity", "Scan E_k + E_{n-k} (or one E_k) over lambda in [0,1]");
  scan->add_option("--n", dn, "walk length")->required();
  scan->add_option("--gamma", gamma_spec, "complete | ones | const:X | comma list");
  scan->add_option("--step", step, "lambda grid step");
  scan->add_option("--k", term, "scan E_k alone");
  add_common(scan);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  Output sink(out);
  try {
    if (*simulate || *exact || *bench) {
      if (*bench && suite) {
        EstimateOptions opts{p, m, reps, seed, UniformInit{}, 0, kDefaultStepCap};
        std::vector<ex::BenchRow> rows;
        for (const auto& g : ex::standard_suite(max_n)) {
          opts.init = parse_init(init, g.graph.vertex_count(), m);
          rows.push_back(ex::bench(g, opts));
        }
        sink.emit(out_path, render(bench_table(rows), format));
        return kExitOk;
      }
      const auto g = load_graph(graph);
      const std::size_t n = g.graph.vertex_count();
      EstimateOptions opts{p, m, reps, seed, parse_init(init, n, m), 0, kDefaultStepCap};

      if (*exact) {
        const auto chain = build_chain(g.graph, m, p);
        std::vector<double> dist;
        if (std::holds_alternative<UniformInit>(opts.init)) dist = chain.uniform_distribution();
        else if (std::holds_alternative<NonemptyInit>(opts.init)) dist = chain.nonempty_distribution();
        else dist = chain.point_distribution(std::get<FixedInit>(opts.init).state);
        const double time = expected_absorption_time(chain, dist);
        const auto winners = absorption_distribution(chain, dist);
        Table t{{"graph_id", "n", "e", "m", "p", "init", "expected_time"}, {}};
        std::vector<Json> row{g.id, n, g.graph.edge_count(), m, p, init_name(opts.init), time};
        for (Strategy l = 1; l <= m; ++l) {
          t.columns.push_back("winner_" + std::to_string(l));
          row.push_back(winners[l - 1]);
        }
        t.add(std::move(row));
        sink.emit(out_path, render(t, format));
        return kExitOk;
      }
      if (*simulate) {
        const SimStats stats = estimate(g.graph, opts);
        Table t{{"graph_id", "n", "e", "m", "p", "init", "replications", "seed", "estimate", "stderr"}, {}};
        std::vector<Json> row{g.id, n, g.graph.edge_count(), m, p, init_name(opts.init),
                              stats.replications, stats.seed, stats.time_mean, stats.time_stderr()};
        for (Strategy l = 1; l <= m; ++l) {
          t.columns.push_back("winner_" + std::to_string(l));
          row.push_back(stats.winner_frequency(l));
        }
        t.add(std::move(row));
        sink.emit(out_path, render(t, format));
        return kExitOk;
      }
      const ex::BenchRow row = ex::bench(g, opts);
      sink.emit(out_path, render(bench_table(std::span(&row, 1)), format));
      return kExitOk;
    }

    if (*dgr_cmd) {
      const dgr::DgrParams params(dn, p, parse_gammas(gamma_spec, dn));
      const auto e = dgr::expected_times(params);
      Table t{{"k", "lambda", "E_k", "E_sym"}, {}};
      for (std::size_t k = 0; k <= dn; ++k) t.add({k, params.lambda(), e[k], e[k] + e[dn - k]});
      sink.emit(out_path, render(t, format));
      return kExitOk;
    }

    if (*survivor) {
      const auto dist = dgr::survivor_distribution(dn, m, p);
      Table t{{"l", "probability"}, {}};
      for (Strategy l = 1; l <= m; ++l) t.add({l, dist[l - 1]});
      sink.emit(out_path, render(t, format));
      return kExitOk;
    }

    if (*coupon_cmd) {
      const double big_n = rate > 0.0 ? rate : static_cast<double>(cn);
      coupon::CouponSpec spec;
      spec.n = cn;
      spec.rate_denominator = big_n;
      if (targets != "single") spec.target = coupon::ConnectedGeometrics{q, parse_index_map(targets, cn)};
      else if (q != 1.0 || q_slow) spec.target = coupon::ConnectedGeometrics{q, coupon::IndexMap::independent(cn)};
      spec.slow_keep = q_slow;
      const auto coupling = parse_coupling(coupling_name, cn, big_n);
      const auto stats = coupon::run_collector(spec, coupling, reps, seed);
      if (per_run) {
        Table t{{"run", "time"}, {}};
        for (std::size_t i = 0; i < stats.times.size(); ++i) t.add({i, stats.times[i]});
        sink.emit(out_path, render(t, format));
        return kExitOk;
      }
      Table t{{"n", "N", "q", "slow_q", "coupling", "targets", "replications", "seed", "mean", "stderr", "bound"},
              {}};
      t.add({cn, big_n, q, optional_number(q_slow), coupling.name(), targets, stats.replications, seed,
             stats.mean, stats.stderr_of_mean(), coupon::collector_bound(cn, big_n, q)});
      sink.emit(out_path, render(t, format));
      return kExitOk;
    }

    if (*verify) {
      std::vector<ex::NamedGraph> graphs;
      if (suite) graphs = ex::standard_suite(max_n);
      else graphs.push_back(load_graph(graph));
      const auto report = ex::verify_upper_bound(graphs, reps, seed);
      sink.emit(out_path, render(bench_table(report.rows), format));
      for (const auto& id : report.violations) err << "bound violated on " << id << "\n";
      return report.passed() ? kExitOk : kExitFailed;
    }

    if (*regular) {
      const auto grid = parse_grid(p_grid);
      const auto table = ex::regular_graph_comparison(dn, grid);
      Table t{{"graph_id", "n", "degree", "p", "expected_time", "voter_model"}, {}};
      for (const auto& r : table.rows) t.add({r.graph_id, dn, r.degree, r.p, r.expected_time, r.voter_model});
      sink.emit(out_path, render(t, format));
      for (double bad : table.failures) err << "K" << dn << " is not strictly fastest at p=" << bad << "\n";
      return table.complete_strictly_minimal() ? kExitOk : kExitFailed;
    }

    if (*sl) {
      const auto res = ex::sundew_vs_lollipop(dn, sr, reps, seed);
      Table t{{"n", "r", "e", "replications", "seed", "sundew", "sundew_stderr", "lollipop", "lollipop_stderr",
               "gap", "paired_stderr", "normalized_gap", "sundew_per_edge", "sundew_reference",
               "lollipop_per_edge", "lollipop_reference", "separated"},
              {}};
      t.add({res.n, res.r, res.e, reps, seed, res.sundew.time_mean, res.sundew.time_stderr(),
             res.lollipop.time_mean, res.lollipop.time_stderr(), res.gap, res.paired_stderr, res.normalized_gap,
             res.sundew_per_edge, res.sundew_reference, res.lollipop_per_edge, res.lollipop_reference,
             res.separated()});
      sink.emit(out_path, render(t, format));
      return res.separated() ? kExitOk : kExitFailed;
    }

    if (*scan) {
      const auto gammas = parse_gammas(gamma_spec, dn);
      const auto grid = dgr::lambda_grid(step);
      const auto report = term ? dgr::single_term_scan(dn, gammas, *term, grid)
                               : dgr::symmetric_sum_scan(dn, gammas, grid);
      Table t{{"k", "lambda", "value", "drop"}, {}};
      for (std::size_t j = 0; j < report.terms.size(); ++j) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
          Json drop = nullptr;
          for (const auto& v : report.violations)
            if (v.k == report.terms[j] && v.grid_index + 1 == i) drop = v.drop;
          t.add({report.terms[j], grid[i], report.values[j][i], drop});
        }
      }
      sink.emit(out_path, render(t, format));
      for (const auto& v : report.violations) {
        err << "k=" << v.k << " drops by " << v.drop << " after lambda=" << grid[v.grid_index] << "\n";
      }
      // Single terms are not expected to be monotone; only the symmetric scan asserts it.
      return term || report.monotone() ? kExitOk : kExitFailed;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: bad number: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: number out of range: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}

}  // namespace consensus_lab
