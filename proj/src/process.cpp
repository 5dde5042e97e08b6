#include "consensus_lab/process.hpp"

#include <algorithm>
#include <cmath>

#include "consensus_lab/errors.hpp"
#include "consensus_lab/parallel.hpp"

namespace consensus_lab {

namespace {

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("p must lie in [0,1]");
}

void check_state_fits(const Graph& g, const StrategyState& state) {
  if (state.size() != g.vertex_count()) {
    throw InvalidParameter("state length " + std::to_string(state.size()) +
                           " does not match vertex count " + std::to_string(g.vertex_count()));
  }
}

// Strategy counts let the loop detect consensus in O(1) per significant step.
class Tally {
 public:
  explicit Tally(const StrategyState& state) : counts_(state.strategy_count() + 1, 0) {
    for (Strategy s : state.values()) ++counts_[s];
  }

  void move(Strategy from, Strategy to) {
    --counts_[from];
    ++counts_[to];
  }

  std::size_t count(Strategy s) const { return counts_[s]; }

 private:
  std::vector<std::size_t> counts_;
};

// Applies one edge sample; returns the strategy adopted by both endpoints,
// or 0 when the edge was not significant.
Strategy sample_edge(const Graph& g, StrategyState& state, double p, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, g.edge_count() - 1);
  const auto& [u, v] = g.edge(pick(rng));
  const Strategy su = state[u];
  const Strategy sv = state[v];
  if (su == sv) return 0;

  const bool higher = p >= 1.0 || (p > 0.0 && std::bernoulli_distribution(p)(rng));
  const Strategy adopted = higher ? std::max(su, sv) : std::min(su, sv);
  state.set(u, adopted);
  state.set(v, adopted);
  return adopted;
}

}  // namespace

StrategyState::StrategyState(std::vector<Strategy> values, Strategy strategy_count)
    : values_(std::move(values)), m_(strategy_count) {
  if (m_ == 0) throw InvalidParameter("strategy count must be positive");
  for (Strategy s : values_) {
    if (s < 1 || s > m_) {
      throw InvalidParameter("strategy " + std::to_string(s) + " outside 1.." + std::to_string(m_));
    }
  }
}

std::optional<Strategy> StrategyState::consensus() const {
  if (values_.empty()) return std::nullopt;
  const Strategy first = values_.front();
  if (std::all_of(values_.begin(), values_.end(), [&](Strategy s) { return s == first; })) {
    return first;
  }
  return std::nullopt;
}

StrategyState init_uniform(std::size_t n, Strategy m, Rng& rng) {
  if (n == 0) throw InvalidParameter("need at least one vertex");
  if (m == 0) throw InvalidParameter("strategy count must be positive");
  std::uniform_int_distribution<Strategy> pick(1, m);
  std::vector<Strategy> values(n);
  for (auto& s : values) s = pick(rng);
  return StrategyState(std::move(values), m);
}

StrategyState init_nonempty(std::size_t n, Strategy m, Rng& rng) {
  for (;;) {
    StrategyState s = init_uniform(n, m, rng);
    const auto vals = s.values();
    if (std::find(vals.begin(), vals.end(), Strategy{1}) != vals.end()) return s;
  }
}

bool step(const Graph& g, StrategyState& state, double p, Rng& rng) {
  check_probability(p);
  check_state_fits(g, state);
  if (g.edge_count() == 0) return false;
  return sample_edge(g, state, p, rng) != 0;
}

ConsensusOutcome run_to_consensus(const Graph& g, StrategyState& state, double p, Rng& rng,
                                  std::uint64_t step_cap) {
  auto result = run_with_subset_times(g, state, p, rng, {}, 1, step_cap);
  return result.outcome;
}

SubsetHitTimes run_with_subset_times(const Graph& g, StrategyState& state, double p, Rng& rng,
                                     std::span<const std::vector<Vertex>> subsets,
                                     Strategy target, std::uint64_t step_cap) {
  check_probability(p);
  check_state_fits(g, state);
  if (step_cap == 0) throw InvalidParameter("step cap must be positive");
  const std::size_t n = g.vertex_count();

  // missing[i]: vertices of subset i not currently holding `target`.
  std::vector<std::vector<std::size_t>> member_of(subsets.empty() ? 0 : n);
  std::vector<std::size_t> missing(subsets.size(), 0);
  SubsetHitTimes out{{0, 0}, std::vector<std::optional<std::uint64_t>>(subsets.size())};
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    for (Vertex v : subsets[i]) {
      if (v >= n) throw InvalidParameter("subset vertex out of range");
      member_of[v].push_back(i);
      if (state[v] != target) ++missing[i];
    }
    if (missing[i] == 0) out.hit[i] = 0;
  }

  Tally tally(state);
  if (tally.count(state[0]) == n) {
    out.outcome = {state[0], 0};
    return out;
  }

  std::uint64_t t = 0;
  while (t < step_cap) {
    ++t;
    const auto& [u, v] = g.edge(std::uniform_int_distribution<std::size_t>(0, g.edge_count() - 1)(rng));
    const Strategy su = state[u];
    const Strategy sv = state[v];
    if (su == sv) continue;
    bool higher = p >= 1.0 || (p > 0.0 && std::bernoulli_distribution(p)(rng));
    const Strategy adopted = higher ? std::max(su, sv) : std::min(su, sv);
    const Vertex changed = su == adopted ? v : u;
    tally.move(state[changed], adopted);
    if (!subsets.empty()) {
      const bool gained = adopted == target;
      for (std::size_t i : member_of[changed]) {
        if (gained) {
          if (--missing[i] == 0 && !out.hit[i]) out.hit[i] = t;
        } else if (state[changed] == target) {
          ++missing[i];
        }
      }
    }
    state.set(changed, adopted);
    if (tally.count(adopted) == n) {
      out.outcome = {adopted, t};
      return out;
    }
  }
  throw TimeoutError(t, std::vector<Strategy>(state.values().begin(), state.values().end()));
}

StrategyState coarse_grain(const StrategyState& state, Strategy l) {
  if (l < 1 || l >= state.strategy_count()) {
    throw InvalidParameter("coarse-graining threshold must satisfy 1 <= l < m");
  }
  std::vector<Strategy> values(state.size());
  for (std::size_t v = 0; v < state.size(); ++v) values[v] = state[v] <= l ? 1 : 2;
  return StrategyState(std::move(values), 2);
}

std::string init_name(const InitMode& init) {
  if (std::holds_alternative<UniformInit>(init)) return "uniform";
  if (std::holds_alternative<NonemptyInit>(init)) return "nonempty";
  return "fixed";
}

double SimStats::time_stderr() const {
  return replications == 0 ? 0.0 : std::sqrt(time_var / static_cast<double>(replications));
}

double SimStats::winner_frequency(Strategy l) const {
  if (l < 1 || l > winner_counts.size() || replications == 0) return 0.0;
  return static_cast<double>(winner_counts[l - 1]) / static_cast<double>(replications);
}

std::vector<ConsensusOutcome> simulate_replications(const Graph& g, const EstimateOptions& opts) {
  if (opts.replications == 0) throw InvalidParameter("need at least one replication");
  if (opts.m == 0) throw InvalidParameter("strategy count must be positive");
  check_probability(opts.p);
  if (const auto* fixed = std::get_if<FixedInit>(&opts.init)) {
    check_state_fits(g, fixed->state);
    if (fixed->state.strategy_count() != opts.m) {
      throw InvalidParameter("fixed initial state uses a different strategy count");
    }
  }

  const std::size_t n = g.vertex_count();
  std::vector<ConsensusOutcome> outcomes(opts.replications);
  std::vector<char> timed_out(opts.replications, 0);
  const std::size_t workers = opts.workers ? opts.workers : default_worker_count();

  parallel_for(opts.replications, workers, [&](std::size_t i) {
    Rng rng = make_stream(opts.seed, i);
    StrategyState state = std::visit(
        [&](const auto& mode) -> StrategyState {
          using T = std::decay_t<decltype(mode)>;
          if constexpr (std::is_same_v<T, UniformInit>) {
            return init_uniform(n, opts.m, rng);
          } else if constexpr (std::is_same_v<T, NonemptyInit>) {
            return init_nonempty(n, opts.m, rng);
          } else {
            return mode.state;
          }
        },
        opts.init);
    try {
      outcomes[i] = run_to_consensus(g, state, opts.p, rng, opts.step_cap);
    } catch (const TimeoutError&) {
      timed_out[i] = 1;
    }
  });

  std::vector<std::size_t> failures;
  for (std::size_t i = 0; i < timed_out.size(); ++i)
    if (timed_out[i]) failures.push_back(i);
  if (!failures.empty()) throw EstimateError(std::move(failures));
  return outcomes;
}

SimStats summarize(std::span<const ConsensusOutcome> outcomes, Strategy m, std::uint64_t seed) {
  SimStats stats;
  stats.seed = seed;
  stats.replications = outcomes.size();
  stats.winner_counts.assign(m, 0);
  // Welford in replication order keeps the result bit-identical across runs.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (const auto& o : outcomes) {
    if (o.winner < 1 || o.winner > m) throw InternalError("winner outside strategy range");
    ++stats.winner_counts[o.winner - 1];
    ++k;
    const double x = static_cast<double>(o.steps);
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  stats.time_mean = mean;
  stats.time_var = k > 1 ? std::max(0.0, m2 / static_cast<double>(k - 1)) : 0.0;
  return stats;
}

SimStats estimate(const Graph& g, const EstimateOptions& opts) {
  const auto outcomes = simulate_replications(g, opts);
  return summarize(outcomes, opts.m, opts.seed);
}

}  // namespace consensus_lab
