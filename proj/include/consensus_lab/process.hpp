#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "consensus_lab/graph.hpp"
#include "consensus_lab/rng.hpp"

namespace consensus_lab {

using Strategy = std::uint32_t;

/// Assignment of a strategy in 1..m to every vertex.
class StrategyState {
 public:
  StrategyState(std::vector<Strategy> values, Strategy strategy_count);

  std::size_t size() const noexcept { return values_.size(); }
  Strategy strategy_count() const noexcept { return m_; }
  std::span<const Strategy> values() const noexcept { return values_; }
  Strategy operator[](std::size_t v) const { return values_[v]; }
  void set(std::size_t v, Strategy s) { values_[v] = s; }

  /// Strategy held by every vertex, if any.
  std::optional<Strategy> consensus() const;

  friend bool operator==(const StrategyState&, const StrategyState&) = default;

 private:
  std::vector<Strategy> values_;
  Strategy m_;
};

/// I.i.d. uniform strategies in 1..m.
StrategyState init_uniform(std::size_t n, Strategy m, Rng& rng);

/// Uniform over [m]^n conditioned on strategy 1 appearing somewhere. For m=2
/// and p=0 this is the "at least one active vertex" start.
StrategyState init_nonempty(std::size_t n, Strategy m, Rng& rng);

/// One edge sample. Returns true iff the sampled edge was significant, in
/// which case both endpoints now hold the higher strategy (probability p) or
/// the lower one (probability 1-p).
bool step(const Graph& g, StrategyState& state, double p, Rng& rng);

struct ConsensusOutcome {
  Strategy winner;
  std::uint64_t steps;
};

inline constexpr std::uint64_t kDefaultStepCap = 1'000'000'000;

/// Runs until all vertices agree. `steps` counts every edge sample.
/// Throws TimeoutError (carrying the partial state) after `step_cap` samples.
ConsensusOutcome run_to_consensus(const Graph& g, StrategyState& state, double p, Rng& rng,
                                  std::uint64_t step_cap = kDefaultStepCap);

/// Records, for each vertex subset, the first step at which every vertex in
/// it holds `target` (0 if that already holds initially). Subsets that never
/// reach it before consensus report nullopt.
struct SubsetHitTimes {
  ConsensusOutcome outcome;
  std::vector<std::optional<std::uint64_t>> hit;
};
SubsetHitTimes run_with_subset_times(const Graph& g, StrategyState& state, double p, Rng& rng,
                                     std::span<const std::vector<Vertex>> subsets,
                                     Strategy target = 1,
                                     std::uint64_t step_cap = kDefaultStepCap);

/// Maps strategies <= l to 1 and > l to 2. Requires 1 <= l < m.
StrategyState coarse_grain(const StrategyState& state, Strategy l);

struct UniformInit {};
struct NonemptyInit {};
struct FixedInit {
  StrategyState state;
};
using InitMode = std::variant<UniformInit, NonemptyInit, FixedInit>;

std::string init_name(const InitMode& init);

struct EstimateOptions {
  double p = 0.0;
  Strategy m = 2;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  InitMode init = UniformInit{};
  std::size_t workers = 0;  // 0: default_worker_count()
  std::uint64_t step_cap = kDefaultStepCap;
};

struct SimStats {
  std::size_t replications = 0;
  std::vector<std::uint64_t> winner_counts;  // index l-1 holds strategy l
  double time_mean = 0.0;
  double time_var = 0.0;  // unbiased sample variance; 0 for a single replication
  std::uint64_t seed = 0;

  double time_stderr() const;
  double winner_frequency(Strategy l) const;

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

/// Per-replication outcomes in replication order. Replication i draws from
/// make_stream(seed, i). Throws EstimateError listing every timed-out index.
std::vector<ConsensusOutcome> simulate_replications(const Graph& g, const EstimateOptions& opts);

SimStats summarize(std::span<const ConsensusOutcome> outcomes, Strategy m, std::uint64_t seed);

SimStats estimate(const Graph& g, const EstimateOptions& opts);

}  // namespace consensus_lab
