#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "consensus_lab/graph.hpp"
#include "consensus_lab/process.hpp"

namespace consensus_lab {

struct Transition {
  std::size_t target;
  double probability;
};

enum class SolverBackend {
  kAuto,    // sparse LU, dense LU fallback when the sparse residual check fails
  kSparse,  // sparse LU with one refinement step
  kDense,   // dense partial-pivot LU; limited to kDenseStateLimit states
};

inline constexpr std::size_t kDenseStateLimit = 4096;
inline constexpr double kSolveResidualTolerance = 1e-12;

/// Finite absorbing Markov chain with sparse rows.
///
/// Construction validates that rows are stochastic (within 1e-12), that the
/// absorbing states are exactly those with a unit self-loop, and that every
/// transient state can reach one of them.
class AbsorbingChain {
 public:
  explicit AbsorbingChain(std::vector<std::vector<Transition>> rows);

  std::size_t state_count() const noexcept { return rows_.size(); }
  std::span<const Transition> row(std::size_t s) const { return rows_[s]; }
  bool is_absorbing(std::size_t s) const { return absorbing_index_[s] >= 0; }
  /// Absorbing states in increasing index order.
  const std::vector<std::size_t>& absorbing_states() const noexcept { return absorbing_; }
  const std::vector<std::size_t>& transient_states() const noexcept { return transient_; }

  /// B[s][a]: probability that the chain started at s is absorbed in
  /// absorbing_states()[a]. One row per state.
  std::vector<std::vector<double>> absorption_matrix(SolverBackend backend = SolverBackend::kAuto) const;

  /// t[s] = expected number of steps to absorption from s.
  std::vector<double> expected_times(SolverBackend backend = SolverBackend::kAuto) const;

 private:
  std::vector<std::vector<Transition>> rows_;
  std::vector<std::size_t> absorbing_;
  std::vector<std::size_t> transient_;
  std::vector<std::ptrdiff_t> absorbing_index_;  // -1 for transient states
};

/// Chain of the pairwise-consensus process on [m]^n. State index is the
/// little-endian mixed-radix number sum_v (s_v - 1) m^v.
class ConsensusChain {
 public:
  std::size_t vertex_count() const noexcept { return n_; }
  Strategy strategy_count() const noexcept { return m_; }
  const AbsorbingChain& chain() const noexcept { return chain_; }

  std::size_t encode(const StrategyState& state) const;
  StrategyState decode(std::size_t index) const;

  /// Uniform over [m]^n.
  std::vector<double> uniform_distribution() const;
  /// Uniform over states in which strategy 1 appears.
  std::vector<double> nonempty_distribution() const;
  std::vector<double> point_distribution(const StrategyState& state) const;

 private:
  friend ConsensusChain build_chain(const Graph&, Strategy, double);
  ConsensusChain(std::size_t n, Strategy m, AbsorbingChain chain)
      : n_(n), m_(m), chain_(std::move(chain)) {}

  std::size_t n_;
  Strategy m_;
  AbsorbingChain chain_;
};

inline constexpr std::size_t kMaxChainStates = 2'000'000;
inline constexpr std::size_t kMaxChainTransitions = 60'000'000;

/// Throws CapacityError when m^n exceeds kMaxChainStates (or the row storage
/// estimate exceeds kMaxChainTransitions).
ConsensusChain build_chain(const Graph& g, Strategy m, double p);

/// P(S = l) for l = 1..m (index l-1) from the initial distribution `init`.
std::vector<double> absorption_distribution(const ConsensusChain& chain, std::span<const double> init,
                                            SolverBackend backend = SolverBackend::kAuto);

double expected_absorption_time(const ConsensusChain& chain, std::span<const double> init,
                                SolverBackend backend = SolverBackend::kAuto);

}  // namespace consensus_lab
