#include "consensus_lab/chain.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "consensus_lab/errors.hpp"

namespace consensus_lab {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

double residual_norm(const SparseMatrix& a, const Eigen::MatrixXd& x, const Eigen::MatrixXd& b) {
  return (b - a * x).lpNorm<Eigen::Infinity>();
}

bool residual_ok(const SparseMatrix& a, const Eigen::MatrixXd& x, const Eigen::MatrixXd& b) {
  const double scale = b.lpNorm<Eigen::Infinity>() + x.lpNorm<Eigen::Infinity>();
  return residual_norm(a, x, b) <= kSolveResidualTolerance * std::max(1.0, scale);
}

bool solve_sparse(const SparseMatrix& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& x) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) return false;
  x = lu.solve(b);
  if (lu.info() != Eigen::Success) return false;
  // One step of iterative refinement.
  const Eigen::MatrixXd r = b - a * x;
  x += lu.solve(r);
  return x.allFinite() && residual_ok(a, x, b);
}

bool solve_dense(const SparseMatrix& a, const Eigen::MatrixXd& b, Eigen::MatrixXd& x) {
  const Eigen::MatrixXd dense(a);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
  x = lu.solve(b);
  const Eigen::MatrixXd r = b - dense * x;
  x += lu.solve(r);
  return x.allFinite() && residual_ok(a, x, b);
}

}  // namespace

AbsorbingChain::AbsorbingChain(std::vector<std::vector<Transition>> rows) : rows_(std::move(rows)) {
  const std::size_t n = rows_.size();
  if (n == 0) throw InvalidParameter("chain needs at least one state");
  absorbing_index_.assign(n, -1);

  for (std::size_t s = 0; s < n; ++s) {
    double sum = 0.0;
    double self = 0.0;
    for (const auto& [target, prob] : rows_[s]) {
      if (target >= n) throw InvalidParameter("transition target out of range");
      if (!(prob >= 0.0)) throw InvalidParameter("negative transition probability");
      sum += prob;
      if (target == s) self += prob;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw InvalidParameter("row " + std::to_string(s) + " sums to " + std::to_string(sum));
    }
    if (self >= 1.0 - 1e-12) {
      absorbing_index_[s] = static_cast<std::ptrdiff_t>(absorbing_.size());
      absorbing_.push_back(s);
    } else {
      transient_.push_back(s);
    }
  }
  if (absorbing_.empty()) throw InvalidParameter("chain has no absorbing state");

  // Backward sweep from the absorbing set over positive-probability edges.
  std::vector<std::vector<std::size_t>> reverse(n);
  for (std::size_t s = 0; s < n; ++s)
    for (const auto& [target, prob] : rows_[s])
      if (prob > 0.0 && target != s) reverse[target].push_back(s);
  std::vector<char> reaches(n, 0);
  std::vector<std::size_t> stack(absorbing_.begin(), absorbing_.end());
  for (std::size_t s : absorbing_) reaches[s] = 1;
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    for (std::size_t pred : reverse[s]) {
      if (!reaches[pred]) {
        reaches[pred] = 1;
        stack.push_back(pred);
      }
    }
  }
  for (std::size_t s : transient_) {
    if (!reaches[s]) {
      throw InvalidParameter("transient state " + std::to_string(s) + " never reaches absorption");
    }
  }
}

namespace {

// Solves (I - Q) X = B over the transient states of `chain`.
Eigen::MatrixXd solve_transient(const AbsorbingChain& chain, const Eigen::MatrixXd& b,
                                SolverBackend backend) {
  const auto& transient = chain.transient_states();
  const auto t = static_cast<Eigen::Index>(transient.size());
  std::vector<std::ptrdiff_t> pos(chain.state_count(), -1);
  for (std::size_t k = 0; k < transient.size(); ++k) pos[transient[k]] = static_cast<std::ptrdiff_t>(k);

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t k = 0; k < transient.size(); ++k) {
    triplets.emplace_back(static_cast<int>(k), static_cast<int>(k), 1.0);
    for (const auto& [target, prob] : chain.row(transient[k])) {
      if (pos[target] >= 0) triplets.emplace_back(static_cast<int>(k), static_cast<int>(pos[target]), -prob);
    }
  }
  SparseMatrix a(t, t);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();

  Eigen::MatrixXd x;
  switch (backend) {
    case SolverBackend::kDense:
      if (transient.size() > kDenseStateLimit) {
        throw CapacityError("dense backend limited to " + std::to_string(kDenseStateLimit) + " states");
      }
      if (!solve_dense(a, b, x)) throw InternalError("dense absorbing-chain solve failed");
      return x;
    case SolverBackend::kSparse:
      if (!solve_sparse(a, b, x)) throw InternalError("sparse absorbing-chain solve failed");
      return x;
    case SolverBackend::kAuto:
      if (solve_sparse(a, b, x)) return x;
      if (transient.size() <= kDenseStateLimit && solve_dense(a, b, x)) return x;
      throw InternalError("absorbing-chain solve failed on both backends");
  }
  throw InternalError("unknown solver backend");
}

}  // namespace

std::vector<std::vector<double>> AbsorbingChain::absorption_matrix(SolverBackend backend) const {
  const std::size_t n = state_count();
  const std::size_t a = absorbing_.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(a, 0.0));
  for (std::size_t k = 0; k < a; ++k) out[absorbing_[k]][k] = 1.0;
  if (transient_.empty()) return out;

  const auto t = static_cast<Eigen::Index>(transient_.size());
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(t, static_cast<Eigen::Index>(a));
  for (Eigen::Index k = 0; k < t; ++k)
    for (const auto& [target, prob] : rows_[transient_[static_cast<std::size_t>(k)]])
      if (absorbing_index_[target] >= 0) r(k, absorbing_index_[target]) += prob;

  const Eigen::MatrixXd x = solve_transient(*this, r, backend);
  for (Eigen::Index k = 0; k < t; ++k)
    for (std::size_t j = 0; j < a; ++j)
      out[transient_[static_cast<std::size_t>(k)]][j] = x(k, static_cast<Eigen::Index>(j));
  return out;
}

std::vector<double> AbsorbingChain::expected_times(SolverBackend backend) const {
  std::vector<double> out(state_count(), 0.0);
  if (transient_.empty()) return out;
  const auto t = static_cast<Eigen::Index>(transient_.size());
  const Eigen::MatrixXd x = solve_transient(*this, Eigen::MatrixXd::Ones(t, 1), backend);
  for (Eigen::Index k = 0; k < t; ++k) out[transient_[static_cast<std::size_t>(k)]] = x(k, 0);
  return out;
}

std::size_t ConsensusChain::encode(const StrategyState& state) const {
  if (state.size() != n_ || state.strategy_count() != m_) {
    throw InvalidParameter("state does not match chain dimensions");
  }
  std::size_t index = 0;
  for (std::size_t v = n_; v-- > 0;) index = index * m_ + (state[v] - 1);
  return index;
}

StrategyState ConsensusChain::decode(std::size_t index) const {
  if (index >= chain_.state_count()) throw InvalidParameter("state index out of range");
  std::vector<Strategy> values(n_);
  for (std::size_t v = 0; v < n_; ++v) {
    values[v] = static_cast<Strategy>(index % m_) + 1;
    index /= m_;
  }
  return StrategyState(std::move(values), m_);
}

std::vector<double> ConsensusChain::uniform_distribution() const {
  const std::size_t count = chain_.state_count();
  return std::vector<double>(count, 1.0 / static_cast<double>(count));
}

std::vector<double> ConsensusChain::nonempty_distribution() const {
  const std::size_t count = chain_.state_count();
  std::vector<double> dist(count, 0.0);
  std::size_t admissible = 0;
  for (std::size_t s = 0; s < count; ++s) {
    const auto state = decode(s);
    const auto vals = state.values();
    if (std::find(vals.begin(), vals.end(), Strategy{1}) != vals.end()) {
      dist[s] = 1.0;
      ++admissible;
    }
  }
  for (double& w : dist) w /= static_cast<double>(admissible);
  return dist;
}

std::vector<double> ConsensusChain::point_distribution(const StrategyState& state) const {
  std::vector<double> dist(chain_.state_count(), 0.0);
  dist[encode(state)] = 1.0;
  return dist;
}

ConsensusChain build_chain(const Graph& g, Strategy m, double p) {
  if (m == 0) throw InvalidParameter("strategy count must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("p must lie in [0,1]");
  const std::size_t n = g.vertex_count();
  const std::size_t e = g.edge_count();

  std::size_t count = 1;
  std::vector<std::size_t> weight(n);
  for (std::size_t v = 0; v < n; ++v) {
    weight[v] = count;
    if (count > kMaxChainStates / m) {
      throw CapacityError("state space m^n exceeds " + std::to_string(kMaxChainStates));
    }
    count *= m;
  }
  if (count * (2 * e + 1) > kMaxChainTransitions) {
    throw CapacityError("chain would need more than " + std::to_string(kMaxChainTransitions) +
                        " transitions");
  }

  std::vector<std::vector<Transition>> rows(count);
  std::vector<Strategy> digits(n);
  std::vector<Transition> scratch;
  for (std::size_t s = 0; s < count; ++s) {
    std::size_t rest = s;
    for (std::size_t v = 0; v < n; ++v) {
      digits[v] = static_cast<Strategy>(rest % m);
      rest /= m;
    }
    scratch.clear();
    std::size_t quiet = 0;
    for (const auto& [u, v] : g.edges()) {
      const Strategy du = digits[u];
      const Strategy dv = digits[v];
      if (du == dv) {
        ++quiet;
        continue;
      }
      const Strategy hi = std::max(du, dv);
      const Strategy lo = std::min(du, dv);
      auto merged = [&](Strategy to) {
        auto idx = static_cast<std::ptrdiff_t>(s);
        idx += (static_cast<std::ptrdiff_t>(to) - du) * static_cast<std::ptrdiff_t>(weight[u]);
        idx += (static_cast<std::ptrdiff_t>(to) - dv) * static_cast<std::ptrdiff_t>(weight[v]);
        return static_cast<std::size_t>(idx);
      };
      const double share = 1.0 / static_cast<double>(e);
      if (p > 0.0) scratch.push_back({merged(hi), share * p});
      if (p < 1.0) scratch.push_back({merged(lo), share * (1.0 - p)});
    }
    if (e == 0 || quiet > 0) {
      scratch.push_back({s, e == 0 ? 1.0 : static_cast<double>(quiet) / static_cast<double>(e)});
    }
    std::sort(scratch.begin(), scratch.end(),
              [](const Transition& a, const Transition& b) { return a.target < b.target; });
    auto& row = rows[s];
    for (const auto& tr : scratch) {
      if (!row.empty() && row.back().target == tr.target) {
        row.back().probability += tr.probability;
      } else {
        row.push_back(tr);
      }
    }
  }

  AbsorbingChain chain(std::move(rows));
  if (chain.absorbing_states().size() != m) {
    throw InternalError("consensus chain should have exactly m absorbing states");
  }
  return ConsensusChain(n, m, std::move(chain));
}

namespace {

void check_init(const ConsensusChain& chain, std::span<const double> init) {
  if (init.size() != chain.chain().state_count()) {
    throw InvalidParameter("initial distribution has the wrong length");
  }
  double sum = 0.0;
  for (double w : init) {
    if (!(w >= 0.0)) throw InvalidParameter("initial distribution has a negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidParameter("initial distribution must sum to 1");
}

}  // namespace

std::vector<double> absorption_distribution(const ConsensusChain& chain, std::span<const double> init,
                                            SolverBackend backend) {
  check_init(chain, init);
  const auto b = chain.chain().absorption_matrix(backend);
  // Absorbing states are the constant states, in increasing strategy order.
  std::vector<double> out(chain.strategy_count(), 0.0);
  for (std::size_t s = 0; s < init.size(); ++s) {
    if (init[s] == 0.0) continue;
    for (std::size_t l = 0; l < out.size(); ++l) out[l] += init[s] * b[s][l];
  }
  return out;
}

double expected_absorption_time(const ConsensusChain& chain, std::span<const double> init,
                                SolverBackend backend) {
  check_init(chain, init);
  const auto t = chain.chain().expected_times(backend);
  double total = 0.0;
  for (std::size_t s = 0; s < init.size(); ++s) total += init[s] * t[s];
  return total;
}

}  // namespace consensus_lab
