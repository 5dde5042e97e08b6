#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace consensus_lab::dgr {

/// Gambler's ruin with delays on {0..n}: from 0 < k < n the walk steps up
/// with probability (1-p) gamma_k, down with probability p gamma_k, and
/// stays put otherwise. 0 and n absorb.
///
/// On the complete graph with two strategies, k counts vertices holding the
/// lower strategy, which wins a significant edge with probability 1-p.
class DgrParams {
 public:
  /// gammas holds gamma_1..gamma_{n-1}; each must lie in (0, 1]. p in [0, 1).
  DgrParams(std::size_t n, double p, std::vector<double> gammas);

  std::size_t n() const noexcept { return n_; }
  double p() const noexcept { return p_; }
  /// gamma_k for 1 <= k <= n-1; 0 at the boundary.
  double gamma(std::size_t k) const { return k == 0 || k >= n_ ? 0.0 : gammas_[k - 1]; }
  std::span<const double> gammas() const noexcept { return gammas_; }
  /// p / (1 - p).
  double lambda() const noexcept { return p_ / (1.0 - p_); }
  bool symmetric_delays(double tol = 1e-12) const;

 private:
  std::size_t n_;
  double p_;
  std::vector<double> gammas_;
};

/// Closed form is trusted only when |lambda - 1| exceeds this.
inline constexpr double kLambdaSwitch = 1e-3;

/// Probability that the walk started at k is absorbed at n. Does not depend
/// on the delays.
double ruin_probability(const DgrParams& params, std::size_t k);

/// E_k from the closed-form solution of the mean-absorption-time recurrence.
/// Falls back to expected_time_solve within kLambdaSwitch of lambda = 1.
double expected_time_closed(const DgrParams& params, std::size_t k);
std::vector<double> expected_times_closed(const DgrParams& params);

/// E_0..E_n by a direct tridiagonal solve of the recurrence; valid for every p.
std::vector<double> expected_time_solve(const DgrParams& params);

/// E_0..E_n via the closed form or the solver, whichever applies at this lambda.
std::vector<double> expected_times(const DgrParams& params);

/// gamma_k = 2k(n-k) / (n(n-1)): chance that a uniformly sampled edge of K_n
/// is significant when k vertices hold one of two strategies.
std::vector<double> complete_graph_gammas(std::size_t n);

struct BinomialInit {};  // each vertex independently in either class
struct CountInit {       // exactly k vertices hold the lower strategy
  std::size_t k;
};
struct ConditionedInit {};  // binomial, conditioned on the lower strategy being present
using CompleteInit = std::variant<BinomialInit, CountInit, ConditionedInit>;

/// Expected consensus time (in edge samples) on K_n with two strategies.
double complete_graph_expected_consensus_time(std::size_t n, double p, const CompleteInit& init);

/// P(S = l) for the surviving strategy with a uniform start on [m]^n, on any
/// connected n-vertex graph. The higher strategy of a significant pair wins
/// with probability p.
double survivor_distribution(std::size_t n, std::size_t m, double p, std::size_t l);
std::vector<double> survivor_distribution(std::size_t n, std::size_t m, double p);

/// ((1-lambda)/(1+lambda)) * ((1+lambda^alpha)/(1-lambda^alpha)) for lambda in (0,1).
double ratio_function(double lambda, double alpha);

struct MonotonicityViolation {
  std::size_t k;
  std::size_t grid_index;  // value at grid_index+1 fell below value at grid_index
  double drop;
};

struct MonotonicityReport {
  std::vector<double> lambda_grid;
  /// terms[j] is the k scanned in values[j].
  std::vector<std::size_t> terms;
  /// values[j][i]: E_k + E_{n-k} (or E_k alone for single-term scans) at
  /// lambda_grid[i], with k = terms[j].
  std::vector<std::vector<double>> values;
  std::vector<MonotonicityViolation> violations;

  bool monotone() const noexcept { return violations.empty(); }
};

inline constexpr double kMonotonicityTolerance = 1e-9;

/// Symmetric sums E_k + E_{n-k} for k = 0..n over a grid of lambda in [0, 1].
/// Requires gamma_i = gamma_{n-i}; throws InvalidParameter otherwise.
MonotonicityReport symmetric_sum_scan(std::size_t n, std::span<const double> gammas,
                                      std::span<const double> lambda_grid,
                                      double tolerance = kMonotonicityTolerance);

/// Same scan for a single E_k; no symmetry requirement.
MonotonicityReport single_term_scan(std::size_t n, std::span<const double> gammas, std::size_t k,
                                    std::span<const double> lambda_grid,
                                    double tolerance = kMonotonicityTolerance);

/// 0, step, 2 step, ..., 1 (last point clamped to 1).
std::vector<double> lambda_grid(double step);

/// p = lambda / (1 + lambda).
inline double p_from_lambda(double lambda) { return lambda / (1.0 + lambda); }

}  // namespace consensus_lab::dgr
