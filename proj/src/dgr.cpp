#include "consensus_lab/dgr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "consensus_lab/errors.hpp"

namespace consensus_lab::dgr {

namespace {

using Real = long double;

void check_k(const DgrParams& params, std::size_t k) {
  if (k > params.n()) {
    throw InvalidParameter("k=" + std::to_string(k) + " outside 0..n=" + std::to_string(params.n()));
  }
}

bool near_unit_lambda(const DgrParams& params) {
  return std::abs(params.lambda() - 1.0) <= kLambdaSwitch;
}

// lambda^0 .. lambda^n in extended precision.
std::vector<Real> lambda_powers(Real lambda, std::size_t n) {
  std::vector<Real> pw(n + 1);
  for (std::size_t j = 0; j <= n; ++j) pw[j] = std::pow(lambda, static_cast<Real>(j));
  return pw;
}

std::vector<double> closed_form_all(const DgrParams& params) {
  const std::size_t n = params.n();
  const Real p = params.p();
  const Real lambda = p / (1.0L - p);
  const auto pw = lambda_powers(lambda, n);

  std::vector<Real> inv_gamma(n, 0.0L);
  for (std::size_t i = 1; i < n; ++i) inv_gamma[i] = 1.0L / static_cast<Real>(params.gamma(i));

  Real s_n = 0.0L;
  for (std::size_t i = 1; i < n; ++i) s_n += inv_gamma[i] * (1.0L - pw[n - i]);

  const Real lead = (1.0L + lambda) / (1.0L - lambda);
  const Real denom = 1.0L - pw[n];
  std::vector<double> e(n + 1, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    Real partial = 0.0L;
    for (std::size_t i = 1; i < k; ++i) partial += inv_gamma[i] * (1.0L - pw[k - i]);
    e[k] = static_cast<double>(lead * (s_n * (1.0L - pw[k]) / denom - partial));
  }
  return e;
}

}  // namespace

DgrParams::DgrParams(std::size_t n, double p, std::vector<double> gammas)
    : n_(n), p_(p), gammas_(std::move(gammas)) {
  if (n_ == 0) throw InvalidParameter("DGR needs n >= 1");
  if (!(p_ >= 0.0 && p_ < 1.0)) throw InvalidParameter("DGR needs p in [0,1)");
  if (gammas_.size() != n_ - 1) {
    throw InvalidParameter("expected " + std::to_string(n_ - 1) + " delay parameters, got " +
                           std::to_string(gammas_.size()));
  }
  for (double g : gammas_) {
    if (!(g > 0.0 && g <= 1.0)) throw InvalidParameter("delay parameters must lie in (0,1]");
  }
}

bool DgrParams::symmetric_delays(double tol) const {
  for (std::size_t i = 1; i < n_; ++i) {
    if (std::abs(gamma(i) - gamma(n_ - i)) > tol * std::max(1.0, std::abs(gamma(i)))) return false;
  }
  return true;
}

double ruin_probability(const DgrParams& params, std::size_t k) {
  check_k(params, k);
  const std::size_t n = params.n();
  if (k == 0) return 0.0;
  if (k == n) return 1.0;
  const Real p = params.p();
  const Real lambda = p / (1.0L - p);
  if (lambda == 0.0L) return 1.0;
  if (lambda == 1.0L) return static_cast<double>(k) / static_cast<double>(n);
  // (1 - lambda^k) / (1 - lambda^n), written to stay accurate as lambda -> 1.
  const Real log_lambda = std::log(lambda);
  return static_cast<double>(std::expm1(static_cast<Real>(k) * log_lambda) /
                             std::expm1(static_cast<Real>(n) * log_lambda));
}

double expected_time_closed(const DgrParams& params, std::size_t k) {
  check_k(params, k);
  if (k == 0 || k == params.n()) return 0.0;
  if (near_unit_lambda(params)) return expected_time_solve(params)[k];
  return closed_form_all(params)[k];
}

std::vector<double> expected_times_closed(const DgrParams& params) {
  if (near_unit_lambda(params)) return expected_time_solve(params);
  return closed_form_all(params);
}

std::vector<double> expected_time_solve(const DgrParams& params) {
  const std::size_t n = params.n();
  std::vector<double> e(n + 1, 0.0);
  if (n < 2) return e;

  // Row k (1 <= k <= n-1): E_k - p E_{k-1} - (1-p) E_{k+1} = 1 / gamma_k.
  const Real p = params.p();
  const Real lower = -p;
  const Real upper = -(1.0L - p);
  const std::size_t m = n - 1;
  std::vector<Real> c(m), d(m);
  for (std::size_t r = 0; r < m; ++r) {
    const Real rhs = 1.0L / static_cast<Real>(params.gamma(r + 1));
    if (r == 0) {
      c[r] = upper;
      d[r] = rhs;
    } else {
      const Real pivot = 1.0L - lower * c[r - 1];
      c[r] = upper / pivot;
      d[r] = (rhs - lower * d[r - 1]) / pivot;
    }
  }
  Real next = 0.0L;  // E_n
  for (std::size_t r = m; r-- > 0;) {
    next = d[r] - c[r] * next;
    e[r + 1] = static_cast<double>(next);
  }
  return e;
}

std::vector<double> expected_times(const DgrParams& params) { return expected_times_closed(params); }

std::vector<double> complete_graph_gammas(std::size_t n) {
  if (n < 2) throw InvalidParameter("complete-graph delays need n >= 2");
  std::vector<double> g(n - 1);
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  for (std::size_t k = 1; k < n; ++k) {
    g[k - 1] = 2.0 * static_cast<double>(k) * static_cast<double>(n - k) / pairs;
  }
  return g;
}

double complete_graph_expected_consensus_time(std::size_t n, double p, const CompleteInit& init) {
  if (n < 2) throw InvalidParameter("complete graph consensus time needs n >= 2");
  const DgrParams params(n, p, complete_graph_gammas(n));
  const auto e = expected_times(params);

  if (const auto* fixed = std::get_if<CountInit>(&init)) {
    if (fixed->k > n) throw InvalidParameter("initial count exceeds n");
    return e[fixed->k];
  }

  // Binomial(n, 1/2) weights, built up from 2^-n.
  Real w = std::pow(0.5L, static_cast<Real>(n));
  Real total = 0.0L;
  Real mass = 0.0L;
  for (std::size_t k = 0; k <= n; ++k) {
    if (k > 0) w = w * static_cast<Real>(n - k + 1) / static_cast<Real>(k);
    total += w * static_cast<Real>(e[k]);
    if (k > 0) mass += w;
  }
  if (std::holds_alternative<ConditionedInit>(init)) total /= mass;
  return static_cast<double>(total);
}

double survivor_distribution(std::size_t n, std::size_t m, double p, std::size_t l) {
  if (n == 0 || m == 0) throw InvalidParameter("survivor distribution needs n, m >= 1");
  if (l < 1 || l > m) throw InvalidParameter("strategy index outside 1..m");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("p must lie in [0,1]");
  if (p == 0.5) return 1.0 / static_cast<double>(m);
  // Relabelling strategies i -> m+1-i swaps the roles of p and 1-p.
  if (p > 0.5) return survivor_distribution(n, m, 1.0 - p, m + 1 - l);

  // P(S <= j): the class {1..j} starts Bin(n, j/m) strong and grows with
  // probability 1-p per significant edge. With x = 1 - lambda this is
  //   (1 - (1 - j x / m)^n) / (1 - (1 - x)^n).
  const Real pp = p;
  const Real x = 1.0L - pp / (1.0L - pp);
  const Real nn = static_cast<Real>(n);
  const Real denom = -std::expm1(nn * std::log1p(-x));
  auto cdf = [&](std::size_t j) -> Real {
    if (j == 0) return 0.0L;
    if (j == m) return 1.0L;
    return -std::expm1(nn * std::log1p(-static_cast<Real>(j) * x / static_cast<Real>(m))) / denom;
  };
  return static_cast<double>(cdf(l) - cdf(l - 1));
}

std::vector<double> survivor_distribution(std::size_t n, std::size_t m, double p) {
  std::vector<double> out(m);
  for (std::size_t l = 1; l <= m; ++l) out[l - 1] = survivor_distribution(n, m, p, l);
  return out;
}

double ratio_function(double lambda, double alpha) {
  const double la = std::pow(lambda, alpha);
  return ((1.0 - lambda) / (1.0 + lambda)) * ((1.0 + la) / (1.0 - la));
}

namespace {

void find_drops(MonotonicityReport& report, double tolerance) {
  for (std::size_t j = 0; j < report.values.size(); ++j) {
    const auto& row = report.values[j];
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
      const double allowed = tolerance * std::max(1.0, std::abs(row[i]));
      if (row[i + 1] < row[i] - allowed) {
        report.violations.push_back({report.terms[j], i, row[i] - row[i + 1]});
      }
    }
  }
}

std::vector<double> times_at_lambda(std::size_t n, std::span<const double> gammas, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidParameter("lambda grid must lie in [0,1]");
  const DgrParams params(n, p_from_lambda(lambda), std::vector<double>(gammas.begin(), gammas.end()));
  return expected_times(params);
}

}  // namespace

MonotonicityReport symmetric_sum_scan(std::size_t n, std::span<const double> gammas,
                                      std::span<const double> grid, double tolerance) {
  const DgrParams check(n, 0.0, std::vector<double>(gammas.begin(), gammas.end()));
  if (!check.symmetric_delays()) {
    throw InvalidParameter("symmetric-sum monotonicity needs gamma_i = gamma_{n-i}");
  }
  MonotonicityReport report;
  report.lambda_grid.assign(grid.begin(), grid.end());
  for (std::size_t k = 0; k <= n; ++k) report.terms.push_back(k);
  report.values.assign(n + 1, std::vector<double>(grid.size(), 0.0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto e = times_at_lambda(n, gammas, grid[i]);
    for (std::size_t k = 0; k <= n; ++k) report.values[k][i] = e[k] + e[n - k];
  }
  find_drops(report, tolerance);
  return report;
}

MonotonicityReport single_term_scan(std::size_t n, std::span<const double> gammas, std::size_t k,
                                    std::span<const double> grid, double tolerance) {
  if (k > n) throw InvalidParameter("k outside 0..n");
  MonotonicityReport report;
  report.lambda_grid.assign(grid.begin(), grid.end());
  report.terms = {k};
  report.values.assign(1, std::vector<double>(grid.size(), 0.0));
  for (std::size_t i = 0; i < grid.size(); ++i) report.values[0][i] = times_at_lambda(n, gammas, grid[i])[k];
  find_drops(report, tolerance);
  return report;
}

std::vector<double> lambda_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw InvalidParameter("grid step must lie in (0,1]");
  const auto count = static_cast<std::size_t>(std::llround(1.0 / step));
  std::vector<double> grid(count + 1);
  for (std::size_t i = 0; i <= count; ++i) grid[i] = std::min(1.0, static_cast<double>(i) * step);
  grid.back() = 1.0;
  return grid;
}

}  // namespace consensus_lab::dgr
