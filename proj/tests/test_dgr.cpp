#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "consensus_lab/chain.hpp"
#include "consensus_lab/dgr.hpp"
#include "consensus_lab/errors.hpp"

using namespace consensus_lab;
using namespace consensus_lab::dgr;

namespace {

std::vector<double> random_gammas(std::size_t n, std::mt19937_64& rng, double lo = 0.05) {
  std::uniform_real_distribution<double> u(lo, 1.0);
  std::vector<double> g(n - 1);
  for (auto& x : g) x = u(rng);
  return g;
}

// Birth-death chain on 0..n with the walk's move probabilities.
AbsorbingChain walk_chain(const DgrParams& params) {
  const std::size_t n = params.n();
  std::vector<std::vector<Transition>> rows(n + 1);
  rows[0] = {{0, 1.0}};
  rows[n] = {{n, 1.0}};
  for (std::size_t k = 1; k < n; ++k) {
    const double g = params.gamma(k);
    rows[k] = {{k - 1, params.p() * g}, {k + 1, (1.0 - params.p()) * g}, {k, 1.0 - g}};
  }
  return AbsorbingChain(std::move(rows));
}

double max_residual(const DgrParams& params, const std::vector<double>& e) {
  double worst = 0.0;
  for (std::size_t k = 1; k < params.n(); ++k) {
    const double g = params.gamma(k);
    const double r = g * e[k] - 1.0 - g * (params.p() * e[k - 1] + (1.0 - params.p()) * e[k + 1]);
    worst = std::max(worst, std::abs(r) / (1.0 + e[k]));
  }
  return worst;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(DgrParams(5, 1.0, std::vector<double>(4, 1.0)), InvalidParameter);
  CHECK_THROWS_AS(DgrParams(5, -0.1, std::vector<double>(4, 1.0)), InvalidParameter);
  CHECK_THROWS_AS(DgrParams(5, 0.2, std::vector<double>(3, 1.0)), InvalidParameter);
  CHECK_THROWS_AS(DgrParams(3, 0.2, {0.5, 0.0}), InvalidParameter);
  CHECK_THROWS_AS(DgrParams(3, 0.2, {0.5, 1.5}), InvalidParameter);
  const DgrParams ok(4, 0.25, {0.5, 0.6, 0.7});
  CHECK(ok.gamma(0) == 0.0);
  CHECK(ok.gamma(4) == 0.0);
  CHECK(ok.gamma(2) == 0.6);
  CHECK(ok.lambda() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("ruin probability") {
  const DgrParams sym(10, 0.5, std::vector<double>(9, 1.0));
  CHECK(ruin_probability(sym, 3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(ruin_probability(sym, 0) == 0.0);
  CHECK(ruin_probability(sym, 10) == 1.0);
  CHECK_THROWS_AS(ruin_probability(sym, 11), InvalidParameter);

  std::mt19937_64 rng(1);
  const DgrParams params(5, 0.3, random_gammas(5, rng));
  const auto chain = walk_chain(params);
  const auto b = chain.absorption_matrix();
  for (std::size_t k = 0; k <= 5; ++k) CHECK(std::abs(ruin_probability(params, k) - b[k][1]) < 1e-12);
}

TEST_CASE("ruin probability does not depend on the delays") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    const double p = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
    const DgrParams a(n, p, random_gammas(n, rng));
    const DgrParams b(n, p, random_gammas(n, rng));
    const DgrParams plain(n, p, std::vector<double>(n - 1, 1.0));
    for (std::size_t k = 0; k <= n; ++k) {
      CHECK(ruin_probability(a, k) == ruin_probability(b, k));
      CHECK(ruin_probability(a, k) == ruin_probability(plain, k));
    }
    if (n <= 12) {
      const auto ba = walk_chain(a).absorption_matrix();
      const auto bb = walk_chain(b).absorption_matrix();
      for (std::size_t k = 0; k <= n; ++k) CHECK(std::abs(ba[k][1] - bb[k][1]) < 1e-12);
    }
  }
}

TEST_CASE("closed form special cases") {
  std::mt19937_64 rng(3);
  const std::size_t n = 9;
  const auto gammas = random_gammas(n, rng);
  const DgrParams upward(n, 0.0, gammas);
  const auto e = expected_times_closed(upward);
  CHECK(e[0] == 0.0);
  CHECK(e[n] == 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    double tail = 0.0;
    for (std::size_t i = k; i < n; ++i) tail += 1.0 / gammas[i - 1];
    CHECK(std::abs(e[k] - tail) <= 1e-12 * tail);
  }

  for (double g1 : {0.1, 0.5, 1.0}) {
    for (double p : {0.0, 0.3, 0.5, 0.8}) {
      const DgrParams two(2, p, {g1});
      CHECK(expected_time_closed(two, 1) == doctest::Approx(1.0 / g1).epsilon(1e-12));
      CHECK(expected_time_solve(two)[1] == doctest::Approx(1.0 / g1).epsilon(1e-12));
    }
  }

  const DgrParams fair(10, 0.5, std::vector<double>(9, 1.0));
  const auto ef = expected_times(fair);
  CHECK(ef[5] == doctest::Approx(25.0).epsilon(1e-12));
  for (std::size_t k = 0; k <= 10; ++k) CHECK(ef[k] == doctest::Approx(static_cast<double>(k * (10 - k))));
}

TEST_CASE("uniform delays match the constant-delay formula") {
  for (double r : {0.0, 0.3, 0.9}) {
    for (std::size_t n : {2, 5, 17, 100}) {
      for (double lambda : {0.0, 0.2, 0.5, 0.9, 0.97}) {
        const DgrParams params(n, p_from_lambda(lambda), std::vector<double>(n - 1, 1.0 - r));
        const auto e = expected_times(params);
        for (std::size_t k = 0; k <= n; ++k) {
          const long double l = lambda;
          const long double lk = std::pow(l, static_cast<long double>(k));
          const long double ln = std::pow(l, static_cast<long double>(n));
          const long double want = (1.0L / (1.0L - r)) * ((1.0L + l) / (1.0L - l)) *
                                   (static_cast<long double>(n) * (1.0L - lk) / (1.0L - ln) -
                                    static_cast<long double>(k));
          CHECK(rel(e[k], static_cast<double>(want)) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("closed form and solver agree and satisfy the recurrence") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    const double lambda = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
    const DgrParams params(n, p_from_lambda(lambda), random_gammas(n, rng));
    const auto closed = expected_times_closed(params);
    const auto solved = expected_time_solve(params);
    for (std::size_t k = 0; k <= n; ++k) CHECK(rel(closed[k], solved[k]) <= 1e-10);
    CHECK(max_residual(params, closed) <= 1e-9);
    CHECK(max_residual(params, solved) <= 1e-9);
  }
}

TEST_CASE("solver is continuous through lambda = 1") {
  std::mt19937_64 rng(5);
  const std::size_t n = 40;
  const auto gammas = random_gammas(n, rng);
  const DgrParams below(n, p_from_lambda(1.0 - 1e-6), gammas);
  const DgrParams above(n, p_from_lambda(1.0 + 1e-6), gammas);
  const DgrParams at(n, 0.5, gammas);
  const auto eb = expected_times(below), ea = expected_times(above), e1 = expected_times(at);
  for (std::size_t k = 1; k < n; ++k) {
    CHECK(rel(eb[k], ea[k]) < 1e-3);
    CHECK(rel(eb[k], e1[k]) < 1e-3);
  }
  // Just outside the switch the closed form is still used and still agrees.
  const DgrParams edge(n, p_from_lambda(1.0 - 2e-3), gammas);
  const auto closed = expected_times_closed(edge);
  const auto solved = expected_time_solve(edge);
  for (std::size_t k = 0; k <= n; ++k) CHECK(rel(closed[k], solved[k]) <= 1e-8);
}

TEST_CASE("complete-graph delays") {
  const auto g4 = complete_graph_gammas(4);
  CHECK(g4[0] == doctest::Approx(0.5));
  CHECK(g4[1] == doctest::Approx(2.0 / 3.0));
  CHECK(g4[2] == doctest::Approx(0.5));
  CHECK(complete_graph_gammas(2) == std::vector<double>{1.0});
  CHECK_THROWS_AS(complete_graph_gammas(1), InvalidParameter);
  for (std::size_t n = 2; n <= 100; ++n) {
    const auto g = complete_graph_gammas(n);
    for (std::size_t k = 1; k < n; ++k) CHECK(g[k - 1] == g[n - k - 1]);
    CHECK(*std::max_element(g.begin(), g.end()) == g[n / 2 - 1]);
  }
}

TEST_CASE("complete-graph consensus time matches the full chain") {
  for (std::size_t n = 3; n <= 6; ++n) {
    for (double p : {0.0, 0.2, 0.5}) {
      const auto chain = build_chain(make_complete(n), 2, p);
      const double want = expected_absorption_time(chain, chain.uniform_distribution());
      CHECK(std::abs(complete_graph_expected_consensus_time(n, p, BinomialInit{}) - want) <= 1e-9);
      const double cond = expected_absorption_time(chain, chain.nonempty_distribution());
      CHECK(std::abs(complete_graph_expected_consensus_time(n, p, ConditionedInit{}) - cond) <= 1e-9);
      std::vector<Strategy> values(n, 2);
      values[0] = 1;
      const double fixed = expected_absorption_time(chain, chain.point_distribution(StrategyState(values, 2)));
      CHECK(std::abs(complete_graph_expected_consensus_time(n, p, CountInit{1}) - fixed) <= 1e-9);
    }
  }
  CHECK(complete_graph_expected_consensus_time(7, 0.3, CountInit{0}) == 0.0);
  CHECK(complete_graph_expected_consensus_time(7, 0.3, CountInit{7}) == 0.0);
  CHECK_THROWS_AS(complete_graph_expected_consensus_time(7, 0.3, CountInit{8}), InvalidParameter);
}

TEST_CASE("complete-graph consensus time increases with p up to 1/2") {
  for (std::size_t n = 2; n <= 50; ++n) {
    double prev = -1.0;
    for (int i = 0; i <= 50; ++i) {
      const double t = complete_graph_expected_consensus_time(n, 0.01 * i, BinomialInit{});
      CHECK(t >= prev * (1.0 - 1e-12));
      prev = t;
    }
  }
}

TEST_CASE("symmetric sums with unit delays") {
  const std::size_t n = 8;
  const std::vector<double> ones(n - 1, 1.0);
  const auto grid = lambda_grid(0.01);
  const auto report = symmetric_sum_scan(n, ones, grid);
  CHECK(report.monotone());
  REQUIRE(report.terms.size() == n + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double l = grid[i];
    for (std::size_t k = 0; k <= n; ++k) {
      double want;
      if (l == 1.0) {
        want = 2.0 * static_cast<double>(k * (n - k));
      } else {
        want = n * ((1 + l) / (1 - l)) * (1 - std::pow(l, k)) * (1 - std::pow(l, n - k)) / (1 - std::pow(l, n));
      }
      CHECK(rel(report.values[k][i], want) < 1e-10);
    }
  }
}

TEST_CASE("symmetric sums are monotone for random symmetric delays") {
  std::mt19937_64 rng(6);
  const auto grid = lambda_grid(0.01);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 2 + rng() % 39;
    auto g = random_gammas(n, rng);
    for (std::size_t k = 1; k < n; ++k) g[n - k - 1] = g[k - 1];
    CHECK(symmetric_sum_scan(n, g, grid).monotone());
  }
  const std::vector<double> lopsided{0.2, 0.9, 0.5};
  CHECK_THROWS_AS(symmetric_sum_scan(4, lopsided, grid), InvalidParameter);
}

TEST_CASE("a single term need not be monotone") {
  const std::vector<double> ones{1.0, 1.0};
  const auto grid = lambda_grid(0.001);
  const auto report = single_term_scan(3, ones, 1, grid);
  CHECK_FALSE(report.monotone());
  const auto& row = report.values[0];
  const auto peak = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  CHECK(std::abs(grid[peak] - (std::sqrt(3.0) - 1.0) / 2.0) < 2e-3);
  CHECK(report.violations.front().grid_index >= peak);
}

TEST_CASE("surviving strategy distribution") {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t m = 1; m <= 5; ++m) {
      for (const double q : survivor_distribution(n, m, 0.5)) CHECK(std::abs(q - 1.0 / m) < 1e-12);
      for (int i = 0; i <= 10; ++i) {
        const auto d = survivor_distribution(n, m, 0.1 * i);
        double total = 0.0;
        for (double x : d) {
          CHECK(x >= -1e-15);
          total += x;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
    }
    const auto d0 = survivor_distribution(n, 2, 0.0);
    CHECK(std::abs(d0[0] - (1.0 - std::pow(0.5, static_cast<double>(n)))) < 1e-14);
  }
  CHECK_THROWS_AS(survivor_distribution(3, 3, 0.2, 0), InvalidParameter);
  CHECK_THROWS_AS(survivor_distribution(3, 3, 0.2, 4), InvalidParameter);
  CHECK_THROWS_AS(survivor_distribution(3, 3, 1.2, 1), InvalidParameter);
}

TEST_CASE("surviving strategy distribution matches the chain") {
  for (std::size_t n = 2; n <= 4; ++n) {
    for (Strategy m = 2; m <= 3; ++m) {
      for (double p : {0.0, 0.15, 0.45, 0.5, 0.55, 0.9, 1.0}) {
        const auto chain = build_chain(make_path(n), m, p);
        const auto want = absorption_distribution(chain, chain.uniform_distribution());
        const auto got = survivor_distribution(n, m, p);
        for (Strategy l = 0; l < m; ++l) CHECK(std::abs(got[l] - want[l]) < 1e-10);
      }
    }
  }
}

TEST_CASE("ratio function decreases in lambda") {
  for (double alpha : {1.5, 2.0, 5.0, 10.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i < 1000; ++i) {
      const double f = ratio_function(i / 1000.0, alpha);
      CHECK(f < prev);
      CHECK(f >= 0.0);
      prev = f;
    }
  }
}

TEST_CASE("lambda grid") {
  const auto g = lambda_grid(0.25);
  CHECK(g == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(lambda_grid(0.01).size() == 101);
  CHECK_THROWS_AS(lambda_grid(0.0), InvalidParameter);
}
