#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "consensus_lab/chain.hpp"
#include "consensus_lab/errors.hpp"
#include "support.hpp"

using namespace consensus_lab;

namespace {

double row_sum(const AbsorbingChain& c, std::size_t s) {
  double total = 0.0;
  for (const auto& t : c.row(s)) total += t.probability;
  return total;
}

std::vector<double> exact_winners(const Graph& g, Strategy m, double p) {
  const auto chain = build_chain(g, m, p);
  return absorption_distribution(chain, chain.uniform_distribution());
}

double exact_time(const Graph& g, Strategy m, double p) {
  const auto chain = build_chain(g, m, p);
  return expected_absorption_time(chain, chain.uniform_distribution());
}

}  // namespace

TEST_CASE("two-vertex chain") {
  const double p = 0.3;
  const auto chain = build_chain(make_complete(2), 2, p);
  const auto& c = chain.chain();
  CHECK(c.state_count() == 4);
  CHECK(c.absorbing_states() == std::vector<std::size_t>{0, 3});
  for (std::size_t s : {1, 2}) {
    double to_low = 0.0, to_high = 0.0;
    for (const auto& t : c.row(s)) {
      if (t.target == 0) to_low += t.probability;
      if (t.target == 3) to_high += t.probability;
    }
    CHECK(to_high == doctest::Approx(p).epsilon(1e-15));
    CHECK(to_low == doctest::Approx(1 - p).epsilon(1e-15));
  }
  for (std::size_t s : {0, 3}) {
    REQUIRE(c.row(s).size() == 1);
    CHECK(c.row(s)[0].target == s);
    CHECK(c.row(s)[0].probability == 1.0);
  }
}

TEST_CASE("state encoding is little-endian mixed radix") {
  const auto chain = build_chain(make_path(3), 3, 0.2);
  const StrategyState s({2, 1, 3}, 3);
  CHECK(chain.encode(s) == 1 + 0 * 3 + 2 * 9);
  CHECK(chain.decode(19) == s);
  for (std::size_t i = 0; i < chain.chain().state_count(); ++i) CHECK(chain.encode(chain.decode(i)) == i);
}

TEST_CASE("rows are stochastic and the absorbing set is the constant states") {
  std::mt19937_64 gen(31337);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + gen() % 4;
    const Strategy m = static_cast<Strategy>(2 + gen() % 2);
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const auto g = testing_support::random_connected_graph(n, 0.4, gen);
    const auto chain = build_chain(g, m, p);
    const auto& c = chain.chain();
    CHECK(c.absorbing_states().size() == m);
    for (std::size_t s = 0; s < c.state_count(); ++s) {
      CHECK(std::abs(row_sum(c, s) - 1.0) <= 1e-12);
      CHECK(c.row(s).size() <= 2 * g.edge_count() + 1);
      CHECK(c.is_absorbing(s) == chain.decode(s).consensus().has_value());
    }
  }
}

TEST_CASE("small exact values") {
  const auto k2 = build_chain(make_complete(2), 2, 0.0);
  const auto w = absorption_distribution(k2, k2.uniform_distribution());
  CHECK(w[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(expected_absorption_time(k2, k2.uniform_distribution()) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(expected_absorption_time(k2, k2.nonempty_distribution()) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  // Exact rational values from the brute-force oracle in tests/oracles.
  CHECK(std::abs(exact_time(make_complete(4), 2, 0.5) - 43.0 / 8.0) < 1e-12);
  CHECK(std::abs(exact_time(make_complete(3), 3, 0.3) - 650.0 / 237.0) < 1e-12);
  CHECK(std::abs(exact_time(make_path(4), 2, 0.0) - 67.0 / 16.0) < 1e-12);
}

TEST_CASE("p = 1/2 gives every strategy the same chance") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + gen() % 3;
    const Strategy m = static_cast<Strategy>(2 + gen() % 3);
    const auto g = testing_support::random_connected_graph(n, 0.5, gen);
    for (double q : exact_winners(g, m, 0.5)) CHECK(std::abs(q - 1.0 / m) < 1e-12);
  }
}

TEST_CASE("winner distribution is the same on path, star and clique") {
  const auto a = exact_winners(make_path(4), 2, 0.3);
  const auto b = exact_winners(make_star(4), 2, 0.3);
  const auto c = exact_winners(make_complete(4), 2, 0.3);
  CHECK(testing_support::max_abs_diff(a, b) < 1e-10);
  CHECK(testing_support::max_abs_diff(a, c) < 1e-10);
}

TEST_CASE("p = 0: strategy 1 survives unless absent") {
  for (std::size_t n = 1; n <= 5; ++n) {
    for (Strategy m = 2; m <= 3; ++m) {
      const auto w = exact_winners(make_cycle(std::max<std::size_t>(n, 3)), m, 0.0);
      const double nn = static_cast<double>(std::max<std::size_t>(n, 3));
      CHECK(std::abs(w[0] - (1.0 - std::pow((m - 1.0) / m, nn))) < 1e-12);
    }
  }
}

TEST_CASE("sparse and dense solvers agree") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + gen() % 4;
    const auto g = testing_support::random_connected_graph(n, 0.3, gen);
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const auto chain = build_chain(g, 3, p);
    const auto init = chain.uniform_distribution();
    const auto ws = absorption_distribution(chain, init, SolverBackend::kSparse);
    const auto wd = absorption_distribution(chain, init, SolverBackend::kDense);
    CHECK(testing_support::max_abs_diff(ws, wd) < 1e-12);
    const double ts = expected_absorption_time(chain, init, SolverBackend::kSparse);
    const double td = expected_absorption_time(chain, init, SolverBackend::kDense);
    CHECK(std::abs(ts - td) <= 1e-12 * std::max(1.0, ts));
  }
}

TEST_CASE("relabelling strategies mirrors p") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 2 + gen() % 3;
    const Strategy m = static_cast<Strategy>(2 + gen() % 2);
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const auto g = testing_support::random_connected_graph(n, 0.5, gen);
    const auto a = build_chain(g, m, p);
    const auto b = build_chain(g, m, 1.0 - p);
    const auto ta = a.chain().expected_times();
    const auto tb = b.chain().expected_times();
    const auto wa = a.chain().absorption_matrix();
    const auto wb = b.chain().absorption_matrix();
    for (std::size_t s = 0; s < a.chain().state_count(); ++s) {
      const auto st = a.decode(s);
      std::vector<Strategy> flipped(st.size());
      for (std::size_t v = 0; v < st.size(); ++v) flipped[v] = m + 1 - st[v];
      const std::size_t t = b.encode(StrategyState(flipped, m));
      CHECK(std::abs(ta[s] - tb[t]) <= 1e-10 * std::max(1.0, ta[s]));
      for (Strategy l = 1; l <= m; ++l) CHECK(std::abs(wa[s][l - 1] - wb[t][m - l]) < 1e-12);
    }
  }
}

TEST_CASE("coarse-grained chain gives the class distribution") {
  const auto k3 = make_complete(3);
  for (double p : {0.0, 0.2, 0.7}) {
    const auto full = build_chain(k3, 3, p);
    const auto w = absorption_distribution(full, full.uniform_distribution());
    const auto binary = build_chain(k3, 2, p);
    for (Strategy l = 1; l <= 2; ++l) {
      // Pushforward of the uniform start: each vertex is in the lower class with probability l/3.
      std::vector<double> init(binary.chain().state_count(), 0.0);
      for (std::size_t s = 0; s < full.chain().state_count(); ++s) {
        init[binary.encode(coarse_grain(full.decode(s), l))] += 1.0 / 27.0;
      }
      const auto coarse = absorption_distribution(binary, init);
      double lower = 0.0;
      for (Strategy j = 1; j <= l; ++j) lower += w[j - 1];
      CHECK(std::abs(coarse[0] - lower) < 1e-12);
    }
  }
}

TEST_CASE("expected time on K_n grows with p up to 1/2") {
  for (std::size_t n = 2; n <= 8; ++n) {
    double prev = -1.0;
    for (int i = 0; i <= 10; ++i) {
      const double t = exact_time(make_complete(n), 2, 0.05 * i);
      CHECK(t >= prev - 1e-12);
      prev = t;
    }
  }
}

TEST_CASE("guards and validation") {
  CHECK_THROWS_AS(build_chain(make_complete(22), 2, 0.1), CapacityError);
  CHECK_THROWS_AS(build_chain(make_complete(3), 0, 0.1), InvalidParameter);
  CHECK_THROWS_AS(build_chain(make_complete(3), 2, 1.5), InvalidParameter);

  const auto chain = build_chain(make_complete(3), 2, 0.1);
  std::vector<double> short_init(3, 1.0 / 3.0);
  CHECK_THROWS_AS(expected_absorption_time(chain, short_init), InvalidParameter);
  std::vector<double> not_normalised(8, 0.2);
  CHECK_THROWS_AS(absorption_distribution(chain, not_normalised), InvalidParameter);

  // 0 <-> 1 loop never reaches the absorbing state 2.
  CHECK_THROWS_AS(AbsorbingChain({{{1, 1.0}}, {{0, 1.0}}, {{2, 1.0}}}), InvalidParameter);
  CHECK_THROWS_AS(AbsorbingChain({{{0, 0.5}, {1, 0.4}}, {{1, 1.0}}}), InvalidParameter);
  CHECK_THROWS_AS(AbsorbingChain({{{0, 1.2}, {1, -0.2}}, {{1, 1.0}}}), InvalidParameter);

  const StrategyState wrong({1, 2}, 2);
  CHECK_THROWS_AS(chain.point_distribution(wrong), InvalidParameter);
}
