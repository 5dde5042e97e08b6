#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "consensus_lab/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "consensus-lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = consensus_lab::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string data(const std::string& name) { return std::string(CONSENSUS_LAB_TEST_DATA) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("dgr table") {
  const auto r = run({"dgr", "--n", "10", "--p", "0.3", "--gamma", "complete"});
  CHECK(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 12);
  CHECK(rows[0] == std::vector<std::string>{"k", "lambda", "E_k", "E_sym"});
  CHECK(rows[1][2] == "0");
  CHECK(rows[11][2] == "0");
  CHECK(std::stod(rows[5][2]) > 0.0);
}

TEST_CASE("survivor distribution") {
  const auto r = run({"survivor", "--n", "5", "--m", "3", "--p", "0.25"});
  CHECK(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 4);
  double total = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) total += std::stod(rows[i][1]);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact output matches the golden file") {
  const auto r = run({"exact", "--graph", data("k4.edges"), "--m", "2", "--p", "0.5", "--init", "uniform"});
  CHECK(r.code == 0);
  const auto got = parse_csv(r.out);
  const auto want = parse_csv(slurp(data("k4_exact.csv")));
  REQUIRE(got.size() == want.size());
  CHECK(got[0] == want[0]);
  REQUIRE(got[1].size() == want[1].size());
  for (std::size_t i = 0; i < want[1].size(); ++i) {
    if (i >= 4 && i != 5) {
      CHECK(std::stod(got[1][i]) == doctest::Approx(std::stod(want[1][i])).epsilon(1e-12));
    } else {
      CHECK(got[1][i] == want[1][i]);
    }
  }
}

TEST_CASE("json output") {
  const auto r = run({"survivor", "--n", "4", "--m", "2", "--p", "0", "--format", "json"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 2);
  CHECK(j[0]["probability"].get<double>() == doctest::Approx(15.0 / 16.0));
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"dgr", "--n", "10", "--bogus"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"exact", "--graph", "/nonexistent.edges"}).code == 2);
  const auto loop = run({"exact", "--graph", data("self_loop.edges")});
  CHECK(loop.code == 2);
  CHECK(loop.err.find("line 3") != std::string::npos);
  CHECK(run({"simulate", "--family", "sundew", "--n", "10"}).code == 2);
  CHECK(run({"simulate", "--family", "path", "--n", "5", "--init", "sideways"}).code == 2);
  CHECK(run({"dgr", "--n", "5", "--p", "1"}).code == 2);
  CHECK(run({"exact", "--family", "complete", "--n", "30"}).code == 2);
  CHECK(run({"survivor", "--n", "5", "--m", "3", "--format", "xml"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("simulate is reproducible across thread counts") {
  const std::vector<std::string> args{"simulate", "--family", "lollipop", "--n", "12", "--r", "4",
                                      "--m",      "3",        "--p",      "0.3", "--reps", "500",
                                      "--seed",   "99",       "--init",   "nonempty"};
  ::setenv("CONSENSUS_LAB_THREADS", "1", 1);
  const auto one = run(args);
  ::setenv("CONSENSUS_LAB_THREADS", "4", 1);
  const auto four = run(args);
  ::unsetenv("CONSENSUS_LAB_THREADS");
  CHECK(one.code == 0);
  CHECK(one.out == four.out);
  const auto rows = parse_csv(one.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].back() == "winner_3");
  CHECK(rows[1][0] == "Lp12_4");
  CHECK(rows[1][5] == "nonempty");
}

TEST_CASE("fixed initial state") {
  const auto r = run({"exact", "--family", "path", "--n", "4", "--init", "fixed:1", "--p", "0"});
  CHECK(r.code == 0);
  const auto rows = parse_csv(r.out);
  CHECK(rows[1][5] == "fixed");
  CHECK(std::stod(rows[1][7]) == doctest::Approx(1.0));
  CHECK(run({"exact", "--family", "path", "--n", "4", "--init", "fixed:9"}).code == 2);
}

TEST_CASE("bench rows carry the exact value") {
  const auto r = run({"bench", "--graph", data("k4.edges"), "--p", "0.5", "--reps", "4000", "--seed", "3"});
  CHECK(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"graph_id", "n", "e", "p", "estimate", "stderr", "theory", "ratio",
                                            "init"});
  CHECK(rows[1][0] == "k4");
  CHECK(std::stod(rows[1][6]) == doctest::Approx(5.375).epsilon(1e-12));
}

TEST_CASE("checks report failure with exit code 1") {
  CHECK(run({"verify-bound", "--family", "path", "--n", "10", "--reps", "2000"}).code == 0);
  CHECK(run({"compare-regular", "--n", "6"}).code == 0);
  const auto same = run({"sundew-lollipop", "--n", "8", "--r", "1", "--reps", "500"});
  CHECK(same.code == 1);
}

TEST_CASE("monotonicity scans") {
  const auto sym = run({"scan-monotonicity", "--n", "6", "--gamma", "complete", "--step", "0.1"});
  CHECK(sym.code == 0);
  CHECK(parse_csv(sym.out).size() == 1 + 7 * 11);
  const auto single = run({"scan-monotonicity", "--n", "3", "--gamma", "ones", "--k", "1", "--step", "0.01"});
  CHECK(single.code == 0);
  CHECK(single.err.find("drops") != std::string::npos);
  CHECK(run({"scan-monotonicity", "--n", "4", "--gamma", "0.2,0.9,0.5"}).code == 2);
}

TEST_CASE("coupon collector") {
  const auto agg = run({"coupon", "--n", "5", "--rate", "5", "--reps", "2000", "--seed", "2"});
  CHECK(agg.code == 0);
  const auto rows = parse_csv(agg.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][8] == "mean");
  CHECK(std::stod(rows[1][10]) == doctest::Approx(5 * (1 + 0.5 + 1.0 / 3 + 0.25 + 0.2)));

  const auto per = run({"coupon", "--n", "4", "--q", "0.5", "--targets", "shared", "--coupling", "independent",
                        "--reps", "10", "--per-run"});
  CHECK(per.code == 0);
  CHECK(parse_csv(per.out).size() == 11);
  CHECK(run({"coupon", "--n", "4", "--coupling", "magic"}).code == 2);
  CHECK(run({"coupon", "--n", "4", "--q", "0.5", "--slow-q", "0.25", "--reps", "50"}).code == 0);
}

TEST_CASE("output file") {
  const auto path = std::filesystem::temp_directory_path() / "consensus_lab_cli_test.csv";
  const auto r = run({"survivor", "--n", "3", "--m", "2", "--p", "0.5", "--out", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(slurp(path.string()) == "l,probability\n1,0.5\n2,0.5\n");
  std::filesystem::remove(path);
}
