#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "medge/linear_program.hpp"
#include "medge/solver.hpp"

using namespace medge;

namespace {

LinearProgram random_program(std::uint64_t seed, int n, int m, bool equalities) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-5, 5);
  std::uniform_real_distribution<double> cost(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  LinearProgram lp;
  for (int j = 0; j < n; ++j) lp.add_variable("v" + std::to_string(j));
  // A hidden point keeps most programs feasible.
  Assignment hidden(n);
  for (auto& v : hidden) v = coin(rng);
  for (int i = 0; i < m; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j) {
      if (coin(rng)) {
        const int c = coef(rng);
        if (c != 0) terms.push_back({j, static_cast<double>(c)});
      }
    }
    if (terms.empty()) terms.push_back({i % n, 1.0});
    double act = 0;
    for (const Term& t : terms) act += hidden[t.var] ? t.coef : 0.0;
    const int pick = std::uniform_int_distribution<int>(0, equalities ? 2 : 1)(rng);
    if (pick == 0) lp.add_constraint("r" + std::to_string(i), terms, RowSense::LessEqual, act + (coin(rng) ? 0 : 1));
    else if (pick == 1) lp.add_constraint("r" + std::to_string(i), terms, RowSense::GreaterEqual, act - (coin(rng) ? 0 : 2));
    else lp.add_constraint("r" + std::to_string(i), terms, RowSense::Equal, act);
  }
  for (int j = 0; j < n; ++j) {
    if (coin(rng) || j == 0) lp.objective.push_back({j, std::round(cost(rng) * 1000) / 1000});
  }
  lp.objective_offset = 0.25;
  return lp;
}

}  // namespace

TEST_CASE("single covering row") {
  LinearProgram lp;
  const int x = lp.add_variable("x");
  lp.add_constraint("c", {{x, 1.0}}, RowSense::GreaterEqual, 1.0);
  lp.objective = {{x, 1.0}};
  const Solution s = solve(lp);
  CHECK(s.status == SolveStatus::Optimal);
  CHECK(s.assignment == Assignment{1});
  CHECK(s.objective_value == doctest::Approx(1.0));
}

TEST_CASE("contradictory rows are infeasible") {
  LinearProgram lp;
  const int x = lp.add_variable("x");
  lp.add_constraint("a", {{x, 1.0}}, RowSense::GreaterEqual, 1.0);
  lp.add_constraint("b", {{x, 1.0}}, RowSense::LessEqual, 0.0);
  lp.objective = {{x, 1.0}};
  CHECK(solve(lp).status == SolveStatus::Infeasible);
  CHECK(enumerate_optimal(lp).status == SolveStatus::Infeasible);
}

TEST_CASE("enumeration picks the lexicographically smallest optimum") {
  LinearProgram one;
  one.add_variable("x");
  one.objective = {{0, 1.0}};
  const Solution s1 = enumerate_optimal(one);
  CHECK(s1.assignment == Assignment{0});
  CHECK(s1.objective_value == 0.0);

  LinearProgram two;
  two.add_variable("x0");
  two.add_variable("x1");
  two.add_constraint("cover", {{0, 1.0}, {1, 1.0}}, RowSense::GreaterEqual, 1.0);
  two.objective = {{0, 1.0}, {1, 1.0}};
  const Solution s2 = enumerate_optimal(two);
  CHECK(s2.objective_value == 1.0);
  CHECK(s2.assignment == Assignment{0, 1});
}

TEST_CASE("enumeration cap counts decision variables only") {
  LinearProgram lp;
  for (int j = 0; j < 31; ++j) lp.add_variable("v" + std::to_string(j));
  CHECK_THROWS_AS((void)enumerate_optimal(lp), std::invalid_argument);
  lp.auxiliary[30] = 1;
  lp.add_constraint("tie", {{30, 1.0}, {0, -1.0}}, RowSense::Equal, 0.0);
  // Keeps the walk short: every variable is forced to zero.
  std::vector<Term> all;
  for (int j = 0; j < 31; ++j) all.push_back({j, 1.0});
  lp.add_constraint("none", all, RowSense::LessEqual, 0.0);
  CHECK_NOTHROW((void)enumerate_optimal(lp));
}

TEST_CASE("branch and bound matches enumeration on random 10-variable programs") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const LinearProgram lp = random_program(seed, 10, 6, false);
    const Solution oracle = enumerate_optimal(lp);
    const Solution s = solve(lp);
    CAPTURE(seed);
    REQUIRE(s.status == oracle.status);
    if (oracle.status != SolveStatus::Optimal) continue;
    CHECK(std::abs(s.objective_value - oracle.objective_value) <= 1e-9 * std::max(1.0, std::abs(oracle.objective_value)));
    CHECK(lp.feasible(s.assignment));
    CHECK(s.objective_value == doctest::Approx(lp.evaluate(s.assignment)).epsilon(1e-12));
    CHECK(s.root_bound <= s.objective_value + 1e-9);
    for (std::size_t k = 1; k < s.incumbent_trace.size(); ++k) {
      CHECK(s.incumbent_trace[k] <= s.incumbent_trace[k - 1]);
    }
  }
}

TEST_CASE("branch and bound matches enumeration with equality rows") {
  for (std::uint64_t seed = 200; seed < 260; ++seed) {
    const LinearProgram lp = random_program(seed, 16, 9, true);
    const Solution oracle = enumerate_optimal(lp);
    SolveOptions opts;
    opts.branching = seed % 2 ? Branching::MostFractional : Branching::PaperVariableOrder;
    const Solution s = solve(lp, opts);
    CAPTURE(seed);
    REQUIRE(s.status == oracle.status);
    if (oracle.status == SolveStatus::Optimal) {
      CHECK(std::abs(s.objective_value - oracle.objective_value) <= 1e-9);
    }
  }
}

TEST_CASE("node limit reports BoundReached") {
  const LinearProgram lp = random_program(7, 24, 12, false);
  SolveOptions opts;
  opts.node_limit = 1;
  const Solution s = solve(lp, opts);
  CHECK((s.status == SolveStatus::BoundReached || s.status == SolveStatus::Optimal ||
         s.status == SolveStatus::Infeasible));
}

TEST_CASE("LP text round trip") {
  const LinearProgram lp = [] {
    LinearProgram p = random_program(11, 12, 8, true);
    p.auxiliary[3] = 1;
    p.objective_offset = -1.5e-3;
    p.constraints[0].terms[0].coef = 0.1 + 0.2;  // not representable in short decimal form
    return p;
  }();
  const std::string text = export_program(lp);
  const LinearProgram back = parse_program(text);
  CHECK(back == lp);
  CHECK(export_program(back) == text);
}

TEST_CASE("LP text with empty objective and one variable") {
  LinearProgram lp;
  lp.add_variable("only");
  const std::string text = export_program(lp);
  CHECK(text.find("Binaries") != std::string::npos);
  CHECK(text.find(" only") != std::string::npos);
  CHECK(parse_program(text) == lp);
}

TEST_CASE("validate rejects unknown variables") {
  LinearProgram lp;
  lp.add_variable("a");
  lp.add_constraint("bad", {{3, 1.0}}, RowSense::LessEqual, 1.0);
  CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
  CHECK_THROWS_AS((void)solve(lp), std::invalid_argument);
}
