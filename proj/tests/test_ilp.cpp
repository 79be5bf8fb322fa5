#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "medge/evaluator.hpp"
#include "medge/ilp.hpp"
#include "medge/solver.hpp"
#include "support.hpp"

using namespace medge;

namespace {

// One request, one model with a single ARO, two ECs.
Instance single_aro() {
  WorkloadConfig c = testing::tiny_config(1);
  c.requests = 1;
  c.aros_per_model = 1;
  c.max_targets_per_model = 1;
  return generate_instance(c, 5);
}

int count_prefix(const LinearProgram& lp, const std::string& prefix) {
  return static_cast<int>(std::count_if(lp.constraints.begin(), lp.constraints.end(), [&](const Constraint& c) {
    return c.name.rfind(prefix, 0) == 0;
  }));
}

}  // namespace

TEST_CASE("caching rows for the smallest instance") {
  const Instance inst = single_aro();
  const VariableIndex idx = build_index(inst, Mode::OptimT);
  // Exclusive ARO, some ARO per request, ARO needs its model, ARO needs a placement.
  CHECK(build_caching_constraints(inst, idx).size() == 4u);
  CHECK(idx.compute_nodes[0].size() == 3u);
  CHECK(build_index(inst, Mode::OptimNT).compute_nodes[0].size() == 2u);
  // One ARO times one model per request, plus one.
  CHECK(cache_constants(inst).big_u == 2.0);
}

TEST_CASE("variable names are unique and the program validates") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = generate_instance(testing::tiny_config(seed), seed);
    for (Mode mode : {Mode::OptimT, Mode::OptimNT}) {
      const BuiltProgram p = build_program(inst, {0.5, mode, 0.9, true});
      CHECK_NOTHROW(p.lp.validate());
      const std::set<std::string> names(p.lp.variable_names.begin(), p.lp.variable_names.end());
      CHECK(names.size() == p.lp.variable_names.size());
      CHECK(parse_program(export_program(p.lp)) == p.lp);
    }
  }
}

TEST_CASE("full-size program dimensions") {
  const Instance inst = generate_instance(WorkloadConfig{}, 1);
  const BuiltProgram p = build_program(inst, {0.5, Mode::OptimT, 0.97, true});
  CHECK(p.index.count > 5000);
  CHECK(p.lp.decision_variable_count() < p.index.count);
  CHECK(count_prefix(p.lp, "cache_some_r") == 30);
  CHECK(count_prefix(p.lp, "cache_capacity_n") == 6);
}

TEST_CASE("auxiliaries are fixed by the decisions on every feasible point") {
  // Every feasible binary point must equal the expansion of its own plan,
  // which checks each product and hit indicator against its truth table.
  long points = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Instance inst = generate_instance(testing::tiny_config(seed), seed);
    for (Mode mode : {Mode::OptimT, Mode::OptimNT}) {
      const BuiltProgram p = build_program(inst, {0.5, mode, 0.0, false});
      long mismatches = 0;
      points += for_each_feasible(p.lp, [&](const Assignment& a) {
        if (expand_plan(inst, p.index, extract_plan(inst, p.index, a)) != a) ++mismatches;
      });
      CHECK(mismatches == 0);
    }
  }
  // Some seeds have too few VM slots for any plan; most do not.
  CHECK(points > 1000);
}

TEST_CASE("strengthening cuts keep every binary point") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Instance inst = generate_instance(testing::tiny_config(seed), seed);
    const BuiltProgram plain = build_program(inst, {0.5, Mode::OptimT, 0.9, false});
    const BuiltProgram cut = build_program(inst, {0.5, Mode::OptimT, 0.9, true});
    CHECK(for_each_feasible(plain.lp, [](const Assignment&) {}) ==
          for_each_feasible(cut.lp, [](const Assignment&) {}));
  }
}

TEST_CASE("quality floor") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = generate_instance(testing::tiny_config(seed), seed);
    const int top = static_cast<int>(inst.rates.rates_bps.size()) - 1;
    const BuiltProgram strict = build_program(inst, {0.5, Mode::OptimT, 1.0, false});
    for_each_feasible(strict.lp, [&](const Assignment& a) {
      const Plan plan = extract_plan(inst, strict.index, a);
      for (int g : plan.rate_index) CHECK(g == top);
    });
    // Without a floor the lowest rate is allowed everywhere.
    const BuiltProgram loose = build_program(inst, {0.5, Mode::OptimT, 0.0, false});
    bool lowest = false;
    const long count = for_each_feasible(loose.lp, [&](const Assignment& a) {
      const Plan plan = extract_plan(inst, loose.index, a);
      lowest = lowest || std::all_of(plan.rate_index.begin(), plan.rate_index.end(), [](int g) { return g == 0; });
    });
    CHECK((lowest || count == 0));
  }
  const Instance inst = single_aro();
  CHECK_THROWS_AS(build_program(inst, {0.5, Mode::OptimT, 1.5, true}), std::invalid_argument);
  CHECK_THROWS_AS(build_program(inst, {-0.1, Mode::OptimT, 0.9, true}), std::invalid_argument);
}

TEST_CASE("objective weights and normalization bounds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Instance inst = generate_instance(testing::tiny_config(seed), seed);
    const BuiltProgram lat = build_program(inst, {1.0, Mode::OptimT, 0.0, false});
    const BuiltProgram en = build_program(inst, {0.0, Mode::OptimT, 0.0, false});
    const BuiltProgram mid = build_program(inst, {0.3, Mode::OptimT, 0.0, false});
    const NormalizationBounds& b = lat.bounds;
    REQUIRE(b.l_max > 0.0);
    REQUIRE(b.e_max > 0.0);
    for_each_feasible(lat.lp, [&](const Assignment& a) {
      const double l = lat.latency.evaluate(a);
      const double e = lat.energy.evaluate(a);
      CHECK(l >= 0.0);
      CHECK(l <= b.l_max * (1 + 1e-12));
      CHECK(e >= 0.0);
      CHECK(e <= b.e_max * (1 + 1e-12));
      CHECK(lat.lp.evaluate(a) == doctest::Approx(l / b.l_max).epsilon(1e-12));
      CHECK(en.lp.evaluate(a) == doctest::Approx(e / b.e_max).epsilon(1e-12));
      CHECK(mid.lp.evaluate(a) == doctest::Approx(0.3 * l / b.l_max + 0.7 * e / b.e_max).epsilon(1e-12));
    });
  }
}

TEST_CASE("bounds do not depend on the mode") {
  const Instance inst = generate_instance(WorkloadConfig{}, 3);
  const BuiltProgram t = build_program(inst, {0.5, Mode::OptimT, 0.97, true});
  const BuiltProgram nt = build_program(inst, {0.5, Mode::OptimNT, 0.97, true});
  CHECK(t.bounds.l_max == nt.bounds.l_max);
  CHECK(t.bounds.e_max == nt.bounds.e_max);
  CHECK(t.lp.variable_count() > nt.lp.variable_count());
  CHECK_FALSE(t.bounds.derivation.empty());
}
