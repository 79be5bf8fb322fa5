#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "medge/harness.hpp"

using namespace medge;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig cfg;
  cfg.seeds = 2;
  cfg.workload.requests = 6;
  cfg.workload.model_count = 2;
  cfg.workload.models_per_request = 2;
  cfg.workload.aros_per_model = 4;
  cfg.workload.vm_count = 4;
  cfg.solver.heuristic_only = true;
  return cfg;
}

std::string csv_of(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

}  // namespace

TEST_CASE("one point yields every mu and scheme in order") {
  const ScenarioConfig cfg = small_config();
  const std::vector<SweepRow> rows = run_scenario(cfg, sweep_points(cfg).front());
  REQUIRE(rows.size() == 20u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].mu == cfg.mu[i / 4]);
    CHECK(rows[i].scheme == cfg.schemes[i % 4]);
  }
}

TEST_CASE("optimized rows are feasible and ordered") {
  const ScenarioConfig cfg = small_config();
  for (const SweepPoint& point : sweep_points(cfg)) {
    const Instance inst = instance_for(cfg, point);
    const std::vector<SweepRow> rows = run_scenario(cfg, point);
    double last_delay = 1e300, last_energy = -1.0;
    for (std::size_t i = 0; i < rows.size(); i += 4) {
      const SweepRow& t = rows[i];
      const SweepRow& nt = rows[i + 1];
      REQUIRE(t.has_plan);
      REQUIRE(nt.has_plan);
      CHECK(check_feasibility(inst, t.plan, cfg.q_bound).empty());
      CHECK(check_feasibility(inst, nt.plan, cfg.q_bound, false).empty());
      // The terminal is an extra option, so OptimT is never worse.
      CHECK(t.objective <= nt.objective + 1e-12);
      // Weighting delay more never raises delay or lowers energy.
      CHECK(t.metrics.latency_ms <= last_delay + 1e-9);
      CHECK(t.metrics.energy_j >= last_energy - 1e-12);
      last_delay = t.metrics.latency_ms;
      last_energy = t.metrics.energy_j;
      // Baselines share the paired plan's caching.
      CHECK(rows[i + 2].plan.cached_models == nt.plan.cached_models);
    }
  }
}

TEST_CASE("sweeps are reproducible and independent of the thread count") {
  ScenarioConfig cfg = small_config();
  cfg.requests = {4, 6};
  const SweepOutcome one = run_sweep(cfg, 1);
  const SweepOutcome two = run_sweep(cfg, 3);
  CHECK(one.failures.empty());
  CHECK(one.rows.size() == 2u * 2u * 20u);
  CHECK(csv_of(one.rows) == csv_of(two.rows));
  CHECK(csv_of(run_sweep(cfg, 1).rows) == csv_of(one.rows));
}

TEST_CASE("CSV layout") {
  ScenarioConfig cfg = small_config();
  cfg.seeds = 1;
  cfg.mu = {0.5};
  const std::vector<SweepRow> rows = run_sweep(cfg).rows;
  const std::string text = csv_of(rows);
  CHECK(text.rfind("requests,utilization,foreground_scale,background_scale,mu,seed,scheme,", 0) == 0);
  int lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 5);
  std::ostringstream timed;
  write_csv(timed, rows, true);
  CHECK(timed.str().find(",wall_time_s\n") != std::string::npos);
  const std::vector<SummaryRow> summary = summarize(rows);
  CHECK(summary.size() == 4u);
  for (const SummaryRow& s : summary) CHECK(s.samples == 1);
}

TEST_CASE("utilization grows with the request count") {
  CHECK(utilization(30, 6, 14) == doctest::Approx(60.0 / 84.0));
  double last = 0.0;
  for (int r = 10; r <= 40; r += 5) {
    CHECK(utilization(r, 6, 14) > last);
    last = utilization(r, 6, 14);
  }
}

TEST_CASE("config parsing") {
  const ScenarioConfig base;
  CHECK(config_to_json(parse_config(config_to_json(base))) == config_to_json(base));
  const ScenarioConfig c = parse_config(R"({
    // comments are allowed
    "mu": 0.5, "requests": 12, "seeds": 3, "schemes": ["CEC"],
    "workload": {"vm_count": 10}
  })");
  CHECK(c.mu == std::vector<double>{0.5});
  CHECK(c.requests == std::vector<int>{12});
  CHECK(c.schemes == std::vector<Scheme>{Scheme::CEC});
  CHECK(c.workload.vm_count == 10);
  CHECK(c.seeds == 3);
  CHECK_THROWS_AS(parse_config(R"({"mus": [0.5]})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"workload": {"vms": 3}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"mu": [1.5]})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"seeds": 0})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"schemes": ["Best"]})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[1, 2"), std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), std::invalid_argument);
  CHECK_THROWS_AS(scheme_from_string("optimt"), std::invalid_argument);
}
