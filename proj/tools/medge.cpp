#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "medge/harness.hpp"

namespace {

using namespace medge;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void print_breakdown(const MetricBreakdown& m, int requests) {
  std::printf("latency_ms=%.9g\n", m.latency_ms);
  std::printf("latency_per_request_ms=%.9g\n", m.latency_ms / requests);
  std::printf("  wireless_ms=%.9g\n  wired_ms=%.9g\n  processing_ms=%.9g\n  penalty_ms=%.9g\n  mobility_ms=%.9g\n",
              m.wireless_ms, m.wired_ms, m.processing_ms, m.penalty_ms, m.mobility_ms);
  std::printf("energy_j=%.9g\n", m.energy_j);
  std::printf("energy_per_request_j=%.9g\n", m.energy_j / requests);
  std::printf("  server_energy_j=%.9g\n  terminal_energy_j=%.9g\n", m.server_energy_j, m.terminal_energy_j);
  std::printf("quality=%.9g\nquality_norm=%.9g\ncache_hits=%d\noverloaded=%d\n", m.quality, m.quality_norm,
              m.cache_hits, m.overloaded);
}

/// Options shared by the single-instance commands.
struct InstanceArgs {
  std::string config;
  std::uint64_t seed = 1;
  int requests = 0;
  double mu = 0.5;
  double q_bound = -1.0;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Scenario config (JSON); defaults apply without it");
    app->add_option("--seed", seed, "Instance seed");
    app->add_option("--requests", requests, "Request count (overrides the config)");
    app->add_option("--mu", mu, "Latency weight in [0,1]")->check(CLI::Range(0.0, 1.0));
    app->add_option("--q-bound", q_bound, "Quality floor in [0,1] (overrides the config)");
  }

  [[nodiscard]] ScenarioConfig scenario() const {
    ScenarioConfig cfg = config.empty() ? ScenarioConfig{} : load_config(config);
    if (requests > 0) cfg.workload.requests = requests;
    if (q_bound >= 0.0) cfg.q_bound = q_bound;
    cfg.seed = seed;
    cfg.seeds = 1;
    cfg.mu = {mu};
    cfg.requests = {cfg.workload.requests};
    cfg.foreground_scales = {cfg.workload.foreground_scale};
    cfg.background_scales = {cfg.workload.background_scale};
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint placement, caching and rate selection for edge-assisted AR"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "Run a config-driven sweep and write per-seed rows as CSV");
  std::string sweep_config, sweep_output, summary_path;
  int seeds = 0, parallel = 1;
  bool timing = false;
  sweep->add_option("config", sweep_config, "Scenario config (JSON)")->required();
  sweep->add_option("output", sweep_output, "CSV output path")->required();
  sweep->add_option("--seeds", seeds, "Seeds per point (overrides the config)");
  sweep->add_option("--parallel", parallel, "Points solved concurrently")->check(CLI::PositiveNumber);
  sweep->add_option("--summary", summary_path, "Also write means over seeds to this CSV");
  sweep->add_flag("--timing", timing, "Add a wall_time_s column");

  auto* solve = app.add_subcommand("solve", "Solve one instance with one scheme and print its metrics");
  InstanceArgs solve_args;
  solve_args.attach(solve);
  std::string scheme_name = "OptimT", plan_out, instance_out;
  double time_limit = -1.0;
  long iteration_limit = -1;
  bool heuristic = false;
  solve->add_option("--scheme", scheme_name, "OptimT, OptimNT, CEC or RandS");
  solve->add_option("--time-limit", time_limit, "Branch-and-bound seconds");
  solve->add_option("--iteration-limit", iteration_limit, "Simplex iterations per solve");
  solve->add_flag("--heuristic", heuristic, "Local search only");
  solve->add_option("--plan-out", plan_out, "Write the plan as JSON");
  solve->add_option("--instance-out", instance_out, "Write the instance as JSON");

  auto* export_lp = app.add_subcommand("export-lp", "Write the integer program of one instance in LP text form");
  InstanceArgs export_args;
  export_args.attach(export_lp);
  std::string mode_name = "OptimT", lp_output;
  bool no_cuts = false;
  export_lp->add_option("--mode", mode_name, "OptimT or OptimNT");
  export_lp->add_flag("--no-cuts", no_cuts, "Leave out the strengthening inequalities");
  export_lp->add_option("output", lp_output, "LP output path")->required();

  auto* replay = app.add_subcommand("replay", "Re-evaluate a serialized instance and plan");
  std::string replay_instance, replay_plan;
  double replay_q = 0.97;
  replay->add_option("instance", replay_instance, "Instance JSON")->required();
  replay->add_option("plan", replay_plan, "Plan JSON")->required();
  replay->add_option("--q-bound", replay_q, "Quality floor for the feasibility report");

  auto* defaults = app.add_subcommand("defaults", "Print the default config with every key");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      ScenarioConfig cfg = load_config(sweep_config);
      if (seeds > 0) cfg.seeds = seeds;
      if (timing) cfg.timing = true;
      const SweepOutcome outcome = run_sweep(cfg, parallel);
      std::ofstream out(sweep_output);
      if (!out) throw std::runtime_error("cannot write " + sweep_output);
      write_csv(out, outcome.rows, cfg.timing);
      if (!summary_path.empty()) {
        std::ofstream sum(summary_path);
        if (!sum) throw std::runtime_error("cannot write " + summary_path);
        write_summary_csv(sum, summarize(outcome.rows));
      }
      for (const std::string& f : outcome.failures) std::fprintf(stderr, "point failed: %s\n", f.c_str());
      return outcome.failures.empty() ? 0 : 3;
    }

    if (*solve) {
      ScenarioConfig cfg = solve_args.scenario();
      const Scheme scheme = scheme_from_string(scheme_name);
      cfg.schemes = {scheme};
      if (time_limit > 0.0) cfg.solver.time_limit_s = time_limit;
      if (iteration_limit >= 0) cfg.solver.iteration_limit = iteration_limit;
      if (heuristic) cfg.solver.heuristic_only = true;
      const SweepPoint point = sweep_points(cfg).front();
      const std::vector<SweepRow> rows = run_scenario(cfg, point);
      const SweepRow& row = rows.front();
      std::printf("scheme=%s\nstatus=%s\nobjective=%.9g\ngap=%.9g\nwall_time_s=%.3f\n", to_string(row.scheme).c_str(),
                  row.status.c_str(), row.objective, row.gap, row.wall_time_s);
      if (row.has_plan) print_breakdown(row.metrics, point.requests);
      if (!plan_out.empty() && row.has_plan) write_file(plan_out, plan_to_json(row.plan) + "\n");
      if (!instance_out.empty()) write_file(instance_out, instance_to_json(instance_for(cfg, point)) + "\n");
      return row.has_plan ? 0 : 1;
    }

    if (*export_lp) {
      const ScenarioConfig cfg = export_args.scenario();
      const Mode mode = mode_name == "OptimNT" ? Mode::OptimNT : Mode::OptimT;
      if (mode_name != "OptimT" && mode_name != "OptimNT") throw std::invalid_argument("--mode must be OptimT or OptimNT");
      const Instance inst = instance_for(cfg, sweep_points(cfg).front());
      const BuiltProgram program = build_program(inst, {export_args.mu, mode, cfg.q_bound, !no_cuts});
      write_file(lp_output, export_program(program.lp));
      std::printf("variables=%d\nconstraints=%zu\n", program.index.count, program.lp.constraints.size());
      return 0;
    }

    if (*replay) {
      const Instance inst = instance_from_json(read_file(replay_instance));
      const Plan plan = plan_from_json(read_file(replay_plan));
      print_breakdown(evaluate(inst, plan), inst.request_count());
      const std::vector<Violation> violations = check_feasibility(inst, plan, replay_q);
      std::printf("feasible=%s\n", violations.empty() ? "yes" : "no");
      for (const Violation& v : violations) std::printf("violation %s %s\n", v.family.c_str(), v.detail.c_str());
      return 0;
    }

    if (*defaults) {
      std::printf("%s\n", config_to_json(ScenarioConfig{}).c_str());
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
