#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "medge/baselines.hpp"
#include "medge/evaluator.hpp"
#include "medge/planner.hpp"
#include "medge/workload.hpp"

namespace medge {

enum class Scheme { OptimT, OptimNT, CEC, RandS };

std::string to_string(Scheme scheme);
/// Throws std::invalid_argument for an unknown name.
Scheme scheme_from_string(const std::string& name);

struct SolverSettings {
  double time_limit_s = 300.0;
  /// Simplex iterations per solve; 0 leaves only the time limit. Runs that
  /// stop on the time limit are not byte-reproducible, runs that stop on
  /// this limit are.
  long iteration_limit = 0;
  long node_limit = 0;
  double relative_gap = 0.0;
  /// Skip branch-and-bound and report the local search plan.
  bool heuristic_only = false;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int seeds = 20;
  std::vector<double> mu = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<Scheme> schemes = {Scheme::OptimT, Scheme::OptimNT, Scheme::CEC, Scheme::RandS};
  /// Empty means workload.requests only.
  std::vector<int> requests;
  std::vector<double> foreground_scales = {1.0};
  std::vector<double> background_scales = {1.0};
  double q_bound = 0.97;
  SolverSettings solver;
  BaselineOptions baseline;
  WorkloadConfig workload;
  /// Adds a wall_time_s column (the CSV is then no longer reproducible).
  bool timing = false;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// JSON document; unknown keys are rejected. Throws std::invalid_argument.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string config_to_json(const ScenarioConfig& cfg);

/// One generated instance of the sweep; every mu and scheme is run on it.
struct SweepPoint {
  int requests = 30;
  double foreground_scale = 1.0;
  double background_scale = 1.0;
  std::uint64_t seed = 1;

  auto operator<=>(const SweepPoint&) const = default;
};

struct SweepRow {
  SweepPoint point;
  double utilization = 0.0;
  double mu = 0.0;
  Scheme scheme = Scheme::OptimT;
  /// optimal, incumbent, heuristic, feasible, overloaded or infeasible.
  std::string status;
  bool has_plan = false;
  MetricBreakdown metrics;
  /// Program objective of the plan (NaN for baselines without a plan).
  double objective = 0.0;
  /// Relative distance to the branch-and-bound bound (NaN when unknown).
  double gap = 0.0;
  double wall_time_s = 0.0;
  Plan plan;
};

/// 2R / (|E| * VM slots per EC), the share of VM slots the requests need.
double utilization(int requests, int ec_count, int vm_count);

std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg);
Instance instance_for(const ScenarioConfig& cfg, const SweepPoint& point);

/// Solves every (mu, mode) of one instance sharing a pool of plans, then
/// derives the baselines. Rows come back in (mu, scheme) order.
std::vector<SweepRow> run_scenario(const ScenarioConfig& cfg, const SweepPoint& point);

struct SweepOutcome {
  std::vector<SweepRow> rows;
  /// One line per point that threw.
  std::vector<std::string> failures;
};

/// Runs every point, `parallel` at a time, and sorts rows by
/// (point, mu, scheme) so the order never depends on scheduling.
SweepOutcome run_sweep(const ScenarioConfig& cfg, int parallel = 1);

/// Delay and energy per request.
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool timing = false);

struct SummaryRow {
  int requests = 0;
  double utilization = 0.0;
  double foreground_scale = 1.0;
  double background_scale = 1.0;
  double mu = 0.0;
  Scheme scheme = Scheme::OptimT;
  int samples = 0;
  double delay_mean = 0.0;
  double delay_se = 0.0;
  double energy_mean = 0.0;
  double energy_se = 0.0;
  double objective_mean = 0.0;
  double quality_min = 0.0;
  int overloaded = 0;
};

/// Means over seeds; rows without a plan are left out.
std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace medge
