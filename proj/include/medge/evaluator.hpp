#pragma once

#include <string>
#include <utility>
#include <vector>

#include "medge/ilp.hpp"
#include "medge/workload.hpp"

namespace medge {

struct CachedAro {
  int request = 0;
  int model = 0;
  int aro = 0;

  auto operator<=>(const CachedAro&) const = default;
};

/// Semantic decisions of one scheme. Nodes are topology node ids.
struct Plan {
  std::vector<int> compute_node;                  // x, per request
  std::vector<int> storage_node;                  // y, per request
  std::vector<std::pair<int, int>> cached_models;  // p, (model, EC node), sorted
  std::vector<CachedAro> cached_aros;             // h, sorted
  std::vector<int> rate_index;                    // e, per request

  /// Sorts and deduplicates the cache sets.
  void normalize();
  [[nodiscard]] bool has_model(int model, int node) const;
  [[nodiscard]] bool has_aro(int request, int model, int aro) const;

  bool operator==(const Plan&) const = default;
};

/// z_rj of the plan: some model of r has every target cached at `node`.
bool cache_hit(const Instance& inst, const Plan& plan, int request, int node);

struct MetricBreakdown {
  double wireless_ms = 0.0;
  double wired_ms = 0.0;
  double processing_ms = 0.0;
  double penalty_ms = 0.0;
  double mobility_ms = 0.0;
  double latency_ms = 0.0;
  double server_energy_j = 0.0;
  double terminal_energy_j = 0.0;
  double energy_j = 0.0;
  double quality = 0.0;
  double quality_norm = 0.0;
  int cache_hits = 0;
  /// Requests whose functions did not fit the VM slots left at their ECs.
  int overloaded = 0;
  /// Requests whose uplink needs more than 1 W at the chosen rate (reported,
  /// not clamped).
  int high_power_links = 0;

  static std::string csv_header();
  [[nodiscard]] std::string csv_row() const;
};

struct LatencyParts {
  double wireless_ms = 0.0;
  double wired_ms = 0.0;
  double processing_ms = 0.0;
  double penalty_ms = 0.0;
  double mobility_ms = 0.0;
  int cache_hits = 0;
  int overloaded = 0;

  [[nodiscard]] double total() const {
    return wireless_ms + wired_ms + processing_ms + penalty_ms + mobility_ms;
  }
};

struct EnergyParts {
  double server_j = 0.0;
  double terminal_j = 0.0;

  [[nodiscard]] double total() const { return server_j + terminal_j; }
};

/// Throws std::invalid_argument on an incomplete or malformed plan.
/// Requests that overflow the VM slots of an EC (taken in request order)
/// are redirected and pay the miss penalty once more.
LatencyParts evaluate_latency(const Instance& inst, const Plan& plan);
EnergyParts evaluate_energy(const Instance& inst, const Plan& plan);
/// Q and Q/Q_max.
std::pair<double, double> evaluate_quality(const Instance& inst, const Plan& plan);
MetricBreakdown evaluate(const Instance& inst, const Plan& plan);

/// mu * L / L_max + (1 - mu) * E / E_max.
double scalarized_objective(const Instance& inst, const Plan& plan, double mu);

struct Violation {
  std::string family;
  std::string detail;
};

/// Empty iff the plan expands to a feasible assignment of the program.
/// With `allow_terminal` false a compute function at a terminal is a
/// violation (EC-only mode).
std::vector<Violation> check_feasibility(const Instance& inst, const Plan& plan, double q_bound,
                                         bool allow_terminal = true);

/// Full binary assignment with every auxiliary set to its defining product.
/// Throws std::invalid_argument when the plan uses a node the index lacks.
Assignment expand_plan(const Instance& inst, const VariableIndex& idx, const Plan& plan);
/// Reads the decision variables back; auxiliaries are ignored.
Plan extract_plan(const Instance& inst, const VariableIndex& idx, const Assignment& a);

std::string plan_to_json(const Plan& plan);
Plan plan_from_json(const std::string& text);

}  // namespace medge
