#pragma once

#include <optional>
#include <vector>

#include "medge/evaluator.hpp"
#include "medge/ilp.hpp"
#include "medge/solver.hpp"

namespace medge {

/// Greedy construction plus neighbourhood descent over plans, scored with
/// the program's own objective coefficients. Every plan it returns expands
/// to a feasible assignment of `program`.
class Planner {
 public:
  Planner(const Instance& inst, const BuiltProgram& program, double q_bound);

  /// Closest-EC placement, highest rates and a cheapest-first cover of
  /// every request by one exclusive ARO. nullopt when no cover fits.
  [[nodiscard]] std::optional<Plan> construct() const;

  /// Descends until no move improves the objective or `max_rounds` passes
  /// were made. The input must be feasible for the program.
  [[nodiscard]] Plan improve(const Plan& start, int max_rounds = 50) const;

  /// Objective value of a feasible plan (same units as the program).
  [[nodiscard]] double objective(const Plan& plan) const;
  /// Feasible for the program, including the mode's compute candidates.
  [[nodiscard]] bool feasible(const Plan& plan) const;

 private:
  struct State;

  [[nodiscard]] State to_state(const Plan& plan) const;
  [[nodiscard]] Plan to_plan(const State& s) const;
  [[nodiscard]] double score(const State& s) const;
  [[nodiscard]] bool valid(const State& s) const;
  [[nodiscard]] std::vector<char> placed_models(const State& s) const;
  /// Objective terms owned by request r, given which models have a copy.
  [[nodiscard]] double request_term(const State& s, int r, const std::vector<char>& placed) const;
  /// Best response of each request in turn; with `eject` a move may push
  /// one other request out of a full EC.
  bool place_requests(State& s, bool eject) const;
  bool choose_rates(State& s) const;
  bool toggle_models(State& s) const;
  bool move_aros(State& s) const;
  bool chase_hits(State& s) const;

  const Instance& inst_;
  const BuiltProgram& program_;
  std::vector<double> cost_;
  std::vector<int> first_slot_;  // first cache slot of each request
  double quality_target_ = 0.0;
};

struct OptimOptions {
  double mu = 0.5;
  Mode mode = Mode::OptimT;
  double q_bound = 0.97;
  SolveOptions solver;
  /// Skip branch-and-bound and return the descent result.
  bool heuristic_only = false;
};

struct OptimResult {
  std::optional<Plan> plan;
  double objective = 0.0;
  Solution solution;  // branch-and-bound statistics
  /// Objective of the descent plan handed to branch-and-bound.
  double warm_objective = 0.0;
};

/// Builds the program, seeds branch-and-bound with the best descent plan
/// among the constructed one and `hints` (plans infeasible for this mode
/// are skipped) and polishes the incumbent with another descent.
OptimResult solve_optim(const Instance& inst, const OptimOptions& options, const std::vector<Plan>& hints = {});
/// Same, on a program already built from `options` (mu, mode, q_bound).
OptimResult solve_optim(const Instance& inst, const BuiltProgram& program, const OptimOptions& options,
                        const std::vector<Plan>& hints = {});

}  // namespace medge
