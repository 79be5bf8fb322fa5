#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "medge/linear_program.hpp"

namespace medge {

enum class SolveStatus { Optimal, Infeasible, BoundReached, TimedOut };

std::string to_string(SolveStatus status);

enum class Branching {
  /// First fractional variable in index order.
  PaperVariableOrder,
  /// Fractional value closest to 1/2; ties go to the lower index.
  MostFractional,
};

struct SolveOptions {
  double time_limit_s = 300.0;
  /// Prune a node when its bound is within this distance of the incumbent.
  double absolute_gap = 1e-9;
  /// Additional relative tolerance, scaled by |incumbent|.
  double relative_gap = 0.0;
  Branching branching = Branching::MostFractional;
  std::uint64_t seed = 1;
  /// Stop with BoundReached once this many nodes were processed (0 = no limit).
  long node_limit = 0;
  /// Stop with BoundReached once this many simplex iterations were spent
  /// (0 = no limit). Unlike the time limit it gives repeatable results.
  long iteration_limit = 0;
  /// Starting incumbent; ignored unless it satisfies every constraint.
  Assignment warm_start;
  /// Key=value statistics lines are written here when non-null.
  std::ostream* log = nullptr;
};

struct Solution {
  Assignment assignment;
  double objective_value = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  long node_count = 0;
  double wall_time_s = 0.0;
  /// LP relaxation value at the root (minus infinity if never solved).
  double root_bound = 0.0;
  /// Best proven lower bound when the search stopped.
  double best_bound = 0.0;
  /// Objective of every incumbent in the order they were found.
  std::vector<double> incumbent_trace;

  [[nodiscard]] bool has_assignment() const { return !assignment.empty(); }
  [[nodiscard]] double gap() const;
};

/// Branch-and-bound with a dual simplex relaxation.
Solution solve(const LinearProgram& lp, const SolveOptions& options = {});

/// Exhaustive search. Returns the lexicographically smallest optimal
/// assignment. Throws std::invalid_argument when more than
/// `max_decision_variables` non-auxiliary variables are present.
Solution enumerate_optimal(const LinearProgram& lp, int max_decision_variables = 30);

/// Calls `visit` on every feasible point in index order and returns how many
/// there were. Same cap as enumerate_optimal.
long for_each_feasible(const LinearProgram& lp, const std::function<void(const Assignment&)>& visit,
                       int max_decision_variables = 30);

}  // namespace medge
