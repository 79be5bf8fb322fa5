#pragma once

#include <string>
#include <vector>

#include "medge/linear_program.hpp"
#include "medge/workload.hpp"

namespace medge {

enum class Mode { OptimT, OptimNT };

std::string to_string(Mode mode);

/// Dense numbering of every variable of the program. Request-local
/// positions are used throughout: `m` indexes Request::models, `t` indexes
/// RequestModel::targets, `j` indexes Instance::ecs, `g` indexes the rate
/// table and `k` indexes compute_nodes[r].
///
/// Order: x, y, p, h, e, z, q, hit, alpha, beta, lambda, phi, psi, xi.
/// Everything from z on is auxiliary (fixed by the others).
struct VariableIndex {
  Mode mode = Mode::OptimT;
  int count = 0;
  std::vector<std::string> names;
  std::vector<std::uint8_t> auxiliary;

  /// Candidate compute nodes of each request: the active ECs, then the
  /// request's terminal in OptimT mode.
  std::vector<std::vector<int>> compute_nodes;

  std::vector<std::vector<int>> x;                             // [r][k]
  std::vector<std::vector<int>> y;                             // [r][j]
  std::vector<std::vector<int>> p;                             // [s][j]
  std::vector<std::vector<std::vector<int>>> h;                // [r][m][t]
  std::vector<std::vector<int>> e;                             // [r][g]
  std::vector<std::vector<int>> z;                             // [r][j]
  std::vector<std::vector<int>> q;                             // [r][j]
  std::vector<std::vector<std::vector<int>>> hit;              // [r][m][j]
  std::vector<std::vector<std::vector<int>>> alpha;            // [r][m][j]
  std::vector<std::vector<std::vector<std::vector<int>>>> beta;    // [r][m][t][j]
  std::vector<std::vector<std::vector<std::vector<int>>>> lambda;  // [r][m][t][j]
  std::vector<std::vector<std::vector<int>>> phi;              // [r][m][g]
  std::vector<std::vector<int>> psi;                           // [r][j]
  std::vector<std::vector<std::vector<int>>> xi;               // [r][k][j]

  /// Position of `node` in compute_nodes[r], or -1.
  [[nodiscard]] int compute_slot(int r, int node) const;
};

VariableIndex build_index(const Instance& inst, Mode mode);

/// Objective piece: sum of terms plus a constant.
struct LinearExpression {
  std::vector<Term> terms;
  double constant = 0.0;

  [[nodiscard]] double evaluate(const Assignment& a) const;
};

struct CacheConstants {
  double epsilon = 0.5;
  /// |N| * max_r |S_r| + 1.
  double big_u = 0.0;
};

CacheConstants cache_constants(const Instance& inst);

std::vector<Constraint> build_caching_constraints(const Instance& inst, const VariableIndex& idx);
std::vector<Constraint> build_cache_capacity_and_hit(const Instance& inst, const VariableIndex& idx);
std::vector<Constraint> build_linearization_constraints(const Instance& inst, const VariableIndex& idx);
std::vector<Constraint> build_assignment_constraints(const Instance& inst, const VariableIndex& idx);
Constraint build_quality_constraint(const Instance& inst, const VariableIndex& idx, double q_bound);
/// Valid inequalities that tighten the relaxation without cutting off any
/// binary point: an ARO is cached only under a placed model, and a placed
/// model always charges its result frames.
std::vector<Constraint> build_strengthening_cuts(const Instance& inst, const VariableIndex& idx);

/// Latency in milliseconds.
LinearExpression build_latency_objective(const Instance& inst, const VariableIndex& idx);
/// Energy in joules.
LinearExpression build_energy_objective(const Instance& inst, const VariableIndex& idx);

struct NormalizationBounds {
  double l_max = 0.0;  // ms
  double e_max = 0.0;  // J
  double q_max = 0.0;
  /// Per-term totals, one "name=value" per line.
  std::string derivation;
};

/// Worst-case totals that do not depend on the mode, so OptimT and OptimNT
/// objectives share one scale.
NormalizationBounds normalization_bounds(const Instance& inst);

struct ProgramOptions {
  double mu = 0.5;
  Mode mode = Mode::OptimT;
  double q_bound = 0.97;
  bool strengthen = true;
};

struct BuiltProgram {
  LinearProgram lp;
  VariableIndex index;
  NormalizationBounds bounds;
  LinearExpression latency;
  LinearExpression energy;
};

/// Throws std::invalid_argument when mu or q_bound lie outside [0,1].
BuiltProgram build_program(const Instance& inst, const ProgramOptions& options);

}  // namespace medge
