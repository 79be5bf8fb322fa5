#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "basis_factor.hpp"

namespace medge::detail {

// Compressed sparse matrix stored both by column and by row.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> col_start, col_index;
  std::vector<double> col_value;
  std::vector<int> row_start, row_index;
  std::vector<double> row_value;

  void build_rows();
};

// Bounded dual simplex for   min c'x   s.t.  A x + s = 0,  l <= (x, s) <= u
// where every column, structural or logical, has finite bounds. With finite
// bounds any basis can be made dual feasible by moving nonbasic columns to
// the right bound, so no phase one is needed.
class DualSimplex {
 public:
  enum class Result { Optimal, Infeasible, Cutoff, IterationLimit, TimeLimit };
  enum Status : std::uint8_t { Basic, AtLower, AtUpper };

  struct Basis {
    std::vector<int> head;
    std::vector<std::uint8_t> status;
  };

  // `lower`/`upper` cover structurals followed by logicals.
  DualSimplex(SparseMatrix matrix, std::vector<double> cost, std::vector<double> lower,
              std::vector<double> upper, std::uint64_t seed);

  void set_structural_bounds(const std::vector<double>& lower, const std::vector<double>& upper);

  // `cutoff` is compared with the bound in cost units; pass +inf to disable.
  Result solve(double cutoff, long iteration_limit,
               std::chrono::steady_clock::time_point deadline);

  [[nodiscard]] int structural_count() const { return n_; }
  [[nodiscard]] const std::vector<double>& values() const { return x_; }
  [[nodiscard]] double objective() const;
  // Lagrangian bound from the final duals; valid whatever the basis.
  [[nodiscard]] double bound() const { return bound_; }
  // Reduced costs of structurals with the original costs.
  [[nodiscard]] const std::vector<double>& reduced_costs() const { return d_; }
  [[nodiscard]] Status status(int j) const { return static_cast<Status>(status_[j]); }

  [[nodiscard]] Basis basis() const { return {head_, status_}; }
  void set_basis(const Basis& basis);

  [[nodiscard]] long iterations() const { return iterations_; }
  [[nodiscard]] long refactorizations() const { return refactorizations_; }

 private:
  void refactor();
  void compute_primal();
  void compute_duals();
  double lagrangian_bound(const std::vector<double>& y) const;
  bool restore_dual_feasibility();
  bool verify_infeasible(int leaving, const std::vector<int>& touched) const;
  void column_into(int j, std::vector<double>& dense, double scale) const;

  SparseMatrix a_;
  int n_ = 0;
  int m_ = 0;
  std::vector<double> cost_;       // original
  std::vector<double> work_cost_;  // possibly perturbed
  std::vector<double> lower_, upper_;
  std::vector<double> x_, d_, y_;
  std::vector<int> head_;
  std::vector<int> position_of_;
  std::vector<std::uint8_t> status_;
  std::vector<double> weight_;
  BasisFactor factor_;
  bool factor_valid_ = false;
  bool perturbed_ = false;
  bool primal_dirty_ = false;
  std::uint64_t seed_;
  double bound_ = 0.0;
  long iterations_ = 0;
  long refactorizations_ = 0;

  std::vector<double> rho_, alpha_row_;
};

}  // namespace medge::detail
