#include <chrono>
#include <functional>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "medge/solver.hpp"

namespace medge {

namespace {

// Depth-first walk over all 0-1 points in index order. The only pruning is
// on rows that can no longer be satisfied, so every feasible point is
// visited.
class Enumerator {
 public:
  Enumerator(const LinearProgram& lp, std::function<void(const Assignment&)> visitor)
      : lp_(lp), n_(lp.variable_count()), visitor_(std::move(visitor)) {
    const int m = static_cast<int>(lp.constraints.size());
    rows_of_.assign(n_, {});
    activity_.assign(m, 0.0);
    min_rest_.assign(m, 0.0);
    max_rest_.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
      for (const Term& t : lp.constraints[i].terms) {
        rows_of_[t.var].push_back({i, t.coef});
        if (t.coef > 0) max_rest_[i] += t.coef;
        else min_rest_[i] += t.coef;
      }
    }
    point_.assign(n_, 0);
  }

  void run() { visit(0); }

  Assignment best;
  double best_value = std::numeric_limits<double>::infinity();
  long leaves = 0;

 private:
  struct Entry {
    int row;
    double coef;
  };

  bool row_possible(int i) const {
    const Constraint& c = lp_.constraints[i];
    const double tol = 1e-9 * (1.0 + std::abs(c.rhs));
    const double lo = activity_[i] + min_rest_[i];
    const double hi = activity_[i] + max_rest_[i];
    if (c.sense != RowSense::GreaterEqual && lo > c.rhs + tol) return false;
    if (c.sense != RowSense::LessEqual && hi < c.rhs - tol) return false;
    return true;
  }

  void assign(int var, int value, double sign) {
    for (const Entry& e : rows_of_[var]) {
      if (e.coef > 0) max_rest_[e.row] -= sign * e.coef;
      else min_rest_[e.row] -= sign * e.coef;
      if (value == 1) activity_[e.row] += sign * e.coef;
    }
  }

  void visit(int var) {
    if (var == n_) {
      ++leaves;
      if (!lp_.feasible(point_)) return;
      if (visitor_) {
        visitor_(point_);
        return;
      }
      const double value = lp_.evaluate(point_);
      const double tie = 1e-12 * std::max(1.0, std::abs(best_value));
      if (best.empty() || value < best_value - tie) {
        best = point_;
        best_value = value;
      }
      return;
    }
    for (int value = 0; value <= 1; ++value) {
      point_[var] = static_cast<std::uint8_t>(value);
      assign(var, value, 1.0);
      bool ok = true;
      for (const Entry& e : rows_of_[var]) {
        if (!row_possible(e.row)) {
          ok = false;
          break;
        }
      }
      if (ok) visit(var + 1);
      assign(var, value, -1.0);
    }
    point_[var] = 0;
  }

  const LinearProgram& lp_;
  int n_;
  std::vector<std::vector<Entry>> rows_of_;
  std::vector<double> activity_, min_rest_, max_rest_;
  Assignment point_;
  std::function<void(const Assignment&)> visitor_;
};

void check_cap(const LinearProgram& lp, int max_decision_variables) {
  lp.validate();
  if (lp.decision_variable_count() > max_decision_variables) {
    throw std::invalid_argument("enumeration limited to " + std::to_string(max_decision_variables) +
                                " decision variables, program has " +
                                std::to_string(lp.decision_variable_count()));
  }
}

}  // namespace

Solution enumerate_optimal(const LinearProgram& lp, int max_decision_variables) {
  check_cap(lp, max_decision_variables);
  const auto start = std::chrono::steady_clock::now();
  Enumerator walk(lp, nullptr);
  walk.run();
  Solution out;
  out.node_count = walk.leaves;
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (walk.best.empty()) {
    out.status = SolveStatus::Infeasible;
    out.objective_value = out.root_bound = out.best_bound = std::numeric_limits<double>::infinity();
    return out;
  }
  out.status = SolveStatus::Optimal;
  out.assignment = walk.best;
  out.objective_value = walk.best_value;
  out.root_bound = out.best_bound = walk.best_value;
  out.incumbent_trace = {walk.best_value};
  return out;
}

long for_each_feasible(const LinearProgram& lp, const std::function<void(const Assignment&)>& visit,
                       int max_decision_variables) {
  check_cap(lp, max_decision_variables);
  long count = 0;
  Enumerator walk(lp, [&](const Assignment& a) {
    ++count;
    visit(a);
  });
  walk.run();
  return count;
}

}  // namespace medge
