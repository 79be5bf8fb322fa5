#include "propagator.hpp"

#include <cmath>
#include <limits>

namespace medge::detail {

Propagator::Propagator(const LinearProgram& lp) : n_(lp.variable_count()) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int m = static_cast<int>(lp.constraints.size());
  row_start_.assign(1, 0);
  std::vector<int> col_count(n_ + 1, 0);
  for (const Constraint& c : lp.constraints) {
    for (const Term& t : c.terms) {
      row_var_.push_back(t.var);
      row_coef_.push_back(t.coef);
      ++col_count[t.var + 1];
    }
    row_start_.push_back(static_cast<int>(row_var_.size()));
    row_lo_.push_back(c.sense == RowSense::LessEqual ? -inf : c.rhs);
    row_hi_.push_back(c.sense == RowSense::GreaterEqual ? inf : c.rhs);
  }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + col_count[j + 1];
  col_row_.resize(row_var_.size());
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m; ++i) {
    for (int e = row_start_[i]; e < row_start_[i + 1]; ++e) col_row_[fill[row_var_[e]]++] = i;
  }
  queued_.assign(m, 0);
}

bool Propagator::fix(Domain& domain, int var, int value, std::vector<int>& trail) const {
  if (domain[var] >= 0) return domain[var] == value;
  domain[var] = static_cast<std::int8_t>(value);
  trail.push_back(var);
  ++stamp_;
  std::vector<int> queue;
  for (int e = col_start_[var]; e < col_start_[var + 1]; ++e) {
    const int row = col_row_[e];
    if (queued_[row] != stamp_) {
      queued_[row] = stamp_;
      queue.push_back(row);
    }
  }
  return run(domain, queue, trail);
}

bool Propagator::propagate_all(Domain& domain, std::vector<int>& trail) const {
  ++stamp_;
  std::vector<int> queue;
  for (int i = 0; i < static_cast<int>(row_lo_.size()); ++i) {
    queued_[i] = stamp_;
    queue.push_back(i);
  }
  return run(domain, queue, trail);
}

bool Propagator::run(Domain& domain, std::vector<int>& queue, std::vector<int>& trail) const {
  std::size_t head = 0;
  while (head < queue.size()) {
    const int row = queue[head++];
    queued_[row] = 0;
    double min_act = 0.0;
    double max_act = 0.0;
    for (int e = row_start_[row]; e < row_start_[row + 1]; ++e) {
      const double c = row_coef_[e];
      const int v = domain[row_var_[e]];
      if (v < 0) {
        if (c > 0) max_act += c;
        else min_act += c;
      } else if (v == 1) {
        min_act += c;
        max_act += c;
      }
    }
    const double lo = row_lo_[row];
    const double hi = row_hi_[row];
    const double tol_hi = 1e-9 * (1.0 + (std::isfinite(hi) ? std::abs(hi) : 0.0));
    const double tol_lo = 1e-9 * (1.0 + (std::isfinite(lo) ? std::abs(lo) : 0.0));
    if (min_act > hi + tol_hi || max_act < lo - tol_lo) return false;
    bool changed = false;
    for (int e = row_start_[row]; e < row_start_[row + 1]; ++e) {
      const int var = row_var_[e];
      if (domain[var] >= 0) continue;
      const double c = row_coef_[e];
      int forced = -1;
      if (c > 0) {
        if (min_act + c > hi + tol_hi) forced = 0;
        else if (max_act - c < lo - tol_lo) forced = 1;
      } else if (c < 0) {
        if (min_act - c > hi + tol_hi) forced = 1;
        else if (max_act + c < lo - tol_lo) forced = 0;
      }
      if (forced < 0) continue;
      domain[var] = static_cast<std::int8_t>(forced);
      trail.push_back(var);
      changed = true;
      // The fixing changes this row's activity range.
      if (forced == 1) {
        if (c > 0) min_act += c;
        else max_act += c;
      } else {
        if (c > 0) max_act -= c;
        else min_act -= c;
      }
      if (min_act > hi + tol_hi || max_act < lo - tol_lo) return false;
      for (int f = col_start_[var]; f < col_start_[var + 1]; ++f) {
        const int other = col_row_[f];
        if (other != row && queued_[other] != stamp_) {
          queued_[other] = stamp_;
          queue.push_back(other);
        }
      }
    }
    if (changed && queued_[row] != stamp_) {
      queued_[row] = stamp_;
      queue.push_back(row);
    }
  }
  return true;
}

}  // namespace medge::detail
