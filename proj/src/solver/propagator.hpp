#pragma once

#include <cstdint>
#include <vector>

#include "medge/linear_program.hpp"

namespace medge::detail {

// Activity-based bound propagation over 0-1 domains.
// Domain values: -1 free, 0 or 1 fixed.
class Propagator {
 public:
  using Domain = std::vector<std::int8_t>;

  explicit Propagator(const LinearProgram& lp);

  // Fixes `var` to `value` and propagates. Every variable fixed along the
  // way (including `var`) is appended to `trail`. Returns false on conflict;
  // the domain is then partially updated and should be undone via the trail.
  bool fix(Domain& domain, int var, int value, std::vector<int>& trail) const;

  // Propagates every row once and then to a fixpoint.
  bool propagate_all(Domain& domain, std::vector<int>& trail) const;

  static void undo(Domain& domain, std::vector<int>& trail, std::size_t mark) {
    while (trail.size() > mark) {
      domain[trail.back()] = -1;
      trail.pop_back();
    }
  }

 private:
  bool run(Domain& domain, std::vector<int>& queue, std::vector<int>& trail) const;

  int n_ = 0;
  std::vector<int> row_start_;
  std::vector<int> row_var_;
  std::vector<double> row_coef_;
  std::vector<double> row_lo_, row_hi_;
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  mutable std::vector<std::uint32_t> queued_;
  mutable std::uint32_t stamp_ = 0;
};

}  // namespace medge::detail
