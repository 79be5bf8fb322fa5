#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "dual_simplex.hpp"
#include "medge/solver.hpp"
#include "propagator.hpp"

namespace medge {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::BoundReached: return "BoundReached";
    case SolveStatus::TimedOut: return "TimedOut";
  }
  return "Unknown";
}

double Solution::gap() const {
  if (!has_assignment()) return std::numeric_limits<double>::infinity();
  const double diff = std::max(0.0, objective_value - best_bound);
  return diff / std::max(std::abs(objective_value), 1e-12);
}

namespace {

using Clock = std::chrono::steady_clock;
using detail::DualSimplex;
using detail::Propagator;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntegralTol = 1e-6;
constexpr std::size_t kMaxStoredBases = 4000;

struct Node {
  double bound = -kInf;
  long id = 0;
  std::vector<std::pair<int, std::int8_t>> fixings;
  std::shared_ptr<const DualSimplex::Basis> basis;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class Search {
 public:
  Search(const LinearProgram& lp, const SolveOptions& options)
      : lp_(lp), options_(options), propagator_(lp), start_(Clock::now()) {
    deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(
                             std::chrono::duration<double>(options.time_limit_s));
  }

  Solution run();

 private:
  bool build_relaxation();
  [[nodiscard]] double cutoff_value() const {
    if (incumbent_.empty()) return kInf;
    return incumbent_value_ -
           std::max(options_.absolute_gap, options_.relative_gap * std::abs(incumbent_value_));
  }
  [[nodiscard]] double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }
  bool try_incumbent(const Assignment& candidate);
  void rounding_heuristic(const Propagator::Domain& domain, const std::vector<double>& x);
  void apply_root_reduced_cost_fixing();
  int pick_branch(const Propagator::Domain& domain, const std::vector<double>& x) const;

  const LinearProgram& lp_;
  const SolveOptions& options_;
  Propagator propagator_;
  Clock::time_point start_;
  Clock::time_point deadline_;

  std::unique_ptr<DualSimplex> simplex_;
  double cost_scale_ = 1.0;
  bool relaxation_infeasible_ = false;

  Propagator::Domain root_domain_;
  std::vector<int> root_trail_;
  bool root_exhausted_ = false;
  bool have_root_duals_ = false;
  double root_lagrangian_ = -kInf;
  std::vector<double> root_reduced_;
  std::vector<std::uint8_t> root_at_upper_;
  std::vector<std::uint8_t> root_nonbasic_;

  Assignment incumbent_;
  double incumbent_value_ = kInf;
  std::vector<double> trace_;
};

bool Search::build_relaxation() {
  const int n = lp_.variable_count();
  const int m = static_cast<int>(lp_.constraints.size());
  detail::SparseMatrix a;
  a.rows = m;
  a.cols = n;
  std::vector<double> row_scale(m, 1.0);
  std::vector<int> count(n + 1, 0);
  for (int i = 0; i < m; ++i) {
    double largest = 0.0;
    for (const Term& t : lp_.constraints[i].terms) {
      largest = std::max(largest, std::abs(t.coef));
      ++count[t.var + 1];
    }
    if (largest > 0.0) row_scale[i] = 1.0 / largest;
  }
  a.col_start.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) a.col_start[j + 1] = a.col_start[j] + count[j + 1];
  a.col_index.resize(a.col_start[n]);
  a.col_value.resize(a.col_start[n]);
  std::vector<int> fill(a.col_start.begin(), a.col_start.end() - 1);
  std::vector<double> lower(n + m, 0.0), upper(n + m, 1.0);
  for (int i = 0; i < m; ++i) {
    const Constraint& c = lp_.constraints[i];
    double min_act = 0.0, max_act = 0.0;
    for (const Term& t : c.terms) {
      const double v = t.coef * row_scale[i];
      const int slot = fill[t.var]++;
      a.col_index[slot] = i;
      a.col_value[slot] = v;
      if (v > 0) max_act += v;
      else min_act += v;
    }
    double lo = c.sense == RowSense::LessEqual ? -kInf : c.rhs * row_scale[i];
    double hi = c.sense == RowSense::GreaterEqual ? kInf : c.rhs * row_scale[i];
    lo = std::max(lo, min_act);
    hi = std::min(hi, max_act);
    if (lo > hi + 1e-9) return false;
    if (lo > hi) lo = hi;
    lower[n + i] = -hi;
    upper[n + i] = -lo;
  }
  a.build_rows();

  std::vector<double> cost(n, 0.0);
  for (const Term& t : lp_.objective) cost[t.var] += t.coef;
  double largest = 0.0;
  for (double c : cost) largest = std::max(largest, std::abs(c));
  cost_scale_ = largest > 0.0 ? largest : 1.0;
  for (double& c : cost) c /= cost_scale_;
  simplex_ = std::make_unique<DualSimplex>(std::move(a), std::move(cost), std::move(lower),
                                           std::move(upper), options_.seed);
  return true;
}

bool Search::try_incumbent(const Assignment& candidate) {
  if (!lp_.feasible(candidate)) return false;
  const double value = lp_.evaluate(candidate);
  const double tie = 1e-12 * std::max(1.0, std::abs(incumbent_value_));
  bool better = incumbent_.empty() || value < incumbent_value_ - tie;
  if (!better && std::abs(value - incumbent_value_) <= tie && candidate < incumbent_) better = true;
  if (!better) return false;
  const bool improved = incumbent_.empty() || value < incumbent_value_;
  incumbent_ = candidate;
  incumbent_value_ = std::min(value, incumbent_value_);
  trace_.push_back(incumbent_value_);
  if (options_.log != nullptr) {
    *options_.log << "bnb event=incumbent objective=" << value << " time_s=" << elapsed() << '\n';
  }
  if (improved) apply_root_reduced_cost_fixing();
  return true;
}

void Search::apply_root_reduced_cost_fixing() {
  if (!have_root_duals_ || root_exhausted_) return;
  const double cutoff = cutoff_value();
  for (int j = 0; j < lp_.variable_count(); ++j) {
    if (root_domain_[j] >= 0 || !root_nonbasic_[j]) continue;
    const double dj = root_reduced_[j];
    int forced = -1;
    if (!root_at_upper_[j] && dj > 0 && root_lagrangian_ + dj >= cutoff) forced = 0;
    if (root_at_upper_[j] && dj < 0 && root_lagrangian_ - dj >= cutoff) forced = 1;
    if (forced < 0) continue;
    if (!propagator_.fix(root_domain_, j, forced, root_trail_)) {
      root_exhausted_ = true;
      return;
    }
  }
}

int Search::pick_branch(const Propagator::Domain& domain, const std::vector<double>& x) const {
  const int n = lp_.variable_count();
  int best = -1;
  bool best_aux = true;
  double best_score = -1.0;
  for (int j = 0; j < n; ++j) {
    if (domain[j] >= 0) continue;
    const double frac = x[j] - std::floor(x[j]);
    const double distance = std::min(frac, 1.0 - frac);
    if (distance <= kIntegralTol) continue;
    const bool aux = lp_.auxiliary[j] != 0;
    if (best >= 0 && aux && !best_aux) continue;
    const double score =
        options_.branching == Branching::MostFractional ? distance : 0.0;
    if (best < 0 || (best_aux && !aux) || score > best_score) {
      best = j;
      best_aux = aux;
      best_score = score;
    }
  }
  return best;
}

void Search::rounding_heuristic(const Propagator::Domain& domain, const std::vector<double>& x) {
  const int n = lp_.variable_count();
  Propagator::Domain work = domain;
  std::vector<int> trail;
  std::vector<int> order;
  for (int j = 0; j < n; ++j) {
    if (work[j] < 0) order.push_back(j);
  }
  auto distance = [&](int j) {
    const double v = std::clamp(x[j], 0.0, 1.0);
    return std::min(v, 1.0 - v);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return distance(a) < distance(b); });
  for (int j : order) {
    if (work[j] >= 0) continue;
    const int preferred = x[j] >= 0.5 ? 1 : 0;
    const std::size_t mark = trail.size();
    if (propagator_.fix(work, j, preferred, trail)) continue;
    Propagator::undo(work, trail, mark);
    if (!propagator_.fix(work, j, 1 - preferred, trail)) return;
  }
  Assignment candidate(n);
  for (int j = 0; j < n; ++j) candidate[j] = static_cast<std::uint8_t>(work[j] == 1);
  try_incumbent(candidate);
}

Solution Search::run() {
  Solution out;
  const int n = lp_.variable_count();
  out.root_bound = -kInf;
  out.best_bound = -kInf;

  root_domain_.assign(n, -1);
  if (!propagator_.propagate_all(root_domain_, root_trail_) || !build_relaxation()) {
    out.status = SolveStatus::Infeasible;
    out.best_bound = kInf;
    out.root_bound = kInf;
    out.wall_time_s = elapsed();
    return out;
  }
  if (static_cast<int>(options_.warm_start.size()) == n) try_incumbent(options_.warm_start);

  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  Node current;
  bool have_current = true;
  long next_id = 1;
  long nodes = 0;
  bool timed_out = false;
  bool limit_hit = false;
  const DualSimplex::Basis* loaded_basis = nullptr;
  std::vector<double> lower(n), upper(n);
  double last_report = 0.0;

  while (true) {
    if (root_exhausted_) {
      have_current = false;
      open = {};
      break;
    }
    if (!have_current) {
      if (open.empty()) break;
      current = open.top();
      open.pop();
      have_current = true;
      if (current.bound >= cutoff_value()) {
        open = {};
        break;
      }
    }
    if (Clock::now() > deadline_) {
      timed_out = true;
      break;
    }
    if ((options_.node_limit > 0 && nodes >= options_.node_limit) ||
        (options_.iteration_limit > 0 && simplex_->iterations() >= options_.iteration_limit)) {
      limit_hit = true;
      break;
    }
    ++nodes;

    Propagator::Domain domain = root_domain_;
    std::vector<int> trail;
    bool conflict = false;
    for (const auto& [var, value] : current.fixings) {
      if (!propagator_.fix(domain, var, value, trail)) {
        conflict = true;
        break;
      }
    }
    if (conflict) {
      have_current = false;
      continue;
    }
    for (int j = 0; j < n; ++j) {
      lower[j] = domain[j] == 1 ? 1.0 : 0.0;
      upper[j] = domain[j] == 0 ? 0.0 : 1.0;
    }
    simplex_->set_structural_bounds(lower, upper);
    if (current.basis && current.basis.get() != loaded_basis) {
      simplex_->set_basis(*current.basis);
      loaded_basis = current.basis.get();
    }
    const double cutoff = cutoff_value();
    const double scaled_cutoff =
        std::isfinite(cutoff) ? (cutoff - lp_.objective_offset) / cost_scale_ : kInf;
    long budget = 10'000'000;
    if (options_.iteration_limit > 0) budget = std::min(budget, options_.iteration_limit - simplex_->iterations());
    const auto result = simplex_->solve(scaled_cutoff, budget, deadline_);
    if (result == DualSimplex::Result::TimeLimit) {
      timed_out = true;
      break;
    }
    if (result == DualSimplex::Result::IterationLimit && options_.iteration_limit > 0 &&
        simplex_->iterations() >= options_.iteration_limit) {
      limit_hit = true;
      break;
    }
    if (result == DualSimplex::Result::Infeasible || result == DualSimplex::Result::Cutoff) {
      if (nodes == 1) out.root_bound = result == DualSimplex::Result::Infeasible
                                           ? kInf
                                           : lp_.objective_offset + cost_scale_ * simplex_->bound();
      have_current = false;
      continue;
    }
    const double lagrangian = lp_.objective_offset + cost_scale_ * simplex_->bound();
    const double node_bound = std::max(current.bound, lagrangian);
    const std::vector<double>& x = simplex_->values();
    const std::vector<double>& d = simplex_->reduced_costs();

    if (nodes == 1) {
      out.root_bound = lagrangian;
      have_root_duals_ = true;
      root_lagrangian_ = lagrangian;
      root_reduced_.resize(n);
      root_at_upper_.resize(n);
      root_nonbasic_.resize(n);
      for (int j = 0; j < n; ++j) {
        root_reduced_[j] = d[j] * cost_scale_;
        root_at_upper_[j] = simplex_->status(j) == DualSimplex::AtUpper;
        root_nonbasic_[j] = simplex_->status(j) != DualSimplex::Basic;
      }
      apply_root_reduced_cost_fixing();
    }
    if (options_.log != nullptr && elapsed() - last_report > 5.0) {
      last_report = elapsed();
      *options_.log << "bnb event=progress nodes=" << nodes << " open=" << open.size()
                    << " incumbent=" << incumbent_value_ << " node_bound=" << node_bound
                    << " lp_iterations=" << simplex_->iterations() << " time_s=" << last_report
                    << '\n';
    }
    if (node_bound >= cutoff_value()) {
      have_current = false;
      continue;
    }

    int branch = pick_branch(domain, x);
    if (branch < 0) {
      Assignment candidate(n);
      for (int j = 0; j < n; ++j) {
        candidate[j] = static_cast<std::uint8_t>(domain[j] >= 0 ? domain[j] == 1 : x[j] > 0.5);
      }
      if (try_incumbent(candidate) || lp_.feasible(candidate)) {
        have_current = false;
        continue;
      }
      // Integral up to tolerance but not exactly feasible: keep splitting.
      for (int j = 0; j < n && branch < 0; ++j) {
        if (domain[j] < 0) branch = j;
      }
      if (branch < 0) {
        have_current = false;
        continue;
      }
    }
    if (nodes == 1 || nodes % 25 == 0) {
      rounding_heuristic(domain, x);
      if (node_bound >= cutoff_value()) {
        have_current = false;
        continue;
      }
    }

    std::vector<std::pair<int, std::int8_t>> fixings = current.fixings;
    const double cutoff_now = cutoff_value();
    if (std::isfinite(cutoff_now)) {
      for (int j = 0; j < n; ++j) {
        if (domain[j] >= 0 || j == branch) continue;
        const auto status = simplex_->status(j);
        const double dj = d[j] * cost_scale_;
        if (status == DualSimplex::AtLower && dj > 0 && lagrangian + dj >= cutoff_now) {
          fixings.emplace_back(j, 0);
        } else if (status == DualSimplex::AtUpper && dj < 0 && lagrangian - dj >= cutoff_now) {
          fixings.emplace_back(j, 1);
        }
      }
    }
    const std::int8_t preferred = x[branch] >= 0.5 ? 1 : 0;
    Node sibling;
    sibling.bound = node_bound;
    sibling.id = next_id++;
    sibling.fixings = fixings;
    sibling.fixings.emplace_back(branch, static_cast<std::int8_t>(1 - preferred));
    if (open.size() < kMaxStoredBases) {
      sibling.basis = std::make_shared<const DualSimplex::Basis>(simplex_->basis());
    }
    open.push(std::move(sibling));

    current.bound = node_bound;
    current.id = next_id++;
    current.fixings = std::move(fixings);
    current.fixings.emplace_back(branch, preferred);
    current.basis = nullptr;
    loaded_basis = nullptr;
  }

  out.node_count = nodes;
  out.incumbent_trace = trace_;
  out.assignment = incumbent_;
  out.objective_value = incumbent_.empty() ? kInf : incumbent_value_;
  if (timed_out || limit_hit) {
    double bound = have_current ? current.bound : kInf;
    while (!open.empty()) {
      bound = std::min(bound, open.top().bound);
      open.pop();
    }
    out.best_bound = std::min(bound, out.objective_value);
    out.status = timed_out ? SolveStatus::TimedOut : SolveStatus::BoundReached;
  } else if (incumbent_.empty()) {
    out.status = SolveStatus::Infeasible;
    out.best_bound = kInf;
  } else {
    out.status = SolveStatus::Optimal;
    out.best_bound = std::min(out.objective_value, std::max(out.root_bound, cutoff_value()));
  }
  if (out.root_bound == -kInf && out.status == SolveStatus::Infeasible) out.root_bound = kInf;
  out.wall_time_s = elapsed();
  if (options_.log != nullptr) {
    *options_.log << "bnb event=done status=" << to_string(out.status) << " nodes=" << nodes
                  << " lp_iterations=" << (simplex_ ? simplex_->iterations() : 0)
                  << " root_bound=" << out.root_bound << " best_bound=" << out.best_bound
                  << " objective=" << out.objective_value << " time_s=" << out.wall_time_s
                  << '\n';
  }
  return out;
}

}  // namespace

Solution solve(const LinearProgram& lp, const SolveOptions& options) {
  lp.validate();
  if (!(options.time_limit_s > 0.0)) throw std::invalid_argument("time limit must be positive");
  if (options.absolute_gap < 0.0 || options.relative_gap < 0.0) {
    throw std::invalid_argument("gap tolerances must be non-negative");
  }
  Search search(lp, options);
  return search.run();
}

}  // namespace medge
