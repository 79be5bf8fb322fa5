#include "dual_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace medge::detail {

namespace {
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorInterval = 100;

// Deterministic value in [0, 1) for a (seed, index) pair.
double hashed_unit(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}
}  // namespace

void SparseMatrix::build_rows() {
  row_start.assign(rows + 1, 0);
  for (int i : col_index) ++row_start[i + 1];
  for (int i = 0; i < rows; ++i) row_start[i + 1] += row_start[i];
  row_index.resize(col_index.size());
  row_value.resize(col_index.size());
  std::vector<int> fill(row_start.begin(), row_start.end() - 1);
  for (int j = 0; j < cols; ++j) {
    for (int e = col_start[j]; e < col_start[j + 1]; ++e) {
      const int slot = fill[col_index[e]]++;
      row_index[slot] = j;
      row_value[slot] = col_value[e];
    }
  }
}

DualSimplex::DualSimplex(SparseMatrix matrix, std::vector<double> cost, std::vector<double> lower,
                         std::vector<double> upper, std::uint64_t seed)
    : a_(std::move(matrix)),
      n_(a_.cols),
      m_(a_.rows),
      cost_(std::move(cost)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      seed_(seed) {
  const int total = n_ + m_;
  cost_.resize(total, 0.0);
  work_cost_ = cost_;
  x_.assign(total, 0.0);
  d_.assign(total, 0.0);
  status_.assign(total, AtLower);
  position_of_.assign(total, -1);
  head_.resize(m_);
  for (int j = 0; j < n_; ++j) {
    status_[j] = cost_[j] >= 0.0 ? AtLower : AtUpper;
    x_[j] = status_[j] == AtLower ? lower_[j] : upper_[j];
  }
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    status_[n_ + i] = Basic;
    position_of_[n_ + i] = i;
  }
  weight_.assign(m_, 1.0);
  rho_.assign(m_, 0.0);
  alpha_row_.assign(total, 0.0);
  y_.assign(m_, 0.0);
}

void DualSimplex::set_structural_bounds(const std::vector<double>& lower,
                                        const std::vector<double>& upper) {
  for (int j = 0; j < n_; ++j) {
    lower_[j] = lower[j];
    upper_[j] = upper[j];
    if (status_[j] == AtLower) x_[j] = lower_[j];
    else if (status_[j] == AtUpper) x_[j] = upper_[j];
  }
  primal_dirty_ = true;
}

void DualSimplex::set_basis(const Basis& basis) {
  head_ = basis.head;
  status_ = basis.status;
  std::fill(position_of_.begin(), position_of_.end(), -1);
  for (int k = 0; k < m_; ++k) position_of_[head_[k]] = k;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == AtLower) x_[j] = lower_[j];
    else if (status_[j] == AtUpper) x_[j] = upper_[j];
  }
  weight_.assign(m_, 1.0);
  factor_valid_ = false;
}

void DualSimplex::column_into(int j, std::vector<double>& dense, double scale) const {
  if (j < n_) {
    for (int e = a_.col_start[j]; e < a_.col_start[j + 1]; ++e) {
      dense[a_.col_index[e]] += scale * a_.col_value[e];
    }
  } else {
    dense[j - n_] += scale;
  }
}

void DualSimplex::refactor() {
  auto source = [this](int k, BasisFactor::SparseColumn& out) {
    out.index.clear();
    out.value.clear();
    const int j = head_[k];
    if (j < n_) {
      for (int e = a_.col_start[j]; e < a_.col_start[j + 1]; ++e) {
        out.index.push_back(a_.col_index[e]);
        out.value.push_back(a_.col_value[e]);
      }
    } else {
      out.index.push_back(j - n_);
      out.value.push_back(1.0);
    }
  };
  const auto replaced = factor_.factor(m_, source);
  for (const auto& rep : replaced) {
    const int old = head_[rep.position];
    const int logical = n_ + rep.row;
    position_of_[old] = -1;
    status_[old] = std::abs(x_[old] - lower_[old]) <= std::abs(x_[old] - upper_[old]) ? AtLower
                                                                                     : AtUpper;
    x_[old] = status_[old] == AtLower ? lower_[old] : upper_[old];
    if (status_[logical] != Basic) position_of_[logical] = -1;
    head_[rep.position] = logical;
    position_of_[logical] = rep.position;
    status_[logical] = Basic;
    weight_[rep.position] = 1.0;
  }
  factor_valid_ = true;
  ++refactorizations_;
  compute_primal();
  compute_duals();
}

void DualSimplex::compute_primal() {
  std::vector<double> rhs(m_, 0.0);
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] != Basic && x_[j] != 0.0) column_into(j, rhs, -x_[j]);
  }
  factor_.ftran(rhs);
  for (int k = 0; k < m_; ++k) x_[head_[k]] = rhs[k];
  primal_dirty_ = false;
}

void DualSimplex::compute_duals() {
  std::vector<double> v(m_);
  for (int k = 0; k < m_; ++k) v[k] = work_cost_[head_[k]];
  factor_.btran(v);
  y_ = v;
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == Basic) {
      d_[j] = 0.0;
      continue;
    }
    double dj = work_cost_[j];
    for (int e = a_.col_start[j]; e < a_.col_start[j + 1]; ++e) dj -= a_.col_value[e] * y_[a_.col_index[e]];
    d_[j] = dj;
  }
  for (int i = 0; i < m_; ++i) d_[n_ + i] = status_[n_ + i] == Basic ? 0.0 : -y_[i];
}

double DualSimplex::lagrangian_bound(const std::vector<double>& y) const {
  double bound = 0.0;
  for (int j = 0; j < n_; ++j) {
    double dj = cost_[j];
    for (int e = a_.col_start[j]; e < a_.col_start[j + 1]; ++e) dj -= a_.col_value[e] * y[a_.col_index[e]];
    bound += std::min(dj * lower_[j], dj * upper_[j]);
  }
  for (int i = 0; i < m_; ++i) {
    const double dj = -y[i];
    bound += std::min(dj * lower_[n_ + i], dj * upper_[n_ + i]);
  }
  return bound;
}

bool DualSimplex::restore_dual_feasibility() {
  bool flipped = false;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == Basic || lower_[j] == upper_[j]) continue;
    if (status_[j] == AtLower && d_[j] < -kDualTol) {
      status_[j] = AtUpper;
      x_[j] = upper_[j];
      flipped = true;
    } else if (status_[j] == AtUpper && d_[j] > kDualTol) {
      status_[j] = AtLower;
      x_[j] = lower_[j];
      flipped = true;
    }
  }
  return flipped;
}

bool DualSimplex::verify_infeasible(int leaving, const std::vector<int>& touched) const {
  // Every point satisfies x_leaving + sum_N alpha_j x_j = 0. Check that the
  // box makes this identity impossible.
  double lo = std::min(lower_[leaving], upper_[leaving]);
  double hi = std::max(lower_[leaving], upper_[leaving]);
  double magnitude = std::abs(lo) + std::abs(hi);
  for (int j : touched) {
    if (status_[j] == Basic) continue;
    const double a = alpha_row_[j];
    lo += std::min(a * lower_[j], a * upper_[j]);
    hi += std::max(a * lower_[j], a * upper_[j]);
    magnitude += std::abs(a) * (std::abs(lower_[j]) + std::abs(upper_[j]));
  }
  const double tol = 1e-9 * (1.0 + magnitude);
  return lo > tol || hi < -tol;
}

double DualSimplex::objective() const {
  double value = 0.0;
  for (int j = 0; j < n_; ++j) value += cost_[j] * x_[j];
  return value;
}

DualSimplex::Result DualSimplex::solve(double cutoff, long iteration_limit,
                                       std::chrono::steady_clock::time_point deadline) {
  const long first_iteration = iterations_;
  if (!factor_valid_) refactor();
  else if (primal_dirty_) compute_primal();

  // Cost perturbation against dual degeneracy; removed before returning.
  double max_cost = 0.0;
  for (int j = 0; j < n_; ++j) max_cost = std::max(max_cost, std::abs(cost_[j]));
  if (max_cost == 0.0) max_cost = 1.0;
  for (int j = 0; j < n_; ++j) {
    const double eps = (1e-7 * max_cost + 1e-6 * std::abs(cost_[j])) *
                       (0.5 + 0.5 * hashed_unit(seed_, static_cast<std::uint64_t>(j)));
    work_cost_[j] = cost_[j] + (status_[j] == AtUpper ? -eps : eps);
  }
  perturbed_ = true;
  compute_duals();
  if (restore_dual_feasibility()) compute_primal();

  const int total = n_ + m_;
  std::vector<int> touched;
  std::vector<std::uint8_t> in_touched(total, 0);
  std::fill(alpha_row_.begin(), alpha_row_.end(), 0.0);
  std::vector<std::pair<double, int>> candidates;
  std::vector<double> alpha_col(m_), tau(m_), flip(m_);
  int numerical_retries = 0;

  auto finish_unperturbed = [&]() {
    for (int j = 0; j < n_; ++j) work_cost_[j] = cost_[j];
    perturbed_ = false;
  };

  while (true) {
    if (iterations_ - first_iteration >= iteration_limit) {
      finish_unperturbed();
      compute_duals();
      bound_ = lagrangian_bound(y_);
      return Result::IterationLimit;
    }
    if (((iterations_ - first_iteration) & 63) == 63 && std::chrono::steady_clock::now() > deadline) {
      finish_unperturbed();
      compute_duals();
      bound_ = lagrangian_bound(y_);
      return Result::TimeLimit;
    }
    if (factor_.update_count() >= kRefactorInterval ||
        factor_.eta_nonzeros() > 4 * factor_.factor_nonzeros() + 10 * m_) {
      refactor();
      if (restore_dual_feasibility()) compute_primal();
    }

    // Leaving row by dual steepest edge.
    int r = -1;
    double best = 0.0;
    for (int k = 0; k < m_; ++k) {
      const int j = head_[k];
      const double v = x_[j];
      double infeas = 0.0;
      if (v < lower_[j] - kPrimalTol) infeas = lower_[j] - v;
      else if (v > upper_[j] + kPrimalTol) infeas = v - upper_[j];
      if (infeas > 0.0) {
        const double score = infeas * infeas / weight_[k];
        if (score > best) {
          best = score;
          r = k;
        }
      }
    }
    if (r < 0) {
      if (perturbed_) {
        finish_unperturbed();
        compute_duals();
        if (restore_dual_feasibility()) compute_primal();
        continue;
      }
      bound_ = lagrangian_bound(y_);
      return Result::Optimal;
    }

    const int leaving = head_[r];
    const bool to_lower = x_[leaving] < lower_[leaving];
    const double target = to_lower ? lower_[leaving] : upper_[leaving];
    const double sigma = to_lower ? -1.0 : 1.0;
    const double delta = x_[leaving] - target;

    std::fill(rho_.begin(), rho_.end(), 0.0);
    rho_[r] = 1.0;
    factor_.btran(rho_);
    double rho_norm = 0.0;
    for (int i = 0; i < m_; ++i) rho_norm += rho_[i] * rho_[i];
    weight_[r] = std::max(rho_norm, 1e-12);

    for (int j : touched) {
      alpha_row_[j] = 0.0;
      in_touched[j] = 0;
    }
    touched.clear();
    for (int i = 0; i < m_; ++i) {
      const double ri = rho_[i];
      if (ri == 0.0) continue;
      for (int e = a_.row_start[i]; e < a_.row_start[i + 1]; ++e) {
        const int j = a_.row_index[e];
        if (status_[j] == Basic) continue;
        if (!in_touched[j]) {
          in_touched[j] = 1;
          touched.push_back(j);
        }
        alpha_row_[j] += ri * a_.row_value[e];
      }
      const int logical = n_ + i;
      if (status_[logical] != Basic) {
        in_touched[logical] = 1;
        touched.push_back(logical);
        alpha_row_[logical] = ri;
      }
    }

    candidates.clear();
    for (int j : touched) {
      if (lower_[j] == upper_[j]) continue;
      const double a = alpha_row_[j];
      if (std::abs(a) < kPivotTol) continue;
      const double at = sigma * a;
      if (status_[j] == AtLower && at > 0.0) {
        candidates.emplace_back(std::max(d_[j], 0.0) / at, j);
      } else if (status_[j] == AtUpper && at < 0.0) {
        candidates.emplace_back(std::max(-d_[j], 0.0) / -at, j);
      }
    }
    std::sort(candidates.begin(), candidates.end());

    double slope = std::abs(delta);
    std::size_t pass = 0;
    while (pass < candidates.size()) {
      const int j = candidates[pass].second;
      const double step = std::abs(alpha_row_[j]) * (upper_[j] - lower_[j]);
      if (slope - step > 0.0) {
        slope -= step;
        ++pass;
      } else {
        break;
      }
    }
    if (pass == candidates.size()) {
      if (verify_infeasible(leaving, touched)) {
        finish_unperturbed();
        compute_duals();
        bound_ = std::numeric_limits<double>::infinity();
        return Result::Infeasible;
      }
      if (!candidates.empty()) {
        // The slope ran out only by rounding; pivot on the last breakpoint.
        pass = candidates.size() - 1;
      } else if (numerical_retries < 3) {
        ++numerical_retries;
        refactor();
        if (restore_dual_feasibility()) compute_primal();
        continue;
      } else {
        finish_unperturbed();
        compute_duals();
        bound_ = lagrangian_bound(y_);
        return Result::IterationLimit;
      }
    }

    // Harris pass over the remaining breakpoints: prefer a large pivot.
    double harris = std::numeric_limits<double>::infinity();
    for (std::size_t k = pass; k < candidates.size() && candidates[k].first <= harris; ++k) {
      const int j = candidates[k].second;
      const double dj = status_[j] == AtLower ? std::max(d_[j], 0.0) : std::max(-d_[j], 0.0);
      harris = std::min(harris, (dj + kDualTol) / std::abs(alpha_row_[j]));
    }
    std::size_t chosen = pass;
    for (std::size_t k = pass; k < candidates.size() && candidates[k].first <= harris; ++k) {
      if (std::abs(alpha_row_[candidates[k].second]) >
          std::abs(alpha_row_[candidates[chosen].second])) {
        chosen = k;
      }
    }
    const int entering = candidates[chosen].second;
    const double t = candidates[chosen].first;

    std::fill(alpha_col.begin(), alpha_col.end(), 0.0);
    column_into(entering, alpha_col, 1.0);
    factor_.ftran(alpha_col);
    const double pivot = alpha_col[r];
    if (std::abs(pivot - alpha_row_[entering]) > 1e-7 * (1.0 + std::abs(pivot)) ||
        std::abs(pivot) < kPivotTol) {
      if (numerical_retries < 5) {
        ++numerical_retries;
        refactor();
        if (restore_dual_feasibility()) compute_primal();
        continue;
      }
    }

    if (pass > 0) {
      std::fill(flip.begin(), flip.end(), 0.0);
      for (std::size_t k = 0; k < pass; ++k) {
        const int j = candidates[k].second;
        const double next = status_[j] == AtLower ? upper_[j] : lower_[j];
        column_into(j, flip, next - x_[j]);
        x_[j] = next;
        status_[j] = status_[j] == AtLower ? AtUpper : AtLower;
      }
      factor_.ftran(flip);
      for (int k = 0; k < m_; ++k) {
        if (flip[k] != 0.0) x_[head_[k]] -= flip[k];
      }
    }

    const double theta = (x_[leaving] - target) / pivot;
    for (int k = 0; k < m_; ++k) {
      if (alpha_col[k] != 0.0) x_[head_[k]] -= theta * alpha_col[k];
    }
    x_[entering] += theta;
    x_[leaving] = target;

    for (int j : touched) {
      if (status_[j] != Basic) d_[j] -= t * sigma * alpha_row_[j];
    }
    d_[entering] = 0.0;
    d_[leaving] = -sigma * t;

    std::copy(rho_.begin(), rho_.end(), tau.begin());
    factor_.ftran(tau);
    const double wr = weight_[r];
    for (int k = 0; k < m_; ++k) {
      const double a = alpha_col[k];
      if (k == r || a == 0.0) continue;
      const double ratio = a / pivot;
      const double w = weight_[k] - 2.0 * ratio * tau[k] + ratio * ratio * wr;
      weight_[k] = std::max(w, 1e-8);
    }
    weight_[r] = std::max(wr / (pivot * pivot), 1e-12);

    factor_.update(r, alpha_col);
    head_[r] = entering;
    position_of_[entering] = r;
    position_of_[leaving] = -1;
    status_[entering] = Basic;
    status_[leaving] = to_lower ? AtLower : AtUpper;
    ++iterations_;
    numerical_retries = 0;

    if (std::isfinite(cutoff) && (iterations_ - first_iteration) % 25 == 0) {
      std::vector<double> v(m_);
      for (int k = 0; k < m_; ++k) v[k] = work_cost_[head_[k]];
      factor_.btran(v);
      const double b = lagrangian_bound(v);
      if (b >= cutoff) {
        finish_unperturbed();
        compute_duals();
        bound_ = std::max(b, lagrangian_bound(y_));
        return Result::Cutoff;
      }
    }
  }
}

}  // namespace medge::detail
