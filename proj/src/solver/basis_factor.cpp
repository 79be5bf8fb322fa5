#include "basis_factor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace medge::detail {

namespace {
constexpr double kDrop = 1e-14;
constexpr double kSingular = 1e-9;
constexpr double kThreshold = 0.1;
}  // namespace

std::vector<BasisFactor::Replacement> BasisFactor::factor(int dimension,
                                                          const ColumnSource& source) {
  dim_ = dimension;
  pivot_row_.clear();
  position_.clear();
  diagonal_.clear();
  l_start_.assign(1, 0);
  l_index_.clear();
  l_value_.clear();
  u_start_.assign(1, 0);
  u_index_.clear();
  u_value_.clear();
  eta_position_.clear();
  eta_pivot_.clear();
  eta_start_.assign(1, 0);
  eta_index_.clear();
  eta_value_.clear();
  scratch_.assign(dim_, 0.0);

  const int m = dim_;
  std::vector<SparseColumn> columns(m);
  std::vector<int> row_count(m, 0);
  for (int k = 0; k < m; ++k) {
    source(k, columns[k]);
    for (int i : columns[k].index) ++row_count[i];
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return columns[a].index.size() < columns[b].index.size();
  });

  std::vector<int> step_of_row(m, -1);
  std::vector<double> x(m, 0.0);
  std::vector<int> mark(m, -1);
  std::vector<int> visited(m, -1);
  std::vector<int> nonzeros;
  std::vector<int> reached;
  std::vector<int> stack;
  std::vector<int> singular_positions;

  for (int pass = 0; pass < m; ++pass) {
    const int pos = order[pass];
    const SparseColumn& col = columns[pos];
    nonzeros.clear();
    for (std::size_t e = 0; e < col.index.size(); ++e) {
      const int i = col.index[e];
      if (mark[i] != pass) {
        mark[i] = pass;
        x[i] = 0.0;
        nonzeros.push_back(i);
      }
      x[i] += col.value[e];
    }

    // Steps whose L column can touch this vector.
    reached.clear();
    for (int start : col.index) {
      if (step_of_row[start] < 0 || visited[step_of_row[start]] == pass) continue;
      stack.push_back(start);
      while (!stack.empty()) {
        const int row = stack.back();
        stack.pop_back();
        const int t = step_of_row[row];
        if (t < 0 || visited[t] == pass) continue;
        visited[t] = pass;
        reached.push_back(t);
        for (int e = l_start_[t]; e < l_start_[t + 1]; ++e) {
          const int next = l_index_[e];
          if (step_of_row[next] >= 0 && visited[step_of_row[next]] != pass) stack.push_back(next);
        }
      }
    }
    std::sort(reached.begin(), reached.end());
    for (int t : reached) {
      // A reached step may see no fill when an earlier one cancelled.
      const int row = pivot_row_[t];
      if (mark[row] != pass) continue;
      const double xt = x[row];
      if (xt == 0.0) continue;
      for (int e = l_start_[t]; e < l_start_[t + 1]; ++e) {
        const int i = l_index_[e];
        if (mark[i] != pass) {
          mark[i] = pass;
          x[i] = 0.0;
          nonzeros.push_back(i);
        }
        x[i] -= l_value_[e] * xt;
      }
    }

    double largest = 0.0;
    for (int i : nonzeros) {
      if (step_of_row[i] < 0) largest = std::max(largest, std::abs(x[i]));
    }
    if (largest < kSingular) {
      singular_positions.push_back(pos);
      continue;
    }
    int pivot = -1;
    for (int i : nonzeros) {
      if (step_of_row[i] >= 0 || std::abs(x[i]) < kThreshold * largest) continue;
      if (pivot < 0 || row_count[i] < row_count[pivot] ||
          (row_count[i] == row_count[pivot] &&
           (std::abs(x[i]) > std::abs(x[pivot]) ||
            (std::abs(x[i]) == std::abs(x[pivot]) && i < pivot)))) {
        pivot = i;
      }
    }
    const int step = static_cast<int>(pivot_row_.size());
    const double piv = x[pivot];
    pivot_row_.push_back(pivot);
    position_.push_back(pos);
    diagonal_.push_back(piv);
    for (int i : nonzeros) {
      if (i == pivot) continue;
      if (step_of_row[i] >= 0) {
        if (std::abs(x[i]) > kDrop) {
          u_index_.push_back(step_of_row[i]);
          u_value_.push_back(x[i]);
        }
      } else if (std::abs(x[i]) > kDrop) {
        l_index_.push_back(i);
        l_value_.push_back(x[i] / piv);
      }
    }
    l_start_.push_back(static_cast<int>(l_index_.size()));
    u_start_.push_back(static_cast<int>(u_index_.size()));
    step_of_row[pivot] = step;
    for (int i : col.index) --row_count[i];
  }

  std::vector<Replacement> replaced;
  if (!singular_positions.empty()) {
    std::sort(singular_positions.begin(), singular_positions.end());
    int row = 0;
    for (int pos : singular_positions) {
      while (step_of_row[row] >= 0) ++row;
      step_of_row[row] = static_cast<int>(pivot_row_.size());
      pivot_row_.push_back(row);
      position_.push_back(pos);
      diagonal_.push_back(1.0);
      l_start_.push_back(static_cast<int>(l_index_.size()));
      u_start_.push_back(static_cast<int>(u_index_.size()));
      replaced.push_back({pos, row});
    }
  }
  return replaced;
}

void BasisFactor::ftran(std::vector<double>& work) const {
  const int m = dim_;
  for (int t = 0; t < m; ++t) {
    const double w = work[pivot_row_[t]];
    if (w == 0.0) continue;
    for (int e = l_start_[t]; e < l_start_[t + 1]; ++e) work[l_index_[e]] -= l_value_[e] * w;
  }
  for (int k = m - 1; k >= 0; --k) {
    const int p = pivot_row_[k];
    double y = work[p];
    if (y == 0.0) continue;
    y /= diagonal_[k];
    work[p] = y;
    for (int e = u_start_[k]; e < u_start_[k + 1]; ++e) {
      work[pivot_row_[u_index_[e]]] -= u_value_[e] * y;
    }
  }
  for (int k = 0; k < m; ++k) scratch_[position_[k]] = work[pivot_row_[k]];
  work.swap(scratch_);

  const int etas = static_cast<int>(eta_pivot_.size());
  for (int q = 0; q < etas; ++q) {
    const int r = eta_position_[q];
    double yr = work[r];
    if (yr == 0.0) continue;
    yr /= eta_pivot_[q];
    work[r] = yr;
    for (int e = eta_start_[q]; e < eta_start_[q + 1]; ++e) work[eta_index_[e]] -= eta_value_[e] * yr;
  }
}

void BasisFactor::btran(std::vector<double>& work) const {
  const int m = dim_;
  for (int q = static_cast<int>(eta_pivot_.size()) - 1; q >= 0; --q) {
    const int r = eta_position_[q];
    double s = work[r];
    for (int e = eta_start_[q]; e < eta_start_[q + 1]; ++e) s -= eta_value_[e] * work[eta_index_[e]];
    work[r] = s / eta_pivot_[q];
  }
  std::vector<double>& v = scratch_;
  for (int k = 0; k < m; ++k) v[k] = work[position_[k]];
  for (int k = 0; k < m; ++k) {
    double s = v[k];
    for (int e = u_start_[k]; e < u_start_[k + 1]; ++e) s -= u_value_[e] * v[u_index_[e]];
    v[k] = s / diagonal_[k];
  }
  for (int t = m - 1; t >= 0; --t) {
    double s = v[t];
    for (int e = l_start_[t]; e < l_start_[t + 1]; ++e) s -= l_value_[e] * work[l_index_[e]];
    work[pivot_row_[t]] = s;
  }
}

void BasisFactor::update(int position, const std::vector<double>& alpha) {
  eta_position_.push_back(position);
  eta_pivot_.push_back(alpha[position]);
  for (int i = 0; i < dim_; ++i) {
    if (i != position && std::abs(alpha[i]) > 1e-12) {
      eta_index_.push_back(i);
      eta_value_.push_back(alpha[i]);
    }
  }
  eta_start_.push_back(static_cast<int>(eta_index_.size()));
}

}  // namespace medge::detail
