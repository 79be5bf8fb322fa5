#pragma once

#include <functional>
#include <vector>

namespace medge::detail {

// Sparse LU of a square basis matrix, left-looking with threshold pivoting,
// followed by product-form (eta) updates after each basis change.
//
// Vectors handed to ftran are indexed by row; the result is indexed by basis
// position. btran goes the other way.
class BasisFactor {
 public:
  struct SparseColumn {
    std::vector<int> index;
    std::vector<double> value;
  };
  // Fills the column of the basis at a given position.
  using ColumnSource = std::function<void(int position, SparseColumn& out)>;

  // A position whose column was dependent; it has been replaced by the unit
  // column of `row`.
  struct Replacement {
    int position;
    int row;
  };

  std::vector<Replacement> factor(int dimension, const ColumnSource& source);

  void ftran(std::vector<double>& work) const;
  void btran(std::vector<double>& work) const;

  // `alpha` is ftran of the entering column; `position` is the leaving slot.
  void update(int position, const std::vector<double>& alpha);

  [[nodiscard]] int update_count() const { return static_cast<int>(eta_pivot_.size()); }
  [[nodiscard]] long eta_nonzeros() const { return static_cast<long>(eta_index_.size()); }
  [[nodiscard]] long factor_nonzeros() const {
    return static_cast<long>(l_index_.size() + u_index_.size()) + dim_;
  }

 private:
  int dim_ = 0;
  // Per elimination step.
  std::vector<int> pivot_row_;
  std::vector<int> position_;
  std::vector<double> diagonal_;
  std::vector<int> l_start_;
  std::vector<int> l_index_;  // row indices
  std::vector<double> l_value_;
  std::vector<int> u_start_;
  std::vector<int> u_index_;  // earlier step indices
  std::vector<double> u_value_;

  std::vector<int> eta_position_;
  std::vector<double> eta_pivot_;
  std::vector<int> eta_start_;
  std::vector<int> eta_index_;
  std::vector<double> eta_value_;

  mutable std::vector<double> scratch_;
};

}  // namespace medge::detail
