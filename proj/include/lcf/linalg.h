#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lcf/common.h"

namespace lcf {

class SingularDesign : public NumericalError {
 public:
  SingularDesign(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

// Sufficient statistics of a least-squares problem: XᵀX, Xᵀt, tᵀt and the
// row count. Rows are added in a fixed order so the sums are reproducible.
class GramSystem {
 public:
  explicit GramSystem(Eigen::Index cols);

  void add_row(const Vector& features, double target);
  Eigen::Index cols() const { return gram_.rows(); }
  std::size_t rows() const { return rows_; }
  const Matrix& gram() const { return gram_; }
  const Vector& xty() const { return xty_; }
  double tty() const { return tty_; }

  // Mean squared residual (1/rows)·‖X c − t‖².
  double loss(const Vector& coef) const;

  // Same system with column `col` fixed at `value` and removed.
  GramSystem fix_column(Eigen::Index col, double value) const;
  // Subsystem over the listed columns.
  GramSystem select(const std::vector<Eigen::Index>& cols) const;

 private:
  GramSystem() = default;
  Matrix gram_;
  Vector xty_;
  double tty_ = 0.0;
  std::size_t rows_ = 0;
};

struct SolveInfo {
  double condition = 0.0;  // of the column-scaled Gram matrix
  double loss = 0.0;
};

// Exact minimiser via Cholesky on the normal equations. Raises
// SingularDesign when the column-scaled Gram matrix has condition number
// above max_condition.
Vector solve_normal_equations(const GramSystem& sys, SolveInfo* info = nullptr,
                              double max_condition = 1e12);

struct DescentConfig {
  double lr = 1e-3;
  std::size_t epochs = 2000;
  bool adam = true;
  // When set, coefficient `bounded_column` is reparameterised as
  // bound·sigmoid(s) and s is optimised instead.
  std::optional<Eigen::Index> bounded_column;
  double bound = 1.0;
};

// Full-batch descent on the mean squared residual, starting at `init`
// (given in coefficient space). Returns coefficients.
Vector descend(const GramSystem& sys, const DescentConfig& cfg, Vector init);

// Ordinary least squares of t on the rows of X (a column of ones is not
// added implicitly).
Vector least_squares(const Matrix& X, const Vector& t, SolveInfo* info = nullptr);

}  // namespace lcf
