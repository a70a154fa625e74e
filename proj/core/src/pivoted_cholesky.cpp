#include "gpiter/pivoted_cholesky.hpp"

#include <cmath>
#include <stdexcept>

#include "gpiter/kernel.hpp"

namespace gpiter {

PivotedCholeskyPreconditioner::PivotedCholeskyPreconditioner(const KernelOperator& op, int rank) {
  const int n = op.size();
  if (rank < 0 || rank > n) {
    throw std::invalid_argument("PivotedCholeskyPreconditioner: rank must be in [0, n]");
  }
  noise_variance_ = op.params().noise_variance();
  Eigen::VectorXd diag = op.kernel_diagonal();
  factor_.resize(n, rank);
  int m = 0;
  for (; m < rank; ++m) {
    int pivot = 0;
    double best = diag[0];
    for (int i = 1; i < n; ++i) {
      if (diag[i] > best) {
        best = diag[i];
        pivot = i;
      }
    }
    if (!(best > 0.0)) {
      stopped_early_ = true;
      break;
    }
    Eigen::VectorXd column = op.kernel_column(pivot);
    if (m > 0) {
      column.noalias() -= factor_.leftCols(m) * factor_.row(pivot).head(m).transpose();
    }
    column /= std::sqrt(best);
    factor_.col(m) = column;
    diag.array() -= column.array().square();
    diag[pivot] = 0.0;  // pivot is fully resolved; clamp round-off
  }
  achieved_rank_ = m;
  factor_.conservativeResize(n, achieved_rank_);
  if (achieved_rank_ > 0) {
    Eigen::MatrixXd small = factor_.transpose() * factor_;
    small.diagonal().array() += noise_variance_;
    small_chol_.compute(small);
    if (small_chol_.info() != Eigen::Success) {
      throw std::runtime_error("PivotedCholeskyPreconditioner: inner factorisation failed");
    }
  }
}

Eigen::MatrixXd PivotedCholeskyPreconditioner::apply(const Eigen::MatrixXd& v) const {
  if (achieved_rank_ == 0) return v / noise_variance_;
  // (L L^T + s2 I)^-1 = s2^-1 (I - L (s2 I + L^T L)^-1 L^T)
  const Eigen::MatrixXd inner = small_chol_.solve(factor_.transpose() * v);
  return (v - factor_ * inner) / noise_variance_;
}

}  // namespace gpiter
