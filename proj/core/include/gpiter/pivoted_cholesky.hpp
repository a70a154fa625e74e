#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace gpiter {

class KernelOperator;

// Low-rank preconditioner P = L L^T + sigma^2 I built from a greedy
// diagonal-pivoted partial Cholesky of the noiseless kernel matrix K.
// P^-1 is applied through the Woodbury identity in O(n * rank) per vector.
class PivotedCholeskyPreconditioner {
 public:
  /// Rank 0 yields P^-1 = sigma^-2 I. A non-positive pivot stops the
  /// factorisation early at the achieved rank.
  PivotedCholeskyPreconditioner(const KernelOperator& op, int rank);

  int achieved_rank() const { return achieved_rank_; }
  bool stopped_early() const { return stopped_early_; }
  const Eigen::MatrixXd& factor() const { return factor_; }

  /// P^-1 * V.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& v) const;

 private:
  Eigen::MatrixXd factor_;  // n x achieved_rank
  Eigen::LLT<Eigen::MatrixXd> small_chol_;  // of sigma^2 I_r + L^T L
  double noise_variance_ = 0.0;
  int achieved_rank_ = 0;
  bool stopped_early_ = false;
};

}  // namespace gpiter
