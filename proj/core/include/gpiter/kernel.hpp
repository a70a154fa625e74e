#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gpiter/dataset.hpp"
#include "gpiter/hyperparameters.hpp"

namespace gpiter {

/// Matern-3/2 kernel value for a single pair of points, with per-dimension
/// lengthscales applied inside the distance (ARD).
double matern32(const Eigen::VectorXd& x, const Eigen::VectorXd& x2, const Hyperparameters& hp);

/// Dense cross-covariance k(P, X), p x n. Intended for small p tiles.
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& points, const Eigen::MatrixXd& inputs,
                             const Hyperparameters& hp);

/// k(P, X) * v without materialising more than one row tile at a time.
Eigen::VectorXd cross_kernel_apply(const Eigen::MatrixXd& points, const Eigen::MatrixXd& inputs,
                                   const Hyperparameters& hp, const Eigen::VectorXd& v,
                                   int block_rows = 1024);

struct KernelOperatorOptions {
  int block_rows = 1024;   // rows of H materialised per tile
  bool dense_cache = false;  // hold H in memory; only sensible at small n
};

// Matrix-free handle over (dataset, hyperparameters) for the regularised
// kernel matrix H = K + sigma^2 I. Immutable after construction and safe to
// share across threads. All products accumulate each output element in a
// fixed order (ascending training index), so results do not depend on the
// configured block size.
class KernelOperator {
 public:
  KernelOperator(std::shared_ptr<const Dataset> data, Hyperparameters hp,
                 KernelOperatorOptions options = {});

  int size() const { return n_; }
  int param_count() const { return hp_.count(); }
  const Hyperparameters& params() const { return hp_; }
  const Dataset& data() const { return *data_; }
  std::shared_ptr<const Dataset> data_ptr() const { return data_; }
  int block_rows() const { return options_.block_rows; }

  /// H * V.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& v) const;

  /// H[rows, :] * V, rows given as indices into the training set.
  Eigen::MatrixXd apply_rows(const std::vector<int>& rows, const Eigen::MatrixXd& v) const;

  /// H[:, c0:c0+len] * U with U of height len.
  Eigen::MatrixXd apply_columns(int c0, int len, const Eigen::MatrixXd& u) const;

  /// Dense H[r0:r0+rows, c0:c0+cols]; small blocks only.
  Eigen::MatrixXd dense_block(int r0, int rows, int c0, int cols) const;

  /// Full dense H. Explicit request; callers enforce their own size caps.
  Eigen::MatrixXd dense() const;

  /// Column i of K (no noise term), used by the pivoted Cholesky factoriser.
  Eigen::VectorXd kernel_column(int i) const;

  /// diag(K); constant signal_scale^2 for this kernel.
  Eigen::VectorXd kernel_diagonal() const;

  /// (dH / dtheta_k) * V, derivative taken in the constrained parameter.
  Eigen::MatrixXd derivative_apply(int k, const Eigen::MatrixXd& v) const;

  // sum_j u_j^T (dH/dtheta_k) w_j for all k in one pass over kernel tiles.
  // U and W must be n x s with matching s.
  Eigen::VectorXd derivative_quadratic_forms(const Eigen::MatrixXd& u,
                                             const Eigen::MatrixXd& w) const;

  // Same contraction for several (U, W) pairs sharing one pass over the
  // kernel tiles, which dominate the cost. Returns one vector per pair.
  std::vector<Eigen::VectorXd> derivative_quadratic_forms_many(
      const std::vector<std::pair<const Eigen::MatrixXd*, const Eigen::MatrixXd*>>& pairs) const;

 private:
  // Writes rows [row0, row0+count) of H into `out` (row-major, count x n).
  void fill_rows(int row0, int count, double* out) const;
  void fill_row_for_indices(const std::vector<int>& rows, double* out) const;

  std::shared_ptr<const Dataset> data_;
  Hyperparameters hp_;
  KernelOperatorOptions options_;
  int n_ = 0;
  Eigen::VectorXd inv_lengthscales_;
  Eigen::MatrixXd scaled_inputs_;  // inputs * diag(1/lengthscale)
  double signal_variance_ = 0.0;
  double noise_variance_ = 0.0;
  std::optional<Eigen::MatrixXd> cache_;  // symmetric, so storage order is moot
};

}  // namespace gpiter
