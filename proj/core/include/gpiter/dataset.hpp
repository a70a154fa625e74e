#pragma once

#include <Eigen/Dense>

namespace gpiter {

/// Per-feature and target statistics used to standardise a dataset.
/// Identity stats (zero means, unit scales) mean "already standardised".
struct Standardisation {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  double target_mean = 0.0;
  double target_scale = 1.0;

  static Standardisation identity(int dim);
};

struct Dataset {
  Eigen::MatrixXd inputs;   // n x d
  Eigen::VectorXd targets;  // n
  Standardisation stats;

  int n() const { return static_cast<int>(inputs.rows()); }
  int dim() const { return static_cast<int>(inputs.cols()); }

  static Dataset from_raw(Eigen::MatrixXd inputs, Eigen::VectorXd targets);
};

}  // namespace gpiter
