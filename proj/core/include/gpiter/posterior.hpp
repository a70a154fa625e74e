#pragma once

#include <functional>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "gpiter/dataset.hpp"
#include "gpiter/hyperparameters.hpp"

namespace gpiter {

/// Evaluates prior sample j at query points. Implementations exist for the
/// random-feature basis and for exact joint draws in test code.
using PriorEvaluator = std::function<Eigen::VectorXd(int sample, const Eigen::MatrixXd& points)>;

// Predictions from solved linear systems: the posterior mean needs only v_y;
// posterior function samples additionally need the pathwise pairs
// (prior sample evaluator, solved columns zhat).
struct PosteriorHandle {
  std::shared_ptr<const Dataset> train;
  Hyperparameters hp;
  Eigen::VectorXd v_y;

  // Pathwise pieces; empty when only the mean is available.
  Eigen::MatrixXd zhat;  // n x s
  PriorEvaluator prior;

  int sample_count() const { return static_cast<int>(zhat.cols()); }
};

/// k(points, x) * v_y, tiled over the training data.
Eigen::VectorXd predict_mean(const PosteriorHandle& handle, const Eigen::MatrixXd& points);

/// f_j(points) + k(points, x) (v_y - zhat_j); no linear solves.
Eigen::VectorXd sample_posterior(const PosteriorHandle& handle, int sample,
                                 const Eigen::MatrixXd& points);

struct TestMetrics {
  double rmse = 0.0;                 // standardised scale
  std::optional<double> llh;         // mean Gaussian log density, standardised
  double rmse_raw = 0.0;             // back-transformed to raw target units
  std::optional<double> llh_raw;
};

// Predictive variance is the unbiased sample variance of the posterior
// samples plus the noise variance; needs at least two samples, otherwise the
// result is rmse-only.
TestMetrics test_metrics(const PosteriorHandle& handle, const Eigen::MatrixXd& test_inputs,
                         const Eigen::VectorXd& test_targets);

}  // namespace gpiter
