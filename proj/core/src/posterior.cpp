#include "gpiter/posterior.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gpiter/kernel.hpp"

namespace gpiter {

Eigen::VectorXd predict_mean(const PosteriorHandle& handle, const Eigen::MatrixXd& points) {
  if (points.cols() != handle.train->dim()) {
    throw std::invalid_argument("predict_mean: point dimension mismatch");
  }
  return cross_kernel_apply(points, handle.train->inputs, handle.hp, handle.v_y);
}

Eigen::VectorXd sample_posterior(const PosteriorHandle& handle, int sample,
                                 const Eigen::MatrixXd& points) {
  if (sample < 0 || sample >= handle.sample_count()) {
    throw std::out_of_range("sample_posterior: sample index");
  }
  if (!handle.prior) throw std::invalid_argument("sample_posterior: no prior evaluator");
  const Eigen::VectorXd correction = handle.v_y - handle.zhat.col(sample);
  return handle.prior(sample, points) +
         cross_kernel_apply(points, handle.train->inputs, handle.hp, correction);
}

TestMetrics test_metrics(const PosteriorHandle& handle, const Eigen::MatrixXd& test_inputs,
                         const Eigen::VectorXd& test_targets) {
  const int p = static_cast<int>(test_inputs.rows());
  const Eigen::VectorXd mean = predict_mean(handle, test_inputs);
  const Eigen::VectorXd errors = test_targets - mean;

  TestMetrics metrics;
  metrics.rmse = std::sqrt(errors.squaredNorm() / p);
  metrics.rmse_raw = metrics.rmse * handle.train->stats.target_scale;

  const int s = handle.sample_count();
  if (s >= 2 && handle.prior) {
    Eigen::MatrixXd samples(p, s);
    for (int j = 0; j < s; ++j) samples.col(j) = sample_posterior(handle, j, test_inputs);
    const Eigen::VectorXd sample_mean = samples.rowwise().mean();
    const Eigen::VectorXd sample_var =
        (samples.colwise() - sample_mean).rowwise().squaredNorm() / (s - 1);
    const double noise_var = handle.hp.noise_variance();
    double llh = 0.0;
    for (int i = 0; i < p; ++i) {
      const double variance = sample_var[i] + noise_var;
      llh += -0.5 * std::log(2.0 * std::numbers::pi * variance) -
             0.5 * errors[i] * errors[i] / variance;
    }
    metrics.llh = llh / p;
    // Back-transforming y = mu + scale * y_std shifts the log density by
    // -log(scale).
    metrics.llh_raw = *metrics.llh - std::log(handle.train->stats.target_scale);
  }
  return metrics;
}

}  // namespace gpiter
