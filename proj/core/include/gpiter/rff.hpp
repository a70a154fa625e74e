#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "gpiter/dataset.hpp"
#include "gpiter/hyperparameters.hpp"

namespace gpiter {

// Random Fourier feature approximation of prior function samples from a
// Matern-3/2 GP. Base frequencies are drawn once from the unit-lengthscale
// spectral measure (multivariate Student-t with 3 degrees of freedom) and
// divided by the current lengthscales at evaluation time, so a fixed draw
// tracks changing hyperparameters. Immutable after construction.
struct RffBasis {
  Eigen::MatrixXd base_frequencies;  // m_pairs x d, unit-lengthscale draws
  Eigen::MatrixXd weights;           // 2 * m_pairs x sample_count, N(0, I)
  std::uint64_t seed = 0;

  int pairs() const { return static_cast<int>(base_frequencies.rows()); }
  int input_dim() const { return static_cast<int>(base_frequencies.cols()); }
  int sample_count() const { return static_cast<int>(weights.cols()); }
};

RffBasis build_rff_basis(int input_dim, int m_pairs, int sample_count, std::uint64_t seed,
                         std::uint64_t substream = 0);

/// Paired sin/cos feature map, p x 2*m_pairs. phi(x) . phi(x) == signal^2.
Eigen::MatrixXd rff_features(const RffBasis& basis, const Hyperparameters& hp,
                             const Eigen::MatrixXd& points);

/// Sample j of the approximate prior evaluated at `points`.
Eigen::VectorXd evaluate_prior(const RffBasis& basis, const Hyperparameters& hp,
                               const Eigen::MatrixXd& points, int sample);

// Targets xi_j = f_j(x) + sigma * w_j for the pathwise linear systems. The
// noise draws w_j are standard normal and fixed per seed, so regenerating
// under new hyperparameters moves xi only through f and sigma.
struct PathwiseTargets {
  Eigen::MatrixXd prior_values;  // n x s, f_j(x)
  Eigen::MatrixXd noise;         // n x s, w_j
  Eigen::MatrixXd xi;            // n x s, prior + sigma * noise
};

PathwiseTargets pathwise_targets(const RffBasis& basis, const Hyperparameters& hp,
                                 const Dataset& data, int s, std::uint64_t seed,
                                 std::uint64_t substream = 0);

/// Same construction with caller-provided prior values (e.g. exact draws).
PathwiseTargets pathwise_targets_from_prior(const Eigen::MatrixXd& prior_values,
                                            const Hyperparameters& hp, std::uint64_t seed,
                                            std::uint64_t substream = 0);

}  // namespace gpiter
