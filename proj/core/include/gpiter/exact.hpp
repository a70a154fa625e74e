#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "gpiter/dataset.hpp"
#include "gpiter/hyperparameters.hpp"
#include "gpiter/rng.hpp"

namespace gpiter {

// Dense Cholesky reference for small problems: exact marginal likelihood,
// gradient, posterior and prior draws. Correctness scaffolding, not a fast
// path; the size cap guards against accidental use at scale.
struct DenseProblem {
  Eigen::MatrixXd h;                 // K + sigma^2 I
  Eigen::LLT<Eigen::MatrixXd> chol;  // of h
  std::vector<Eigen::MatrixXd> dh;   // dH/dtheta_k per constrained parameter
  Hyperparameters hp;

  int n() const { return static_cast<int>(h.rows()); }
};

inline constexpr int kDefaultDenseCap = 4096;

DenseProblem build_dense_problem(const Dataset& data, const Hyperparameters& hp,
                                 int cap = kDefaultDenseCap);

/// -1/2 y^T H^-1 y - 1/2 log det H - n/2 log 2 pi.
double exact_mll(const DenseProblem& dense, const Eigen::VectorXd& y);

/// Gradient of the marginal likelihood with respect to constrained parameters.
Eigen::VectorXd exact_gradient(const DenseProblem& dense, const Eigen::VectorXd& y);

// Cholesky factor of the noiseless kernel matrix with an escalating jitter
// ladder (1e-10 .. 1e-6 of the mean diagonal). Throws if the ladder runs out.
Eigen::MatrixXd jittered_kernel_cholesky(const Eigen::MatrixXd& kernel_matrix);

/// One exact draw f ~ N(0, K) using the jittered factor.
Eigen::VectorXd exact_prior_sample(const Eigen::MatrixXd& kernel_cholesky, RandomStream& rng);

/// `count` exact draws as columns, in sample order.
Eigen::MatrixXd exact_prior_samples(const Eigen::MatrixXd& kernel_cholesky, int count,
                                    RandomStream& rng);

/// Closed-form posterior mean at query points.
Eigen::VectorXd exact_posterior_mean(const DenseProblem& dense, const Dataset& data,
                                     const Eigen::VectorXd& y, const Eigen::MatrixXd& points);

/// Closed-form posterior covariance at query points.
Eigen::MatrixXd exact_posterior_cov(const DenseProblem& dense, const Dataset& data,
                                    const Eigen::MatrixXd& points);

}  // namespace gpiter
