#include "gpiter/exact.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gpiter/kernel.hpp"

namespace gpiter {

DenseProblem build_dense_problem(const Dataset& data, const Hyperparameters& hp, int cap) {
  if (data.n() > cap) {
    throw std::invalid_argument("build_dense_problem: n exceeds the dense reference cap");
  }
  auto shared = std::make_shared<Dataset>(data);
  KernelOperator op(shared, hp);
  DenseProblem dense;
  dense.hp = hp;
  dense.h = op.dense();
  dense.chol.compute(dense.h);
  if (dense.chol.info() != Eigen::Success) {
    throw std::runtime_error("build_dense_problem: H is not positive definite");
  }
  const int n = data.n();
  dense.dh.reserve(hp.count());
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < hp.count(); ++k) {
    dense.dh.push_back(op.derivative_apply(k, identity));
  }
  return dense;
}

double exact_mll(const DenseProblem& dense, const Eigen::VectorXd& y) {
  const int n = dense.n();
  const Eigen::VectorXd alpha = dense.chol.solve(y);
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += std::log(dense.chol.matrixLLT()(i, i));
  log_det *= 2.0;
  return -0.5 * y.dot(alpha) - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

Eigen::VectorXd exact_gradient(const DenseProblem& dense, const Eigen::VectorXd& y) {
  const Eigen::VectorXd alpha = dense.chol.solve(y);
  Eigen::VectorXd grad(dense.hp.count());
  for (std::size_t k = 0; k < dense.dh.size(); ++k) {
    const Eigen::MatrixXd solved = dense.chol.solve(dense.dh[k]);
    grad[static_cast<int>(k)] = 0.5 * alpha.dot(dense.dh[k] * alpha) - 0.5 * solved.trace();
  }
  return grad;
}

Eigen::MatrixXd jittered_kernel_cholesky(const Eigen::MatrixXd& kernel_matrix) {
  const double mean_diag = kernel_matrix.diagonal().mean();
  for (double jitter = 1e-10; jitter <= 1.0000001e-6; jitter *= 10.0) {
    Eigen::MatrixXd attempt = kernel_matrix;
    attempt.diagonal().array() += jitter * mean_diag;
    Eigen::LLT<Eigen::MatrixXd> llt(attempt);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw std::runtime_error("jittered_kernel_cholesky: factorisation failed beyond 1e-6 jitter");
}

Eigen::VectorXd exact_prior_sample(const Eigen::MatrixXd& kernel_cholesky, RandomStream& rng) {
  Eigen::VectorXd w(kernel_cholesky.rows());
  rng.fill_gaussian(w);
  return kernel_cholesky * w;
}

Eigen::MatrixXd exact_prior_samples(const Eigen::MatrixXd& kernel_cholesky, int count,
                                    RandomStream& rng) {
  Eigen::MatrixXd out(kernel_cholesky.rows(), count);
  for (int j = 0; j < count; ++j) out.col(j) = exact_prior_sample(kernel_cholesky, rng);
  return out;
}

Eigen::VectorXd exact_posterior_mean(const DenseProblem& dense, const Dataset& data,
                                     const Eigen::VectorXd& y, const Eigen::MatrixXd& points) {
  const Eigen::MatrixXd kpx = cross_kernel(points, data.inputs, dense.hp);
  return kpx * dense.chol.solve(y);
}

Eigen::MatrixXd exact_posterior_cov(const DenseProblem& dense, const Dataset& data,
                                    const Eigen::MatrixXd& points) {
  const Eigen::MatrixXd kpp = cross_kernel(points, points, dense.hp);
  const Eigen::MatrixXd kpx = cross_kernel(points, data.inputs, dense.hp);
  return kpp - kpx * dense.chol.solve(kpx.transpose());
}

}  // namespace gpiter
