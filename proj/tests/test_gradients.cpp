#include <doctest.h>

#include <cmath>

#include "gpiter/exact.hpp"
#include "gpiter/gradients.hpp"
#include "gpiter/rff.hpp"
#include "gpiter/rng.hpp"
#include "support/test_problems.hpp"

using namespace gpiter;

TEST_CASE("standard probes: determinism, moments") {
  const ProbeSet a = gen_standard_probes(10, 2000, 77);
  const ProbeSet b = gen_standard_probes(10, 2000, 77);
  CHECK(a.targets == b.targets);

  // Column means shrink like 1/sqrt(s).
  const Eigen::VectorXd mean = a.targets.rowwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() <= 4.0 / std::sqrt(2000.0));

  // Second moment approaches the identity in Frobenius norm.
  const int s = 100000, n = 10;
  const ProbeSet big = gen_standard_probes(n, s, 3);
  const Eigen::MatrixXd second =
      big.targets * big.targets.transpose() / static_cast<double>(s);
  const double error = (second - Eigen::MatrixXd::Identity(n, n)).norm();
  CHECK(error <= 5.0 * std::sqrt(2.0 * n * n / static_cast<double>(s)));

  const ProbeSet rademacher = gen_standard_probes(8, 64, 5, ProbeDistribution::Rademacher);
  CHECK((rademacher.targets.array().abs() == 1.0).all());
}

TEST_CASE("deterministic basis makes the trace term exact") {
  const int n = 60;
  const int d = 2;
  const auto hp = testing::default_test_hp(d);
  const Dataset data = testing::random_gp_problem(n, d, hp, 83);
  auto shared = std::make_shared<Dataset>(data);
  KernelOperator op(shared, hp);
  const DenseProblem dense = build_dense_problem(data, hp);

  const Eigen::MatrixXd probes = deterministic_basis_probes(n);
  const Eigen::MatrixXd solutions = dense.chol.solve(probes);
  const Eigen::VectorXd v_y = dense.chol.solve(data.targets);
  const GradientEstimate estimate = estimate_gradient_standard(op, v_y, solutions, probes);

  const Eigen::VectorXd oracle = exact_gradient(dense, data.targets);
  for (int k = 0; k < hp.count(); ++k) {
    const double exact_trace = dense.chol.solve(dense.dh[k]).trace();
    CHECK(estimate.trace_term[k] == doctest::Approx(exact_trace).epsilon(1e-8));
    CHECK(estimate.values[k] == doctest::Approx(oracle[k]).epsilon(1e-6));
  }
  // Component identity: values = (quad - trace) / 2.
  const Eigen::VectorXd recombined =
      0.5 * estimate.quadratic_term - 0.5 * estimate.trace_term;
  CHECK((estimate.values - recombined).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frozen parameter contributes a zero gradient coordinate") {
  // With zero solutions the trace term vanishes and the quadratic term alone
  // remains; with both zero the estimate is exactly zero.
  const int n = 20;
  const auto hp = testing::default_test_hp(1);
  auto shared = testing::shared_problem(n, 1, hp, 85);
  KernelOperator op(shared, hp);
  const GradientEstimate estimate = estimate_gradient_pathwise(
      op, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, 4));
  CHECK(estimate.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(estimate.trace_term.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("standard estimator is unbiased against the dense oracle") {
  const int n = 100;
  const int d = 2;
  const auto hp = testing::default_test_hp(d);
  const Dataset data = testing::random_gp_problem(n, d, hp, 87);
  auto shared = std::make_shared<Dataset>(data);
  KernelOperator op(shared, hp);
  const DenseProblem dense = build_dense_problem(data, hp);
  const Eigen::VectorXd v_y = dense.chol.solve(data.targets);
  const Eigen::VectorXd oracle = exact_gradient(dense, data.targets);

  const int batches = 100;
  const int s = 100;
  Eigen::MatrixXd estimates(hp.count(), batches);
  for (int rep = 0; rep < batches; ++rep) {
    const ProbeSet probes = gen_standard_probes(n, s, 900 + rep);
    const Eigen::MatrixXd solutions = dense.chol.solve(probes.targets);
    estimates.col(rep) =
        estimate_gradient_standard(op, v_y, solutions, probes.targets).values;
  }
  const Eigen::VectorXd mean = estimates.rowwise().mean();
  for (int k = 0; k < hp.count(); ++k) {
    const double sd = std::sqrt(
        (estimates.row(k).array() - mean[k]).square().sum() / (batches - 1));
    const double se = sd / std::sqrt(static_cast<double>(batches));
    CHECK(std::abs(mean[k] - oracle[k]) <= 3.0 * std::max(se, 1e-12));
  }
}

TEST_CASE("pathwise estimator is unbiased with exact prior draws") {
  const int n = 100;
  const int d = 2;
  const auto hp = testing::default_test_hp(d);
  const Dataset data = testing::random_gp_problem(n, d, hp, 89);
  auto shared = std::make_shared<Dataset>(data);
  KernelOperator op(shared, hp);
  const DenseProblem dense = build_dense_problem(data, hp);
  Eigen::MatrixXd kernel = dense.h;
  kernel.diagonal().array() -= hp.noise_variance();
  const Eigen::MatrixXd chol_k = jittered_kernel_cholesky(kernel);
  const Eigen::VectorXd v_y = dense.chol.solve(data.targets);
  const Eigen::VectorXd oracle = exact_gradient(dense, data.targets);

  RandomStream prior_stream(91, streams::kPriorSample);
  const int batches = 100;
  const int s = 100;
  Eigen::MatrixXd estimates(hp.count(), batches);
  for (int rep = 0; rep < batches; ++rep) {
    const Eigen::MatrixXd prior = exact_prior_samples(chol_k, s, prior_stream);
    const PathwiseTargets targets =
        pathwise_targets_from_prior(prior, hp, 17, static_cast<std::uint64_t>(rep));
    const Eigen::MatrixXd zhat = dense.chol.solve(targets.xi);
    estimates.col(rep) = estimate_gradient_pathwise(op, v_y, zhat).values;
  }
  const Eigen::VectorXd mean = estimates.rowwise().mean();
  for (int k = 0; k < hp.count(); ++k) {
    const double sd = std::sqrt(
        (estimates.row(k).array() - mean[k]).square().sum() / (batches - 1));
    const double se = sd / std::sqrt(static_cast<double>(batches));
    CHECK(std::abs(mean[k] - oracle[k]) <= 3.0 * std::max(se, 1e-12));
  }
}

TEST_CASE("trace symmetry identity") {
  // z^T H^-1 dH z computed as (H^-1 z)^T dH z equals z^T dH (H^-1 z).
  const int n = 40;
  const auto hp = testing::default_test_hp(2);
  const Dataset data = testing::random_gp_problem(n, 2, hp, 93);
  auto shared = std::make_shared<Dataset>(data);
  KernelOperator op(shared, hp);
  const DenseProblem dense = build_dense_problem(data, hp);

  RandomStream stream(95, streams::kProbes);
  Eigen::VectorXd z(n);
  for (int rep = 0; rep < 5; ++rep) {
    stream.fill_gaussian(z);
    const Eigen::VectorXd solved = dense.chol.solve(z);
    for (int k = 0; k < hp.count(); ++k) {
      const double left = solved.dot(op.derivative_apply(k, z).col(0));
      const double right = z.dot(op.derivative_apply(k, solved).col(0));
      const double scale = std::max({1.0, std::abs(left), std::abs(right)});
      CHECK(std::abs(left - right) / scale <= 1e-10);
    }
  }
}

TEST_CASE("initial distance identities at reduced draw counts") {
  const int n = 60;
  const auto hp = testing::default_test_hp(1);
  const Dataset data = testing::random_gp_problem(n, 1, hp, 97);
  const DenseProblem dense = build_dense_problem(data, hp);
  Eigen::MatrixXd kernel = dense.h;
  kernel.diagonal().array() -= hp.noise_variance();
  const Eigen::MatrixXd chol_k = jittered_kernel_cholesky(kernel);
  const double trace_h_inv = dense.chol.solve(Eigen::MatrixXd::Identity(n, n)).trace();

  CHECK(initial_rkhs_distance(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)) == 0.0);

  RandomStream stream(99, streams::kProbes);
  const int draws = 2000;
  double standard_sum = 0.0, standard_sq = 0.0, pathwise_sum = 0.0, pathwise_sq = 0.0;
  Eigen::VectorXd z(n), w(n);
  for (int i = 0; i < draws; ++i) {
    stream.fill_gaussian(z);
    const double ds = initial_rkhs_distance(z, dense.chol.solve(z));
    standard_sum += ds;
    standard_sq += ds * ds;
    stream.fill_gaussian(w);
    Eigen::VectorXd xi = chol_k * w;
    for (int j = 0; j < n; ++j) xi[j] += hp.noise_scale() * stream.next_gaussian();
    const double dp = initial_rkhs_distance(xi, dense.chol.solve(xi));
    pathwise_sum += dp;
    pathwise_sq += dp * dp;
  }
  const double standard_mean = standard_sum / draws;
  const double standard_se =
      std::sqrt((standard_sq / draws - standard_mean * standard_mean) / draws);
  CHECK(std::abs(standard_mean - trace_h_inv) <= 3.0 * standard_se);

  const double pathwise_mean = pathwise_sum / draws;
  const double pathwise_se =
      std::sqrt((pathwise_sq / draws - pathwise_mean * pathwise_mean) / draws);
  CHECK(std::abs(pathwise_mean - n) <= 3.0 * pathwise_se);
}
