#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpiter/exact.hpp"
#include "gpiter/kernel.hpp"
#include "support/test_problems.hpp"

using namespace gpiter;

namespace {

// Dense problem with a hand-placed H, bypassing the kernel.
DenseProblem manual_problem(const Eigen::MatrixXd& h) {
  DenseProblem dense;
  dense.h = h;
  dense.chol.compute(h);
  REQUIRE(dense.chol.info() == Eigen::Success);
  return dense;
}

}  // namespace

TEST_CASE("exact_mll closed-form cases") {
  {
    const auto dense = manual_problem(Eigen::MatrixXd::Identity(1, 1));
    const double expected = -0.9189385332046727;  // -log(2 pi) / 2
    CHECK(exact_mll(dense, Eigen::VectorXd::Zero(1)) == doctest::Approx(expected).epsilon(1e-14));
  }
  {
    const auto dense = manual_problem(4.0 * Eigen::MatrixXd::Identity(2, 2));
    const double expected = -std::log(4.0) - std::log(2.0 * std::numbers::pi);
    CHECK(exact_mll(dense, Eigen::VectorXd::Zero(2)) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("exact_mll matches a naive determinant-plus-solve reference") {
  const int n = 50;
  const auto hp = testing::default_test_hp(2);
  const Dataset data = testing::random_gp_problem(n, 2, hp, 77);
  const DenseProblem dense = build_dense_problem(data, hp);

  // Independent route: explicit inverse and log-determinant via LU.
  const Eigen::MatrixXd h = dense.h;
  const double quad = data.targets.dot(h.inverse() * data.targets);
  const double log_det = std::log(h.determinant());
  const double naive = -0.5 * quad - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
  CHECK(exact_mll(dense, data.targets) == doctest::Approx(naive).epsilon(1e-8));
}

TEST_CASE("exact_gradient matches central finite differences of exact_mll") {
  const int n = 40;
  const int d = 2;
  const auto hp = testing::default_test_hp(d);
  const Dataset data = testing::random_gp_problem(n, d, hp, 5);
  const DenseProblem dense = build_dense_problem(data, hp);
  const Eigen::VectorXd grad = exact_gradient(dense, data.targets);

  const double eps = 1e-5;
  const Eigen::VectorXd constrained = hp.constrained();
  for (int k = 0; k < hp.count(); ++k) {
    Eigen::VectorXd up = constrained, down = constrained;
    up[k] += eps;
    down[k] -= eps;
    const double f_up =
        exact_mll(build_dense_problem(data, Hyperparameters::from_constrained(up)), data.targets);
    const double f_down =
        exact_mll(build_dense_problem(data, Hyperparameters::from_constrained(down)), data.targets);
    const double fd = (f_up - f_down) / (2.0 * eps);
    CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("noise gradient with zero targets is -sigma tr(H^-1)") {
  const int n = 30;
  const int d = 2;
  const auto hp = testing::default_test_hp(d);
  const Dataset data = testing::random_gp_problem(n, d, hp, 9);
  const DenseProblem dense = build_dense_problem(data, hp);
  const Eigen::VectorXd grad = exact_gradient(dense, Eigen::VectorXd::Zero(n));
  const double trace = dense.chol.solve(Eigen::MatrixXd::Identity(n, n)).trace();
  CHECK(grad[Hyperparameters::noise_index(d)] ==
        doctest::Approx(-hp.noise_scale() * trace).epsilon(1e-10));
}

TEST_CASE("exact_mll is invariant under dataset permutation") {
  const int n = 25;
  const auto hp = testing::default_test_hp(2);
  const Dataset data = testing::random_gp_problem(n, 2, hp, 13);
  const double reference = exact_mll(build_dense_problem(data, hp), data.targets);

  RandomStream stream(3, streams::kSplit);
  const auto perm = stream.permutation(n);
  Dataset shuffled;
  shuffled.stats = data.stats;
  shuffled.inputs.resize(n, 2);
  shuffled.targets.resize(n);
  for (int i = 0; i < n; ++i) {
    shuffled.inputs.row(i) = data.inputs.row(perm[i]);
    shuffled.targets[i] = data.targets[perm[i]];
  }
  const double permuted = exact_mll(build_dense_problem(shuffled, hp), shuffled.targets);
  CHECK(permuted == doctest::Approx(reference).epsilon(1e-10));
}

TEST_CASE("exact prior samples have the kernel as second moment") {
  const int n = 20;
  const auto hp = testing::default_test_hp(1);
  const Dataset data = testing::random_gp_problem(n, 1, hp, 21);
  auto shared = std::make_shared<Dataset>(data);
  KernelOperator op(shared, hp);
  Eigen::MatrixXd kernel = op.dense();
  kernel.diagonal().array() -= hp.noise_variance();
  const Eigen::MatrixXd chol = jittered_kernel_cholesky(kernel);

  RandomStream stream(17, streams::kPriorSample);
  const int draws = 100000;
  Eigen::MatrixXd second_moment = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd f = exact_prior_sample(chol, stream);
    second_moment.noalias() += f * f.transpose();
  }
  second_moment /= draws;
  // Frobenius error at the Monte-Carlo rate; generous constant.
  const double bound = 5.0 * kernel.norm() / std::sqrt(static_cast<double>(draws)) * n;
  CHECK((second_moment - kernel).norm() <= bound);

  // Identity covariance gives standard normal samples.
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  RandomStream id_stream(19, streams::kPriorSample);
  double sum2 = 0.0;
  const int id_draws = 20000;
  for (int i = 0; i < id_draws; ++i) sum2 += exact_prior_sample(eye, id_stream).squaredNorm();
  CHECK(sum2 / (id_draws * n) == doctest::Approx(1.0).epsilon(0.02));

  // Same seed, same sample.
  RandomStream a(23, streams::kPriorSample), b(23, streams::kPriorSample);
  CHECK(exact_prior_sample(chol, a) == exact_prior_sample(chol, b));
}

TEST_CASE("dense problem enforces the size cap and SPD") {
  const auto hp = testing::default_test_hp(1);
  const Dataset data = testing::random_gp_problem(10, 1, hp, 3);
  CHECK_THROWS(build_dense_problem(data, hp, 5));
  CHECK_NOTHROW(build_dense_problem(data, hp, 10));
}

TEST_CASE("jitter ladder fails beyond 1e-6") {
  // A matrix with a negative eigenvalue cannot be rescued by tiny jitter.
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS(jittered_kernel_cholesky(bad));
}

TEST_CASE("exact posterior matches direct formulas") {
  const int n = 40;
  const auto hp = testing::default_test_hp(2);
  const Dataset data = testing::random_gp_problem(n, 2, hp, 31);
  const DenseProblem dense = build_dense_problem(data, hp);

  Eigen::MatrixXd points(3, 2);
  points << 0.1, -0.4, 1.0, 0.2, -2.0, 0.5;
  const Eigen::MatrixXd kpx = cross_kernel(points, data.inputs, hp);
  const Eigen::MatrixXd h_inv = dense.h.inverse();
  const Eigen::VectorXd mean_direct = kpx * h_inv * data.targets;
  const Eigen::MatrixXd cov_direct =
      cross_kernel(points, points, hp) - kpx * h_inv * kpx.transpose();

  CHECK((exact_posterior_mean(dense, data, data.targets, points) - mean_direct).norm() <= 1e-8);
  CHECK((exact_posterior_cov(dense, data, points) - cov_direct).norm() <= 1e-8);
}
