#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpiter/exact.hpp"
#include "gpiter/posterior.hpp"
#include "gpiter/rff.hpp"
#include "support/test_problems.hpp"

using namespace gpiter;

namespace {

struct Setup {
  std::shared_ptr<Dataset> data;
  Hyperparameters hp;
  DenseProblem dense;
  Eigen::MatrixXd chol_k;
  Eigen::VectorXd v_y;

  Setup(int n, int d, std::uint64_t seed) : hp(testing::default_test_hp(d)) {
    data = std::make_shared<Dataset>(testing::random_gp_problem(n, d, hp, seed));
    dense = build_dense_problem(*data, hp);
    Eigen::MatrixXd kernel = dense.h;
    kernel.diagonal().array() -= hp.noise_variance();
    chol_k = jittered_kernel_cholesky(kernel);
    v_y = dense.chol.solve(data->targets);
  }
};

}  // namespace

TEST_CASE("posterior mean: oracle agreement and kernel decay") {
  Setup setup(100, 2, 201);
  PosteriorHandle handle;
  handle.train = setup.data;
  handle.hp = setup.hp;
  handle.v_y = setup.v_y;

  Eigen::MatrixXd points(4, 2);
  points << 0.2, -0.5, 1.3, 0.4, -0.8, -0.1, 2.0, 1.0;
  const Eigen::VectorXd mean = predict_mean(handle, points);
  const Eigen::VectorXd oracle =
      exact_posterior_mean(setup.dense, *setup.data, setup.data->targets, points);
  CHECK((mean - oracle).cwiseAbs().maxCoeff() <= 1e-8);

  // Far from all data the mean decays to zero.
  Eigen::MatrixXd far(1, 2);
  far << 60.0, 60.0;
  CHECK(std::abs(predict_mean(handle, far)[0]) <= 1e-8);

  // Zero targets give the zero mean.
  PosteriorHandle zero = handle;
  zero.v_y.setZero();
  CHECK(predict_mean(zero, points).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("posterior samples reduce to the mean without randomness") {
  Setup setup(60, 2, 203);
  PosteriorHandle handle;
  handle.train = setup.data;
  handle.hp = setup.hp;
  handle.v_y = setup.v_y;
  handle.zhat = Eigen::MatrixXd::Zero(60, 3);
  handle.prior = [](int, const Eigen::MatrixXd& points) {
    return Eigen::VectorXd::Zero(points.rows());
  };

  Eigen::MatrixXd points(3, 2);
  points << 0.0, 0.0, 0.7, -0.7, -1.2, 0.5;
  const Eigen::VectorXd sample = sample_posterior(handle, 1, points);
  const Eigen::VectorXd mean = predict_mean(handle, points);
  CHECK((sample - mean).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS(sample_posterior(handle, 3, points));
}

TEST_CASE("sample mean approaches the posterior mean as s grows") {
  Setup setup(80, 1, 205);
  const int s = 512;
  Eigen::MatrixXd points(3, 1);
  points << -0.5, 0.1, 0.9;

  // Exact joint prior draws over train and test points.
  Eigen::MatrixXd stacked(setup.data->n() + points.rows(), 1);
  stacked << setup.data->inputs, points;
  Dataset joint;
  joint.stats = setup.data->stats;
  joint.inputs = stacked;
  joint.targets = Eigen::VectorXd::Zero(stacked.rows());
  auto joint_shared = std::make_shared<Dataset>(joint);
  KernelOperator joint_op(joint_shared, setup.hp);
  Eigen::MatrixXd joint_kernel = joint_op.dense();
  joint_kernel.diagonal().array() -= setup.hp.noise_variance();
  const Eigen::MatrixXd joint_chol = jittered_kernel_cholesky(joint_kernel);
  RandomStream stream(207, streams::kPriorSample);
  const Eigen::MatrixXd joint_prior = exact_prior_samples(joint_chol, s, stream);

  const Eigen::MatrixXd prior_train = joint_prior.topRows(setup.data->n());
  const PathwiseTargets targets = pathwise_targets_from_prior(prior_train, setup.hp, 209);
  const Eigen::MatrixXd zhat = setup.dense.chol.solve(targets.xi);

  PosteriorHandle handle;
  handle.train = setup.data;
  handle.hp = setup.hp;
  handle.v_y = setup.v_y;
  handle.zhat = zhat;
  const Eigen::MatrixXd prior_test = joint_prior.bottomRows(points.rows());
  handle.prior = [&prior_test](int j, const Eigen::MatrixXd& pts) {
    REQUIRE(pts.rows() == prior_test.rows());
    return Eigen::VectorXd(prior_test.col(j));
  };

  Eigen::MatrixXd samples(points.rows(), s);
  for (int j = 0; j < s; ++j) samples.col(j) = sample_posterior(handle, j, points);
  const Eigen::VectorXd sample_mean = samples.rowwise().mean();
  const Eigen::VectorXd mean = predict_mean(handle, points);
  for (int i = 0; i < points.rows(); ++i) {
    const double sd = std::sqrt(
        (samples.row(i).array() - sample_mean[i]).square().sum() / (s - 1));
    CHECK(std::abs(sample_mean[i] - mean[i]) <= 3.0 * sd / std::sqrt(static_cast<double>(s)));
  }

  // Empirical covariance against the closed-form posterior covariance.
  const Eigen::MatrixXd centred = samples.colwise() - sample_mean;
  const Eigen::MatrixXd emp_cov = centred * centred.transpose() / (s - 1);
  const Eigen::MatrixXd oracle_cov = exact_posterior_cov(setup.dense, *setup.data, points);
  const double bound =
      6.0 * oracle_cov.norm() / std::sqrt(static_cast<double>(s)) * points.rows();
  CHECK((emp_cov - oracle_cov).norm() <= bound);
}

TEST_CASE("test metrics: closed forms and degenerate cases") {
  Setup setup(50, 1, 211);

  // Perfect predictions with unit variance: llh is -log(2 pi)/2 per point.
  {
    Dataset perfect;
    perfect.stats = Standardisation::identity(1);
    perfect.inputs = Eigen::MatrixXd::Zero(4, 1);
    perfect.inputs << -3.0, -1.0, 1.0, 3.0;
    perfect.targets = Eigen::VectorXd::Zero(4);
    auto shared = std::make_shared<Dataset>(perfect);

    PosteriorHandle handle;
    handle.train = shared;
    // Unit noise so the predictive variance is sigma^2 = 1 when samples agree.
    Eigen::VectorXd constrained(3);
    constrained << 1.0, 1.0, 1.0;
    handle.hp = Hyperparameters::from_constrained(constrained);
    handle.v_y = Eigen::VectorXd::Zero(4);
    handle.zhat = Eigen::MatrixXd::Zero(4, 2);
    handle.prior = [](int, const Eigen::MatrixXd& pts) {
      return Eigen::VectorXd::Zero(pts.rows());
    };
    const TestMetrics metrics = test_metrics(handle, perfect.inputs, perfect.targets);
    CHECK(metrics.rmse == 0.0);
    REQUIRE(metrics.llh.has_value());
    CHECK(*metrics.llh ==
          doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
  }

  // Fewer than two samples: rmse only.
  {
    PosteriorHandle handle;
    handle.train = setup.data;
    handle.hp = setup.hp;
    handle.v_y = setup.v_y;
    handle.zhat = Eigen::MatrixXd::Zero(setup.data->n(), 1);
    Eigen::MatrixXd points(2, 1);
    points << 0.0, 1.0;
    Eigen::VectorXd targets(2);
    targets << 0.3, -0.1;
    const TestMetrics metrics = test_metrics(handle, points, targets);
    CHECK_FALSE(metrics.llh.has_value());
    CHECK(metrics.rmse > 0.0);
  }
}

TEST_CASE("metrics llh approaches the dense predictive density") {
  Setup setup(100, 1, 213);
  const int s = 2048;

  Eigen::MatrixXd points(5, 1);
  points << -1.0, -0.3, 0.0, 0.6, 1.4;
  Eigen::VectorXd targets(5);
  targets << 0.5, -0.2, 0.1, 0.3, -0.4;

  Eigen::MatrixXd stacked(setup.data->n() + points.rows(), 1);
  stacked << setup.data->inputs, points;
  Dataset joint;
  joint.stats = setup.data->stats;
  joint.inputs = stacked;
  joint.targets = Eigen::VectorXd::Zero(stacked.rows());
  auto joint_shared = std::make_shared<Dataset>(joint);
  KernelOperator joint_op(joint_shared, setup.hp);
  Eigen::MatrixXd joint_kernel = joint_op.dense();
  joint_kernel.diagonal().array() -= setup.hp.noise_variance();
  const Eigen::MatrixXd joint_chol = jittered_kernel_cholesky(joint_kernel);
  RandomStream stream(215, streams::kPriorSample);
  const Eigen::MatrixXd joint_prior = exact_prior_samples(joint_chol, s, stream);
  const PathwiseTargets path =
      pathwise_targets_from_prior(joint_prior.topRows(setup.data->n()), setup.hp, 217);

  PosteriorHandle handle;
  handle.train = setup.data;
  handle.hp = setup.hp;
  handle.v_y = setup.v_y;
  handle.zhat = setup.dense.chol.solve(path.xi);
  const Eigen::MatrixXd prior_test = joint_prior.bottomRows(points.rows());
  handle.prior = [&prior_test](int j, const Eigen::MatrixXd&) {
    return Eigen::VectorXd(prior_test.col(j));
  };

  const TestMetrics metrics = test_metrics(handle, points, targets);
  REQUIRE(metrics.llh.has_value());

  // Dense closed-form predictive log density.
  const Eigen::VectorXd mean =
      exact_posterior_mean(setup.dense, *setup.data, setup.data->targets, points);
  const Eigen::MatrixXd cov = exact_posterior_cov(setup.dense, *setup.data, points);
  double oracle_llh = 0.0;
  for (int i = 0; i < points.rows(); ++i) {
    const double variance = cov(i, i) + setup.hp.noise_variance();
    const double err = targets[i] - mean[i];
    oracle_llh +=
        -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * err * err / variance;
  }
  oracle_llh /= points.rows();
  CHECK(std::abs(*metrics.llh - oracle_llh) <= 0.02);

  // rmse ignores the samples entirely.
  PosteriorHandle doubled = handle;
  Eigen::MatrixXd zhat2(setup.data->n(), 2 * s);
  zhat2 << handle.zhat, handle.zhat;
  doubled.zhat = zhat2;
  doubled.prior = [&prior_test, s](int j, const Eigen::MatrixXd&) {
    return Eigen::VectorXd(prior_test.col(j % s));
  };
  CHECK(test_metrics(doubled, points, targets).rmse == metrics.rmse);
}

TEST_CASE("raw-unit metrics are consistent with the standardisation") {
  Setup setup(40, 1, 219);
  auto data = std::make_shared<Dataset>(*setup.data);
  data->stats.target_scale = 2.5;
  data->stats.target_mean = 7.0;

  PosteriorHandle handle;
  handle.train = data;
  handle.hp = setup.hp;
  handle.v_y = setup.v_y;
  handle.zhat = setup.dense.chol.solve(
      pathwise_targets_from_prior(exact_prior_samples(setup.chol_k, 16,
                                                      *std::make_unique<RandomStream>(
                                                          221, streams::kPriorSample)),
                                  setup.hp, 223)
          .xi);
  const RffBasis basis = build_rff_basis(1, 64, 16, 225);
  handle.prior = [&](int j, const Eigen::MatrixXd& pts) {
    return evaluate_prior(basis, setup.hp, pts, j);
  };

  Eigen::MatrixXd points(3, 1);
  points << 0.1, 0.5, -0.2;
  Eigen::VectorXd targets(3);
  targets << 0.2, -0.3, 0.4;
  const TestMetrics metrics = test_metrics(handle, points, targets);
  CHECK(metrics.rmse_raw == doctest::Approx(metrics.rmse * 2.5).epsilon(1e-12));
  REQUIRE(metrics.llh_raw.has_value());
  CHECK(*metrics.llh_raw == doctest::Approx(*metrics.llh - std::log(2.5)).epsilon(1e-12));
}
