#pragma once

#include <memory>

#include "gpiter/dataset.hpp"
#include "gpiter/exact.hpp"
#include "gpiter/hyperparameters.hpp"
#include "gpiter/kernel.hpp"
#include "gpiter/rng.hpp"

namespace gpiter::testing {

/// Random standard-normal inputs with targets drawn from the exact GP prior
/// at `hp` plus observation noise; the well-specified small test problem.
inline Dataset random_gp_problem(int n, int d, const Hyperparameters& hp, std::uint64_t seed) {
  RandomStream stream(seed, streams::kSynthetic);
  Eigen::MatrixXd inputs(n, d);
  stream.fill_gaussian(inputs);
  Dataset data = Dataset::from_raw(std::move(inputs), Eigen::VectorXd::Zero(n));
  auto shared = std::make_shared<Dataset>(data);
  KernelOperator op(shared, hp);
  Eigen::MatrixXd kernel = op.dense();
  kernel.diagonal().array() -= hp.noise_variance();
  const Eigen::MatrixXd chol = jittered_kernel_cholesky(kernel);
  RandomStream target_stream(seed, streams::kPriorSample);
  data.targets = exact_prior_sample(chol, target_stream);
  for (int i = 0; i < n; ++i) data.targets[i] += hp.noise_scale() * target_stream.next_gaussian();
  return data;
}

inline Hyperparameters default_test_hp(int d) {
  Eigen::VectorXd constrained(d + 2);
  for (int i = 0; i < d; ++i) constrained[i] = 0.8 + 0.1 * i;
  constrained[d] = 1.2;    // signal scale
  constrained[d + 1] = 0.4;  // noise scale
  return Hyperparameters::from_constrained(constrained);
}

inline std::shared_ptr<Dataset> shared_problem(int n, int d, const Hyperparameters& hp,
                                               std::uint64_t seed) {
  return std::make_shared<Dataset>(random_gp_problem(n, d, hp, seed));
}

}  // namespace gpiter::testing
