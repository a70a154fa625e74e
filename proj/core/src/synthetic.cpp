#include "gpiter/synthetic.hpp"

#include "gpiter/rff.hpp"
#include "gpiter/rng.hpp"

namespace gpiter {

Dataset make_synthetic_dataset(int n, int input_dim, const Hyperparameters& hp,
                               std::uint64_t seed, int rff_pairs) {
  RandomStream stream(seed, streams::kSynthetic);
  Eigen::MatrixXd inputs(n, input_dim);
  stream.fill_gaussian(inputs);
  const RffBasis basis = build_rff_basis(input_dim, rff_pairs, 1, seed);
  Eigen::VectorXd targets = evaluate_prior(basis, hp, inputs, 0);
  const double sigma = hp.noise_scale();
  for (int i = 0; i < n; ++i) targets[i] += sigma * stream.next_gaussian();
  return Dataset::from_raw(std::move(inputs), std::move(targets));
}

}  // namespace gpiter
