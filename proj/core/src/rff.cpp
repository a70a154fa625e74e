#include "gpiter/rff.hpp"

#include <cmath>
#include <stdexcept>

#include "gpiter/rng.hpp"

namespace gpiter {

RffBasis build_rff_basis(int input_dim, int m_pairs, int sample_count, std::uint64_t seed,
                         std::uint64_t substream) {
  if (m_pairs < 1) throw std::invalid_argument("build_rff_basis: m_pairs >= 1");
  if (sample_count < 1) throw std::invalid_argument("build_rff_basis: sample_count >= 1");
  RffBasis basis;
  basis.seed = seed;
  basis.base_frequencies.resize(m_pairs, input_dim);
  RandomStream freq_stream(seed, streams::kFrequencies, substream);
  for (int p = 0; p < m_pairs; ++p) {
    // Multivariate Student-t with 3 dof: scale a Gaussian by sqrt(3 / chi2_3).
    double chi2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double g = freq_stream.next_gaussian();
      chi2 += g * g;
    }
    const double scale = std::sqrt(3.0 / chi2);
    for (int dim = 0; dim < input_dim; ++dim) {
      basis.base_frequencies(p, dim) = scale * freq_stream.next_gaussian();
    }
  }
  basis.weights.resize(2 * m_pairs, sample_count);
  RandomStream weight_stream(seed, streams::kWeights, substream);
  weight_stream.fill_gaussian(basis.weights);
  return basis;
}

Eigen::MatrixXd rff_features(const RffBasis& basis, const Hyperparameters& hp,
                             const Eigen::MatrixXd& points) {
  if (points.cols() != basis.input_dim()) {
    throw std::invalid_argument("rff_features: point dimension does not match basis");
  }
  const int m = basis.pairs();
  const Eigen::VectorXd inv_ls = hp.lengthscales().cwiseInverse();
  // Frequencies track hyperparameters: divide the fixed base draws by the
  // current lengthscales.
  const Eigen::MatrixXd freq = basis.base_frequencies * inv_ls.asDiagonal();
  const Eigen::MatrixXd angles = points * freq.transpose();  // p x m
  const double amplitude = hp.signal_scale() / std::sqrt(static_cast<double>(m));
  Eigen::MatrixXd features(points.rows(), 2 * m);
  for (int p = 0; p < m; ++p) {
    features.col(2 * p) = amplitude * angles.col(p).array().cos();
    features.col(2 * p + 1) = amplitude * angles.col(p).array().sin();
  }
  return features;
}

Eigen::VectorXd evaluate_prior(const RffBasis& basis, const Hyperparameters& hp,
                               const Eigen::MatrixXd& points, int sample) {
  if (sample < 0 || sample >= basis.sample_count()) {
    throw std::out_of_range("evaluate_prior: sample index");
  }
  return rff_features(basis, hp, points) * basis.weights.col(sample);
}

PathwiseTargets pathwise_targets(const RffBasis& basis, const Hyperparameters& hp,
                                 const Dataset& data, int s, std::uint64_t seed,
                                 std::uint64_t substream) {
  if (s < 1) throw std::invalid_argument("pathwise_targets: s >= 1");
  if (s > basis.sample_count()) {
    throw std::invalid_argument("pathwise_targets: basis holds fewer samples than requested");
  }
  const Eigen::MatrixXd features = rff_features(basis, hp, data.inputs);
  PathwiseTargets targets;
  targets.prior_values = features * basis.weights.leftCols(s);
  targets.noise.resize(data.n(), s);
  RandomStream noise_stream(seed, streams::kNoiseDraws, substream);
  noise_stream.fill_gaussian(targets.noise);
  targets.xi = targets.prior_values + hp.noise_scale() * targets.noise;
  return targets;
}

PathwiseTargets pathwise_targets_from_prior(const Eigen::MatrixXd& prior_values,
                                            const Hyperparameters& hp, std::uint64_t seed,
                                            std::uint64_t substream) {
  PathwiseTargets targets;
  targets.prior_values = prior_values;
  targets.noise.resize(prior_values.rows(), prior_values.cols());
  RandomStream noise_stream(seed, streams::kNoiseDraws, substream);
  noise_stream.fill_gaussian(targets.noise);
  targets.xi = targets.prior_values + hp.noise_scale() * targets.noise;
  return targets;
}

}  // namespace gpiter
