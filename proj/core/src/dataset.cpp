#include "gpiter/dataset.hpp"

#include <stdexcept>

namespace gpiter {

Standardisation Standardisation::identity(int dim) {
  Standardisation s;
  s.feature_mean = Eigen::VectorXd::Zero(dim);
  s.feature_scale = Eigen::VectorXd::Ones(dim);
  return s;
}

Dataset Dataset::from_raw(Eigen::MatrixXd inputs, Eigen::VectorXd targets) {
  if (inputs.rows() != targets.size()) {
    throw std::invalid_argument("Dataset: inputs and targets disagree on n");
  }
  Dataset ds;
  ds.stats = Standardisation::identity(static_cast<int>(inputs.cols()));
  ds.inputs = std::move(inputs);
  ds.targets = std::move(targets);
  return ds;
}

}  // namespace gpiter
