#include "gpiter/hyperparameters.hpp"

#include <cmath>
#include <stdexcept>

namespace gpiter {

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double softplus_inverse(double y) {
  if (y <= 0.0) throw std::invalid_argument("softplus_inverse: argument must be positive");
  // log(exp(y) - 1) = y + log(1 - exp(-y))
  return y + std::log(-std::expm1(-y));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Hyperparameters Hyperparameters::from_raw(Eigen::VectorXd raw) {
  if (raw.size() < 3) throw std::invalid_argument("Hyperparameters: need at least d=1 plus scales");
  return Hyperparameters(std::move(raw));
}

Hyperparameters Hyperparameters::from_constrained(const Eigen::VectorXd& constrained) {
  Eigen::VectorXd raw(constrained.size());
  for (Eigen::Index i = 0; i < constrained.size(); ++i) raw[i] = softplus_inverse(constrained[i]);
  return from_raw(std::move(raw));
}

Hyperparameters Hyperparameters::constant(int input_dim, double value) {
  return from_constrained(Eigen::VectorXd::Constant(input_dim + 2, value));
}

Eigen::VectorXd Hyperparameters::constrained() const {
  Eigen::VectorXd out(raw_.size());
  for (Eigen::Index i = 0; i < raw_.size(); ++i) out[i] = softplus(raw_[i]);
  return out;
}

Eigen::VectorXd Hyperparameters::lengthscales() const {
  Eigen::VectorXd out(input_dim());
  for (int i = 0; i < input_dim(); ++i) out[i] = softplus(raw_[i]);
  return out;
}

double Hyperparameters::noise_variance() const {
  const double sigma = noise_scale();
  return sigma * sigma;
}

void Hyperparameters::validate() const {
  const Eigen::VectorXd c = constrained();
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i]) || c[i] <= 0.0) {
      throw std::invalid_argument("Hyperparameters: constrained value " + std::to_string(i) +
                                  " is not finite and positive");
    }
  }
}

}  // namespace gpiter
