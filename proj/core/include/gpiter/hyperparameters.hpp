#pragma once

#include <Eigen/Dense>

namespace gpiter {

/// log(1 + exp(x)), evaluated stably for large |x|.
double softplus(double x);

/// Inverse of softplus on (0, inf), stable for large arguments.
double softplus_inverse(double y);

double sigmoid(double x);

// Kernel hyperparameters stored as an unconstrained raw vector of length
// d + 2, laid out as [lengthscales (d), signal scale, noise scale]. The
// positive constrained values are softplus views of the raw entries; the
// optimiser only ever touches the raw vector.
class Hyperparameters {
 public:
  Hyperparameters() = default;

  static Hyperparameters from_raw(Eigen::VectorXd raw);
  static Hyperparameters from_constrained(const Eigen::VectorXd& constrained);
  /// All constrained values equal to `value` for input dimension d.
  static Hyperparameters constant(int input_dim, double value);

  int input_dim() const { return static_cast<int>(raw_.size()) - 2; }
  int count() const { return static_cast<int>(raw_.size()); }

  const Eigen::VectorXd& raw() const { return raw_; }
  Eigen::VectorXd constrained() const;

  Eigen::VectorXd lengthscales() const;
  double signal_scale() const { return softplus(raw_[raw_.size() - 2]); }
  double noise_scale() const { return softplus(raw_[raw_.size() - 1]); }
  double noise_variance() const;

  static int signal_index(int input_dim) { return input_dim; }
  static int noise_index(int input_dim) { return input_dim + 1; }

  /// Throws if any constrained view is non-finite or not strictly positive.
  void validate() const;

 private:
  explicit Hyperparameters(Eigen::VectorXd raw) : raw_(std::move(raw)) {}

  Eigen::VectorXd raw_;
};

}  // namespace gpiter
