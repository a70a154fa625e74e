#include "gpiter/gradients.hpp"

#include <cmath>
#include <stdexcept>

#include "gpiter/rng.hpp"

namespace gpiter {

ProbeSet gen_standard_probes(int n, int s, std::uint64_t seed, ProbeDistribution distribution,
                             std::uint64_t substream) {
  if (s < 1) throw std::invalid_argument("gen_standard_probes: s >= 1");
  ProbeSet set;
  set.kind = ProbeKind::Standard;
  set.seed = seed;
  set.targets.resize(n, s);
  RandomStream stream(seed, streams::kProbes, substream);
  switch (distribution) {
    case ProbeDistribution::Gaussian:
      stream.fill_gaussian(set.targets);
      break;
    case ProbeDistribution::Rademacher:
      stream.fill_rademacher(set.targets);
      break;
    case ProbeDistribution::DeterministicBasis:
      if (s != n) throw std::invalid_argument("deterministic basis probes need s == n");
      set.targets = deterministic_basis_probes(n);
      break;
  }
  return set;
}

Eigen::MatrixXd deterministic_basis_probes(int n) {
  return std::sqrt(static_cast<double>(n)) * Eigen::MatrixXd::Identity(n, n);
}

namespace {

GradientEstimate assemble(const KernelOperator& op, const Eigen::VectorXd& v_y,
                          const Eigen::MatrixXd& u, const Eigen::MatrixXd& w) {
  const int s = static_cast<int>(u.cols());
  const Eigen::MatrixXd vy_mat = v_y;
  // Both terms share one pass over the kernel tiles.
  const auto forms = op.derivative_quadratic_forms_many({{&vy_mat, &vy_mat}, {&u, &w}});
  GradientEstimate estimate;
  estimate.quadratic_term = forms[0];
  estimate.trace_term = forms[1] / s;
  estimate.values = 0.5 * estimate.quadratic_term - 0.5 * estimate.trace_term;
  return estimate;
}

}  // namespace

GradientEstimate estimate_gradient_standard(const KernelOperator& op, const Eigen::VectorXd& v_y,
                                            const Eigen::MatrixXd& solutions,
                                            const Eigen::MatrixXd& probes) {
  if (solutions.rows() != op.size() || probes.rows() != op.size() ||
      solutions.cols() != probes.cols()) {
    throw std::invalid_argument("estimate_gradient_standard: shape mismatch");
  }
  return assemble(op, v_y, solutions, probes);
}

GradientEstimate estimate_gradient_pathwise(const KernelOperator& op, const Eigen::VectorXd& v_y,
                                            const Eigen::MatrixXd& zhat) {
  if (zhat.rows() != op.size()) {
    throw std::invalid_argument("estimate_gradient_pathwise: shape mismatch");
  }
  return assemble(op, v_y, zhat, zhat);
}

double initial_rkhs_distance(const Eigen::VectorXd& b, const Eigen::VectorXd& u) {
  return b.dot(u);
}

}  // namespace gpiter
