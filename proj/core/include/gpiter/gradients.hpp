#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "gpiter/kernel.hpp"

namespace gpiter {

enum class ProbeKind { Standard, Pathwise };
enum class ProbeDistribution { Gaussian, Rademacher, DeterministicBasis };

// Probe vectors for stochastic trace estimation. Standard probes have unit
// second moment; pathwise targets are handled by prior_sampling and carry
// second moment H. `fixed` records whether the set is reused across outer
// steps (warm starting).
struct ProbeSet {
  ProbeKind kind = ProbeKind::Standard;
  Eigen::MatrixXd targets;  // n x s
  bool fixed = false;
  std::uint64_t seed = 0;
};

ProbeSet gen_standard_probes(int n, int s, std::uint64_t seed,
                             ProbeDistribution distribution = ProbeDistribution::Gaussian,
                             std::uint64_t substream = 0);

/// Deterministic basis sqrt(n) * I, which makes the Hutchinson estimator
/// exact; requires s == n.
Eigen::MatrixXd deterministic_basis_probes(int n);

struct GradientEstimate {
  Eigen::VectorXd values;          // with respect to constrained parameters
  Eigen::VectorXd quadratic_term;  // v_y^T dH v_y per parameter
  Eigen::VectorXd trace_term;      // (1/s) sum_j u_j^T dH w_j per parameter
};

// Standard estimator: v_y solves H v_y = y and V solves H V = Z. The trace
// term contracts the solved columns against the probes.
GradientEstimate estimate_gradient_standard(const KernelOperator& op, const Eigen::VectorXd& v_y,
                                            const Eigen::MatrixXd& solutions,
                                            const Eigen::MatrixXd& probes);

// Pathwise estimator: columns of zhat solve H zhat_j = xi_j; the trace term
// is the quadratic form of the solutions themselves.
GradientEstimate estimate_gradient_pathwise(const KernelOperator& op, const Eigen::VectorXd& v_y,
                                            const Eigen::MatrixXd& zhat);

/// Squared RKHS distance b^T H^-1 b from a zero initialisation, given the
/// solve u = H^-1 b.
double initial_rkhs_distance(const Eigen::VectorXd& b, const Eigen::VectorXd& u);

}  // namespace gpiter
