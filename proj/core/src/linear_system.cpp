#include "gpiter/linear_system.hpp"

#include <stdexcept>

namespace gpiter {

void SolverConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("SolverConfig: tolerance > 0");
  if (max_epochs < 1) throw std::invalid_argument("SolverConfig: max_epochs >= 1");
  if (block_size < 1) throw std::invalid_argument("SolverConfig: block_size >= 1");
  if (batch_size < 1) throw std::invalid_argument("SolverConfig: batch_size >= 1");
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("SolverConfig: 0 <= momentum < 1");
  if (preconditioner_rank < 0) throw std::invalid_argument("SolverConfig: preconditioner_rank >= 0");
}

LinearSystemBatch::LinearSystemBatch(const KernelOperator& op_in, Eigen::MatrixXd targets_in)
    : op(&op_in), targets(std::move(targets_in)) {
  if (targets.rows() != op->size()) {
    throw std::invalid_argument("LinearSystemBatch: target height does not match operator");
  }
  scales = targets.colwise().norm().array() + kNormEpsilon;
  solutions = Eigen::MatrixXd::Zero(targets.rows(), targets.cols());
  residuals = Eigen::MatrixXd::Zero(targets.rows(), targets.cols());
}

void LinearSystemBatch::warm_start(const Eigen::MatrixXd& previous_solutions) {
  if (previous_solutions.rows() != targets.rows() || previous_solutions.cols() != targets.cols()) {
    throw std::invalid_argument("LinearSystemBatch::warm_start: shape mismatch");
  }
  solutions = previous_solutions;
}

void LinearSystemBatch::refresh_residuals() { residuals = targets - op->apply(solutions); }

double LinearSystemBatch::mean_residual_norm() const {
  return residuals.col(0).norm() / scales[0];
}

double LinearSystemBatch::probe_residual_norm() const {
  const int s = probe_count();
  if (s == 0) return 0.0;
  double sum = 0.0;
  for (int j = 1; j < columns(); ++j) sum += residuals.col(j).norm() / scales[j];
  return sum / s;
}

TerminationStatus termination_check(const LinearSystemBatch& batch, double tolerance) {
  TerminationStatus status;
  status.mean_norm = batch.mean_residual_norm();
  status.probe_norm = batch.probe_residual_norm();
  status.done = status.mean_norm <= tolerance && status.probe_norm <= tolerance;
  return status;
}

}  // namespace gpiter
