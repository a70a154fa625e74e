#include "gpiter/solvers.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "gpiter/rng.hpp"

namespace gpiter {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void finalise(SolverReport& report, const LinearSystemBatch& batch, double tolerance,
              Clock::time_point start) {
  const TerminationStatus status = termination_check(batch, tolerance);
  report.mean_residual_norm = status.mean_norm;
  report.probe_residual_norm = status.probe_norm;
  report.reached_tolerance = status.done;
  report.wall_seconds = seconds_since(start);
}

}  // namespace

SolverReport solve_cg(LinearSystemBatch& batch, const SolverConfig& config,
                      const PivotedCholeskyPreconditioner* precond) {
  config.validate();
  const auto start = Clock::now();
  const int cols = batch.columns();
  SolverReport report;

  const auto precondition = [&](const Eigen::MatrixXd& r) {
    return precond ? precond->apply(r) : r;
  };

  batch.refresh_residuals();
  Eigen::MatrixXd p = precondition(batch.residuals);
  Eigen::MatrixXd d = p;
  Eigen::VectorXd gamma(cols);
  for (int j = 0; j < cols; ++j) gamma[j] = batch.residuals.col(j).dot(p.col(j));

  int t = 0;
  while (t < config.max_epochs && !termination_check(batch, config.tolerance).done) {
    const Eigen::MatrixXd hd = batch.op->apply(d);
    Eigen::VectorXd alpha(cols);
    for (int j = 0; j < cols; ++j) {
      const double denom = d.col(j).dot(hd.col(j));
      if (denom > 0.0) {
        alpha[j] = gamma[j] / denom;
      } else if (gamma[j] == 0.0 && denom == 0.0) {
        alpha[j] = 0.0;  // column already exact; direction is zero
      } else {
        alpha[j] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    if (!alpha.allFinite()) {
      // Negative curvature or overflow from round-off; H is SPD, so this is
      // numerical failure. Solutions stay at the last finite iterate.
      report.aborted = true;
      report.abort_reason = "cg breakdown: non-finite step size";
      break;
    }
    batch.solutions += d * alpha.asDiagonal();
    batch.residuals -= hd * alpha.asDiagonal();
    p = precondition(batch.residuals);
    Eigen::VectorXd gamma_next(cols);
    for (int j = 0; j < cols; ++j) gamma_next[j] = batch.residuals.col(j).dot(p.col(j));
    Eigen::VectorXd beta(cols);
    for (int j = 0; j < cols; ++j) beta[j] = gamma[j] != 0.0 ? gamma_next[j] / gamma[j] : 0.0;
    gamma = gamma_next;
    d = p + d * beta.asDiagonal();
    ++t;
  }

  report.iterations = t;
  report.epochs_consumed = static_cast<double>(t);
  finalise(report, batch, config.tolerance, start);
  return report;
}

SolverReport solve_ap(LinearSystemBatch& batch, const SolverConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const int n = batch.op->size();
  const int block = std::min(config.block_size, n);
  const int num_blocks = (n + block - 1) / block;
  SolverReport report;

  batch.refresh_residuals();
  const Eigen::VectorXd inv_scales = batch.scales.cwiseInverse();

  std::vector<std::optional<Eigen::LLT<Eigen::MatrixXd>>> factors(num_blocks);
  const auto block_start = [&](int k) { return k * block; };
  const auto block_len = [&](int k) { return std::min(block, n - k * block); };
  const auto factor_for = [&](int k) -> const Eigen::LLT<Eigen::MatrixXd>& {
    if (!factors[k]) {
      Eigen::LLT<Eigen::MatrixXd> llt(
          batch.op->dense_block(block_start(k), block_len(k), block_start(k), block_len(k)));
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error(
            "solve_ap: block Cholesky failed; block is not positive definite "
            "(noise scale too small)");
      }
      factors[k] = std::move(llt);
    }
    return *factors[k];
  };

  const double max_iterations = static_cast<double>(config.max_epochs) * n / block;
  int t = 0;
  while (t < max_iterations && !termination_check(batch, config.tolerance).done) {
    // Pick the block whose residual columns, summed per row at the per-column
    // normalisation, carry the most mass.
    int selected = 0;
    double best = -1.0;
    for (int k = 0; k < num_blocks; ++k) {
      const double score =
          (batch.residuals.middleRows(block_start(k), block_len(k)) * inv_scales).norm();
      if (score > best) {
        best = score;
        selected = k;
      }
    }
    const int r0 = block_start(selected);
    const int len = block_len(selected);
    const Eigen::MatrixXd update = factor_for(selected).solve(batch.residuals.middleRows(r0, len));
    batch.solutions.middleRows(r0, len) += update;
    batch.residuals -= batch.op->apply_columns(r0, len, update);
    ++t;
  }

  report.iterations = t;
  report.epochs_consumed = static_cast<double>(t) * block / n;
  finalise(report, batch, config.tolerance, start);
  return report;
}

SolverReport solve_sgd(LinearSystemBatch& batch, const SolverConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const int n = batch.op->size();
  const int b = std::min(config.batch_size, n);
  SolverReport report;
  report.residuals_estimated = true;

  // The algorithm tracks residuals sparsely, starting from the targets; rows
  // are refreshed as they are visited.
  batch.residuals = batch.targets;
  Eigen::MatrixXd momentum = Eigen::MatrixXd::Zero(n, batch.columns());

  RandomStream rng(config.seed, streams::kSolver, config.substream);
  const double max_iterations = static_cast<double>(config.max_epochs) * n / b;
  const double step = config.learning_rate / b;
  int t = 0;
  while (t < max_iterations && !termination_check(batch, config.tolerance).done) {
    const std::vector<int> idx = rng.sample_without_replacement(n, b);
    const Eigen::MatrixXd gradient =
        batch.op->apply_rows(idx, batch.solutions) - batch.targets(idx, Eigen::all);
    momentum *= config.momentum;
    momentum(idx, Eigen::all) -= step * gradient;
    batch.solutions += momentum;
    batch.residuals(idx, Eigen::all) = -gradient;
    ++t;
    if (!batch.solutions.allFinite()) {
      report.aborted = true;
      report.abort_reason = "sgd divergence: non-finite iterate";
      break;
    }
  }

  report.iterations = t;
  report.epochs_consumed = static_cast<double>(t) * b / n;
  finalise(report, batch, config.tolerance, start);
  return report;
}

SolverReport solve(LinearSystemBatch& batch, const SolverConfig& config) {
  switch (config.kind) {
    case SolverKind::CG: {
      if (config.preconditioner_rank > 0) {
        PivotedCholeskyPreconditioner precond(*batch.op,
                                              std::min(config.preconditioner_rank, batch.op->size()));
        return solve_cg(batch, config, &precond);
      }
      return solve_cg(batch, config, nullptr);
    }
    case SolverKind::AP:
      return solve_ap(batch, config);
    case SolverKind::SGD:
      return solve_sgd(batch, config);
  }
  throw std::logic_error("solve: unknown solver kind");
}

}  // namespace gpiter
