#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "gpiter/kernel.hpp"

namespace gpiter {

enum class SolverKind { CG, AP, SGD };

struct SolverConfig {
  SolverKind kind = SolverKind::CG;
  double tolerance = 0.01;
  int max_epochs = 50;         // T; one epoch = one full pass over H's entries
  int block_size = 1000;       // AP
  int batch_size = 500;        // SGD
  double learning_rate = 30.0; // SGD
  double momentum = 0.9;       // SGD
  int preconditioner_rank = 100;  // CG
  bool warm_start = false;
  std::uint64_t seed = 0;        // SGD batch sampling
  std::uint64_t substream = 0;   // varies per outer step so batches differ

  void validate() const;
};

struct SolverReport {
  int iterations = 0;
  double epochs_consumed = 0.0;
  double mean_residual_norm = 0.0;
  double probe_residual_norm = 0.0;
  bool reached_tolerance = false;
  bool residuals_estimated = false;  // SGD tracks residuals only approximately
  bool aborted = false;
  std::string abort_reason;
  double wall_seconds = 0.0;
};

// Batch of linear systems H [u_y, u_1, ..., u_s] = [y, b_1, ..., b_s] sharing
// one coefficient operator. Column 0 carries the mean system. Residual norms
// are relative, normalised per column by ||b_j|| + epsilon.
struct LinearSystemBatch {
  static constexpr double kNormEpsilon = 1e-12;

  const KernelOperator* op = nullptr;
  Eigen::MatrixXd targets;
  Eigen::MatrixXd solutions;
  Eigen::MatrixXd residuals;
  Eigen::VectorXd scales;  // ||b_j|| + epsilon per column

  LinearSystemBatch() = default;
  LinearSystemBatch(const KernelOperator& op, Eigen::MatrixXd targets);

  int columns() const { return static_cast<int>(targets.cols()); }
  int probe_count() const { return columns() - 1; }

  /// Sets the initial iterate to a previous solution, bit for bit.
  void warm_start(const Eigen::MatrixXd& previous_solutions);

  /// Recomputes residuals = targets - H * solutions from scratch.
  void refresh_residuals();

  double mean_residual_norm() const;
  double probe_residual_norm() const;
};

struct TerminationStatus {
  double mean_norm = 0.0;
  double probe_norm = 0.0;
  bool done = false;
};

/// done iff both relative residual norms are at or below the tolerance.
TerminationStatus termination_check(const LinearSystemBatch& batch, double tolerance);

}  // namespace gpiter
