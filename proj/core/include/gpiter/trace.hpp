#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpiter {

// One row per outer optimisation step. Solver seconds cover operator
// preparation (kernel evaluation) plus the solve itself, so the trace can
// decompose solver time from total time.
struct TraceRecord {
  int step = 0;
  Eigen::VectorXd constrained;  // hyperparameters the step was evaluated at
  double mean_residual_norm = 0.0;
  double probe_residual_norm = 0.0;
  double epochs = 0.0;
  double solver_seconds_cum = 0.0;
  double total_seconds_cum = 0.0;
  std::optional<double> test_rmse;
  std::optional<double> test_llh;
  double grad_inf_norm = 0.0;
  bool solver_diverged = false;
};

/// Shortest decimal string that round-trips the double exactly.
std::string format_double(double value);

/// Column header for a trace with d lengthscales.
std::string trace_header(int input_dim);

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace, int input_dim);

}  // namespace gpiter
