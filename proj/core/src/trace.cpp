#include "gpiter/trace.hpp"

#include <cstdio>

namespace gpiter {

std::string format_double(double value) {
  char buffer[40];
  // Shortest representation that parses back exactly.
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    double parsed = 0.0;
    std::sscanf(buffer, "%lf", &parsed);
    if (parsed == value) return buffer;
  }
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string trace_header(int input_dim) {
  std::string header = "step";
  for (int i = 0; i < input_dim; ++i) header += ",lengthscale_" + std::to_string(i);
  header += ",signal_scale,noise_scale,mean_residual_norm,probe_residual_norm,epochs";
  header += ",solver_seconds_cum,total_seconds_cum,test_rmse,test_llh,grad_inf_norm,diverged";
  return header;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace, int input_dim) {
  out << trace_header(input_dim) << "\n";
  for (const auto& row : trace) {
    out << row.step;
    for (int i = 0; i < row.constrained.size(); ++i) out << ',' << format_double(row.constrained[i]);
    out << ',' << format_double(row.mean_residual_norm);
    out << ',' << format_double(row.probe_residual_norm);
    out << ',' << format_double(row.epochs);
    out << ',' << format_double(row.solver_seconds_cum);
    out << ',' << format_double(row.total_seconds_cum);
    out << ',' << (row.test_rmse ? format_double(*row.test_rmse) : "");
    out << ',' << (row.test_llh ? format_double(*row.test_llh) : "");
    out << ',' << format_double(row.grad_inf_norm);
    out << ',' << (row.solver_diverged ? 1 : 0);
    out << '\n';
  }
}

}  // namespace gpiter
