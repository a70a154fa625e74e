#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpiter/dataset.hpp"
#include "gpiter/gradients.hpp"
#include "gpiter/hyperparameters.hpp"
#include "gpiter/linear_system.hpp"
#include "gpiter/posterior.hpp"
#include "gpiter/trace.hpp"

namespace gpiter {

enum class EstimatorKind { Standard, Pathwise };
enum class PriorMode { RandomFeatures, ExactDense };
enum class DivergencePolicy { SkipAndHalve, Abort };

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  int step = 0;
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState(int dim, double lr);

  /// Update to add to the parameters, given the gradient of the minimised
  /// objective at the current point.
  Eigen::VectorXd update(const Eigen::VectorXd& gradient);
};

/// Softplus chain rule: gradient with respect to the raw parameters.
Eigen::VectorXd raw_gradient(const Eigen::VectorXd& constrained_grad, const Eigen::VectorXd& raw);

struct OuterConfig {
  EstimatorKind estimator = EstimatorKind::Standard;
  SolverConfig solver;
  bool warm_start = false;
  int steps = 100;
  double learning_rate = 0.1;
  int probe_count = 64;  // s
  int rff_pairs = 1000;
  ProbeDistribution probe_distribution = ProbeDistribution::Gaussian;
  PriorMode prior_mode = PriorMode::RandomFeatures;
  std::uint64_t probe_seed = 0;
  std::uint64_t feature_seed = 0;
  std::uint64_t solver_seed = 0;
  // Per-step test metrics are free with the pathwise estimator and computed
  // every step; with the standard estimator they need extra solves and run
  // every `metric_stride` steps (0: final step only).
  int metric_stride = 0;
  double init_value = 1.0;  // constrained initialisation for all parameters
  std::optional<Eigen::VectorXd> init_constrained;
  int dense_cache_cap = 4096;
  int block_rows = 1024;
  DivergencePolicy divergence_policy = DivergencePolicy::SkipAndHalve;
};

struct OuterResult {
  Hyperparameters hp;
  std::vector<TraceRecord> trace;
  std::optional<TestMetrics> initial_metrics;
  std::optional<TestMetrics> final_metrics;
  bool aborted = false;
  std::string abort_reason;
  double solver_seconds = 0.0;
  double total_seconds = 0.0;
};

// Maximises the marginal likelihood with Adam over softplus-reparameterised
// hyperparameters: per step, (re)generate or reuse probes/targets, solve the
// batched systems, assemble the gradient estimate, and take an ascent step.
OuterResult optimise(std::shared_ptr<const Dataset> train, const Dataset* test,
                     const OuterConfig& config);

struct ExactTrajectory {
  Hyperparameters hp;
  std::vector<Eigen::VectorXd> constrained_per_step;  // evaluated points
};

/// Adam on the exact dense gradient; the reference trajectory.
ExactTrajectory optimise_exact(const Dataset& data, const Hyperparameters& init, int steps,
                               double learning_rate, int cap = 4096);

// Averaged-subset initialisation: optimise the exact marginal likelihood on
// the `subset` nearest neighbours of each of `n_centroids` random centroids
// and average the constrained hyperparameters. Falls back to whole-dataset
// exact optimisation when subset >= n.
Hyperparameters init_heuristic(const Dataset& data, int n_centroids, int subset,
                               std::uint64_t seed, int adam_steps = 100,
                               double learning_rate = 0.1);

// First-order prediction quality of warm starting: with b recovered from
// H_t v_t, compares the Taylor-predicted solution against the exact solution
// at t+1 in the H-norm, relative to the actual solution change. Small n only.
double taylor_warmstart_diagnostic(const KernelOperator& op_t, const KernelOperator& op_t1,
                                   const Eigen::VectorXd& v_t);

}  // namespace gpiter
