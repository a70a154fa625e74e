#include "gpiter/outer_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gpiter/exact.hpp"
#include "gpiter/rff.hpp"
#include "gpiter/rng.hpp"
#include "gpiter/solvers.hpp"

namespace gpiter {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::VectorXd initial_raw(const OuterConfig& config, int input_dim) {
  if (config.init_constrained) {
    return Hyperparameters::from_constrained(*config.init_constrained).raw();
  }
  return Hyperparameters::constant(input_dim, config.init_value).raw();
}

PriorEvaluator make_rff_prior(std::shared_ptr<const RffBasis> basis, const Hyperparameters& hp) {
  return [basis, hp](int sample, const Eigen::MatrixXd& points) {
    return evaluate_prior(*basis, hp, points, sample);
  };
}

}  // namespace

AdamState::AdamState(int dim, double lr)
    : m(Eigen::VectorXd::Zero(dim)), v(Eigen::VectorXd::Zero(dim)), learning_rate(lr) {}

Eigen::VectorXd AdamState::update(const Eigen::VectorXd& gradient) {
  ++step;
  m = beta1 * m + (1.0 - beta1) * gradient;
  v = beta2 * v + (1.0 - beta2) * gradient.array().square().matrix();
  const double m_scale = 1.0 / (1.0 - std::pow(beta1, step));
  const double v_scale = 1.0 / (1.0 - std::pow(beta2, step));
  return (-learning_rate) * (m_scale * m.array() / ((v_scale * v.array()).sqrt() + epsilon)).matrix();
}

Eigen::VectorXd raw_gradient(const Eigen::VectorXd& constrained_grad, const Eigen::VectorXd& raw) {
  Eigen::VectorXd out(raw.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) out[i] = constrained_grad[i] * sigmoid(raw[i]);
  return out;
}

OuterResult optimise(std::shared_ptr<const Dataset> train, const Dataset* test,
                     const OuterConfig& config) {
  const auto run_start = Clock::now();
  const int n = train->n();
  const int d = train->dim();
  const int s = config.probe_count;
  config.solver.validate();
  if (config.steps < 0) throw std::invalid_argument("optimise: steps >= 0");

  OuterResult result;
  Eigen::VectorXd raw = initial_raw(config, d);
  AdamState adam(d + 2, config.learning_rate);

  KernelOperatorOptions op_options;
  op_options.block_rows = config.block_rows;
  op_options.dense_cache = n <= config.dense_cache_cap;

  SolverConfig solver_config = config.solver;
  solver_config.warm_start = config.warm_start;
  bool sgd_halved = false;

  // Fixed randomness under warm starting; resampled per step otherwise.
  const bool pathwise = config.estimator == EstimatorKind::Pathwise;
  const bool deterministic_probes =
      config.probe_distribution == ProbeDistribution::DeterministicBasis;
  std::shared_ptr<const RffBasis> basis;
  ProbeSet probes;
  Eigen::MatrixXd exact_prior_weights;  // n x s, fixed draws for PriorMode::ExactDense

  Eigen::MatrixXd previous_solutions;
  bool have_previous = false;

  // Summary-level metrics use a dedicated CG solve so comparisons across
  // runs measure the hyperparameters, not the run's solver budget.
  SolverConfig metric_solver;
  metric_solver.kind = SolverKind::CG;
  metric_solver.tolerance = std::min(0.01, config.solver.tolerance);
  metric_solver.max_epochs = std::max(100, config.solver.max_epochs);
  metric_solver.preconditioner_rank = std::min(100, n);

  const auto metrics_at = [&](const Hyperparameters& hp) -> TestMetrics {
    KernelOperator op(train, hp, op_options);
    std::shared_ptr<const RffBasis> metric_basis = basis;
    if (!metric_basis || metric_basis->sample_count() < 2) {
      metric_basis = std::make_shared<RffBasis>(
          build_rff_basis(d, config.rff_pairs, std::max(2, s), config.feature_seed));
    }
    const int samples = metric_basis->sample_count();
    const PathwiseTargets targets =
        pathwise_targets(*metric_basis, hp, *train, samples, config.feature_seed);
    Eigen::MatrixXd batch_targets(n, samples + 1);
    batch_targets.col(0) = train->targets;
    batch_targets.rightCols(samples) = targets.xi;
    LinearSystemBatch batch(op, std::move(batch_targets));
    solve(batch, metric_solver);
    PosteriorHandle handle;
    handle.train = train;
    handle.hp = hp;
    handle.v_y = batch.solutions.col(0);
    handle.zhat = batch.solutions.rightCols(samples);
    handle.prior = make_rff_prior(metric_basis, hp);
    return test_metrics(handle, test->inputs, test->targets);
  };

  if (test && config.steps > 0) {
    result.initial_metrics = metrics_at(Hyperparameters::from_raw(raw));
  }

  for (int t = 0; t < config.steps; ++t) {
    const Hyperparameters hp = Hyperparameters::from_raw(raw);
    const auto solver_start = Clock::now();
    KernelOperator op(train, hp, op_options);

    // Assemble targets [y, b_1 .. b_s].
    const std::uint64_t substream = config.warm_start ? 0 : static_cast<std::uint64_t>(t);
    PathwiseTargets path_targets;
    if (pathwise) {
      if (config.prior_mode == PriorMode::RandomFeatures) {
        if (!basis || !config.warm_start) {
          basis = std::make_shared<RffBasis>(
              build_rff_basis(d, config.rff_pairs, s, config.feature_seed, substream));
        }
        path_targets = pathwise_targets(*basis, hp, *train, s, config.feature_seed, substream);
      } else {
        if (n > kDefaultDenseCap) {
          throw std::invalid_argument("optimise: exact prior draws need n within the dense cap");
        }
        if (exact_prior_weights.size() == 0 || !config.warm_start) {
          RandomStream stream(config.feature_seed, streams::kPriorSample, substream);
          exact_prior_weights.resize(n, s);
          stream.fill_gaussian(exact_prior_weights);
        }
        Eigen::MatrixXd kernel_matrix = op.dense();
        kernel_matrix.diagonal().array() -= hp.noise_variance();
        const Eigen::MatrixXd chol = jittered_kernel_cholesky(kernel_matrix);
        path_targets = pathwise_targets_from_prior(chol * exact_prior_weights, hp,
                                                   config.feature_seed, substream);
      }
    } else if (probes.targets.size() == 0 || (!config.warm_start && !deterministic_probes)) {
      probes = gen_standard_probes(n, deterministic_probes ? n : s, config.probe_seed,
                                   config.probe_distribution, substream);
      probes.fixed = config.warm_start || deterministic_probes;
    }
    const Eigen::MatrixXd& probe_targets = pathwise ? path_targets.xi : probes.targets;
    Eigen::MatrixXd batch_targets(n, probe_targets.cols() + 1);
    batch_targets.col(0) = train->targets;
    batch_targets.rightCols(probe_targets.cols()) = probe_targets;

    LinearSystemBatch batch(op, std::move(batch_targets));
    if (config.warm_start && have_previous) batch.warm_start(previous_solutions);
    solver_config.substream = static_cast<std::uint64_t>(t);
    solver_config.seed = config.solver_seed;
    const SolverReport report = solve(batch, solver_config);
    const double solver_elapsed = seconds_since(solver_start);
    result.solver_seconds += solver_elapsed;

    TraceRecord row;
    row.step = t;
    row.constrained = hp.constrained();
    row.mean_residual_norm = report.mean_residual_norm;
    row.probe_residual_norm = report.probe_residual_norm;
    row.epochs = report.epochs_consumed;
    row.solver_diverged = report.aborted;

    if (report.aborted) {
      if (config.divergence_policy == DivergencePolicy::Abort) {
        result.aborted = true;
        result.abort_reason = report.abort_reason;
        row.solver_seconds_cum = result.solver_seconds;
        row.total_seconds_cum = seconds_since(run_start);
        result.trace.push_back(std::move(row));
        break;
      }
      // Skip the step; halve the SGD learning rate once.
      if (solver_config.kind == SolverKind::SGD && !sgd_halved) {
        solver_config.learning_rate *= 0.5;
        sgd_halved = true;
      }
    } else {
      const Eigen::VectorXd v_y = batch.solutions.col(0);
      const Eigen::MatrixXd probe_solutions = batch.solutions.rightCols(batch.columns() - 1);
      GradientEstimate gradient =
          pathwise ? estimate_gradient_pathwise(op, v_y, probe_solutions)
                   : estimate_gradient_standard(op, v_y, probe_solutions,
                                                batch.targets.rightCols(batch.columns() - 1));
      row.grad_inf_norm = gradient.values.lpNorm<Eigen::Infinity>();

      // Per-step test metrics: free for pathwise, extra solves for standard.
      if (test) {
        const bool standard_metrics_due =
            !pathwise && (config.metric_stride > 0 ? (t + 1) % config.metric_stride == 0
                                                   : t == config.steps - 1);
        if (pathwise) {
          PosteriorHandle handle;
          handle.train = train;
          handle.hp = hp;
          handle.v_y = v_y;
          handle.zhat = probe_solutions;
          if (config.prior_mode == PriorMode::RandomFeatures) {
            handle.prior = make_rff_prior(basis, hp);
          }
          const TestMetrics metrics = test_metrics(handle, test->inputs, test->targets);
          row.test_rmse = metrics.rmse;
          if (metrics.llh) row.test_llh = metrics.llh;
        } else if (standard_metrics_due) {
          const TestMetrics metrics = metrics_at(hp);
          row.test_rmse = metrics.rmse;
          if (metrics.llh) row.test_llh = metrics.llh;
        }
      }

      // Ascent on L via a stock minimiser applied to -L.
      const Eigen::VectorXd raw_grad = raw_gradient(gradient.values, raw);
      raw += adam.update(-raw_grad);
      previous_solutions = batch.solutions;
      have_previous = true;
    }

    row.solver_seconds_cum = result.solver_seconds;
    row.total_seconds_cum = seconds_since(run_start);
    result.trace.push_back(std::move(row));
  }

  result.hp = Hyperparameters::from_raw(raw);
  if (test && config.steps > 0 && !result.aborted) {
    result.final_metrics = metrics_at(result.hp);
  }
  result.total_seconds = seconds_since(run_start);
  return result;
}

ExactTrajectory optimise_exact(const Dataset& data, const Hyperparameters& init, int steps,
                               double learning_rate, int cap) {
  ExactTrajectory trajectory;
  Eigen::VectorXd raw = init.raw();
  AdamState adam(init.count(), learning_rate);
  for (int t = 0; t < steps; ++t) {
    const Hyperparameters hp = Hyperparameters::from_raw(raw);
    trajectory.constrained_per_step.push_back(hp.constrained());
    const DenseProblem dense = build_dense_problem(data, hp, cap);
    const Eigen::VectorXd grad = exact_gradient(dense, data.targets);
    raw += adam.update(-raw_gradient(grad, raw));
  }
  trajectory.hp = Hyperparameters::from_raw(raw);
  return trajectory;
}

Hyperparameters init_heuristic(const Dataset& data, int n_centroids, int subset,
                               std::uint64_t seed, int adam_steps, double learning_rate) {
  const int n = data.n();
  const int d = data.dim();
  const Hyperparameters init = Hyperparameters::constant(d, 1.0);
  if (subset >= n) {
    return optimise_exact(data, init, adam_steps, learning_rate, n).hp;
  }
  RandomStream stream(seed, streams::kCentroids);
  Eigen::VectorXd accumulated = Eigen::VectorXd::Zero(d + 2);
  for (int c = 0; c < n_centroids; ++c) {
    const int centroid = static_cast<int>(stream.next_below(n));
    // Nearest `subset` rows by Euclidean distance, ties broken by index.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Eigen::VectorXd dist2 =
        (data.inputs.rowwise() - data.inputs.row(centroid)).rowwise().squaredNorm();
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dist2[a] < dist2[b]; });
    Dataset local;
    local.stats = data.stats;
    local.inputs.resize(subset, d);
    local.targets.resize(subset);
    for (int i = 0; i < subset; ++i) {
      local.inputs.row(i) = data.inputs.row(order[i]);
      local.targets[i] = data.targets[order[i]];
    }
    const Hyperparameters fitted =
        optimise_exact(local, init, adam_steps, learning_rate, subset).hp;
    accumulated += fitted.constrained();
  }
  return Hyperparameters::from_constrained(accumulated / n_centroids);
}

double taylor_warmstart_diagnostic(const KernelOperator& op_t, const KernelOperator& op_t1,
                                   const Eigen::VectorXd& v_t) {
  // Recover the shared right-hand side from the previous solution, then
  // compare the first-order prediction with the exact new solution.
  const Eigen::VectorXd b = op_t.apply(v_t);
  const Eigen::MatrixXd h_t = op_t.dense();
  const Eigen::MatrixXd h_t1 = op_t1.dense();
  if ((h_t1 - h_t).norm() == 0.0) return 0.0;  // no step, nothing to predict
  const Eigen::LLT<Eigen::MatrixXd> chol_t(h_t);
  const Eigen::LLT<Eigen::MatrixXd> chol_t1(h_t1);
  const Eigen::VectorXd delta_v = chol_t.solve((h_t1 - h_t) * v_t);
  const Eigen::VectorXd predicted = v_t - delta_v;
  const Eigen::VectorXd v_next = chol_t1.solve(b);
  const Eigen::VectorXd prediction_error = predicted - v_next;
  const Eigen::VectorXd actual_change = v_next - v_t;
  const double error_norm = std::sqrt(prediction_error.dot(h_t1 * prediction_error));
  const double change_norm = std::sqrt(actual_change.dot(h_t1 * actual_change));
  if (change_norm == 0.0) return 0.0;
  return error_norm / change_norm;
}

}  // namespace gpiter
