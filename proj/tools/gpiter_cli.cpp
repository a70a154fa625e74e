#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpiter/config.hpp"
#include "gpiter/data_io.hpp"
#include "gpiter/exact.hpp"
#include "gpiter/gradients.hpp"
#include "gpiter/outer_loop.hpp"
#include "gpiter/rff.hpp"
#include "gpiter/rng.hpp"
#include "gpiter/solvers.hpp"
#include "gpiter/trace.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> seed_overrides;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run configuration (JSON)")->required();
  cmd->add_option("--out", args.out_dir, "Output directory (overrides the config)");
  cmd->add_option("--seed-override", args.seed_overrides,
                  "Override a named seed, NAME=INT with NAME in {split,probes,features,solver}");
  cmd->add_flag("--verbose", args.verbose, "Chatty progress output");
}

gpiter::RunConfig prepare_config(const CommonArgs& args) {
  gpiter::RunConfig config = gpiter::load_run_config(args.config_path);
  for (const auto& spec : args.seed_overrides) gpiter::apply_seed_override(config, spec);
  if (!args.out_dir.empty()) config.output_dir = args.out_dir;
  return config;
}

struct LoadedData {
  std::shared_ptr<gpiter::Dataset> train;
  gpiter::Dataset test;
  gpiter::LoadReport report;
};

LoadedData load_and_split(const gpiter::RunConfig& config, bool verbose) {
  LoadedData out;
  const gpiter::Dataset raw = gpiter::load_table(config.dataset_path, config.table, &out.report);
  if (out.report.rows_dropped_nonfinite > 0) {
    std::cerr << "warning: dropped " << out.report.rows_dropped_nonfinite
              << " rows with non-finite entries\n";
  }
  gpiter::SplitResult split = gpiter::standardise_and_split(raw, config.split);
  if (split.clamped_features > 0) {
    std::cerr << "warning: " << split.clamped_features
              << " constant feature(s); scale clamped to 1\n";
  }
  if (verbose) {
    std::cerr << "loaded " << out.report.rows_loaded << " rows; train " << split.train.n()
              << ", test " << split.test.n() << ", d " << split.train.dim() << "\n";
  }
  out.train = std::make_shared<gpiter::Dataset>(std::move(split.train));
  out.test = std::move(split.test);
  return out;
}

json metrics_to_json(const gpiter::TestMetrics& metrics) {
  json out;
  out["rmse"] = metrics.rmse;
  out["rmse_raw"] = metrics.rmse_raw;
  if (metrics.llh) out["llh"] = *metrics.llh;
  if (metrics.llh_raw) out["llh_raw"] = *metrics.llh_raw;
  return out;
}

json hyperparameters_to_json(const gpiter::Hyperparameters& hp) {
  json out;
  const Eigen::VectorXd constrained = hp.constrained();
  const int d = hp.input_dim();
  out["lengthscales"] = std::vector<double>(constrained.data(), constrained.data() + d);
  out["signal_scale"] = constrained[d];
  out["noise_scale"] = constrained[d + 1];
  out["raw"] = std::vector<double>(hp.raw().data(), hp.raw().data() + hp.count());
  return out;
}

json standardisation_to_json(const gpiter::Standardisation& stats) {
  json out;
  out["feature_mean"] =
      std::vector<double>(stats.feature_mean.data(), stats.feature_mean.data() + stats.feature_mean.size());
  out["feature_scale"] = std::vector<double>(stats.feature_scale.data(),
                                             stats.feature_scale.data() + stats.feature_scale.size());
  out["target_mean"] = stats.target_mean;
  out["target_scale"] = stats.target_scale;
  return out;
}

int cmd_train(const CommonArgs& args) {
  const gpiter::RunConfig config = prepare_config(args);
  LoadedData data = load_and_split(config, args.verbose);

  const gpiter::OuterResult result =
      gpiter::optimise(data.train, &data.test, config.outer);

  fs::create_directories(config.output_dir);
  {
    std::ofstream trace_file(fs::path(config.output_dir) / "trace.csv", std::ios::binary);
    gpiter::write_trace_csv(trace_file, result.trace, data.train->dim());
  }

  json summary;
  summary["schema_version"] = gpiter::RunConfig::kSchemaVersion;
  summary["config"] = json::parse(gpiter::serialise_run_config(config));
  summary["n_train"] = data.train->n();
  summary["n_test"] = data.test.n();
  summary["hyperparameters"] = hyperparameters_to_json(result.hp);
  summary["standardisation"] = standardisation_to_json(data.train->stats);
  if (result.initial_metrics) summary["initial_metrics"] = metrics_to_json(*result.initial_metrics);
  if (result.final_metrics) summary["final_metrics"] = metrics_to_json(*result.final_metrics);
  summary["aborted"] = result.aborted;
  if (result.aborted) summary["abort_reason"] = result.abort_reason;
  summary["steps_completed"] = result.trace.size();
  double total_epochs = 0.0;
  int diverged_steps = 0;
  for (const auto& row : result.trace) {
    total_epochs += row.epochs;
    diverged_steps += row.solver_diverged ? 1 : 0;
  }
  summary["total_epochs"] = total_epochs;
  summary["diverged_steps"] = diverged_steps;
  summary["solver_seconds"] = result.solver_seconds;
  summary["total_seconds"] = result.total_seconds;
  {
    std::ofstream summary_file(fs::path(config.output_dir) / "summary.json", std::ios::binary);
    summary_file << summary.dump(2) << "\n";
  }

  if (args.verbose || result.aborted) {
    std::cerr << (result.aborted ? "aborted: " + result.abort_reason : "completed") << "\n";
  }
  return result.aborted ? 2 : 0;
}

int cmd_diagnose(const CommonArgs& args, int draws) {
  const gpiter::RunConfig config = prepare_config(args);
  LoadedData data = load_and_split(config, args.verbose);
  const int n = data.train->n();
  if (n > config.outer.dense_cache_cap) {
    std::cerr << "diagnose needs n <= " << config.outer.dense_cache_cap << ", got " << n << "\n";
    return 1;
  }

  const gpiter::Hyperparameters hp =
      gpiter::Hyperparameters::constant(data.train->dim(), config.outer.init_value);
  const gpiter::DenseProblem dense = gpiter::build_dense_problem(*data.train, hp);

  const Eigen::MatrixXd inverse_trace_solve =
      dense.chol.solve(Eigen::MatrixXd::Identity(n, n));
  const double trace_h_inverse = inverse_trace_solve.trace();

  // Power iteration on H^-1 through dense solves.
  gpiter::RandomStream power_stream(config.seeds.solver, gpiter::streams::kSolver);
  Eigen::VectorXd vec(n);
  power_stream.fill_gaussian(vec);
  vec.normalize();
  double eigenvalue = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd next = dense.chol.solve(vec);
    const double norm = next.norm();
    const double estimate = vec.dot(next);
    vec = next / norm;
    if (std::abs(estimate - eigenvalue) <= 1e-12 * std::abs(estimate)) {
      eigenvalue = estimate;
      break;
    }
    eigenvalue = estimate;
  }

  // Monte-Carlo initial squared RKHS distances for both estimators.
  Eigen::MatrixXd kernel_matrix = dense.h;
  kernel_matrix.diagonal().array() -= hp.noise_variance();
  const Eigen::MatrixXd chol_k = gpiter::jittered_kernel_cholesky(kernel_matrix);
  gpiter::RandomStream probe_stream(config.seeds.probes, gpiter::streams::kProbes);
  gpiter::RandomStream prior_stream(config.seeds.features, gpiter::streams::kPriorSample);
  double standard_distance = 0.0, pathwise_distance = 0.0;
  Eigen::VectorXd z(n), w(n);
  for (int i = 0; i < draws; ++i) {
    probe_stream.fill_gaussian(z);
    standard_distance += gpiter::initial_rkhs_distance(z, dense.chol.solve(z));
    prior_stream.fill_gaussian(w);
    Eigen::VectorXd xi = chol_k * w;
    for (int j = 0; j < n; ++j) xi[j] += hp.noise_scale() * prior_stream.next_gaussian();
    pathwise_distance += gpiter::initial_rkhs_distance(xi, dense.chol.solve(xi));
  }
  standard_distance /= draws;
  pathwise_distance /= draws;

  // Warm-start proximity: one exact optimiser step apart.
  const gpiter::ExactTrajectory step =
      gpiter::optimise_exact(*data.train, hp, 1, config.outer.learning_rate);
  gpiter::KernelOperator op_t(data.train, hp);
  gpiter::KernelOperator op_t1(data.train, step.hp);
  const Eigen::VectorXd v_t = dense.chol.solve(data.train->targets);
  const double taylor_ratio = gpiter::taylor_warmstart_diagnostic(op_t, op_t1, v_t);

  json out;
  out["n"] = n;
  out["trace_h_inverse"] = trace_h_inverse;
  out["top_eigenvalue_h_inverse"] = eigenvalue;
  out["noise_precision"] = 1.0 / hp.noise_variance();
  out["monte_carlo_draws"] = draws;
  out["initial_distance_standard"] = standard_distance;
  out["initial_distance_pathwise"] = pathwise_distance;
  out["taylor_warmstart_ratio"] = taylor_ratio;

  fs::create_directories(config.output_dir);
  std::ofstream file(fs::path(config.output_dir) / "diagnose.json", std::ios::binary);
  file << out.dump(2) << "\n";
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_compare_oracle(const CommonArgs& args) {
  const gpiter::RunConfig config = prepare_config(args);
  LoadedData data = load_and_split(config, args.verbose);
  const int n = data.train->n();
  if (n > config.outer.dense_cache_cap) {
    std::cerr << "compare-oracle needs n <= " << config.outer.dense_cache_cap << ", got " << n
              << "\n";
    return 1;
  }

  const gpiter::OuterResult iterative = gpiter::optimise(data.train, nullptr, config.outer);
  const gpiter::Hyperparameters init =
      gpiter::Hyperparameters::constant(data.train->dim(), config.outer.init_value);
  const gpiter::ExactTrajectory exact = gpiter::optimise_exact(
      *data.train, init, config.outer.steps, config.outer.learning_rate, n);

  fs::create_directories(config.output_dir);
  const int d_theta = data.train->dim() + 2;
  std::vector<int> histogram(10, 0);  // log10 |diff| bins from <=1e-8 up
  double max_abs_diff = 0.0;
  {
    std::ofstream file(fs::path(config.output_dir) / "differences.csv", std::ios::binary);
    file << "step,coordinate,iterative,exact,abs_diff\n";
    const std::size_t steps = std::min(iterative.trace.size(), exact.constrained_per_step.size());
    for (std::size_t t = 0; t < steps; ++t) {
      const Eigen::VectorXd& a = iterative.trace[t].constrained;
      const Eigen::VectorXd& b = exact.constrained_per_step[t];
      for (int k = 0; k < d_theta; ++k) {
        const double diff = std::abs(a[k] - b[k]);
        max_abs_diff = std::max(max_abs_diff, diff);
        const int bin = diff <= 1e-8
                            ? 0
                            : std::min(9, 1 + static_cast<int>(std::floor(std::log10(diff) + 8.0)));
        ++histogram[bin];
        file << t << ',' << k << ',' << gpiter::format_double(a[k]) << ','
             << gpiter::format_double(b[k]) << ',' << gpiter::format_double(diff) << "\n";
      }
    }
  }

  json out;
  out["steps"] = config.outer.steps;
  out["max_abs_diff"] = max_abs_diff;
  out["histogram_bin_edges"] = {"<=1e-8", "1e-8..1e-7", "1e-7..1e-6", "1e-6..1e-5", "1e-5..1e-4",
                                "1e-4..1e-3", "1e-3..1e-2", "1e-2..1e-1", "1e-1..1", ">1"};
  out["histogram_counts"] = histogram;
  std::ofstream file(fs::path(config.output_dir) / "compare_oracle.json", std::ios::binary);
  file << out.dump(2) << "\n";
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& summary_path,
                const std::string& data_path) {
  const gpiter::RunConfig config = prepare_config(args);
  std::ifstream summary_file(summary_path);
  if (!summary_file) {
    std::cerr << "cannot open summary " << summary_path << "\n";
    return 1;
  }
  json summary = json::parse(summary_file);
  Eigen::VectorXd raw(summary["hyperparameters"]["raw"].size());
  for (int i = 0; i < raw.size(); ++i) raw[i] = summary["hyperparameters"]["raw"][i].get<double>();
  const gpiter::Hyperparameters hp = gpiter::Hyperparameters::from_raw(raw);

  // Rebuild the training split exactly as the original run saw it.
  LoadedData data = load_and_split(config, args.verbose);

  // Standardise the new test table with the training statistics.
  const gpiter::Dataset new_raw = gpiter::load_table(data_path, config.table, nullptr);
  const gpiter::Dataset new_test = gpiter::apply_standardisation(new_raw, data.train->stats);

  gpiter::OuterConfig outer = config.outer;
  outer.steps = 0;
  outer.init_constrained = hp.constrained();
  gpiter::KernelOperatorOptions op_options;
  op_options.block_rows = outer.block_rows;
  op_options.dense_cache = data.train->n() <= outer.dense_cache_cap;
  gpiter::KernelOperator op(data.train, hp, op_options);

  const int s = std::max(2, outer.probe_count);
  const gpiter::RffBasis basis =
      gpiter::build_rff_basis(data.train->dim(), outer.rff_pairs, s, outer.feature_seed);
  const gpiter::PathwiseTargets targets =
      gpiter::pathwise_targets(basis, hp, *data.train, s, outer.feature_seed);
  Eigen::MatrixXd batch_targets(data.train->n(), s + 1);
  batch_targets.col(0) = data.train->targets;
  batch_targets.rightCols(s) = targets.xi;
  gpiter::LinearSystemBatch batch(op, std::move(batch_targets));
  gpiter::SolverConfig solver;
  solver.kind = gpiter::SolverKind::CG;
  solver.tolerance = std::min(0.01, outer.solver.tolerance);
  solver.max_epochs = std::max(100, outer.solver.max_epochs);
  solver.preconditioner_rank = std::min(100, data.train->n());
  gpiter::solve(batch, solver);

  gpiter::PosteriorHandle handle;
  handle.train = data.train;
  handle.hp = hp;
  handle.v_y = batch.solutions.col(0);
  handle.zhat = batch.solutions.rightCols(s);
  handle.prior = [&basis, &hp](int sample, const Eigen::MatrixXd& points) {
    return gpiter::evaluate_prior(basis, hp, points, sample);
  };
  const gpiter::TestMetrics metrics = gpiter::test_metrics(handle, new_test.inputs, new_test.targets);

  const json out = metrics_to_json(metrics);
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian process regression with iterative linear system solvers"};
  app.require_subcommand(1);

  CommonArgs train_args, diagnose_args, compare_args, predict_args;
  int diagnose_draws = 2000;
  std::string predict_summary, predict_data;

  CLI::App* train = app.add_subcommand("train", "Optimise hyperparameters and write trace/summary");
  add_common(train, train_args);

  CLI::App* diagnose = app.add_subcommand("diagnose", "Small-n diagnostic table");
  add_common(diagnose, diagnose_args);
  diagnose->add_option("--draws", diagnose_draws, "Monte-Carlo draws for the distance estimates");

  CLI::App* compare = app.add_subcommand("compare-oracle",
                                         "Run the iterative and dense reference pipelines side by side");
  add_common(compare, compare_args);

  CLI::App* predict = app.add_subcommand("predict", "Re-emit metrics for a trained run on new data");
  add_common(predict, predict_args);
  predict->add_option("--summary", predict_summary, "summary.json from a training run")->required();
  predict->add_option("--data", predict_data, "New test data table")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (diagnose->parsed()) return cmd_diagnose(diagnose_args, diagnose_draws);
    if (compare->parsed()) return cmd_compare_oracle(compare_args);
    if (predict->parsed()) return cmd_predict(predict_args, predict_summary, predict_data);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 1;
}
