#include "gpiter/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gpiter {

namespace {

using nlohmann::json;

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "cg") return SolverKind::CG;
  if (name == "ap") return SolverKind::AP;
  if (name == "sgd") return SolverKind::SGD;
  throw std::invalid_argument("config: unknown solver kind '" + name + "'");
}

std::string solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::CG: return "cg";
    case SolverKind::AP: return "ap";
    case SolverKind::SGD: return "sgd";
  }
  return "cg";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "standard") return EstimatorKind::Standard;
  if (name == "pathwise") return EstimatorKind::Pathwise;
  throw std::invalid_argument("config: unknown estimator '" + name + "'");
}

ProbeDistribution parse_probe_distribution(const std::string& name) {
  if (name == "gaussian") return ProbeDistribution::Gaussian;
  if (name == "rademacher") return ProbeDistribution::Rademacher;
  if (name == "deterministic_basis") return ProbeDistribution::DeterministicBasis;
  throw std::invalid_argument("config: unknown probe distribution '" + name + "'");
}

std::string probe_distribution_name(ProbeDistribution dist) {
  switch (dist) {
    case ProbeDistribution::Gaussian: return "gaussian";
    case ProbeDistribution::Rademacher: return "rademacher";
    case ProbeDistribution::DeterministicBasis: return "deterministic_basis";
  }
  return "gaussian";
}

PriorMode parse_prior_mode(const std::string& name) {
  if (name == "random_features") return PriorMode::RandomFeatures;
  if (name == "exact_dense") return PriorMode::ExactDense;
  throw std::invalid_argument("config: unknown prior mode '" + name + "'");
}

}  // namespace

void RunConfig::propagate_seeds() {
  split.seed = seeds.split;
  outer.probe_seed = seeds.probes;
  outer.feature_seed = seeds.features;
  outer.solver_seed = seeds.solver;
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& error) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + error.what());
  }
  if (!root.contains("schema_version") || root["schema_version"].get<int>() != RunConfig::kSchemaVersion) {
    throw std::invalid_argument("config: missing or unsupported schema_version");
  }

  RunConfig config;
  const auto& data = root.at("data");
  config.dataset_path = data.at("path").get<std::string>();
  if (data.contains("delimiter")) {
    const std::string delim = data["delimiter"].get<std::string>();
    if (delim.size() != 1) throw std::invalid_argument("config: delimiter must be one character");
    config.table.delimiter = delim[0];
  }
  if (data.contains("header")) config.table.header = data["header"].get<bool>();
  if (data.contains("target_column")) {
    const auto& target = data["target_column"];
    if (target.is_number_integer()) {
      config.table.target = target.get<int>();
    } else {
      config.table.target = target.get<std::string>();
    }
  }
  if (data.contains("test_fraction")) config.split.test_fraction = data["test_fraction"].get<double>();
  if (data.contains("subsample") && !data["subsample"].is_null()) {
    config.split.subsample = data["subsample"].get<int>();
  }

  if (root.contains("seeds")) {
    const auto& seeds = root["seeds"];
    if (seeds.contains("split")) config.seeds.split = seeds["split"].get<std::uint64_t>();
    if (seeds.contains("probes")) config.seeds.probes = seeds["probes"].get<std::uint64_t>();
    if (seeds.contains("features")) config.seeds.features = seeds["features"].get<std::uint64_t>();
    if (seeds.contains("solver")) config.seeds.solver = seeds["solver"].get<std::uint64_t>();
  }

  OuterConfig& outer = config.outer;
  if (root.contains("estimator")) outer.estimator = parse_estimator(root["estimator"].get<std::string>());
  if (root.contains("warm_start")) outer.warm_start = root["warm_start"].get<bool>();
  if (root.contains("steps")) outer.steps = root["steps"].get<int>();
  if (root.contains("learning_rate")) outer.learning_rate = root["learning_rate"].get<double>();
  if (root.contains("probe_count")) outer.probe_count = root["probe_count"].get<int>();
  if (root.contains("rff_pairs")) outer.rff_pairs = root["rff_pairs"].get<int>();
  if (root.contains("probe_distribution")) {
    outer.probe_distribution = parse_probe_distribution(root["probe_distribution"].get<std::string>());
  }
  if (root.contains("prior_mode")) outer.prior_mode = parse_prior_mode(root["prior_mode"].get<std::string>());
  if (root.contains("metric_stride")) outer.metric_stride = root["metric_stride"].get<int>();
  if (root.contains("init_value")) outer.init_value = root["init_value"].get<double>();
  if (root.contains("dense_cache_cap")) outer.dense_cache_cap = root["dense_cache_cap"].get<int>();
  if (root.contains("block_rows")) outer.block_rows = root["block_rows"].get<int>();
  if (root.contains("divergence_policy")) {
    const std::string policy = root["divergence_policy"].get<std::string>();
    if (policy == "skip") outer.divergence_policy = DivergencePolicy::SkipAndHalve;
    else if (policy == "abort") outer.divergence_policy = DivergencePolicy::Abort;
    else throw std::invalid_argument("config: unknown divergence policy '" + policy + "'");
  }

  if (root.contains("solver")) {
    const auto& solver = root["solver"];
    SolverConfig& cfg = outer.solver;
    if (solver.contains("kind")) cfg.kind = parse_solver_kind(solver["kind"].get<std::string>());
    if (solver.contains("tolerance")) cfg.tolerance = solver["tolerance"].get<double>();
    if (solver.contains("max_epochs")) cfg.max_epochs = solver["max_epochs"].get<int>();
    if (solver.contains("block_size")) cfg.block_size = solver["block_size"].get<int>();
    if (solver.contains("batch_size")) cfg.batch_size = solver["batch_size"].get<int>();
    if (solver.contains("learning_rate")) cfg.learning_rate = solver["learning_rate"].get<double>();
    if (solver.contains("momentum")) cfg.momentum = solver["momentum"].get<double>();
    if (solver.contains("preconditioner_rank")) {
      cfg.preconditioner_rank = solver["preconditioner_rank"].get<int>();
    }
    cfg.validate();
  }

  if (root.contains("output_dir")) config.output_dir = root["output_dir"].get<std::string>();
  config.propagate_seeds();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_run_config(buffer.str());
}

std::string serialise_run_config(const RunConfig& config) {
  json root;
  root["schema_version"] = RunConfig::kSchemaVersion;
  root["data"]["path"] = config.dataset_path;
  root["data"]["delimiter"] = std::string(1, config.table.delimiter);
  root["data"]["header"] = config.table.header;
  if (std::holds_alternative<int>(config.table.target)) {
    root["data"]["target_column"] = std::get<int>(config.table.target);
  } else {
    root["data"]["target_column"] = std::get<std::string>(config.table.target);
  }
  root["data"]["test_fraction"] = config.split.test_fraction;
  if (config.split.subsample) root["data"]["subsample"] = *config.split.subsample;

  root["seeds"]["split"] = config.seeds.split;
  root["seeds"]["probes"] = config.seeds.probes;
  root["seeds"]["features"] = config.seeds.features;
  root["seeds"]["solver"] = config.seeds.solver;

  const OuterConfig& outer = config.outer;
  root["estimator"] = outer.estimator == EstimatorKind::Pathwise ? "pathwise" : "standard";
  root["warm_start"] = outer.warm_start;
  root["steps"] = outer.steps;
  root["learning_rate"] = outer.learning_rate;
  root["probe_count"] = outer.probe_count;
  root["rff_pairs"] = outer.rff_pairs;
  root["probe_distribution"] = probe_distribution_name(outer.probe_distribution);
  root["prior_mode"] =
      outer.prior_mode == PriorMode::ExactDense ? "exact_dense" : "random_features";
  root["metric_stride"] = outer.metric_stride;
  root["init_value"] = outer.init_value;
  root["dense_cache_cap"] = outer.dense_cache_cap;
  root["block_rows"] = outer.block_rows;
  root["divergence_policy"] =
      outer.divergence_policy == DivergencePolicy::Abort ? "abort" : "skip";

  root["solver"]["kind"] = solver_kind_name(outer.solver.kind);
  root["solver"]["tolerance"] = outer.solver.tolerance;
  root["solver"]["max_epochs"] = outer.solver.max_epochs;
  root["solver"]["block_size"] = outer.solver.block_size;
  root["solver"]["batch_size"] = outer.solver.batch_size;
  root["solver"]["learning_rate"] = outer.solver.learning_rate;
  root["solver"]["momentum"] = outer.solver.momentum;
  root["solver"]["preconditioner_rank"] = outer.solver.preconditioner_rank;

  root["output_dir"] = config.output_dir;
  return root.dump(2);
}

void apply_seed_override(RunConfig& config, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("seed override must look like NAME=INT");
  }
  const std::string name = spec.substr(0, eq);
  const std::uint64_t value = std::stoull(spec.substr(eq + 1));
  if (name == "split") config.seeds.split = value;
  else if (name == "probes") config.seeds.probes = value;
  else if (name == "features") config.seeds.features = value;
  else if (name == "solver") config.seeds.solver = value;
  else throw std::invalid_argument("unknown seed name '" + name + "'");
  config.propagate_seeds();
}

}  // namespace gpiter
