#pragma once

#include <optional>
#include <string>

#include "gpiter/data_io.hpp"
#include "gpiter/outer_loop.hpp"

namespace gpiter {

// Full description of a run. A run is a pure function of its RunConfig (wall
// clock readings aside), which is the reproducibility contract: the config
// round-trips through a versioned JSON schema.
struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  std::string dataset_path;
  TableSpec table;
  SplitSpec split;
  OuterConfig outer;
  std::string output_dir = ".";

  struct Seeds {
    std::uint64_t split = 1;
    std::uint64_t probes = 2;
    std::uint64_t features = 3;
    std::uint64_t solver = 4;
  } seeds;

  /// Applies the named seeds onto the nested specs.
  void propagate_seeds();
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);
std::string serialise_run_config(const RunConfig& config);

/// Applies an override of the form NAME=INT with NAME in
/// {split, probes, features, solver}.
void apply_seed_override(RunConfig& config, const std::string& spec);

}  // namespace gpiter
