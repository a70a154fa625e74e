#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "gpiter/dataset.hpp"

namespace gpiter {

/// Target column selected by zero-based index or by header name.
using TargetColumn = std::variant<int, std::string>;

struct TableSpec {
  char delimiter = ',';
  bool header = true;
  TargetColumn target = std::string("y");
};

struct LoadReport {
  int rows_loaded = 0;
  int rows_dropped_nonfinite = 0;
};

// Reads a delimiter-separated numeric table. Features are all non-target
// columns in file order; rows with non-finite entries are dropped and counted.
// Unparseable cells raise with row/column coordinates. The returned dataset
// is unstandardised (identity stats).
Dataset load_table(const std::string& path, const TableSpec& spec, LoadReport* report = nullptr);

struct SplitSpec {
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  std::optional<int> subsample;  // keep at most this many rows before splitting

  void validate() const;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  int clamped_features = 0;  // constant features whose scale was clamped to 1
};

// Shuffles rows by a seeded permutation, optionally subsamples, puts the
// first ceil((1 - f) n) rows in train, and standardises both sides with
// statistics computed on the training split only.
SplitResult standardise_and_split(const Dataset& data, const SplitSpec& spec);

/// Standardise with given statistics (used to apply train stats to new data).
Dataset apply_standardisation(const Dataset& raw, const Standardisation& stats);

}  // namespace gpiter
