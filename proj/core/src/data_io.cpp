#include "gpiter/data_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "gpiter/rng.hpp"

namespace gpiter {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, delimiter)) fields.push_back(field);
  return fields;
}

}  // namespace

Dataset load_table(const std::string& path, const TableSpec& spec, LoadReport* report) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("load_table: cannot open " + path);

  std::string line;
  int line_number = 0;
  std::vector<std::string> names;
  if (spec.header) {
    if (!std::getline(file, line)) throw std::runtime_error("load_table: empty file " + path);
    ++line_number;
    names = split_line(line, spec.delimiter);
  }

  std::vector<std::vector<double>> rows;
  std::size_t width = names.size();
  while (std::getline(file, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto fields = split_line(line, spec.delimiter);
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw std::runtime_error("load_table: row " + std::to_string(line_number) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(width));
    }
    std::vector<double> values(width);
    for (std::size_t c = 0; c < width; ++c) {
      std::size_t consumed = 0;
      try {
        values[c] = std::stod(fields[c], &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != fields[c].size() || fields[c].empty()) {
        throw std::runtime_error("load_table: unparseable cell at row " +
                                 std::to_string(line_number) + ", column " + std::to_string(c + 1));
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw std::runtime_error("load_table: no data rows in " + path);

  int target_index;
  if (std::holds_alternative<int>(spec.target)) {
    target_index = std::get<int>(spec.target);
  } else {
    const std::string& name = std::get<std::string>(spec.target);
    target_index = -1;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) target_index = static_cast<int>(i);
    }
    if (target_index < 0) {
      throw std::runtime_error("load_table: target column '" + name + "' not found in header");
    }
  }
  if (target_index < 0 || target_index >= static_cast<int>(width)) {
    throw std::runtime_error("load_table: target column index out of range");
  }

  const int d = static_cast<int>(width) - 1;
  int kept = 0, dropped = 0;
  Eigen::MatrixXd inputs(rows.size(), d);
  Eigen::VectorXd targets(rows.size());
  for (const auto& row : rows) {
    bool finite = true;
    for (double v : row) finite = finite && std::isfinite(v);
    if (!finite) {
      ++dropped;
      continue;
    }
    int col = 0;
    for (int c = 0; c < static_cast<int>(width); ++c) {
      if (c == target_index) {
        targets[kept] = row[c];
      } else {
        inputs(kept, col++) = row[c];
      }
    }
    ++kept;
  }
  inputs.conservativeResize(kept, d);
  targets.conservativeResize(kept);
  if (report) {
    report->rows_loaded = kept;
    report->rows_dropped_nonfinite = dropped;
  }
  return Dataset::from_raw(std::move(inputs), std::move(targets));
}

void SplitSpec::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("SplitSpec: test_fraction in (0, 1)");
  }
  if (subsample && *subsample < 4) throw std::invalid_argument("SplitSpec: subsample too small");
}

SplitResult standardise_and_split(const Dataset& data, const SplitSpec& spec) {
  spec.validate();
  const int n = data.n();
  RandomStream stream(spec.seed, streams::kSplit);
  std::vector<int> perm = stream.permutation(n);
  const int kept = spec.subsample ? std::min(*spec.subsample, n) : n;
  const int n_train = static_cast<int>(std::ceil((1.0 - spec.test_fraction) * kept));
  const int n_test = kept - n_train;
  if (n_train < 2 || n_test < 2) {
    throw std::invalid_argument("standardise_and_split: need at least 2 rows per side");
  }

  const int d = data.dim();
  Dataset train_raw, test_raw;
  train_raw.inputs.resize(n_train, d);
  train_raw.targets.resize(n_train);
  test_raw.inputs.resize(n_test, d);
  test_raw.targets.resize(n_test);
  for (int i = 0; i < n_train; ++i) {
    train_raw.inputs.row(i) = data.inputs.row(perm[i]);
    train_raw.targets[i] = data.targets[perm[i]];
  }
  for (int i = 0; i < n_test; ++i) {
    test_raw.inputs.row(i) = data.inputs.row(perm[n_train + i]);
    test_raw.targets[i] = data.targets[perm[n_train + i]];
  }

  Standardisation stats;
  stats.feature_mean = train_raw.inputs.colwise().mean();
  stats.feature_scale.resize(d);
  SplitResult result;
  for (int c = 0; c < d; ++c) {
    const double var =
        (train_raw.inputs.col(c).array() - stats.feature_mean[c]).square().sum() / n_train;
    double scale = std::sqrt(var);
    if (!(scale > 0.0)) {
      scale = 1.0;  // constant feature
      ++result.clamped_features;
    }
    stats.feature_scale[c] = scale;
  }
  stats.target_mean = train_raw.targets.mean();
  const double target_var =
      (train_raw.targets.array() - stats.target_mean).square().sum() / n_train;
  stats.target_scale = target_var > 0.0 ? std::sqrt(target_var) : 1.0;

  result.train = apply_standardisation(train_raw, stats);
  result.test = apply_standardisation(test_raw, stats);
  return result;
}

Dataset apply_standardisation(const Dataset& raw, const Standardisation& stats) {
  Dataset out;
  out.stats = stats;
  out.inputs = (raw.inputs.rowwise() - stats.feature_mean.transpose()) *
               stats.feature_scale.cwiseInverse().asDiagonal();
  out.targets = (raw.targets.array() - stats.target_mean) / stats.target_scale;
  return out;
}

}  // namespace gpiter
