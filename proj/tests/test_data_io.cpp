#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gpiter/data_io.hpp"

using namespace gpiter;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& contents) {
    path = std::filesystem::temp_directory_path() /
           ("gpiter_test_" + std::to_string(std::rand()) + ".csv");
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("load_table recovers a hand-written file exactly") {
  TempFile file("a,b,y\n1.5,2.0,3.25\n-0.5,4.0,1.0\n0.0,0.25,-2.0\n");
  TableSpec spec;
  spec.target = std::string("y");
  LoadReport report;
  const Dataset data = load_table(file.path.string(), spec, &report);
  CHECK(report.rows_loaded == 3);
  CHECK(report.rows_dropped_nonfinite == 0);
  CHECK(data.n() == 3);
  CHECK(data.dim() == 2);
  CHECK(data.inputs(0, 0) == 1.5);
  CHECK(data.inputs(2, 1) == 0.25);
  CHECK(data.targets[1] == 1.0);

  // Loading twice gives the identical dataset.
  const Dataset again = load_table(file.path.string(), spec, nullptr);
  CHECK(again.inputs == data.inputs);
  CHECK(again.targets == data.targets);
}

TEST_CASE("load_table drops non-finite rows with a count") {
  TempFile file("a,y\n1.0,2.0\nnan,3.0\n4.0,5.0\n");
  TableSpec spec;
  spec.target = std::string("y");
  LoadReport report;
  const Dataset data = load_table(file.path.string(), spec, &report);
  CHECK(data.n() == 2);
  CHECK(report.rows_dropped_nonfinite == 1);
}

TEST_CASE("load_table reports unparseable cells with coordinates") {
  TempFile file("a,y\n1.0,2.0\n1.0,oops\n");
  TableSpec spec;
  spec.target = std::string("y");
  CHECK_THROWS_WITH_AS(load_table(file.path.string(), spec, nullptr),
                       doctest::Contains("row 3"), std::runtime_error);
}

TEST_CASE("target column by index and headerless files") {
  TempFile file("3.0,1.0\n4.0,2.0\n");
  TableSpec spec;
  spec.header = false;
  spec.target = 0;
  const Dataset data = load_table(file.path.string(), spec, nullptr);
  CHECK(data.targets[0] == 3.0);
  CHECK(data.inputs(1, 0) == 2.0);
}

TEST_CASE("standardise_and_split honours fractions and statistics") {
  const int n = 10;
  Eigen::MatrixXd inputs(n, 2);
  Eigen::VectorXd targets(n);
  for (int i = 0; i < n; ++i) {
    inputs(i, 0) = i;
    inputs(i, 1) = 3.0 * i - 5.0;
    targets[i] = 0.5 * i;
  }
  const Dataset raw = Dataset::from_raw(inputs, targets);

  SplitSpec spec;
  spec.test_fraction = 0.2;
  spec.seed = 4;
  const SplitResult split = standardise_and_split(raw, spec);
  CHECK(split.train.n() == 8);
  CHECK(split.test.n() == 2);

  // Train statistics are exact on the training side.
  for (int c = 0; c < 2; ++c) {
    CHECK(std::abs(split.train.inputs.col(c).mean()) <= 1e-8);
    const double var = split.train.inputs.col(c).squaredNorm() / split.train.n();
    CHECK(var == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(std::abs(split.train.targets.mean()) <= 1e-8);

  // No leakage: recomputing train statistics reproduces the stored ones.
  Eigen::MatrixXd unstd = (split.train.inputs * split.train.stats.feature_scale.asDiagonal())
                              .rowwise() +
                          split.train.stats.feature_mean.transpose();
  const Eigen::VectorXd recomputed_mean = unstd.colwise().mean();
  CHECK((recomputed_mean - split.train.stats.feature_mean).cwiseAbs().maxCoeff() <= 1e-10);

  // Identical seed, identical split; different seed, different permutation.
  const SplitResult same = standardise_and_split(raw, spec);
  CHECK(same.train.inputs == split.train.inputs);
  SplitSpec other = spec;
  other.seed = 5;
  const SplitResult different = standardise_and_split(raw, other);
  CHECK(different.train.inputs != split.train.inputs);
}

TEST_CASE("constant features are clamped with a report") {
  Eigen::MatrixXd inputs(6, 2);
  inputs.col(0).setConstant(3.0);
  inputs.col(1) << 1, 2, 3, 4, 5, 6;
  const Dataset raw = Dataset::from_raw(inputs, Eigen::VectorXd::LinSpaced(6, 0.0, 1.0));
  SplitSpec spec;
  spec.test_fraction = 0.34;
  const SplitResult split = standardise_and_split(raw, spec);
  CHECK(split.clamped_features == 1);
  CHECK(split.train.stats.feature_scale[0] == 1.0);
}

TEST_CASE("subsampling keeps the requested number of rows") {
  const int n = 100;
  Eigen::MatrixXd inputs = Eigen::MatrixXd::Random(n, 1);
  const Dataset raw = Dataset::from_raw(inputs, Eigen::VectorXd::Random(n));
  SplitSpec spec;
  spec.test_fraction = 0.25;
  spec.subsample = 40;
  const SplitResult split = standardise_and_split(raw, spec);
  CHECK(split.train.n() == 30);
  CHECK(split.test.n() == 10);
}

TEST_CASE("larger splits differ across seeds with overwhelming probability") {
  const int n = 120;
  Eigen::MatrixXd inputs = Eigen::MatrixXd::Random(n, 3);
  const Dataset raw = Dataset::from_raw(inputs, Eigen::VectorXd::Random(n));
  SplitSpec a, b;
  a.seed = 100;
  b.seed = 101;
  CHECK(standardise_and_split(raw, a).train.inputs !=
        standardise_and_split(raw, b).train.inputs);
}
