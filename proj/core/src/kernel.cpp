#include "gpiter/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpiter {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

// out[r*m + j] accumulates sum_c a[r*n + c] * v[c*m + j] in ascending c for
// every element, independent of how callers tile the rows.
void accumulate_rows_product(const double* a, int rows, int n, const double* v, int m,
                             double* out) {
  constexpr int kRowBlock = 8;
  for (int r0 = 0; r0 < rows; r0 += kRowBlock) {
    const int rb = std::min(kRowBlock, rows - r0);
    for (int r = r0; r < r0 + rb; ++r) std::fill(out + r * m, out + (r + 1) * m, 0.0);
    for (int c = 0; c < n; ++c) {
      const double* vrow = v + static_cast<std::ptrdiff_t>(c) * m;
      for (int r = r0; r < r0 + rb; ++r) {
        const double coeff = a[static_cast<std::ptrdiff_t>(r) * n + c];
        double* acc = out + static_cast<std::ptrdiff_t>(r) * m;
        for (int j = 0; j < m; ++j) acc[j] += coeff * vrow[j];
      }
    }
  }
}

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Matern-3/2 profile on precomputed scaled squared distances.
inline void matern_profile(const Eigen::ArrayXd& r2, double signal_variance,
                           Eigen::ArrayXd& values) {
  const Eigen::ArrayXd r = r2.sqrt();
  values = signal_variance * (1.0 + kSqrt3 * r) * (-kSqrt3 * r).exp();
}

}  // namespace

double matern32(const Eigen::VectorXd& x, const Eigen::VectorXd& x2, const Hyperparameters& hp) {
  if (x.size() != hp.input_dim() || x2.size() != hp.input_dim()) {
    throw std::invalid_argument("matern32: point dimension does not match hyperparameters");
  }
  if (!x.allFinite() || !x2.allFinite()) {
    throw std::invalid_argument("matern32: non-finite input");
  }
  const Eigen::VectorXd ls = hp.lengthscales();
  const double r = ((x - x2).array() / ls.array()).matrix().norm();
  const double s = hp.signal_scale();
  return s * s * (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& points, const Eigen::MatrixXd& inputs,
                             const Hyperparameters& hp) {
  const Eigen::VectorXd inv_ls = hp.lengthscales().cwiseInverse();
  const double s2 = hp.signal_scale() * hp.signal_scale();
  const Eigen::MatrixXd ps = points * inv_ls.asDiagonal();
  const Eigen::MatrixXd xs = inputs * inv_ls.asDiagonal();
  Eigen::MatrixXd out(points.rows(), inputs.rows());
  Eigen::ArrayXd r2(inputs.rows()), values(inputs.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    r2 = (xs.rowwise() - ps.row(i)).rowwise().squaredNorm().array();
    matern_profile(r2, s2, values);
    out.row(i) = values.matrix().transpose();
  }
  return out;
}

Eigen::VectorXd cross_kernel_apply(const Eigen::MatrixXd& points, const Eigen::MatrixXd& inputs,
                                   const Hyperparameters& hp, const Eigen::VectorXd& v,
                                   int block_rows) {
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index p0 = 0; p0 < points.rows(); p0 += block_rows) {
    const Eigen::Index rows = std::min<Eigen::Index>(block_rows, points.rows() - p0);
    out.segment(p0, rows) = cross_kernel(points.middleRows(p0, rows), inputs, hp) * v;
  }
  return out;
}

KernelOperator::KernelOperator(std::shared_ptr<const Dataset> data, Hyperparameters hp,
                               KernelOperatorOptions options)
    : data_(std::move(data)), hp_(std::move(hp)), options_(options) {
  hp_.validate();
  if (data_->dim() != hp_.input_dim()) {
    throw std::invalid_argument("KernelOperator: dataset dimension does not match hyperparameters");
  }
  if (options_.block_rows < 1) throw std::invalid_argument("KernelOperator: block_rows >= 1");
  n_ = data_->n();
  inv_lengthscales_ = hp_.lengthscales().cwiseInverse();
  scaled_inputs_ = data_->inputs * inv_lengthscales_.asDiagonal();
  const double s = hp_.signal_scale();
  signal_variance_ = s * s;
  noise_variance_ = hp_.noise_variance();
  if (options_.dense_cache) {
    Eigen::MatrixXd h(n_, n_);
    // Fill by row tiles; symmetric content, so row-major fill of column-major
    // storage still yields H.
    for (int r0 = 0; r0 < n_; r0 += options_.block_rows) {
      const int rows = std::min(options_.block_rows, n_ - r0);
      RowMajorMatrix tile(rows, n_);
      fill_rows(r0, rows, tile.data());
      h.middleRows(r0, rows) = tile;
    }
    cache_ = std::move(h);
  }
}

void KernelOperator::fill_rows(int row0, int count, double* out) const {
  Eigen::ArrayXd r2(n_), values(n_);
  for (int r = 0; r < count; ++r) {
    const int i = row0 + r;
    r2 = (scaled_inputs_.rowwise() - scaled_inputs_.row(i)).rowwise().squaredNorm().array();
    matern_profile(r2, signal_variance_, values);
    values[i] += noise_variance_;
    Eigen::Map<Eigen::VectorXd>(out + static_cast<std::ptrdiff_t>(r) * n_, n_) = values.matrix();
  }
}

void KernelOperator::fill_row_for_indices(const std::vector<int>& rows, double* out) const {
  Eigen::ArrayXd r2(n_), values(n_);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int i = rows[r];
    r2 = (scaled_inputs_.rowwise() - scaled_inputs_.row(i)).rowwise().squaredNorm().array();
    matern_profile(r2, signal_variance_, values);
    values[i] += noise_variance_;
    Eigen::Map<Eigen::VectorXd>(out + static_cast<std::ptrdiff_t>(r) * n_, n_) = values.matrix();
  }
}

Eigen::MatrixXd KernelOperator::apply(const Eigen::MatrixXd& v) const {
  if (v.rows() != n_) throw std::invalid_argument("KernelOperator::apply: dimension mismatch");
  if (!v.allFinite()) throw std::invalid_argument("KernelOperator::apply: non-finite input");
  const int m = static_cast<int>(v.cols());
  const RowMajorMatrix vr = v;  // row-major copy for contiguous row access
  RowMajorMatrix out(n_, m);
  if (cache_) {
    // Symmetric cache: row i of H is contiguous in either storage order.
    accumulate_rows_product(cache_->data(), n_, n_, vr.data(), m, out.data());
  } else {
    RowMajorMatrix tile(std::min(options_.block_rows, n_), n_);
    for (int r0 = 0; r0 < n_; r0 += options_.block_rows) {
      const int rows = std::min(options_.block_rows, n_ - r0);
      fill_rows(r0, rows, tile.data());
      accumulate_rows_product(tile.data(), rows, n_, vr.data(), m,
                              out.data() + static_cast<std::ptrdiff_t>(r0) * m);
    }
  }
  return out;
}

Eigen::MatrixXd KernelOperator::apply_rows(const std::vector<int>& rows,
                                           const Eigen::MatrixXd& v) const {
  const int m = static_cast<int>(v.cols());
  const int count = static_cast<int>(rows.size());
  const RowMajorMatrix vr = v;
  RowMajorMatrix out(count, m);
  RowMajorMatrix tile(count, n_);
  if (cache_) {
    for (int r = 0; r < count; ++r) tile.row(r) = cache_->row(rows[r]);
  } else {
    fill_row_for_indices(rows, tile.data());
  }
  accumulate_rows_product(tile.data(), count, n_, vr.data(), m, out.data());
  return out;
}

Eigen::MatrixXd KernelOperator::apply_columns(int c0, int len, const Eigen::MatrixXd& u) const {
  if (u.rows() != len) throw std::invalid_argument("KernelOperator::apply_columns: height mismatch");
  // H[:, c0:c0+len] is the transpose of the row tile by symmetry.
  if (cache_) return cache_->middleCols(c0, len) * u;
  RowMajorMatrix tile(len, n_);
  fill_rows(c0, len, tile.data());
  return tile.transpose() * u;
}

Eigen::MatrixXd KernelOperator::dense_block(int r0, int rows, int c0, int cols) const {
  if (cache_) return cache_->block(r0, c0, rows, cols);
  RowMajorMatrix tile(rows, n_);
  fill_rows(r0, rows, tile.data());
  return tile.middleCols(c0, cols);
}

Eigen::MatrixXd KernelOperator::dense() const { return dense_block(0, n_, 0, n_); }

Eigen::VectorXd KernelOperator::kernel_column(int i) const {
  Eigen::ArrayXd r2 =
      (scaled_inputs_.rowwise() - scaled_inputs_.row(i)).rowwise().squaredNorm().array();
  Eigen::ArrayXd values(n_);
  matern_profile(r2, signal_variance_, values);
  return values.matrix();
}

Eigen::VectorXd KernelOperator::kernel_diagonal() const {
  return Eigen::VectorXd::Constant(n_, signal_variance_);
}

Eigen::MatrixXd KernelOperator::derivative_apply(int k, const Eigen::MatrixXd& v) const {
  if (k < 0 || k >= hp_.count()) {
    throw std::out_of_range("KernelOperator::derivative_apply: parameter index");
  }
  if (v.rows() != n_) {
    throw std::invalid_argument("KernelOperator::derivative_apply: dimension mismatch");
  }
  const int d = hp_.input_dim();
  if (k == Hyperparameters::noise_index(d)) {
    return 2.0 * hp_.noise_scale() * v;
  }
  const double s = hp_.signal_scale();
  Eigen::MatrixXd out(n_, static_cast<int>(v.cols()));
  Eigen::ArrayXd r2(n_), values(n_), row(n_);
  for (int i = 0; i < n_; ++i) {
    r2 = (scaled_inputs_.rowwise() - scaled_inputs_.row(i)).rowwise().squaredNorm().array();
    if (k == Hyperparameters::signal_index(d)) {
      matern_profile(r2, signal_variance_, values);
      row = (2.0 / s) * values;
    } else {
      // d k / d lengthscale_k = 3 s^2 exp(-sqrt(3) r) dx_k^2 / l_k^3; written
      // in scaled differences the r in the denominator cancels, so r = 0 is
      // regular and the derivative vanishes there.
      const Eigen::ArrayXd expterm = (-kSqrt3 * r2.sqrt()).exp();
      const Eigen::ArrayXd dk2 =
          (scaled_inputs_.col(k).array() - scaled_inputs_(i, k)).square();
      row = 3.0 * signal_variance_ * inv_lengthscales_[k] * expterm * dk2;
    }
    out.row(i) = row.matrix().transpose() * v;
  }
  return out;
}

Eigen::VectorXd KernelOperator::derivative_quadratic_forms(const Eigen::MatrixXd& u,
                                                           const Eigen::MatrixXd& w) const {
  return derivative_quadratic_forms_many({{&u, &w}}).front();
}

std::vector<Eigen::VectorXd> KernelOperator::derivative_quadratic_forms_many(
    const std::vector<std::pair<const Eigen::MatrixXd*, const Eigen::MatrixXd*>>& pairs) const {
  const int d = hp_.input_dim();
  const double s = hp_.signal_scale();
  const std::size_t count = pairs.size();
  std::vector<Eigen::VectorXd> grads(count, Eigen::VectorXd::Zero(hp_.count()));
  for (std::size_t p = 0; p < count; ++p) {
    const auto& [u, w] = pairs[p];
    if (u->rows() != n_ || w->rows() != n_ || u->cols() != w->cols()) {
      throw std::invalid_argument("derivative_quadratic_forms: shape mismatch");
    }
    // Noise term needs only the diagonal of G = U W^T.
    grads[p][Hyperparameters::noise_index(d)] =
        2.0 * hp_.noise_scale() * (u->array() * w->array()).sum();
  }

  Eigen::ArrayXXd diffs(n_, d);
  Eigen::ArrayXd r2(n_), values(n_), expterm(n_), g(n_), coeff(n_);
  for (int i = 0; i < n_; ++i) {
    diffs = (scaled_inputs_.rowwise() - scaled_inputs_.row(i)).array();
    r2 = diffs.square().rowwise().sum();
    matern_profile(r2, signal_variance_, values);
    expterm = (-kSqrt3 * r2.sqrt()).exp();
    for (std::size_t p = 0; p < count; ++p) {
      const auto& [u, w] = pairs[p];
      g = (*w * u->row(i).transpose()).array();  // row i of U W^T
      grads[p][Hyperparameters::signal_index(d)] += (2.0 / s) * (values * g).sum();
      coeff = 3.0 * signal_variance_ * expterm * g;
      for (int dim = 0; dim < d; ++dim) {
        grads[p][dim] += inv_lengthscales_[dim] * (coeff * diffs.col(dim).square()).sum();
      }
    }
  }
  return grads;
}

}  // namespace gpiter
