#include "pricing/densemat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace pricing {

namespace {

std::string shape(const Mat& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw MatError(std::string(op) + ": dimension mismatch " + shape(a) +
                   " vs " + shape(b));
  }
}

}  // namespace

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw MatError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::from_rows(std::size_t rows, std::size_t cols, Vec data) {
  if (data.size() != rows * cols) {
    throw MatError("from_rows: data length " + std::to_string(data.size()) +
                   " != " + std::to_string(rows * cols));
  }
  Mat m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(data);
  return m;
}

double& Mat::at(std::size_t i, std::size_t j) {
  if (i >= rows_ || j >= cols_) throw MatError("index out of range");
  return (*this)(i, j);
}

double Mat::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw MatError("index out of range");
  return (*this)(i, j);
}

Vec Mat::col(std::size_t j) const {
  if (j >= cols_) throw MatError("column index out of range");
  Vec c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

bool Mat::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw MatError("matmul: dimension mismatch " + shape(a) + " * " + shape(b));
  }
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vec matvec(const Mat& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw MatError("matvec: dimension mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vec matvec_transposed(const Mat& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    throw MatError("matvec_transposed: dimension mismatch");
  }
  Vec y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * x[i];
  }
  return y;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Mat add(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "add");
  Mat c = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
  }
  return c;
}

Mat subtract(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "subtract");
  Mat c = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
  }
  return c;
}

Mat scale(const Mat& a, double s) {
  Mat c = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) *= s;
  }
  return c;
}

Mat diag_from(std::span<const double> v) {
  Mat d(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d(i, i) = v[i];
  return d;
}

Mat outer(std::span<const double> u, std::span<const double> v) {
  Mat o(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) o(i, j) = u[i] * v[j];
  }
  return o;
}

Vec basis(std::size_t i, std::size_t n) {
  if (i >= n) {
    throw MatError("basis: index " + std::to_string(i) + " out of range for n=" +
                   std::to_string(n));
  }
  Vec e(n, 0.0);
  e[i] = 1.0;
  return e;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw MatError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const Mat& a) { return max_abs(a.data()); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw MatError("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "max_abs_diff");
  return max_abs_diff(a.data(), b.data());
}

LuFactor::LuFactor(const Mat& a) : lu_(a), perm_(a.rows()) {
  if (a.rows() != a.cols()) {
    throw MatError("solve: matrix must be square, got " + shape(a));
  }
  if (!a.all_finite()) throw MatError("solve: non-finite matrix entry");
  const std::size_t n = a.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    }
    if (best <= kPivotTolerance) throw MatError("singular system");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(perm_[k], perm_[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / lu_(k, k);
      lu_(i, k) = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

Vec LuFactor::solve(std::span<const double> b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw MatError("solve: rhs length mismatch");
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
    x[i] /= lu_(i, i);
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw MatError("solve: non-finite solution");
  }
  return x;
}

Mat LuFactor::solve(const Mat& b) const {
  if (b.rows() != lu_.rows()) {
    throw MatError("solve: rhs has " + std::to_string(b.rows()) +
                   " rows, expected " + std::to_string(lu_.rows()));
  }
  Mat x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    const Vec xj = solve(b.col(j));
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = xj[i];
  }
  return x;
}

Mat solve(const Mat& a, const Mat& b) { return LuFactor(a).solve(b); }

Vec solve(const Mat& a, std::span<const double> b) {
  return LuFactor(a).solve(b);
}

Mat inverse(const Mat& a) {
  return LuFactor(a).solve(Mat::identity(a.rows()));
}

QrFactor::QrFactor(const Mat& a) : qr_(a), tau_(a.cols()), r_diag_(a.cols()) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  if (rows < cols) throw MatError("QR needs rows >= cols, got " + shape(a));
  if (!a.all_finite()) throw MatError("QR: non-finite matrix entry");
  double scale_ref = 0.0;
  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm += a(i, k) * a(i, k);
    scale_ref = std::max(scale_ref, std::sqrt(norm));
  }
  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < rows; ++i) norm += qr_(i, k) * qr_(i, k);
    norm = std::sqrt(norm);
    if (norm <= kPivotTolerance * std::max(scale_ref, 1.0)) throw MatError("rank deficient");
    const double alpha = qr_(k, k) > 0.0 ? -norm : norm;
    // v = x - alpha e1, stored in place with v_k implicit.
    const double vk = qr_(k, k) - alpha;
    for (std::size_t i = k + 1; i < rows; ++i) qr_(i, k) /= vk;
    tau_[k] = -vk / alpha;
    r_diag_[k] = alpha;
    for (std::size_t j = k + 1; j < cols; ++j) {
      double dotv = qr_(k, j);
      for (std::size_t i = k + 1; i < rows; ++i) dotv += qr_(i, k) * qr_(i, j);
      dotv *= tau_[k];
      qr_(k, j) -= dotv;
      for (std::size_t i = k + 1; i < rows; ++i) qr_(i, j) -= dotv * qr_(i, k);
    }
  }
}

Mat QrFactor::solve_least_squares(const Mat& b) const {
  const std::size_t rows = qr_.rows();
  const std::size_t cols = qr_.cols();
  if (b.rows() != rows) throw MatError("least squares: rhs has " + shape(b));
  Mat y = b;
  for (std::size_t k = 0; k < cols; ++k) {
    for (std::size_t c = 0; c < y.cols(); ++c) {
      double dotv = y(k, c);
      for (std::size_t i = k + 1; i < rows; ++i) dotv += qr_(i, k) * y(i, c);
      dotv *= tau_[k];
      y(k, c) -= dotv;
      for (std::size_t i = k + 1; i < rows; ++i) y(i, c) -= dotv * qr_(i, k);
    }
  }
  Mat x(cols, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = cols; i-- > 0;) {
      double v = y(i, c);
      for (std::size_t j = i + 1; j < cols; ++j) v -= qr_(i, j) * x(j, c);
      x(i, c) = v / r_diag_[i];
    }
  }
  if (!x.all_finite()) throw MatError("least squares: non-finite solution");
  return x;
}

}  // namespace pricing
