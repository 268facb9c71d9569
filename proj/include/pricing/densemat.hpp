// Small dense real matrices: construction, products, LU solve.
//
// Everything in this library is at most 2m x (m+1) with m the size of the
// price ladder, so the kernel is deliberately naive: row-major storage, no
// blocking, no SIMD.

#ifndef PRICING_DENSEMAT_HPP_
#define PRICING_DENSEMAT_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pricing {

using Vec = std::vector<double>;

// Raised for shape mismatches and singular systems.
class MatError : public std::runtime_error {
 public:
  explicit MatError(const std::string& what) : std::runtime_error(what) {}
};

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  // Row-major nested literal, e.g. Mat{{1, 2}, {3, 4}}.
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat from_rows(std::size_t rows, std::size_t cols, Vec data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  Vec col(std::size_t j) const;
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool all_finite() const;

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, std::span<const double> x);
// a' x without materializing the transpose.
Vec matvec_transposed(const Mat& a, std::span<const double> x);
Mat transpose(const Mat& a);
Mat add(const Mat& a, const Mat& b);
Mat subtract(const Mat& a, const Mat& b);
Mat scale(const Mat& a, double s);
Mat diag_from(std::span<const double> v);
Mat outer(std::span<const double> u, std::span<const double> v);
Vec basis(std::size_t i, std::size_t n);
double dot(std::span<const double> a, std::span<const double> b);

// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Mat& a);
double max_abs(std::span<const double> v);
// max |a_ij - b_ij|; shapes must agree.
double max_abs_diff(const Mat& a, const Mat& b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

// Pivot magnitudes at or below this are treated as singular.
inline constexpr double kPivotTolerance = 1e-12;

// LU factorization with partial pivoting, reusable across right-hand sides.
class LuFactor {
 public:
  // Throws MatError("singular system") when a pivot is <= kPivotTolerance.
  explicit LuFactor(const Mat& a);

  Mat solve(const Mat& b) const;
  Vec solve(std::span<const double> b) const;
  std::size_t size() const { return lu_.rows(); }

 private:
  Mat lu_;
  std::vector<std::size_t> perm_;
};

// Householder QR of a tall matrix (rows >= cols), for least squares.
class QrFactor {
 public:
  // Throws MatError("rank deficient") when a diagonal of R is <= kPivotTolerance
  // times the largest column norm.
  explicit QrFactor(const Mat& a);

  // Column-wise argmin_x |a x - b|.
  Mat solve_least_squares(const Mat& b) const;

 private:
  Mat qr_;      // R above the diagonal, Householder vectors below
  Vec tau_;
  Vec r_diag_;
};

// Solves a X = b.
Mat solve(const Mat& a, const Mat& b);
Vec solve(const Mat& a, std::span<const double> b);
// Explicit inverse; only tests should need this.
Mat inverse(const Mat& a);

}  // namespace pricing

#endif  // PRICING_DENSEMAT_HPP_
