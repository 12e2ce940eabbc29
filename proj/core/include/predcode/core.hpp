#pragma once

// Dense double-precision containers and the handful of kernels every
// algorithm module is built from. Containers own their storage; kernels are
// free functions that validate shapes and throw DimensionError on mismatch.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace predcode {

/// Shape of a dense operand, used in error messages.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Raised when operand shapes do not conform. Recoverable: callers (the CLI
/// in particular) catch it and report the two offending shapes.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(std::string op, Shape lhs, Shape rhs);

  const std::string& op() const noexcept { return op_; }
  Shape lhs() const noexcept { return lhs_; }
  Shape rhs() const noexcept { return rhs_; }

 private:
  std::string op_;
  Shape lhs_;
  Shape rhs_;
};

/// Raised when a computation produces NaN/Inf or an argument is outside the
/// domain of an operation (non-positive variance, negative pixels, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}
  explicit Vector(std::span<const double> values) : data_(values.begin(), values.end()) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  Shape shape() const noexcept { return {data_.size(), 1}; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  void fill(double v);
  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  Shape shape() const noexcept { return {rows_, cols_}; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }

  Matrix transposed() const;
  void fill(double v);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---- kernels ---------------------------------------------------------------

/// m · v. Requires m.cols() == v.size().
Vector matvec(const Matrix& m, const Vector& v);

/// mᵀ · v without materializing the transpose. Requires m.rows() == v.size().
Vector matvec_transposed(const Matrix& m, const Vector& v);

Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(const Vector& a, double s);
Vector hadamard(const Vector& a, const Vector& b);

/// y += alpha · x
void axpy(double alpha, const Vector& x, Vector& y);

double dot(const Vector& a, const Vector& b);
double norm_sq(const Vector& a);
double norm(const Vector& a);

/// m += alpha · u vᵀ. Requires m to be u.size() × v.size().
void rank1_update(Matrix& m, double alpha, const Vector& u, const Vector& v);

/// Elementwise max(eps, v_i).
Vector clamp_floor(const Vector& v, double eps);

/// Concatenate vectors end to end.
Vector concat(std::span<const Vector> parts);

/// Cosine similarity; 0 when either argument is the zero vector.
double cosine(std::span<const double> a, std::span<const double> b);

bool all_finite(std::span<const double> xs) noexcept;

/// Throws NumericalError naming `what` when any entry is NaN/Inf.
void require_finite(std::span<const double> xs, const char* what);

inline Vector operator+(const Vector& a, const Vector& b) { return add(a, b); }
inline Vector operator-(const Vector& a, const Vector& b) { return sub(a, b); }
inline Vector operator*(double s, const Vector& a) { return scale(a, s); }

}  // namespace predcode
