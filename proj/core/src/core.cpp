#include "predcode/core.hpp"

#include <algorithm>
#include <cmath>

namespace predcode {

std::string Shape::str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

DimensionError::DimensionError(std::string op, Shape lhs, Shape rhs)
    : std::invalid_argument(op + ": shape mismatch " + lhs.str() + " vs " + rhs.str()),
      op_(std::move(op)),
      lhs_(lhs),
      rhs_(rhs) {}

void Vector::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix", {rows, cols}, {data_.size(), 1});
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix", {rows_, cols_}, {1, r.size()});
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) throw DimensionError("matvec", m.shape(), v.shape());
  Vector out(m.rows());
  const double* x = v.data();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.data() + r * m.cols();
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
  return out;
}

Vector matvec_transposed(const Matrix& m, const Vector& v) {
  if (m.rows() != v.size()) throw DimensionError("matvec_transposed", m.shape(), v.shape());
  Vector out(m.cols());
  double* y = out.data();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double a = v[r];
    if (a == 0.0) continue;
    const double* row = m.data() + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) y[c] += a * row[c];
  }
  return out;
}

namespace {

void require_same(const char* op, const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError(op, a.shape(), b.shape());
}

}  // namespace

Vector add(const Vector& a, const Vector& b) {
  require_same("add", a, b);
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector sub(const Vector& a, const Vector& b) {
  require_same("sub", a, b);
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scale(const Vector& a, double s) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

Vector hadamard(const Vector& a, const Vector& b) {
  require_same("hadamard", a, b);
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void axpy(double alpha, const Vector& x, Vector& y) {
  require_same("axpy", x, y);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(const Vector& a, const Vector& b) {
  require_same("dot", a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm_sq(const Vector& a) {
  double acc = 0.0;
  for (double x : a) acc += x * x;
  return acc;
}

double norm(const Vector& a) { return std::sqrt(norm_sq(a)); }

void rank1_update(Matrix& m, double alpha, const Vector& u, const Vector& v) {
  if (m.rows() != u.size() || m.cols() != v.size()) {
    throw DimensionError("rank1_update", m.shape(), {u.size(), v.size()});
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double a = alpha * u[r];
    if (a == 0.0) continue;
    double* row = m.data() + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] += a * v[c];
  }
}

Vector clamp_floor(const Vector& v, double eps) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(eps, v[i]);
  return out;
}

Vector concat(std::span<const Vector> parts) {
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  std::vector<double> out;
  out.reserve(n);
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return Vector(std::move(out));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine", {a.size(), 1}, {b.size(), 1});
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

bool all_finite(std::span<const double> xs) noexcept {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void require_finite(std::span<const double> xs, const char* what) {
  if (!all_finite(xs)) throw NumericalError(std::string(what) + ": non-finite value");
}

}  // namespace predcode
