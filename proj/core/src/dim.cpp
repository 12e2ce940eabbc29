#include "predcode/dim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace predcode::dim {

DIMModel DIMModel::create(std::size_t units, std::size_t pixels, Rng& rng, double init_max) {
  DIMModel m;
  m.W = Matrix(units, pixels);
  for (double& w : m.W.span()) w = rng.uniform(0.0, init_max);
  return m;
}

Vector dim_predict(const DIMModel& m, const Vector& r) { return matvec_transposed(m.W, r); }

Vector dim_error(const Vector& input, const Vector& predicted, double eps2) {
  if (input.size() != predicted.size()) {
    throw DimensionError("dim_error", input.shape(), predicted.shape());
  }
  Vector e(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (!(input[i] >= 0.0)) throw NumericalError("dim_error: input must be nonnegative and finite");
    e[i] = input[i] / std::max(eps2, predicted[i]);
  }
  return e;
}

Vector dim_update_r(const DIMModel& m, const Vector& r, const Vector& e) {
  if (m.W.rows() != r.size()) throw DimensionError("dim_update_r", m.W.shape(), r.shape());
  Vector out = matvec(m.W, e);
  for (std::size_t j = 0; j < r.size(); ++j) out[j] *= std::max(m.eps1, r[j]);
  return out;
}

Matrix dim_update_w(const DIMModel& m, const Vector& r, const Vector& e) {
  if (m.W.rows() != r.size() || m.W.cols() != e.size()) {
    throw DimensionError("dim_update_w", m.W.shape(), {r.size(), e.size()});
  }
  Matrix W = m.W;
  for (std::size_t j = 0; j < W.rows(); ++j) {
    const double br = m.beta * r[j];
    auto row = W.row(j);
    for (std::size_t i = 0; i < row.size(); ++i) {
      row[i] = std::max(0.0, row[i] * (1.0 + br * (e[i] - 1.0)));
    }
  }
  return W;
}

double kl_divergence(const Vector& input, const Vector& predicted) {
  if (input.size() != predicted.size()) {
    throw DimensionError("kl_divergence", input.shape(), predicted.shape());
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double p = input[i], q = predicted[i];
    if (p < 0.0 || q < 0.0) throw NumericalError("kl_divergence: negative argument");
    if (p > 0.0) {
      if (q <= 0.0) throw NumericalError("kl_divergence: zero prediction for positive input");
      kl += p * std::log(p / q);
    }
    kl += q - p;
  }
  return kl;
}

namespace {

// Multiplicative decay drives unused weights into the subnormal range, where
// every flop costs ~50x on x86. They are numerically zero; store them as such.
constexpr double kNegligible = std::numeric_limits<double>::min();
inline double flush(double x) { return x < kNegligible ? 0.0 : x; }

// Scratch buffers for the inner loop; avoids per-step allocation.
struct Workspace {
  Vector pred;
  Vector err;
  Vector drive;

  Workspace(std::size_t units, std::size_t pixels) : pred(pixels), err(pixels), drive(units) {}
};

void predict_into(const Matrix& W, const Vector& r, Vector& pred) {
  pred.fill(0.0);
  for (std::size_t j = 0; j < W.rows(); ++j) {
    const double a = r[j];
    if (a == 0.0) continue;
    const double* row = W.data() + j * W.cols();
    for (std::size_t i = 0; i < W.cols(); ++i) pred[i] += a * row[i];
  }
  for (double& p : pred.span()) p = flush(p);
}

void settle(const DIMModel& m, const Vector& input, std::size_t r_steps, Vector& r, Workspace& ws) {
  const std::size_t pixels = m.W.cols();
  r.fill(0.0);
  for (std::size_t t = 0; t < r_steps; ++t) {
    predict_into(m.W, r, ws.pred);
    for (std::size_t i = 0; i < pixels; ++i) ws.err[i] = input[i] / std::max(m.eps2, ws.pred[i]);
    for (std::size_t j = 0; j < m.W.rows(); ++j) {
      const double* row = m.W.data() + j * pixels;
      double acc = 0.0;
      for (std::size_t i = 0; i < pixels; ++i) acc += row[i] * ws.err[i];
      r[j] = flush(std::max(m.eps1, r[j]) * acc);
    }
  }
  predict_into(m.W, r, ws.pred);
  for (std::size_t i = 0; i < pixels; ++i) ws.err[i] = input[i] / std::max(m.eps2, ws.pred[i]);
}

void check_nonnegative(const Vector& image) {
  for (double x : image) {
    if (!(x >= 0.0)) throw NumericalError("dim: input pixels must be nonnegative and finite");
  }
}

}  // namespace

DIMState dim_infer(const DIMModel& m, const Vector& input, std::size_t r_steps) {
  if (input.size() != m.W.cols()) throw DimensionError("dim_infer", m.W.shape(), input.shape());
  check_nonnegative(input);
  Workspace ws(m.W.rows(), m.W.cols());
  DIMState s{Vector(m.W.rows()), Vector()};
  settle(m, input, r_steps, s.r, ws);
  s.e = ws.err;
  return s;
}

std::vector<Vector> bars_dataset(Rng& rng, std::size_t side, double p_bar, std::size_t n_images) {
  if (side < 2) throw std::invalid_argument("bars_dataset: side must be >= 2");
  std::vector<Vector> images;
  images.reserve(n_images);
  for (std::size_t n = 0; n < n_images; ++n) {
    Vector img(side * side);
    for (std::size_t row = 0; row < side; ++row) {
      if (!rng.bernoulli(p_bar)) continue;
      for (std::size_t c = 0; c < side; ++c) img[row * side + c] = 1.0;
    }
    for (std::size_t col = 0; col < side; ++col) {
      if (!rng.bernoulli(p_bar)) continue;
      for (std::size_t r = 0; r < side; ++r) img[r * side + col] = 1.0;
    }
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<Vector> bar_prototypes(std::size_t side) {
  std::vector<Vector> bars;
  for (std::size_t row = 0; row < side; ++row) {
    Vector b(side * side);
    for (std::size_t c = 0; c < side; ++c) b[row * side + c] = 1.0;
    bars.push_back(std::move(b));
  }
  for (std::size_t col = 0; col < side; ++col) {
    Vector b(side * side);
    for (std::size_t r = 0; r < side; ++r) b[r * side + col] = 1.0;
    bars.push_back(std::move(b));
  }
  return bars;
}

DIMTrainResult dim_train(DIMModel& m, const std::vector<Vector>& images,
                         const DIMTrainOptions& options) {
  if (!(m.eps1 > 0.0) || !(m.eps2 > 0.0)) {
    throw std::invalid_argument("dim_train: eps1 and eps2 must be positive");
  }
  for (const auto& img : images) {
    if (img.size() != m.W.cols()) throw DimensionError("dim_train", m.W.shape(), img.shape());
    check_nonnegative(img);
  }
  const std::size_t units = m.W.rows(), pixels = m.W.cols();
  Workspace ws(units, pixels);
  Vector r(units);
  DIMTrainResult result;
  result.epoch_kl.reserve(options.epochs);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    double kl_sum = 0.0;
    for (const auto& img : images) {
      settle(m, img, options.r_steps, r, ws);
      for (std::size_t i = 0; i < pixels; ++i) {
        const double q = std::max(m.eps2, ws.pred[i]);
        const double p = img[i];
        if (p > 0.0) kl_sum += p * std::log(p / q);
        kl_sum += q - p;
      }
      if (m.beta != 0.0) {
        for (std::size_t j = 0; j < units; ++j) {
          const double br = m.beta * r[j];
          double* row = m.W.data() + j * pixels;
          for (std::size_t i = 0; i < pixels; ++i) {
            row[i] = flush(row[i] * (1.0 + br * (ws.err[i] - 1.0)));
          }
        }
      }
    }
    if (options.normalize_rows) {
      for (std::size_t j = 0; j < units; ++j) {
        auto row = m.W.row(j);
        double s = 0.0;
        for (double w : row) s += w;
        if (s > 0.0)
          for (double& w : row) w /= s;
      }
    }
    require_finite(m.W.span(), "dim_train W");
    result.epoch_kl.push_back(kl_sum / static_cast<double>(images.size()));
  }
  return result;
}

std::size_t count_recovered(const Matrix& W, const std::vector<Vector>& targets, double threshold) {
  std::size_t found = 0;
  for (const auto& t : targets) {
    for (std::size_t j = 0; j < W.rows(); ++j) {
      if (cosine(W.row(j), t.span()) > threshold) {
        ++found;
        break;
      }
    }
  }
  return found;
}

}  // namespace predcode::dim
