#include "predcode/rao_ballard.hpp"

#include <cmath>
#include <stdexcept>

namespace predcode::rb {

Vector rb_predict(const RBLayer& layer) { return matvec_transposed(layer.W, layer.r); }

PredErr rb_error(const Vector& input, const Vector& predicted) {
  if (input.size() != predicted.size()) {
    throw DimensionError("rb_error", input.shape(), predicted.shape());
  }
  PredErr out{sub(input, predicted), 0.0};
  out.J = norm_sq(out.e);
  return out;
}

Vector rb_update_r(const RBLayer& layer, const Vector& e) {
  if (layer.W.cols() != e.size()) throw DimensionError("rb_update_r", layer.W.shape(), e.shape());
  if (layer.W.rows() != layer.r.size()) {
    throw DimensionError("rb_update_r", layer.W.shape(), layer.r.shape());
  }
  Vector r = layer.r;
  axpy(layer.k1, matvec(layer.W, e), r);
  return r;
}

Matrix rb_update_w(const RBLayer& layer, const Vector& e, const Vector& r) {
  if (layer.W.rows() != r.size() || layer.W.cols() != e.size()) {
    throw DimensionError("rb_update_w", layer.W.shape(), {r.size(), e.size()});
  }
  Matrix W = layer.W;
  rank1_update(W, layer.k2, r, e);
  return W;
}

Vector rb_cost_gradient_r(const Matrix& W, const Vector& e) { return scale(matvec(W, e), -2.0); }

Matrix rb_cost_gradient_w(const Vector& r, const Vector& e) {
  Matrix g(r.size(), e.size());
  rank1_update(g, -2.0, r, e);
  return g;
}

std::vector<Vector> extract_patches(const Matrix& image, std::size_t height, std::size_t width,
                                    std::size_t overlap) {
  if (height != image.rows() || width == 0 || width > image.cols()) {
    throw DimensionError("extract_patches", image.shape(), {height, width});
  }
  if (overlap >= width) {
    throw std::invalid_argument("extract_patches: overlap must be smaller than patch width");
  }
  const std::size_t stride = width - overlap;
  if ((image.cols() - width) % stride != 0) {
    throw std::invalid_argument("extract_patches: " + std::to_string(width) + "-wide patches with " +
                                std::to_string(overlap) + " px overlap do not tile width " +
                                std::to_string(image.cols()));
  }
  const std::size_t count = (image.cols() - width) / stride + 1;
  std::vector<Vector> patches;
  patches.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    Vector v(height * width);
    for (std::size_t r = 0; r < height; ++r)
      for (std::size_t c = 0; c < width; ++c) v[r * width + c] = image(r, p * stride + c);
    patches.push_back(std::move(v));
  }
  return patches;
}

RBHierarchy RBHierarchy::create(const RBConfig& config, Rng& rng) {
  RBHierarchy h;
  h.geometry = config.geometry;
  h.k1 = config.k1;
  h.k2 = config.k2;
  h.w2 = Matrix(config.l2_units, config.geometry.pixels());
  for (double& w : h.w2.span()) w = rng.uniform(-config.init_range, config.init_range);
  h.w3 = Matrix(config.l3_units, config.l3_units ? config.geometry.count * config.l2_units : 0);
  for (double& w : h.w3.span()) w = rng.uniform(-config.init_range, config.init_range);
  return h;
}

namespace {

void check_patches(const RBHierarchy& h, std::span<const Vector> patches) {
  if (patches.size() != h.geometry.count) {
    throw DimensionError("rb_infer", {h.geometry.count, h.geometry.pixels()},
                         {patches.size(), patches.empty() ? 0 : patches[0].size()});
  }
  for (const auto& p : patches) {
    if (p.size() != h.w2.cols()) throw DimensionError("rb_infer", h.w2.shape(), p.shape());
  }
}

void check_state(const RBHierarchy& h, const RBState& s) {
  if (s.r2.size() != h.geometry.count) {
    throw DimensionError("rb_infer state", {h.geometry.count, h.l2_units()}, {s.r2.size(), 0});
  }
  for (const auto& r : s.r2) {
    if (r.size() != h.l2_units()) throw DimensionError("rb_infer state", h.w2.shape(), r.shape());
  }
  if (s.r3.size() != h.l3_units()) throw DimensionError("rb_infer state", h.w3.shape(), s.r3.shape());
}

// Writes segment i of `v` (segments of length n) into out.
void copy_segment(const Vector& v, std::size_t i, std::size_t n, Vector& out) {
  for (std::size_t k = 0; k < n; ++k) out[k] = v[i * n + k];
}

}  // namespace

RBState rb_bootstrap(const RBHierarchy& h, std::span<const Vector> patches) {
  check_patches(h, patches);
  RBState s;
  s.r2.reserve(patches.size());
  for (const auto& p : patches) s.r2.push_back(matvec(h.w2, p));
  s.r3 = h.has_top() ? matvec(h.w3, concat(s.r2)) : Vector();
  return s;
}

RBErrors rb_errors(const RBHierarchy& h, std::span<const Vector> patches, const RBState& s,
                   bool ablate_feedback) {
  RBErrors out;
  out.e1.reserve(patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i) {
    out.e1.push_back(sub(patches[i], matvec_transposed(h.w2, s.r2[i])));
    out.j1 += norm_sq(out.e1.back());
  }
  if (h.has_top()) {
    out.e2 = concat(s.r2);
    if (!ablate_feedback) {
      const Vector pred = matvec_transposed(h.w3, s.r3);
      for (std::size_t k = 0; k < pred.size(); ++k) out.e2[k] -= pred[k];
    }
    out.j2 = norm_sq(out.e2);
  }
  return out;
}

RBTrace rb_infer(const RBHierarchy& h, std::span<const Vector> patches, std::size_t steps,
                 std::optional<RBState> init, const InferOptions& options) {
  check_patches(h, patches);
  RBState state = init ? std::move(*init) : rb_bootstrap(h, patches);
  check_state(h, state);

  const std::size_t units = h.l2_units();
  RBErrors errors = rb_errors(h, patches, state, options.ablate_feedback);

  RBTrace trace;
  auto record = [&](std::size_t step, double rate) {
    InferStep s{step, errors.j1, errors.j2, rate, std::nullopt, std::nullopt};
    if (options.record_states) {
      s.state = state;
      s.errors = errors;
    }
    trace.steps.push_back(std::move(s));
  };
  record(0, 0.0);

  std::vector<Vector> dir2(state.r2.size(), Vector(units));
  Vector dir3(h.l3_units());
  Vector seg(units);

  for (std::size_t t = 1; t <= steps; ++t) {
    // Negative half-gradient of J = sum |e1_i|² + |e2|²
    for (std::size_t i = 0; i < state.r2.size(); ++i) {
      dir2[i] = matvec(h.w2, errors.e1[i]);
      if (h.has_top()) {
        copy_segment(errors.e2, i, units, seg);
        axpy(-1.0, seg, dir2[i]);
      }
    }
    if (h.has_top() && !options.ablate_feedback) dir3 = matvec(h.w3, errors.e2);

    double rate = h.k1;
    double accepted = 0.0;
    for (std::size_t attempt = 0; attempt <= options.max_halvings; ++attempt) {
      RBState trial = state;
      for (std::size_t i = 0; i < trial.r2.size(); ++i) axpy(rate, dir2[i], trial.r2[i]);
      if (h.has_top() && !options.ablate_feedback) axpy(rate, dir3, trial.r3);
      RBErrors trial_errors = rb_errors(h, patches, trial, options.ablate_feedback);
      if (!options.line_search || trial_errors.total() < errors.total()) {
        state = std::move(trial);
        errors = std::move(trial_errors);
        accepted = rate;
        break;
      }
      rate *= 0.5;
    }
    record(t, accepted);
  }

  for (const auto& r : state.r2) require_finite(r.span(), "rb_infer");
  require_finite(state.r3.span(), "rb_infer");
  trace.final_state = std::move(state);
  trace.final_errors = std::move(errors);
  return trace;
}

RBTrainResult rb_train(RBHierarchy& h, const std::vector<std::vector<Vector>>& dataset,
                       std::size_t epochs, std::size_t steps_per_input,
                       const InferOptions& options) {
  if (dataset.empty()) throw std::invalid_argument("rb_train: empty dataset");
  RBTrainResult result;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    double sum_j1 = 0.0, sum_j2 = 0.0;
    for (const auto& patches : dataset) {
      const RBTrace trace = rb_infer(h, patches, steps_per_input, std::nullopt, options);
      const RBState& s = trace.final_state;
      const RBErrors& e = trace.final_errors;
      sum_j1 += e.j1;
      sum_j2 += e.j2;
      for (std::size_t i = 0; i < s.r2.size(); ++i) rank1_update(h.w2, h.k2, s.r2[i], e.e1[i]);
      if (h.has_top()) rank1_update(h.w3, h.k2, s.r3, e.e2);
    }
    require_finite(h.w2.span(), "rb_train W2");
    require_finite(h.w3.span(), "rb_train W3");
    const double n = static_cast<double>(dataset.size());
    result.curve.push_back({epoch, 1, sum_j1 / n});
    if (h.has_top()) result.curve.push_back({epoch, 2, sum_j2 / n});
  }
  h.trained = true;
  return result;
}

EndStoppingResult endstopping_experiment(const RBHierarchy& h, const Matrix& bar_short,
                                         const Matrix& bar_long, std::size_t steps,
                                         bool ablate_feedback) {
  if (!h.trained) throw std::logic_error("endstopping_experiment: hierarchy is untrained");
  if (!h.has_top()) throw std::logic_error("endstopping_experiment: hierarchy has no Level 3");
  const auto& g = h.geometry;
  const std::size_t centre = g.count / 2;
  const std::size_t units = h.l2_units();
  InferOptions opts;
  opts.ablate_feedback = ablate_feedback;
  opts.record_states = false;

  auto centre_error = [&](const Matrix& image) {
    const auto patches = extract_patches(image, g.height, g.width, g.overlap);
    const RBTrace trace = rb_infer(h, patches, steps, std::nullopt, opts);
    Vector seg(units);
    copy_segment(trace.final_errors.e2, centre, units, seg);
    return norm(seg);
  };
  return {centre_error(bar_short), centre_error(bar_long)};
}

Matrix random_bar_image(Rng& rng, std::size_t height, std::size_t width,
                        const BarImageOptions& options) {
  const double angle = rng.uniform(-options.max_angle, options.max_angle);
  const double cy = rng.uniform(0.0, static_cast<double>(height - 1));
  const double cx = rng.uniform(0.0, static_cast<double>(width - 1));
  // Unit normal of the bar's direction
  const double nx = -std::sin(angle), ny = std::cos(angle);
  const double two_s2 = 2.0 * options.thickness * options.thickness;
  Matrix img(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double d = (static_cast<double>(c) - cx) * nx + (static_cast<double>(r) - cy) * ny;
      img(r, c) = options.intensity * std::exp(-d * d / two_s2) + rng.normal(0.0, options.noise_sd);
    }
  }
  return img;
}

Matrix centered_bar(std::size_t height, std::size_t width, std::size_t length,
                    const BarImageOptions& options) {
  if (length > width) throw std::invalid_argument("centered_bar: length exceeds width");
  const double cy = static_cast<double>(height - 1) / 2.0;
  const std::size_t start = (width - length) / 2;
  const double two_s2 = 2.0 * options.thickness * options.thickness;
  Matrix img(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    const double d = static_cast<double>(r) - cy;
    const double v = options.intensity * std::exp(-d * d / two_s2);
    for (std::size_t c = start; c < start + length; ++c) img(r, c) = v;
  }
  return img;
}

}  // namespace predcode::rb
