#pragma once

// Rao/Ballard predictive elements and the three-level overlapping-patch
// hierarchy used for the end-stopping experiment.
//
// Level 1 is the image, tiled into `count` overlapping patches. Level 2 has
// one patch module per patch; all patch modules share one weight matrix W2
// (units x patch pixels). Level 3 predicts the concatenated Level-2
// representations through W3. Predictions run down through the transposed
// (tied) weights: I_hat = W2^T r2, r2_hat = W3^T r3.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "predcode/core.hpp"
#include "predcode/rng.hpp"

namespace predcode::rb {

/// One predictive element: feedforward W (repr_dim x input_dim), feedback Wᵀ.
struct RBLayer {
  Matrix W;
  Vector r;
  double k1 = 0.05;
  double k2 = 1e-3;
};

struct PredErr {
  Vector e;
  double J = 0.0;
};

/// I_hat = Wᵀ r
Vector rb_predict(const RBLayer& layer);

/// e = I - I_hat, J = |e|²
PredErr rb_error(const Vector& input, const Vector& predicted);

/// r + k1 W e
Vector rb_update_r(const RBLayer& layer, const Vector& e);

/// Returns W after Wᵀ <- Wᵀ + k2 e rᵀ (equivalently W <- W + k2 r eᵀ).
Matrix rb_update_w(const RBLayer& layer, const Vector& e, const Vector& r);

/// dJ/dr = -2 W e for J = |I - Wᵀ r|².
Vector rb_cost_gradient_r(const Matrix& W, const Vector& e);

/// dJ/dW = -2 r eᵀ (shaped like W).
Matrix rb_cost_gradient_w(const Vector& r, const Vector& e);

struct PatchGeometry {
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t overlap = 11;
  std::size_t count = 3;

  std::size_t stride() const { return width - overlap; }
  std::size_t pixels() const { return height * width; }
  std::size_t image_width() const { return width + (count - 1) * stride(); }
};

/// Tiles `image` left to right into height x width patches whose columns
/// overlap by `overlap` pixels. Each patch is flattened row-major. Throws
/// std::invalid_argument unless the patches cover the image width exactly.
std::vector<Vector> extract_patches(const Matrix& image, std::size_t height, std::size_t width,
                                    std::size_t overlap);

struct RBConfig {
  PatchGeometry geometry;
  std::size_t l2_units = 32;
  std::size_t l3_units = 32;  // 0 drops the top level
  double k1 = 0.05;
  double k2 = 1e-3;
  double init_range = 0.1;
};

struct RBHierarchy {
  PatchGeometry geometry;
  Matrix w2;
  Matrix w3;
  double k1 = 0.05;
  double k2 = 1e-3;
  bool trained = false;

  static RBHierarchy create(const RBConfig& config, Rng& rng);

  std::size_t l2_units() const { return w2.rows(); }
  std::size_t l3_units() const { return w3.rows(); }
  bool has_top() const { return w3.rows() > 0; }
};

struct RBState {
  std::vector<Vector> r2;  // one per patch module
  Vector r3;
};

struct RBErrors {
  std::vector<Vector> e1;  // per patch: I - W2ᵀ r2
  Vector e2;               // concat(r2) - W3ᵀ r3
  double j1 = 0.0;
  double j2 = 0.0;

  double total() const { return j1 + j2; }
};

struct InferOptions {
  /// Replace the Level-3 prediction by zero (feedback removed).
  bool ablate_feedback = false;
  /// Halve the rate from k1 until the total cost decreases.
  bool line_search = true;
  std::size_t max_halvings = 30;
  /// Keep full state/error vectors per step (J values are always kept).
  bool record_states = true;
};

struct InferStep {
  std::size_t step = 0;
  double j1 = 0.0;
  double j2 = 0.0;
  double rate = 0.0;  // accepted rate; 0 when no decrease was found
  std::optional<RBState> state;
  std::optional<RBErrors> errors;
};

struct RBTrace {
  std::vector<InferStep> steps;  // steps[0] is the initial state
  RBState final_state;
  RBErrors final_errors;
};

/// Feedforward bootstrap: r2_i = W2 I_i, r3 = W3 concat(r2).
RBState rb_bootstrap(const RBHierarchy& h, std::span<const Vector> patches);

RBErrors rb_errors(const RBHierarchy& h, std::span<const Vector> patches, const RBState& s,
                   bool ablate_feedback = false);

/// Settles representations with weights frozen. Each step moves every level
/// along the negative cost gradient: r2_i += k (W2 e1_i - e2_i),
/// r3 += k W3 e2, with k = k1 (halved on non-decrease when line search is on).
RBTrace rb_infer(const RBHierarchy& h, std::span<const Vector> patches, std::size_t steps,
                 std::optional<RBState> init = std::nullopt, const InferOptions& options = {});

struct EpochLoss {
  std::size_t epoch = 0;
  std::size_t layer = 0;  // 1: input-level error, 2: Level-2 error
  double mean_j = 0.0;
};

struct RBTrainResult {
  std::vector<EpochLoss> curve;
};

/// Each dataset entry is one input's patch list. For every input: settle with
/// rb_infer, then apply one Hebbian step per level using the settled r and e.
RBTrainResult rb_train(RBHierarchy& h, const std::vector<std::vector<Vector>>& dataset,
                       std::size_t epochs, std::size_t steps_per_input,
                       const InferOptions& options = {.record_states = false});

struct EndStoppingResult {
  double e_short = 0.0;
  double e_long = 0.0;
};

/// Layer-2 error norm of the centre patch module for each stimulus, after
/// settling. Throws std::logic_error if `h` has not been trained.
EndStoppingResult endstopping_experiment(const RBHierarchy& h, const Matrix& bar_short,
                                         const Matrix& bar_long, std::size_t steps,
                                         bool ablate_feedback = false);

// ---- synthetic stimuli ------------------------------------------------------

struct BarImageOptions {
  /// Bar orientation is drawn uniformly from [-max_angle, max_angle] radians
  /// around horizontal; pi/2 covers every orientation.
  double max_angle = 1.5707963267948966;
  double thickness = 1.0;  // Gaussian profile sigma, pixels
  double intensity = 1.0;
  double noise_sd = 0.05;
};

/// A straight bar crossing the whole image at a random angle and position,
/// plus i.i.d. Gaussian pixel noise.
Matrix random_bar_image(Rng& rng, std::size_t height, std::size_t width,
                        const BarImageOptions& options = {});

/// A noise-free horizontal bar on the middle row, `length` pixels long and
/// horizontally centred.
Matrix centered_bar(std::size_t height, std::size_t width, std::size_t length,
                    const BarImageOptions& options = {});

}  // namespace predcode::rb
