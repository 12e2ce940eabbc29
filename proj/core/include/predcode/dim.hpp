#pragma once

// Divisive input modulation: predictive coding with ratio-form errors and
// multiplicative, nonnegativity-preserving updates.
//
//   I_hat = Wᵀ r
//   e     = I ⊘ max(eps2, I_hat)
//   r    <- max(eps1, r) ⊙ (W e)
//   W    <- max(0, W ⊙ (1 + beta r (eᵀ - 1)))

#include <cstddef>
#include <vector>

#include "predcode/core.hpp"
#include "predcode/rng.hpp"

namespace predcode::dim {

struct DIMModel {
  Matrix W;  // units x pixels, entries >= 0
  double eps1 = 1e-2;
  double eps2 = 1e-2;
  double beta = 0.05;

  /// W uniform in [0, init_max) from `rng`. Throws on non-positive epsilons.
  static DIMModel create(std::size_t units, std::size_t pixels, Rng& rng, double init_max = 0.1);
};

struct DIMState {
  Vector r;
  Vector e;
};

Vector dim_predict(const DIMModel& m, const Vector& r);

Vector dim_error(const Vector& input, const Vector& predicted, double eps2);

Vector dim_update_r(const DIMModel& m, const Vector& r, const Vector& e);

Matrix dim_update_w(const DIMModel& m, const Vector& r, const Vector& e);

/// Generalized KL divergence sum_i I_i ln(I_i / I_hat_i) - I_i + I_hat_i with
/// 0 ln 0 = 0. Throws NumericalError on negative input or non-positive I_hat
/// where I > 0.
double kl_divergence(const Vector& input, const Vector& predicted);

/// `r_steps` iterations of (error, r-update) from r = 0 (clamped to eps1 on
/// first use). Returns the settled state with e evaluated at the final r.
DIMState dim_infer(const DIMModel& m, const Vector& input, std::size_t r_steps);

/// Images of a side x side grid made of randomly included horizontal and
/// vertical bars (each bar present independently with probability p_bar),
/// combined by elementwise max and flattened row-major.
std::vector<Vector> bars_dataset(Rng& rng, std::size_t side, double p_bar, std::size_t n_images);

/// The 2*side single-bar images: horizontal bars 0..side-1 then vertical.
std::vector<Vector> bar_prototypes(std::size_t side);

struct DIMTrainOptions {
  std::size_t epochs = 200;
  std::size_t r_steps = 25;
  /// L1-normalize every W row after each epoch.
  bool normalize_rows = false;
};

struct DIMTrainResult {
  std::vector<double> epoch_kl;  // mean KL(I, I_hat) per epoch at the settled state
};

/// Per-image online training: settle r, then apply the weight rule once.
/// Throws NumericalError if any image has a negative pixel.
DIMTrainResult dim_train(DIMModel& m, const std::vector<Vector>& images,
                         const DIMTrainOptions& options);

/// Number of `targets` matched by at least one W row with cosine > threshold.
std::size_t count_recovered(const Matrix& W, const std::vector<Vector>& targets,
                            double threshold = 0.9);

}  // namespace predcode::dim
