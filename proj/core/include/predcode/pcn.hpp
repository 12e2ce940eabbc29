#pragma once

// Fully connected predictive-coding classifier. Activations are first set by
// a feedforward sweep, then refined by recurrent predictive updates before
// the linear softmax head reads the top layer.
//
//   prediction  r_hat^{l-1} = W_fb^l r^l
//   error       e^{l-1}     = r^{l-1} - r_hat^{l-1}
//   ff update   r^l        += k1 W_ff^l e^{l-1}
//   fb update   r^l         = (1 - beta) r^l + beta r_hat^l
//
// Index 0 is the input. In global mode the top-down sweep also pulls a
// working copy of the input toward its prediction; the sample itself is
// never modified.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "predcode/core.hpp"
#include "predcode/rng.hpp"

namespace predcode::pcn {

enum class Mode { plain, global, local };

std::string_view mode_name(Mode m);
/// Throws std::invalid_argument on an unknown name.
Mode parse_mode(std::string_view name);

struct PCNLayer {
  Matrix W_ff;  // d_l x d_{l-1}
  Vector b;     // d_l
  Matrix W_fb;  // d_{l-1} x d_l, untied from W_ff
  Vector r;     // current activation
  bool relu = true;
};

struct PCNConfig {
  std::vector<std::size_t> dims;  // input, hidden...; at least two entries
  std::size_t classes = 2;
  std::size_t T = 3;
  std::size_t max_T = 6;
  double k1 = 0.1;
  double beta = 0.5;
  /// Add r^{l-1} to r^l after each layer's updates (needs equal widths).
  bool skip = false;
  double init_scale = 0.0;  // 0: 1/sqrt(fan_in)
};

struct PCNNet {
  Vector r0;  // working copy of the input
  std::vector<PCNLayer> layers;
  Matrix head;  // classes x d_L
  Vector head_b;
  std::size_t T = 3;
  std::size_t max_T = 6;
  double k1 = 0.1;
  double beta = 0.5;
  bool skip = false;

  /// Weights uniform in [-s, s], biases zero.
  static PCNNet create(const PCNConfig& config, Rng& rng);

  std::size_t input_dim() const { return layers.front().W_ff.cols(); }
  std::size_t classes() const { return head.rows(); }
  std::size_t depth() const { return layers.size(); }

  /// Throws std::invalid_argument / DimensionError on broken invariants.
  void validate() const;
};

// ---- single operations --------------------------------------------------------

/// W_fb r_upper
Vector pcn_predict_down(const PCNLayer& upper, const Vector& r_upper);

/// r - r_hat
Vector pcn_error(const Vector& r_lower, const Vector& r_hat_lower);

/// r + k1 W_ff e_below
Vector pcn_ff_update(const PCNLayer& layer, const Vector& e_below, double k1);

/// (1 - beta) r + beta r_hat
Vector pcn_fb_update(const Vector& r, const Vector& r_hat, double beta);

/// Feedforward sweep from x (ReLU where flagged, then the optional skip).
void pcn_sweep(PCNNet& n, const Vector& x);

/// Top-down sweep l = L..1 updating r^{l-1}, then bottom-up sweep l = 1..L
/// updating r^l. Predictions are recomputed as the sweeps go.
PCNNet pcn_global_cycle(const PCNNet& n);

/// One local step between layer l (1-based) and l-1; only r^l changes.
PCNNet pcn_local_cycle(const PCNNet& n, std::size_t l);

/// sum_l |r^{l-1} - W_fb^l r^l|² at the current state.
double pcn_prediction_error(const PCNNet& n);

struct PCNForward {
  Vector logits;
  double error_before = 0.0;  // summed prediction error before recurrent updates
  double error_after = 0.0;
};

/// Logits for x under `mode`, with `n.T` recurrent steps. The net's state
/// fields are overwritten.
PCNForward pcn_forward(PCNNet& n, const Vector& x, Mode mode);

/// Const convenience wrapper that works on a copy.
Vector pcn_logits(const PCNNet& n, const Vector& x, Mode mode);

// ---- training -----------------------------------------------------------------

struct Sample {
  Vector x;
  std::size_t label = 0;
};

using Dataset = std::vector<Sample>;

/// Flattened parameters in a fixed order: per layer W_ff, b, W_fb; then head,
/// head bias.
Vector pcn_parameters(const PCNNet& n);
void pcn_set_parameters(PCNNet& n, const Vector& flat);

/// Mean cross-entropy of the batch under `mode`.
double pcn_loss(const PCNNet& n, std::span<const Sample> batch, Mode mode);

struct PCNGradient {
  Vector grad;  // same layout as pcn_parameters
  double loss = 0.0;
};

/// Reverse-mode gradient of pcn_loss through the unrolled T-step graph.
/// Throws std::out_of_range on a label >= classes.
PCNGradient pcn_gradient(const PCNNet& n, std::span<const Sample> batch, Mode mode);

/// One gradient-descent step; returns the batch loss before the step.
double pcn_train_step(PCNNet& n, std::span<const Sample> batch, Mode mode, double lr);

struct PCNEpochLog {
  std::size_t step = 0;  // epoch index
  Mode mode = Mode::plain;
  std::size_t T = 0;
  double cross_entropy = 0.0;
  double sum_sq_pred_error = 0.0;
  double accuracy = 0.0;
};

struct PCNTrainOptions {
  std::size_t epochs = 30;
  std::size_t batch = 32;
  double lr = 0.01;
  Mode mode = Mode::global;
};

/// Mini-batch SGD with a per-epoch shuffle drawn from `rng`. Logged metrics
/// are measured on `data` after each epoch.
std::vector<PCNEpochLog> pcn_train(PCNNet& n, const Dataset& data, const PCNTrainOptions& options,
                                   Rng& rng);

struct PCNEval {
  double accuracy = 0.0;
  double cross_entropy = 0.0;
  double error_before = 0.0;  // mean over samples
  double error_after = 0.0;
};

PCNEval pcn_evaluate(const PCNNet& n, const Dataset& data, Mode mode);

// ---- synthetic datasets -------------------------------------------------------

/// Two isotropic Gaussian classes in `dim` dimensions whose means are
/// `separation` apart along the first axis.
Dataset two_gaussians(Rng& rng, std::size_t n, std::size_t dim, double separation, double sd);

/// Two interleaving half circles with Gaussian jitter, 2-D.
Dataset two_moons(Rng& rng, std::size_t n, double noise);

/// 8x8 digit-like glyphs (10 classes) with pixel flips and additive noise.
Dataset raster_digits(Rng& rng, std::size_t n, double flip_prob, double noise_sd);

/// The 10 clean 8x8 glyphs, row-major, values in {0, 1}.
std::vector<Vector> raster_glyphs();

}  // namespace predcode::pcn
