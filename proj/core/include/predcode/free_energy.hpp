#pragma once

// Gaussian free-energy predictive coding: a scalar cause/observation model
// with node dynamics and local learning, its multi-layer generalization, and
// a sampler for the matching generative hierarchy.
//
// Scalar model, linear generator g(v) = theta v:
//   F     = ln p(phi) + ln p(u | phi)
//   e_p   = (phi - v_p) / sigma_p2
//   e_u   = (u - theta phi) / sigma_u2
//   phi'  = theta e_u - e_p
//   e_p'  = phi - v_p - sigma_p2 e_p
//   e_u'  = u - theta phi - sigma_u2 e_u

#include <cstddef>
#include <span>
#include <vector>

#include "predcode/core.hpp"
#include "predcode/rng.hpp"

namespace predcode::fe {

inline constexpr double kVarianceFloor = 1e-6;

struct ScalarFE {
  double phi = 0.0;
  double e_p = 0.0;
  double e_u = 0.0;
  double v_p = 0.0;
  double sigma_p2 = 1.0;
  double sigma_u2 = 1.0;
  double theta = 1.0;
  double u = 0.0;

  /// Throws NumericalError unless both variances are positive.
  void validate() const;
};

/// Closed-form maximizer of F over phi.
double phi_star(double v_p, double sigma_p2, double u, double sigma_u2, double theta);

/// F(phi) with Gaussian densities, dropping the constant -ln(2 pi).
double free_energy(const ScalarFE& s);

struct ScalarRates {
  double phi = 0.0;
  double e_p = 0.0;
  double e_u = 0.0;
};

ScalarRates scalar_derivatives(const ScalarFE& s);

/// One forward-Euler step of the node dynamics. Parameters are untouched.
ScalarFE scalar_step(const ScalarFE& s, double dt);

/// Selects which parameters scalar_learn may change.
struct LearnMask {
  bool v_p = true;
  bool sigma_p2 = true;
  bool sigma_u2 = true;
  bool theta = true;
};

/// One step of the local rules (gradient ascent on F at the current errors):
///   v_p += rate e_p, sigma_p2 += rate (e_p² - 1/sigma_p2)/2,
///   sigma_u2 += rate (e_u² - 1/sigma_u2)/2, theta += rate e_u phi.
/// Variances are re-floored at kVarianceFloor.
ScalarFE scalar_learn(const ScalarFE& s, double rate, const LearnMask& mask = {});

/// Runs scalar_step until every |derivative| < tol or max_steps is reached.
/// Returns the number of steps taken.
std::size_t scalar_settle(ScalarFE& s, double dt, double tol, std::size_t max_steps);

struct FEAlgorithmOptions {
  std::size_t inner_steps = 500;
  double dt = 0.01;
  double rate = 1e-3;
  LearnMask learn;
};

struct FEObservation {
  std::size_t index = 0;
  ScalarFE settled;  // state after the inner loop, before learning
  double F = 0.0;
};

struct FEAlgorithmResult {
  ScalarFE model;
  std::vector<FEObservation> trace;
};

/// Per observation: set u, start from phi = v_p with zero errors, run
/// inner_steps node steps, then learn once. Throws std::invalid_argument on
/// an empty stream or inner_steps == 0.
FEAlgorithmResult run_free_energy_algorithm(ScalarFE s, std::span<const double> u_stream,
                                            const FEAlgorithmOptions& options = {});

// ---- multi-layer network ------------------------------------------------------

enum class Activation { identity, tanh };

double activate(Activation h, double x);
double activate_derivative(Activation h, double x);

/// Level 0 holds the observation (phi[0] is pinned). For l < L the prediction
/// of level l is theta[l] h(phi[l+1]); the top level L is predicted by `prior`.
///   phi^l' = -e^l + h'(phi^l) ⊙ (theta[l-1]ᵀ e^{l-1})     (l >= 1)
///   e^l'   = phi^l - pred^l - Sigma^l e^l
struct FENet {
  std::vector<Vector> phi;    // sizes d_0 .. d_L
  std::vector<Vector> e;      // same sizes
  std::vector<Matrix> theta;  // theta[l] is d_l x d_{l+1}
  std::vector<Vector> sigma;  // diagonal of Sigma^l, entries > 0
  Vector prior;               // size d_L
  Activation h = Activation::identity;

  /// Random theta in [-scale, scale], unit variances, zero state and prior.
  static FENet create(const std::vector<std::size_t>& dims, Rng& rng, double scale = 0.5,
                      Activation h = Activation::identity);

  std::size_t levels() const { return phi.size(); }

  /// Throws DimensionError / std::invalid_argument on inconsistent shapes or
  /// non-positive variances.
  void validate() const;
};

/// The scalar model as a two-level network: level 0 = u, level 1 = phi.
FENet fenet_from_scalar(const ScalarFE& s);

void fenet_set_observation(FENet& n, const Vector& u);

/// Prediction of level l (theta[l] h(phi[l+1]), or the prior at the top).
Vector fenet_prediction(const FENet& n, std::size_t level);

struct FENetRates {
  std::vector<Vector> phi;  // phi[0] is always zero
  std::vector<Vector> e;
};

FENetRates fenet_derivatives(const FENet& n);

/// Simultaneous Euler update of every phi^l (l >= 1) and e^l.
FENet fenet_step(const FENet& n, double dt);

/// Largest |derivative| over all free nodes.
double fenet_residual(const FENet& n);

// ---- generative hierarchy -----------------------------------------------------

/// v_{i-1} = theta[i-1] h(v_i) + delta_i, delta_i ~ N(0, diag(sigma[i-1])).
/// Level indices run from the observation (0) to the top cause.
struct GenHierarchy {
  std::vector<Matrix> theta;  // theta[i] maps level i+1 to level i
  std::vector<Vector> sigma;  // noise variances for level i, entries >= 0
  Activation h = Activation::identity;

  void validate() const;
};

Vector generative_sample(const GenHierarchy& g, const Vector& v_top, Rng& rng);

}  // namespace predcode::fe
