#include "predcode/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace predcode::fe {

namespace {

void require_positive_variance(double v, const char* what) {
  if (!(v > 0.0)) throw NumericalError(std::string(what) + " must be positive");
}

void require_dt(double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be >= 0 and finite");
}

}  // namespace

void ScalarFE::validate() const {
  require_positive_variance(sigma_p2, "sigma_p2");
  require_positive_variance(sigma_u2, "sigma_u2");
}

double phi_star(double v_p, double sigma_p2, double u, double sigma_u2, double theta) {
  require_positive_variance(sigma_p2, "sigma_p2");
  require_positive_variance(sigma_u2, "sigma_u2");
  return (v_p / sigma_p2 + theta * u / sigma_u2) / (1.0 / sigma_p2 + theta * theta / sigma_u2);
}

double free_energy(const ScalarFE& s) {
  s.validate();
  const double dp = s.phi - s.v_p;
  const double du = s.u - s.theta * s.phi;
  return -0.5 * std::log(s.sigma_p2) - dp * dp / (2.0 * s.sigma_p2) - 0.5 * std::log(s.sigma_u2) -
         du * du / (2.0 * s.sigma_u2);
}

ScalarRates scalar_derivatives(const ScalarFE& s) {
  return {s.e_u * s.theta - s.e_p, s.phi - s.v_p - s.sigma_p2 * s.e_p,
          s.u - s.theta * s.phi - s.sigma_u2 * s.e_u};
}

ScalarFE scalar_step(const ScalarFE& s, double dt) {
  require_dt(dt);
  const ScalarRates d = scalar_derivatives(s);
  ScalarFE out = s;
  out.phi += dt * d.phi;
  out.e_p += dt * d.e_p;
  out.e_u += dt * d.e_u;
  return out;
}

ScalarFE scalar_learn(const ScalarFE& s, double rate, const LearnMask& mask) {
  s.validate();
  ScalarFE out = s;
  if (mask.v_p) out.v_p += rate * s.e_p;
  if (mask.sigma_p2) {
    out.sigma_p2 += rate * 0.5 * (s.e_p * s.e_p - 1.0 / s.sigma_p2);
    out.sigma_p2 = std::max(kVarianceFloor, out.sigma_p2);
  }
  if (mask.sigma_u2) {
    out.sigma_u2 += rate * 0.5 * (s.e_u * s.e_u - 1.0 / s.sigma_u2);
    out.sigma_u2 = std::max(kVarianceFloor, out.sigma_u2);
  }
  if (mask.theta) out.theta += rate * s.e_u * s.phi;
  return out;
}

std::size_t scalar_settle(ScalarFE& s, double dt, double tol, std::size_t max_steps) {
  for (std::size_t step = 0; step < max_steps; ++step) {
    const ScalarRates d = scalar_derivatives(s);
    if (std::abs(d.phi) < tol && std::abs(d.e_p) < tol && std::abs(d.e_u) < tol) return step;
    s = scalar_step(s, dt);
  }
  return max_steps;
}

FEAlgorithmResult run_free_energy_algorithm(ScalarFE s, std::span<const double> u_stream,
                                            const FEAlgorithmOptions& options) {
  if (u_stream.empty()) throw std::invalid_argument("run_free_energy_algorithm: empty stream");
  if (options.inner_steps == 0) {
    throw std::invalid_argument("run_free_energy_algorithm: inner_steps must be >= 1");
  }
  require_dt(options.dt);
  s.validate();
  FEAlgorithmResult result;
  result.trace.reserve(u_stream.size());
  for (std::size_t k = 0; k < u_stream.size(); ++k) {
    s.u = u_stream[k];
    s.phi = s.v_p;
    s.e_p = 0.0;
    s.e_u = 0.0;
    for (std::size_t t = 0; t < options.inner_steps; ++t) s = scalar_step(s, options.dt);
    if (!std::isfinite(s.phi) || !std::isfinite(s.e_p) || !std::isfinite(s.e_u)) {
      throw NumericalError("run_free_energy_algorithm: node dynamics diverged at observation " +
                           std::to_string(k));
    }
    result.trace.push_back({k, s, free_energy(s)});
    s = scalar_learn(s, options.rate, options.learn);
  }
  result.model = s;
  return result;
}

// ---- multi-layer network ------------------------------------------------------

double activate(Activation h, double x) { return h == Activation::tanh ? std::tanh(x) : x; }

double activate_derivative(Activation h, double x) {
  if (h == Activation::identity) return 1.0;
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

FENet FENet::create(const std::vector<std::size_t>& dims, Rng& rng, double scale, Activation h) {
  if (dims.size() < 2) throw std::invalid_argument("FENet::create: need at least two levels");
  FENet n;
  n.h = h;
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("FENet::create: zero-width level");
    n.phi.emplace_back(d);
    n.e.emplace_back(d);
    n.sigma.emplace_back(d, 1.0);
  }
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix t(dims[l], dims[l + 1]);
    for (double& w : t.span()) w = rng.uniform(-scale, scale);
    n.theta.push_back(std::move(t));
  }
  n.prior = Vector(dims.back());
  return n;
}

void FENet::validate() const {
  const std::size_t L = phi.size();
  if (L < 2) throw std::invalid_argument("FENet: need at least two levels");
  if (e.size() != L || sigma.size() != L || theta.size() != L - 1) {
    throw std::invalid_argument("FENet: per-level vectors disagree on the number of levels");
  }
  for (std::size_t l = 0; l < L; ++l) {
    if (e[l].size() != phi[l].size()) throw DimensionError("FENet e", phi[l].shape(), e[l].shape());
    if (sigma[l].size() != phi[l].size()) {
      throw DimensionError("FENet sigma", phi[l].shape(), sigma[l].shape());
    }
    for (double s : sigma[l]) require_positive_variance(s, "FENet sigma");
    if (l + 1 < L && (theta[l].rows() != phi[l].size() || theta[l].cols() != phi[l + 1].size())) {
      throw DimensionError("FENet theta", theta[l].shape(), {phi[l].size(), phi[l + 1].size()});
    }
  }
  if (prior.size() != phi.back().size()) {
    throw DimensionError("FENet prior", phi.back().shape(), prior.shape());
  }
}

FENet fenet_from_scalar(const ScalarFE& s) {
  s.validate();
  FENet n;
  n.phi = {Vector{s.u}, Vector{s.phi}};
  n.e = {Vector{s.e_u}, Vector{s.e_p}};
  n.theta = {Matrix{{s.theta}}};
  n.sigma = {Vector{s.sigma_u2}, Vector{s.sigma_p2}};
  n.prior = Vector{s.v_p};
  return n;
}

void fenet_set_observation(FENet& n, const Vector& u) {
  if (n.phi.empty() || u.size() != n.phi[0].size()) {
    throw DimensionError("fenet_set_observation", n.phi.empty() ? Shape{} : n.phi[0].shape(),
                         u.shape());
  }
  n.phi[0] = u;
}

Vector fenet_prediction(const FENet& n, std::size_t level) {
  if (level + 1 == n.levels()) return n.prior;
  Vector a = n.phi[level + 1];
  for (double& x : a) x = activate(n.h, x);
  return matvec(n.theta[level], a);
}

FENetRates fenet_derivatives(const FENet& n) {
  n.validate();
  const std::size_t L = n.levels();
  FENetRates d;
  d.phi.reserve(L);
  d.e.reserve(L);
  for (std::size_t l = 0; l < L; ++l) {
    const Vector pred = fenet_prediction(n, l);
    Vector de(n.phi[l].size());
    for (std::size_t i = 0; i < de.size(); ++i) {
      de[i] = n.phi[l][i] - pred[i] - n.sigma[l][i] * n.e[l][i];
    }
    d.e.push_back(std::move(de));
    if (l == 0) {
      d.phi.emplace_back(n.phi[0].size());
      continue;
    }
    const Vector back = matvec_transposed(n.theta[l - 1], n.e[l - 1]);
    Vector dp(n.phi[l].size());
    for (std::size_t i = 0; i < dp.size(); ++i) {
      dp[i] = -n.e[l][i] + activate_derivative(n.h, n.phi[l][i]) * back[i];
    }
    d.phi.push_back(std::move(dp));
  }
  return d;
}

FENet fenet_step(const FENet& n, double dt) {
  require_dt(dt);
  const FENetRates d = fenet_derivatives(n);
  FENet out = n;
  for (std::size_t l = 0; l < n.levels(); ++l) {
    if (l > 0) axpy(dt, d.phi[l], out.phi[l]);
    axpy(dt, d.e[l], out.e[l]);
  }
  return out;
}

double fenet_residual(const FENet& n) {
  const FENetRates d = fenet_derivatives(n);
  double r = 0.0;
  for (std::size_t l = 0; l < n.levels(); ++l) {
    for (double x : d.e[l]) r = std::max(r, std::abs(x));
    if (l > 0)
      for (double x : d.phi[l]) r = std::max(r, std::abs(x));
  }
  return r;
}

// ---- generative hierarchy -----------------------------------------------------

void GenHierarchy::validate() const {
  if (theta.empty()) throw std::invalid_argument("GenHierarchy: no levels");
  if (sigma.size() != theta.size()) {
    throw std::invalid_argument("GenHierarchy: theta and sigma disagree on the number of levels");
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (sigma[i].size() != theta[i].rows()) {
      throw DimensionError("GenHierarchy sigma", theta[i].shape(), sigma[i].shape());
    }
    for (double s : sigma[i]) {
      if (!(s >= 0.0)) throw std::invalid_argument("GenHierarchy: noise variance must be >= 0");
    }
    if (i + 1 < theta.size() && theta[i].cols() != theta[i + 1].rows()) {
      throw DimensionError("GenHierarchy theta", theta[i].shape(), theta[i + 1].shape());
    }
  }
}

Vector generative_sample(const GenHierarchy& g, const Vector& v_top, Rng& rng) {
  g.validate();
  if (v_top.size() != g.theta.back().cols()) {
    throw DimensionError("generative_sample", g.theta.back().shape(), v_top.shape());
  }
  Vector v = v_top;
  for (std::size_t i = g.theta.size(); i-- > 0;) {
    for (double& x : v) x = activate(g.h, x);
    v = matvec(g.theta[i], v);
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (g.sigma[i][k] > 0.0) v[k] += rng.normal(0.0, std::sqrt(g.sigma[i][k]));
    }
  }
  return v;
}

}  // namespace predcode::fe
