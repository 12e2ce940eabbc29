#include "doctest.h"

#include <cmath>

#include "predcode/free_energy.hpp"

using namespace predcode;
using namespace predcode::fe;

namespace {
ScalarFE model(double v_p, double sp, double su, double theta, double u) {
  ScalarFE s;
  s.v_p = v_p;
  s.sigma_p2 = sp;
  s.sigma_u2 = su;
  s.theta = theta;
  s.u = u;
  s.phi = v_p;
  return s;
}
}  // namespace

TEST_CASE("phi_star examples") {
  CHECK(phi_star(1.5, 2.0, 3.0, 0.5, 2.0) == doctest::Approx(1.5));
  CHECK(std::abs(phi_star(0.0, 1e12, 4.0, 1.0, 1.0) - 4.0) < 1e-6);
  CHECK(phi_star(3, 1, 2, 1, 1) == doctest::Approx(2.5));
  CHECK_THROWS_AS(phi_star(0, 0, 1, 1, 1), NumericalError);
  CHECK_THROWS_AS(phi_star(0, 1, 1, -1, 1), NumericalError);
}

TEST_CASE("derivatives vanish at the analytic fixed point") {
  ScalarFE s = model(3, 1, 2, 1.5, 2);
  s.phi = phi_star(s.v_p, s.sigma_p2, s.u, s.sigma_u2, s.theta);
  s.e_p = (s.phi - s.v_p) / s.sigma_p2;
  s.e_u = (s.u - s.theta * s.phi) / s.sigma_u2;
  const auto d = scalar_derivatives(s);
  CHECK(std::abs(d.phi) < 1e-12);
  CHECK(std::abs(d.e_p) < 1e-12);
  CHECK(std::abs(d.e_u) < 1e-12);
}

TEST_CASE("scalar_step: dt = 0 is a no-op, negative dt is rejected") {
  ScalarFE s = model(1, 2, 3, 0.5, -1);
  s.phi = 0.3, s.e_p = 0.2, s.e_u = -0.1;
  const ScalarFE t = scalar_step(s, 0.0);
  CHECK(t.phi == s.phi);
  CHECK(t.e_p == s.e_p);
  CHECK(t.e_u == s.e_u);
  CHECK_THROWS(scalar_step(s, -0.1));
}

TEST_CASE("error node relaxes to its closed form with phi held fixed") {
  ScalarFE s = model(1, 2, 1, 1, 0);
  s.phi = 4;
  for (int i = 0; i < 2000; ++i) {
    s = scalar_step(s, 0.01);
    s.phi = 4;
  }
  CHECK(std::abs(s.e_p - 1.5) < 1e-6);
}

TEST_CASE("scalar_learn examples") {
  ScalarFE s = model(1, 2, 3, 0.5, 1);
  s.phi = 2, s.e_p = 0, s.e_u = 0.5;
  CHECK(scalar_learn(s, 0.1).v_p == s.v_p);
  CHECK(scalar_learn(s, 0.1).theta == doctest::Approx(0.6));
  s.e_p = 1.0 / std::sqrt(s.sigma_p2);
  CHECK(scalar_learn(s, 0.1).sigma_p2 == doctest::Approx(s.sigma_p2).epsilon(1e-15));
  LearnMask only_theta{false, false, false, true};
  const ScalarFE m = scalar_learn(s, 0.1, only_theta);
  CHECK(m.v_p == s.v_p);
  CHECK(m.sigma_p2 == s.sigma_p2);
  CHECK(m.sigma_u2 == s.sigma_u2);
}

TEST_CASE("variances never fall below the floor") {
  ScalarFE s = model(0, kVarianceFloor, kVarianceFloor, 1, 0);
  s.e_p = 0, s.e_u = 0;
  const ScalarFE l = scalar_learn(s, 10.0);
  CHECK(l.sigma_p2 >= kVarianceFloor);
  CHECK(l.sigma_u2 >= kVarianceFloor);
}

TEST_CASE("run_free_energy_algorithm") {
  const std::vector<double> stream{9.0, 11.0, 10.5, 8.0};
  SUBCASE("rate 0 leaves parameters bit-identical") {
    FEAlgorithmOptions o;
    o.rate = 0.0;
    const ScalarFE s = model(5, 1, 1, 1, 0);
    const auto r = run_free_energy_algorithm(s, stream, o);
    CHECK(r.model.v_p == s.v_p);
    CHECK(r.model.theta == s.theta);
    CHECK(r.model.sigma_p2 == s.sigma_p2);
    CHECK(r.model.sigma_u2 == s.sigma_u2);
    CHECK(r.trace.size() == stream.size());
  }
  SUBCASE("a consistent constant stream does not move the mean parameters") {
    const ScalarFE s = model(5, 1, 1, 2, 0);
    const std::vector<double> constant(50, 10.0);
    const auto r = run_free_energy_algorithm(s, constant);
    CHECK(std::abs(r.model.v_p - s.v_p) / 50.0 < 1e-8);
    CHECK(std::abs(r.model.theta - s.theta) / 50.0 < 1e-8);
  }
  SUBCASE("synthetic recovery of theta") {
    Rng rng(1);
    std::vector<double> u(2000);
    for (double& x : u) x = 2.0 * rng.normal(5, 1);
    const auto r = run_free_energy_algorithm(model(5, 1, 1, 1, 0), u);
    CHECK(std::abs(r.model.theta - 2.0) < 0.2);
  }
  CHECK_THROWS(run_free_energy_algorithm(model(5, 1, 1, 1, 0), std::vector<double>{}));
}

TEST_CASE("single-layer FENet reproduces the scalar trajectory") {
  ScalarFE s = model(3, 0.7, 1.9, -1.2, 2.5);
  s.phi = -0.4;
  FENet n = fenet_from_scalar(s);
  for (int t = 0; t < 3000; ++t) {
    s = scalar_step(s, 0.01);
    n = fenet_step(n, 0.01);
    REQUIRE(std::abs(n.phi[1][0] - s.phi) <= 1e-12);
    REQUIRE(std::abs(n.e[1][0] - s.e_p) <= 1e-12);
    REQUIRE(std::abs(n.e[0][0] - s.e_u) <= 1e-12);
  }
}

TEST_CASE("FENet: zero errors and zero feedback term give a stationary phi") {
  Rng rng(2);
  FENet n = FENet::create({3, 2, 2}, rng);
  const auto d = fenet_derivatives(n);
  for (const auto& v : d.phi) CHECK(norm(v) == 0.0);
}

TEST_CASE("FENet: two-layer network settles to a fixed point") {
  Rng rng(6);
  FENet n = FENet::create({2, 2}, rng);
  for (auto& s : n.sigma)
    for (double& v : s) v = rng.uniform(0.5, 2.0);
  n.prior = Vector{0.3, -0.2};
  fenet_set_observation(n, Vector{1.0, -0.5});
  for (int t = 0; t < 100000; ++t) n = fenet_step(n, 0.01);
  CHECK(fenet_residual(n) < 1e-8);
}

TEST_CASE("FENet validation") {
  Rng rng(1);
  FENet n = FENet::create({2, 2}, rng);
  n.sigma[0][0] = 0.0;
  CHECK_THROWS(n.validate());
  CHECK_THROWS_AS(fenet_set_observation(n, Vector{1, 2, 3}), DimensionError);
}

TEST_CASE("generative_sample") {
  GenHierarchy g;
  g.theta = {Matrix{{2, 0}, {0, 1}, {1, 1}}, Matrix{{1}, {-1}}};
  g.sigma = {Vector(3, 0.0), Vector(2, 0.0)};
  Rng rng(1);
  // Level 1 = [1, -1] * 0.5, level 0 = W0 level1
  const Vector x = generative_sample(g, Vector{0.5}, rng);
  CHECK(x == Vector{1.0, -0.5, 0.0});

  GenHierarchy id;
  id.theta = {Matrix::identity(2)};
  id.sigma = {Vector(2, 1.0)};
  const Vector v{1.5, -2.0};
  const int n = 10000;
  Vector mean(2);
  double c00 = 0, c11 = 0, c01 = 0;
  std::vector<Vector> draws;
  for (int i = 0; i < n; ++i) draws.push_back(generative_sample(id, v, rng));
  for (const auto& d : draws) axpy(1.0 / n, d, mean);
  for (const auto& d : draws) {
    c00 += (d[0] - mean[0]) * (d[0] - mean[0]) / n;
    c11 += (d[1] - mean[1]) * (d[1] - mean[1]) / n;
    c01 += (d[0] - mean[0]) * (d[1] - mean[1]) / n;
  }
  CHECK(std::abs(mean[0] - v[0]) < 4.0 / 100.0);
  CHECK(std::abs(mean[1] - v[1]) < 4.0 / 100.0);
  CHECK(std::abs(c00 - 1.0) < 0.1);
  CHECK(std::abs(c11 - 1.0) < 0.1);
  CHECK(std::abs(c01) < 0.1);
}
