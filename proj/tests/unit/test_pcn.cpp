#include "doctest.h"

#include "predcode/pcn.hpp"

using namespace predcode;
using namespace predcode::pcn;

namespace {
PCNNet random_net(Rng& rng, std::vector<std::size_t> dims, std::size_t classes = 3) {
  PCNConfig c;
  c.dims = std::move(dims);
  c.classes = classes;
  PCNNet n = PCNNet::create(c, rng);
  for (auto& l : n.layers)
    for (double& b : l.b) b = rng.normal(0, 0.3);
  return n;
}

Vector random_input(Rng& rng, std::size_t d) {
  Vector x(d);
  for (double& v : x) v = rng.normal(0, 1);
  return x;
}
}  // namespace

TEST_CASE("single operations") {
  PCNLayer up;
  up.W_fb = Matrix::identity(2);
  CHECK(pcn_predict_down(up, Vector{3, -1}) == Vector{3, -1});
  up.W_fb = Matrix::zeros(2, 2);
  CHECK(pcn_predict_down(up, Vector{3, -1}) == Vector{0, 0});
  up.W_fb = Matrix{{1, 2}, {3, 4}};
  CHECK(pcn_predict_down(up, Vector{1, 1}) == Vector{3, 7});

  CHECK(pcn_error(Vector{1, 2}, Vector{1, 2}) == Vector{0, 0});
  CHECK(pcn_error(Vector{1, 2}, Vector{0, 0}) == Vector{1, 2});
  CHECK(pcn_error(Vector{1, 5}, Vector{2, 3}) == scale(pcn_error(Vector{2, 3}, Vector{1, 5}), -1));

  PCNLayer l;
  l.W_ff = Matrix{{1, 2}, {0, -1}};
  l.r = Vector{0.5, 1.0};
  CHECK(pcn_ff_update(l, Vector{0, 0}, 0.3) == l.r);
  CHECK(pcn_ff_update(l, Vector{1, 2}, 0.0) == l.r);
  // r + 0.5 * W e = [0.5, 1] + 0.5 * [5, -2]
  CHECK(pcn_ff_update(l, Vector{1, 2}, 0.5) == Vector{3.0, 0.0});

  CHECK(pcn_fb_update(Vector{2, 2}, Vector{0, 4}, 0.0) == Vector{2, 2});
  CHECK(pcn_fb_update(Vector{2, 2}, Vector{0, 4}, 1.0) == Vector{0, 4});
  CHECK(pcn_fb_update(Vector{2, 2}, Vector{0, 4}, 0.5) == Vector{1, 3});
}

TEST_CASE("global cycle") {
  Rng rng(1);
  SUBCASE("k1 = beta = 0 is the identity") {
    PCNNet n = random_net(rng, {4, 3, 3});
    n.k1 = 0, n.beta = 0;
    pcn_sweep(n, random_input(rng, 4));
    const PCNNet c = pcn_global_cycle(n);
    CHECK(c.r0 == n.r0);
    for (std::size_t l = 0; l < n.depth(); ++l) CHECK(c.layers[l].r == n.layers[l].r);
  }
  SUBCASE("one hidden layer: fb update then ff update") {
    PCNNet n = random_net(rng, {3, 2});
    n.k1 = 0.2, n.beta = 0.4;
    pcn_sweep(n, random_input(rng, 3));
    const Vector r0 = pcn_fb_update(n.r0, pcn_predict_down(n.layers[0], n.layers[0].r), n.beta);
    const Vector e = pcn_error(r0, pcn_predict_down(n.layers[0], n.layers[0].r));
    const Vector r1 = pcn_ff_update(n.layers[0], e, n.k1);
    const PCNNet c = pcn_global_cycle(n);
    CHECK(c.r0 == r0);
    CHECK(c.layers[0].r == r1);
  }
  SUBCASE("repeated cycles reduce total prediction error") {
    for (int trial = 0; trial < 10; ++trial) {
      PCNNet n = random_net(rng, {1 + rng.index(8), 1 + rng.index(8), 1 + rng.index(8), 1 + rng.index(8)});
      pcn_sweep(n, random_input(rng, n.input_dim()));
      const double before = pcn_prediction_error(n);
      if (before == 0.0) continue;
      bool reduced = false;
      for (double k1 = 0.2; k1 > 1e-4 && !reduced; k1 /= 2) {
        PCNNet m = n;
        m.k1 = k1, m.beta = 0.5;
        for (int t = 0; t < 6; ++t) m = pcn_global_cycle(m);
        reduced = pcn_prediction_error(m) < before;
      }
      CHECK(reduced);
    }
  }
}

TEST_CASE("local cycle") {
  Rng rng(2);
  PCNNet n = random_net(rng, {3, 2});
  n.k1 = 0.3;
  pcn_sweep(n, random_input(rng, 3));
  SUBCASE("zero error below leaves r unchanged") {
    n.r0 = pcn_predict_down(n.layers[0], n.layers[0].r);
    CHECK(pcn_local_cycle(n, 1).layers[0].r == n.layers[0].r);
  }
  SUBCASE("k1 = 0 is the identity for any number of steps") {
    n.k1 = 0;
    PCNNet m = n;
    for (int t = 0; t < 5; ++t) m = pcn_local_cycle(m, 1);
    CHECK(m.layers[0].r == n.layers[0].r);
  }
  SUBCASE("two steps by hand") {
    n.layers[0].W_ff = Matrix{{1, 0, 1}, {0, 1, 0}};
    n.layers[0].W_fb = Matrix{{1, 0}, {0, 1}, {1, 1}};
    n.r0 = Vector{1, 2, 3};
    n.layers[0].r = Vector{0, 0};
    n.k1 = 0.5;
    // step 1: e = [1,2,3], W e = [4,2], r = [2,1]
    // step 2: r_hat = [2,1,3], e = [-1,1,0], W e = [-1,1], r = [1.5,1.5]
    const PCNNet m = pcn_local_cycle(pcn_local_cycle(n, 1), 1);
    CHECK(m.layers[0].r == Vector{1.5, 1.5});
    CHECK(m.r0 == n.r0);
  }
  CHECK_THROWS_AS(pcn_local_cycle(n, 0), std::out_of_range);
  CHECK_THROWS_AS(pcn_local_cycle(n, 2), std::out_of_range);
}

TEST_CASE("forward pass") {
  Rng rng(3);
  PCNNet n = random_net(rng, {4, 5, 3});
  SUBCASE("T = 0 matches plain bit for bit") {
    n.T = 0;
    const Vector x = random_input(rng, 4);
    CHECK(pcn_logits(n, x, Mode::global) == pcn_logits(n, x, Mode::plain));
    CHECK(pcn_logits(n, x, Mode::local) == pcn_logits(n, x, Mode::plain));
  }
  SUBCASE("zero input and zero biases give zero logits") {
    Rng r2(4);
    PCNConfig c;
    c.dims = {4, 5, 3};
    const PCNNet z = PCNNet::create(c, r2);
    for (Mode m : {Mode::plain, Mode::global, Mode::local}) CHECK(norm(pcn_logits(z, Vector(4), m)) == 0.0);
  }
  SUBCASE("same seed, same logits") {
    Rng a(9), b(9);
    const PCNNet na = random_net(a, {4, 5, 3}), nb = random_net(b, {4, 5, 3});
    const Vector x{0.1, -0.2, 0.3, 0.4};
    CHECK(pcn_logits(na, x, Mode::global) == pcn_logits(nb, x, Mode::global));
  }
  SUBCASE("recurrent steps lower the measured error") {
    const auto f = pcn_forward(n, random_input(rng, 4), Mode::global);
    CHECK(f.error_after < f.error_before);
  }
  CHECK_THROWS_AS(pcn_logits(n, Vector(3), Mode::plain), DimensionError);
  n.T = n.max_T + 1;
  CHECK_THROWS(pcn_logits(n, Vector(4), Mode::plain));
}

TEST_CASE("training") {
  Rng rng(5);
  const Dataset data = two_gaussians(rng, 64, 4, 3.0, 0.5);
  SUBCASE("lr = 0 leaves weights unchanged") {
    PCNNet n = random_net(rng, {4, 3, 3}, 2);
    const Vector p = pcn_parameters(n);
    pcn_train_step(n, data, Mode::global, 0.0);
    CHECK(pcn_parameters(n) == p);
  }
  SUBCASE("200 steps on a separable toy set lower the loss") {
    PCNNet n = random_net(rng, {4, 3, 3}, 2);
    const double start = pcn_loss(n, data, Mode::global);
    for (int i = 0; i < 200; ++i) pcn_train_step(n, data, Mode::global, 0.05);
    CHECK(pcn_loss(n, data, Mode::global) < start);
  }
  SUBCASE("labels are range-checked") {
    PCNNet n = random_net(rng, {4, 3}, 2);
    Dataset bad{{Vector(4), 2}};
    CHECK_THROWS_AS(pcn_gradient(n, bad, Mode::plain), std::out_of_range);
  }
  SUBCASE("parameter round trip") {
    PCNNet n = random_net(rng, {4, 3, 3}, 2);
    PCNNet m = random_net(rng, {4, 3, 3}, 2);
    pcn_set_parameters(m, pcn_parameters(n));
    CHECK(pcn_parameters(m) == pcn_parameters(n));
    CHECK_THROWS_AS(pcn_set_parameters(m, Vector(3)), DimensionError);
  }
}

TEST_CASE("modes and datasets") {
  CHECK(parse_mode("global") == Mode::global);
  CHECK(mode_name(Mode::local) == "local");
  CHECK_THROWS_AS(parse_mode("sideways"), std::invalid_argument);
  Rng rng(1);
  const auto digits = raster_digits(rng, 20, 0.0, 0.0);
  CHECK(digits.size() == 20);
  CHECK(digits[3].label == 3);
  CHECK(digits[3].x == raster_glyphs()[3]);
  const auto moons = two_moons(rng, 10, 0.1);
  CHECK(moons.front().x.size() == 2);
}
