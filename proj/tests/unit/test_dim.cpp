#include "doctest.h"

#include <cmath>

#include "predcode/dim.hpp"

using namespace predcode;
using namespace predcode::dim;

namespace {
DIMModel model_of(Matrix W, double eps1 = 0.01, double eps2 = 0.01, double beta = 0.05) {
  DIMModel m;
  m.W = std::move(W);
  m.eps1 = eps1;
  m.eps2 = eps2;
  m.beta = beta;
  return m;
}
}  // namespace

TEST_CASE("dim_predict examples") {
  const Matrix W{{1, 0, 1}, {0, 1, 1}};
  CHECK(dim_predict(model_of(W), Vector{0, 0}) == Vector{0, 0, 0});
  CHECK(dim_predict(model_of(W), Vector{1, 2}) == Vector{1, 2, 3});
  const Matrix stochastic{{0.2, 0.8, 0}, {0.5, 0.25, 0.25}};
  CHECK(dim_predict(model_of(stochastic), Vector{0, 1}) == Vector{0.5, 0.25, 0.25});
}

TEST_CASE("dim_error examples") {
  CHECK(dim_error(Vector{0.5, 2}, Vector{0.5, 2}, 0.01) == Vector{1, 1});
  CHECK(dim_error(Vector{0.5}, Vector{0}, 0.01) == Vector{50});
  CHECK(dim_error(Vector{2, 1}, Vector{1, 2}, 0.01) == Vector{2, 0.5});
  CHECK_THROWS_AS(dim_error(Vector{-1}, Vector{1}, 0.01), NumericalError);
  CHECK_THROWS_AS(dim_error(Vector{1, 1}, Vector{1}, 0.01), DimensionError);
}

TEST_CASE("dim_update_r examples") {
  const Matrix rows_sum_one{{0.5, 0.5}, {0.25, 0.75}};
  CHECK(dim_update_r(model_of(rows_sum_one), Vector{0.3, 2}, Vector{1, 1}) == Vector{0.3, 2});
  CHECK(dim_update_r(model_of(Matrix(2, 2)), Vector{0.3, 2}, Vector{4, 1}) == Vector{0, 0});
  // We = [2, 2]
  const Vector r = dim_update_r(model_of(Matrix{{1, 1}, {1, 1}}), Vector{0, 1}, Vector{1, 1});
  CHECK(r[0] == doctest::Approx(0.02));
  CHECK(r[1] == doctest::Approx(2));
}

TEST_CASE("dim_update_w examples") {
  const Matrix W{{0.3, 0.1}, {0.2, 0.4}};
  CHECK(dim_update_w(model_of(W), Vector{1, 2}, Vector{1, 1}) == W);
  CHECK(dim_update_w(model_of(W, 0.01, 0.01, 0.0), Vector{1, 2}, Vector{3, 0.5}) == W);
  const Matrix one = dim_update_w(model_of(Matrix{{1}}, 0.01, 0.01, 0.1), Vector{1}, Vector{2});
  CHECK(one(0, 0) == doctest::Approx(1.1));
}

TEST_CASE("kl_divergence examples") {
  CHECK(kl_divergence(Vector{0.3, 2}, Vector{0.3, 2}) == 0.0);
  CHECK(kl_divergence(Vector{1}, Vector{std::exp(1.0)}) == doctest::Approx(std::exp(1.0) - 2));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Vector a(5), b(5);
    for (std::size_t k = 0; k < 5; ++k) a[k] = rng.uniform(0, 2), b[k] = rng.uniform(0.01, 2);
    CHECK(kl_divergence(a, b) >= 0.0);
  }
}

TEST_CASE("bars dataset") {
  Rng rng(1);
  for (const auto& img : bars_dataset(rng, 8, 0.0, 5)) CHECK(norm(img) == 0.0);
  Vector all(64, 1.0);
  for (const auto& img : bars_dataset(rng, 8, 1.0, 5)) CHECK(img == all);

  Rng a(7), b(7);
  const auto d1 = bars_dataset(a, 8, 0.125, 1000);
  CHECK(d1 == bars_dataset(b, 8, 0.125, 1000));
  // Per image, a rows and b columns are on (independent Binomial(8, p)), so
  // 8a + 8b - ab pixels are lit. Mean and variance follow from the pmfs.
  auto pmf = [](int k) {
    const double p = 0.125;
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * (8 - i) / (i + 1);
    return c * std::pow(p, k) * std::pow(1 - p, 8 - k);
  };
  double mean = 0.0, second = 0.0;
  for (int a = 0; a <= 8; ++a) {
    for (int b = 0; b <= 8; ++b) {
      const double lit = 8.0 * a + 8.0 * b - a * b;
      mean += pmf(a) * pmf(b) * lit;
      second += pmf(a) * pmf(b) * lit * lit;
    }
  }
  CHECK(mean == doctest::Approx(64.0 * (1.0 - 0.875 * 0.875)));
  const double images = 1000.0;
  const double sd_total = std::sqrt(images * (second - mean * mean));
  double on = 0.0;
  for (const auto& img : d1)
    for (double v : img) on += v;
  CHECK(std::abs(on - images * mean) < 3.0 * sd_total);
  CHECK(bar_prototypes(8).size() == 16);
}

TEST_CASE("dim_train: beta = 0 freezes W") {
  Rng rng(3);
  DIMModel m = DIMModel::create(4, 16, rng);
  m.beta = 0.0;
  const Matrix W = m.W;
  dim_train(m, bars_dataset(rng, 4, 0.25, 20), {5, 10, false});
  CHECK(m.W == W);
}

TEST_CASE("dim_train: one unit learns a scaled copy of a single image") {
  Rng rng(4);
  DIMModel m = DIMModel::create(1, 6, rng);
  const Vector img{0.9, 0.1, 0.5, 0.0, 0.7, 0.3};
  dim_train(m, {img}, {200, 25, false});
  CHECK(cosine(m.W.row(0), img.span()) > 0.99);
}

TEST_CASE("dim_train: bars problem recovers most bars") {
  Rng rng(1);
  Rng data = rng.split("data"), init = rng.split("init");
  DIMModel m = DIMModel::create(16, 64, init, 0.1);
  const auto res = dim_train(m, bars_dataset(data, 8, 0.125, 1000), {200, 25, false});
  CHECK(count_recovered(m.W, bar_prototypes(8), 0.9) >= 14);
  CHECK(res.epoch_kl.back() < res.epoch_kl.front());
  for (double w : m.W.span()) CHECK(w >= 0.0);
}
