#include <benchmark/benchmark.h>

#include "predcode/archproto.hpp"
#include "predcode/dim.hpp"
#include "predcode/free_energy.hpp"
#include "predcode/pcn.hpp"
#include "predcode/rao_ballard.hpp"

using namespace predcode;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& x : m.span()) x = rng.normal(0, 1);
  return m;
}

Vector random_vector(Rng& rng, std::size_t n) {
  Vector v(n);
  for (double& x : v) x = rng.normal(0, 1);
  return v;
}

void BM_Matvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix m = random_matrix(rng, n, n);
  const Vector v = random_vector(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(matvec(m, v));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Matvec)->RangeMultiplier(4)->Range(16, 1024);

void BM_MatvecTransposed(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix m = random_matrix(rng, n, n);
  const Vector v = random_vector(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(matvec_transposed(m, v));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_MatvecTransposed)->RangeMultiplier(4)->Range(16, 1024);

void BM_DimInfer(benchmark::State& state) {
  Rng rng(2);
  const dim::DIMModel m = dim::DIMModel::create(16, 64, rng);
  const auto images = dim::bars_dataset(rng, 8, 0.125, 64);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(dim::dim_infer(m, images[i++ % images.size()], 25));
}
BENCHMARK(BM_DimInfer);

void BM_RbInfer(benchmark::State& state) {
  Rng rng(3);
  const rb::RBHierarchy h = rb::RBHierarchy::create(rb::RBConfig{}, rng);
  const auto patches = rb::extract_patches(rb::random_bar_image(rng, 16, 26), 16, 16, 11);
  rb::InferOptions opts;
  opts.record_states = false;
  for (auto _ : state) benchmark::DoNotOptimize(rb::rb_infer(h, patches, 20, std::nullopt, opts));
}
BENCHMARK(BM_RbInfer);

void BM_PcnForward(benchmark::State& state) {
  Rng rng(4);
  pcn::PCNConfig c;
  c.dims = {64, 32, 32};
  c.classes = 10;
  c.T = static_cast<std::size_t>(state.range(0));
  const pcn::PCNNet n = pcn::PCNNet::create(c, rng);
  const Vector x = random_vector(rng, 64);
  for (auto _ : state) benchmark::DoNotOptimize(pcn::pcn_logits(n, x, pcn::Mode::global));
}
BENCHMARK(BM_PcnForward)->DenseRange(0, 6, 3);

void BM_PcnGradient(benchmark::State& state) {
  Rng rng(5);
  pcn::PCNConfig c;
  c.dims = {64, 32, 32};
  c.classes = 10;
  const pcn::PCNNet n = pcn::PCNNet::create(c, rng);
  const auto batch = pcn::raster_digits(rng, 32, 0.1, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(pcn::pcn_gradient(n, batch, pcn::Mode::global));
}
BENCHMARK(BM_PcnGradient);

void BM_FeNetStep(benchmark::State& state) {
  Rng rng(6);
  fe::FENet n = fe::FENet::create({16, 8, 8, 4}, rng);
  fe::fenet_set_observation(n, random_vector(rng, 16));
  for (auto _ : state) {
    n = fe::fenet_step(n, 0.01);
    benchmark::DoNotOptimize(n.phi.back().data());
  }
}
BENCHMARK(BM_FeNetStep);

void BM_ArchValidate(benchmark::State& state) {
  const auto a = *arch::preset("lotter3");
  for (auto _ : state) {
    benchmark::DoNotOptimize(arch::link_table(a));
    benchmark::DoNotOptimize(arch::validate_rb_protocol(a));
  }
}
BENCHMARK(BM_ArchValidate);

}  // namespace

BENCHMARK_MAIN();
