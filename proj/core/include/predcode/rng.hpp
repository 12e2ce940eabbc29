#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace predcode {

/// Seeded pseudo-random source.
///
/// Engine is std::mt19937_64 (a standard-specified algorithm); distributions
/// are the standard library's, so streams are reproducible within one build
/// but not necessarily across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  bool bernoulli(double p);
  std::size_t index(std::size_t n);

  /// Independent child generator for a named component. Derived from the
  /// parent seed only, so the draw history of the parent does not matter.
  Rng split(std::string_view component) const;
  Rng split(std::uint64_t stream) const;

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace predcode
