#pragma once

// Hand-rolled generators for property tests. Each case gets its own engine
// seeded from (suite seed, case index) so a failure names a reproducible case.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <driverid/dataset.hpp>
#include <driverid/ingest.hpp>
#include <driverid/segment.hpp>

namespace gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  /// Inclusive on both ends.
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(engine_); }

  std::vector<double> normals(std::size_t n, double mean, double sd);
  /// Heavy-tailed mixture with repeated values, to stress quantile ties.
  std::vector<double> lumpy(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Six correlated channels: two latent factors mixed with per-channel
/// offsets and noise, so correlations stay well away from zero.
driverid::Window window(Gen& g, std::size_t n);

/// Trip with random values, strictly increasing timestamps at `rate_hz`,
/// optional missing channels and optional timestamp jitter.
driverid::Trip trip(Gen& g, std::size_t n, double rate_hz, double missing_p = 0.0);

/// Random classification data, `classes` labels, all rows tagged train.
driverid::LabeledDataset dataset(Gen& g, std::size_t rows, std::size_t cols,
                                 std::size_t classes);

/// Gaussian blobs around well-separated centers.
driverid::LabeledDataset blobs(Gen& g, std::size_t rows_per_class, std::size_t cols,
                               std::size_t classes, double spread);

/// Runs `body(gen, case_index)` for `cases` independent cases.
template <class Body>
void for_all(std::uint64_t seed, std::size_t cases, Body&& body) {
  for (std::size_t i = 0; i < cases; ++i) {
    Gen g(seed * 0x9E3779B97F4A7C15ULL + i);
    body(g, i);
  }
}

}  // namespace gen
