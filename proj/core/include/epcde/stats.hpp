#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace epcde {
namespace stats {

double normal_pdf(double z);
double normal_cdf(double z);
// Inverse of the standard normal CDF (Acklam's rational approximation with a
// Halley refinement step); accurate to ~1e-15 over (0, 1).
double normal_quantile(double p);

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);
// Type-7 (linear interpolation) sample quantile of sorted or unsorted data.
double quantile(std::span<const double> v, double p);
double median(std::span<const double> v);
double interquartile_range(std::span<const double> v);

// SplitMix64-style mixer used to derive independent per-replicate seeds from
// (master seed, sample size, replicate index).
std::uint64_t hash64(std::uint64_t a, std::uint64_t b, std::uint64_t c);

// Uniform(0,1) draws with a platform-independent mapping from the raw 64-bit
// stream (std::uniform_real_distribution is implementation defined).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  std::uint64_t raw() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

}  // namespace stats
}  // namespace epcde
