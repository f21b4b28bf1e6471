#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "epcde/types.hpp"

namespace epcde {

// Truncated-from-zero cosine-series estimate of the design density. The
// constant coefficient is pinned at 1, so the untruncated series integrates
// to one by construction.
struct DesignDensityEstimate {
  std::vector<double> coeffs;  // series coefficients for r = 1..cutoff
  double floor = 0.0;          // truncation level
  std::size_t n = 0;

  // Raw series value (may dip below the floor or zero).
  double series(double x) const;
  // Truncated evaluation, bounded below by `floor`.
  double operator()(double x) const;
};

struct DesignSpec {
  DesignKind kind = DesignKind::random;
  std::function<double(double)> density;  // positive on [0,1]
  double normalization_tol = 1e-6;

  static DesignSpec uniform(DesignKind kind = DesignKind::random);
  // Throws if the density is non-positive on a probe grid or its mass
  // deviates from 1 beyond the tolerance.
  void validate() const;
};

// Series design-density estimate with cutoff floor(n^{1/3}) and truncation
// level 1/lnln(n). Requires n >= 3 (so the floor is positive) and all
// samples inside [0,1].
DesignDensityEstimate estimate_design(std::span<const double> x_samples);

// Ordered fixed-design points: each consecutive cell of the design density
// carries mass exactly 1/(n+1), solved by CDF inversion.
std::vector<double> generate_fixed_design(const DesignSpec& spec, std::size_t n);

// n inverse-CDF draws from the design density; bit-reproducible per seed.
std::vector<double> sample_random_design(const DesignSpec& spec, std::size_t n,
                                         std::uint64_t seed);

enum class DesignTarget { regression, cdensity };

// Optimal design density: sigma/∫sigma for regression-function estimation,
// sqrt(mass)/∫sqrt(mass) for conditional-density estimation.
std::function<double(double)> optimal_design(
    DesignTarget target, const std::function<double(double)>& input);

}  // namespace epcde
