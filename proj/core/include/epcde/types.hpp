#pragma once

#include <cstddef>
#include <vector>

namespace epcde {

// The two integrated-squared-error regimes: `square` integrates over the unit
// square, `line` over the whole real line in the response direction.
enum class Loss { square, line };

enum class DesignKind { fixed, random };

// The n observation pairs (Y_l, X_l).
struct SamplePairs {
  std::vector<double> y;
  std::vector<double> x;
  DesignKind kind = DesignKind::random;

  std::size_t size() const { return y.size(); }
};

}  // namespace epcde
