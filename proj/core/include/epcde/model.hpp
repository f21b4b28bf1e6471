#pragma once

#include <complex>
#include <functional>

#include "epcde/design.hpp"

namespace epcde {

enum class ResponseSupport { unit_square, line_strip };

// A known truth: conditional density plus design, with an optional
// closed-form conditional characteristic function. When `char_fn` is absent,
// characteristic-function values are obtained by quadrature of the density
// over [y_min, y_max].
struct TrueModel {
  std::function<double(double, double)> cd;  // f(y|x)
  DesignSpec design;
  std::function<std::complex<double>(double, double)> char_fn;  // h(u|x)
  ResponseSupport support = ResponseSupport::unit_square;
  double y_min = -8.0;
  double y_max = 8.0;

  double lo() const { return support == ResponseSupport::unit_square ? 0.0 : y_min; }
  double hi() const { return support == ResponseSupport::unit_square ? 1.0 : y_max; }

  // h(u|x): closed form when available, quadrature otherwise.
  std::complex<double> char_at(double u, double x) const;

  // Spot-checks that each conditional slice integrates to one.
  void validate(double tol = 1e-6) const;
};

}  // namespace epcde
