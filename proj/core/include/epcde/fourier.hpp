#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "epcde/design.hpp"
#include "epcde/types.hpp"

namespace epcde {

// Unchecked cosine-basis value: phi_0 = 1, phi_j = sqrt(2) cos(pi j x).
inline double cosine_basis(unsigned j, double x) {
  return j == 0 ? 1.0 : std::sqrt(2.0) * std::cos(M_PI * static_cast<double>(j) * x);
}

// Checked variant; throws std::domain_error for x outside [0,1].
double cosine_eval(unsigned j, double x);

// One bivariate series coefficient (j indexes the response direction, r the
// predictor direction).
struct SeriesCoeff {
  unsigned j = 0;
  unsigned r = 0;
  double value = 0.0;
};

// Samples of one empirical characteristic-function slice on an ascending
// frequency grid.
struct CharSlice {
  unsigned r = 0;
  std::vector<double> u_grid;
  std::vector<std::complex<double>> values;
};

// Empirical Fourier coefficient: n^{-1} sum I(Y in [0,1]) phi_j(Y) phi_r(X) / phat(X).
double empirical_theta(const SamplePairs& data, const DesignDensityEstimate& phat,
                       unsigned j, unsigned r);

// Empirical characteristic-function slice:
// values[m] = n^{-1} sum exp(i u_m Y) phi_r(X) / phat(X).
CharSlice empirical_h(const SamplePairs& data, const DesignDensityEstimate& phat,
                      unsigned r, std::span<const double> u_grid);

// Partial-sum synthesis: sum value * phi_j(y) * phi_r(x).
double synth_sq(std::span<const SeriesCoeff> coeffs, double y, double x);

// Characteristic-function inversion pi^{-1} * integral of Re{v(u) e^{-iuy}}
// over the slice's (uniform, even-interval) grid, by composite Simpson.
// Sets *coarse_warning when the per-node phase increment du*|y| exceeds pi/4.
double invert_char(const CharSlice& aggregate, double y,
                   bool* coarse_warning = nullptr);

// Uniform frequency grid from a to b with the standard spacing 0.05 (an
// odd node count, so composite Simpson applies directly).
std::vector<double> char_u_grid(double a, double b);

inline constexpr double kCharGridStep = 0.05;

}  // namespace epcde
