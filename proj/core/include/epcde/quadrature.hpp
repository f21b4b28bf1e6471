#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace epcde {
namespace quad {

// Composite Simpson rule over [a, b] with an even number of intervals.
double simpson(const std::function<double(double)>& f, double a, double b,
               std::size_t intervals);

// Simpson weights applied to precomputed samples on a uniform grid.
// values.size() must be odd (even interval count).
double simpson_samples(std::span<const double> values, double step);

// Tensor-product Simpson over [ax,bx] x [ay,by].
double simpson2d(const std::function<double(double, double)>& f, double ax,
                 double bx, double ay, double by, std::size_t nx,
                 std::size_t ny);

// Adaptive Simpson to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussLegendre(std::size_t npoints);
};

// Cumulative integral of a positive density on [0,1] with fast inversion.
// Used for quantile-spaced designs and inverse-CDF sampling.
class CdfInverter {
public:
  CdfInverter(std::function<double(double)> density, std::size_t cells = 8192);

  double cdf(double x) const;
  // Solves cdf(x) = q to |cdf(x) - q| <= tol.
  double invert(double q, double tol = 1e-12) const;
  double total_mass() const { return cum_.back(); }

private:
  std::function<double(double)> density_;
  std::vector<double> cum_;  // cum_[i] = integral over [0, i*h]
  double h_;
};

}  // namespace quad
}  // namespace epcde
