#include "epcde/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace epcde {
namespace quad {

double simpson(const std::function<double(double)>& f, double a, double b,
               std::size_t intervals) {
  if (intervals == 0 || intervals % 2 != 0) {
    throw std::invalid_argument("simpson: interval count must be positive and even");
  }
  const double h = (b - a) / static_cast<double>(intervals);
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i < intervals; i += 2) odd += f(a + h * static_cast<double>(i));
  for (std::size_t i = 2; i < intervals; i += 2) even += f(a + h * static_cast<double>(i));
  return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

double simpson_samples(std::span<const double> values, double step) {
  if (values.size() < 3 || values.size() % 2 == 0) {
    throw std::invalid_argument("simpson_samples: need an odd sample count >= 3");
  }
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); i += 2) odd += values[i];
  for (std::size_t i = 2; i + 1 < values.size(); i += 2) even += values[i];
  return step / 3.0 * (values.front() + values.back() + 4.0 * odd + 2.0 * even);
}

double simpson2d(const std::function<double(double, double)>& f, double ax,
                 double bx, double ay, double by, std::size_t nx,
                 std::size_t ny) {
  return simpson(
      [&](double x) {
        return simpson([&](double y) { return f(x, y); }, ay, by, ny);
      },
      ax, bx, nx);
}

namespace {

double adaptive_step(const std::function<double(double)>& f, double a,
                     double b, double fa, double fm, double fb, double whole,
                     double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

GaussLegendre::GaussLegendre(std::size_t npoints) {
  nodes.resize(npoints);
  weights.resize(npoints);
  const std::size_t m = (npoints + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    // Chebyshev initial guess, refined by Newton on P_n.
    double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(npoints) + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 0; j < npoints; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) + 1.0) * x * p1 -
              static_cast<double>(j) * p2) /
             (static_cast<double>(j) + 1.0);
      }
      pp = static_cast<double>(npoints) * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[npoints - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[npoints - 1 - i] = w;
  }
}

CdfInverter::CdfInverter(std::function<double(double)> density,
                         std::size_t cells)
    : density_(std::move(density)), h_(1.0 / static_cast<double>(cells)) {
  cum_.resize(cells + 1);
  cum_[0] = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double a = static_cast<double>(i) * h_;
    const double b = a + h_;
    const double cell = h_ / 6.0 *
                        (density_(a) + 4.0 * density_(0.5 * (a + b)) + density_(b));
    if (!(cell > 0.0) || !std::isfinite(cell)) {
      throw std::runtime_error("CdfInverter: density must be positive and finite on [0,1]");
    }
    cum_[i + 1] = cum_[i] + cell;
  }
}

double CdfInverter::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return cum_.back();
  const double pos = x / h_;
  auto cell = static_cast<std::size_t>(pos);
  if (cell >= cum_.size() - 1) cell = cum_.size() - 2;
  const double a = static_cast<double>(cell) * h_;
  // Local Simpson from the cell edge keeps the cumulative table coarse but exactness high.
  return cum_[cell] + simpson(density_, a, x, 8);
}

double CdfInverter::invert(double q, double tol) const {
  if (q <= 0.0) return 0.0;
  if (q >= cum_.back()) return 1.0;
  std::size_t lo = 0, hi = cum_.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (cum_[mid] <= q ? lo : hi) = mid;
  }
  double a = static_cast<double>(lo) * h_;
  double b = a + h_;
  double x = 0.5 * (a + b);
  // Newton with bisection fallback inside the bracketing cell.
  for (int iter = 0; iter < 200; ++iter) {
    const double err = cdf(x) - q;
    if (std::abs(err) <= tol) return x;
    (err > 0.0 ? b : a) = x;
    const double p = density_(x);
    double next = x - err / p;
    if (!(next > a) || !(next < b)) next = 0.5 * (a + b);
    x = next;
  }
  return x;
}

}  // namespace quad
}  // namespace epcde
