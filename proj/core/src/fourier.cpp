#include "epcde/fourier.hpp"

#include <stdexcept>

#include "epcde/quadrature.hpp"

namespace epcde {

double cosine_eval(unsigned j, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("cosine_eval: x must lie in [0,1]");
  }
  return cosine_basis(j, x);
}

double empirical_theta(const SamplePairs& data, const DesignDensityEstimate& phat,
                       unsigned j, unsigned r) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("empirical_theta: empty sample");
  double sum = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double y = data.y[l];
    if (y < 0.0 || y > 1.0) continue;
    sum += cosine_basis(j, y) * cosine_basis(r, data.x[l]) / phat(data.x[l]);
  }
  return sum / static_cast<double>(n);
}

CharSlice empirical_h(const SamplePairs& data, const DesignDensityEstimate& phat,
                      unsigned r, std::span<const double> u_grid) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("empirical_h: empty sample");
  for (std::size_t m = 1; m < u_grid.size(); ++m) {
    if (!(u_grid[m] > u_grid[m - 1])) {
      throw std::invalid_argument("empirical_h: u_grid must be strictly ascending");
    }
  }
  CharSlice slice;
  slice.r = r;
  slice.u_grid.assign(u_grid.begin(), u_grid.end());
  slice.values.assign(u_grid.size(), {0.0, 0.0});
  for (std::size_t l = 0; l < n; ++l) {
    const double w = cosine_basis(r, data.x[l]) / phat(data.x[l]);
    if (w == 0.0) continue;
    const double y = data.y[l];
    for (std::size_t m = 0; m < u_grid.size(); ++m) {
      slice.values[m] += w * std::complex<double>(std::cos(u_grid[m] * y),
                                                  std::sin(u_grid[m] * y));
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : slice.values) v *= inv_n;
  return slice;
}

double synth_sq(std::span<const SeriesCoeff> coeffs, double y, double x) {
  if (!(y >= 0.0 && y <= 1.0 && x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("synth_sq: (y,x) must lie in the unit square");
  }
  double sum = 0.0;
  for (const auto& c : coeffs) {
    sum += c.value * cosine_basis(c.j, y) * cosine_basis(c.r, x);
  }
  return sum;
}

double invert_char(const CharSlice& aggregate, double y, bool* coarse_warning) {
  const std::size_t m = aggregate.u_grid.size();
  if (m == 0) return 0.0;
  if (m < 3 || m % 2 == 0) {
    throw std::invalid_argument("invert_char: grid needs an odd node count >= 3");
  }
  const double du = aggregate.u_grid[1] - aggregate.u_grid[0];
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs(aggregate.u_grid[i] - aggregate.u_grid[i - 1] - du) > 1e-9 * (1.0 + du)) {
      throw std::invalid_argument("invert_char: grid must be uniform");
    }
  }
  if (coarse_warning != nullptr) {
    *coarse_warning = du * std::abs(y) > M_PI / 4.0;
  }
  // Re{v(u) e^{-iuy}} sampled along the grid, phase advanced by recurrence.
  std::vector<double> integrand(m);
  const std::complex<double> step(std::cos(du * y), -std::sin(du * y));
  std::complex<double> phase(std::cos(aggregate.u_grid[0] * y),
                             -std::sin(aggregate.u_grid[0] * y));
  for (std::size_t i = 0; i < m; ++i) {
    integrand[i] = (aggregate.values[i] * phase).real();
    phase *= step;
  }
  return (1.0 / M_PI) * quad::simpson_samples(integrand, du);
}

std::vector<double> char_u_grid(double a, double b) {
  auto intervals = static_cast<std::size_t>(std::llround((b - a) / kCharGridStep));
  if (intervals % 2 != 0) ++intervals;
  if (intervals < 2) intervals = 2;
  std::vector<double> grid(intervals + 1);
  const double du = (b - a) / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) {
    grid[i] = a + du * static_cast<double>(i);
  }
  grid.back() = b;
  return grid;
}

}  // namespace epcde
