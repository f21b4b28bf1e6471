#include "epcde/design.hpp"

#include <cmath>
#include <stdexcept>

#include "epcde/fourier.hpp"
#include "epcde/quadrature.hpp"
#include "epcde/stats.hpp"

namespace epcde {

double DesignDensityEstimate::series(double x) const {
  double v = 1.0;
  for (std::size_t r = 0; r < coeffs.size(); ++r) {
    v += coeffs[r] * cosine_basis(static_cast<unsigned>(r + 1), x);
  }
  return v;
}

double DesignDensityEstimate::operator()(double x) const {
  return std::max(floor, series(x));
}

DesignSpec DesignSpec::uniform(DesignKind kind) {
  DesignSpec spec;
  spec.kind = kind;
  spec.density = [](double) { return 1.0; };
  return spec;
}

void DesignSpec::validate() const {
  if (!density) throw std::invalid_argument("DesignSpec: no density set");
  for (int i = 0; i <= 1000; ++i) {
    const double x = static_cast<double>(i) / 1000.0;
    if (!(density(x) > 0.0)) {
      throw std::invalid_argument("DesignSpec: density must be positive on [0,1]");
    }
  }
  const double mass = quad::adaptive_simpson(density, 0.0, 1.0, 1e-12);
  if (std::abs(mass - 1.0) > normalization_tol) {
    throw std::invalid_argument("DesignSpec: density mass deviates from 1");
  }
}

DesignDensityEstimate estimate_design(std::span<const double> x_samples) {
  const std::size_t n = x_samples.size();
  if (n < 3) throw std::invalid_argument("estimate_design: need n >= 3");
  for (double x : x_samples) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::invalid_argument("estimate_design: sample outside [0,1]");
    }
  }
  const double lnln = std::log(std::log(static_cast<double>(n)));
  if (!(lnln > 0.0)) throw std::invalid_argument("estimate_design: need n >= 3");
  DesignDensityEstimate est;
  est.n = n;
  est.floor = 1.0 / lnln;
  const auto cutoff =
      static_cast<std::size_t>(std::cbrt(static_cast<double>(n)) + 1e-9);
  est.coeffs.resize(cutoff, 0.0);
  for (std::size_t r = 1; r <= cutoff; ++r) {
    double s = 0.0;
    for (double x : x_samples) s += cosine_basis(static_cast<unsigned>(r), x);
    est.coeffs[r - 1] = s / static_cast<double>(n);
  }
  return est;
}

std::vector<double> generate_fixed_design(const DesignSpec& spec, std::size_t n) {
  if (spec.kind != DesignKind::fixed) {
    throw std::invalid_argument("generate_fixed_design: spec.kind must be fixed");
  }
  spec.validate();
  quad::CdfInverter inv(spec.density);
  std::vector<double> xs(n);
  for (std::size_t l = 1; l <= n; ++l) {
    xs[l - 1] = inv.invert(static_cast<double>(l) / static_cast<double>(n + 1));
  }
  return xs;
}

std::vector<double> sample_random_design(const DesignSpec& spec, std::size_t n,
                                         std::uint64_t seed) {
  if (spec.kind != DesignKind::random) {
    throw std::invalid_argument("sample_random_design: spec.kind must be random");
  }
  spec.validate();
  quad::CdfInverter inv(spec.density);
  stats::Rng rng(seed);
  std::vector<double> xs(n);
  for (std::size_t l = 0; l < n; ++l) {
    xs[l] = inv.invert(rng.uniform());
  }
  return xs;
}

std::function<double(double)> optimal_design(
    DesignTarget target, const std::function<double(double)>& input) {
  if (!input) throw std::invalid_argument("optimal_design: no input function");
  for (int i = 0; i <= 1000; ++i) {
    const double x = static_cast<double>(i) / 1000.0;
    if (!(input(x) > 0.0)) {
      throw std::invalid_argument("optimal_design: input must be positive on [0,1]");
    }
  }
  std::function<double(double)> shape;
  if (target == DesignTarget::regression) {
    shape = input;
  } else {
    shape = [input](double x) { return std::sqrt(input(x)); };
  }
  const double norm = quad::adaptive_simpson(shape, 0.0, 1.0, 1e-12);
  return [shape, norm](double x) { return shape(x) / norm; };
}

}  // namespace epcde
