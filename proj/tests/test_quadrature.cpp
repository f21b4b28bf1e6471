#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "epcde/quadrature.hpp"

using namespace epcde::quad;

TEST_CASE("simpson is exact on cubics") {
  auto f = [](double x) { return 3.0 * x * x * x - x * x + 2.0 * x - 5.0; };
  // antiderivative: 3/4 x^4 - x^3/3 + x^2 - 5x
  const double exact = 0.75 - 1.0 / 3.0 + 1.0 - 5.0;
  CHECK(simpson(f, 0.0, 1.0, 2) == doctest::Approx(exact).epsilon(1e-14));
  CHECK(simpson(f, 0.0, 1.0, 64) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("simpson converges at fourth order") {
  auto f = [](double x) { return std::sin(x); };
  const double exact = 1.0 - std::cos(2.0);
  const double e1 = std::fabs(simpson(f, 0.0, 2.0, 8) - exact);
  const double e2 = std::fabs(simpson(f, 0.0, 2.0, 16) - exact);
  CHECK(e2 < e1 / 12.0);  // ~1/16 with slack
  CHECK(simpson(f, 0.0, 2.0, 512) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("simpson_samples matches functional form") {
  const std::size_t intervals = 40;
  const double a = 0.25, b = 1.75;
  const double step = (b - a) / intervals;
  std::vector<double> v(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double x = a + step * static_cast<double>(i);
    v[i] = std::exp(-x * x);
  }
  const double direct =
      simpson([](double x) { return std::exp(-x * x); }, a, b, intervals);
  CHECK(simpson_samples(v, step) == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("simpson2d separable product") {
  auto f = [](double x, double y) { return (x * x) * std::cos(y); };
  const double exact = (1.0 / 3.0) * std::sin(1.0);
  CHECK(simpson2d(f, 0.0, 1.0, 0.0, 1.0, 64, 64) ==
        doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("adaptive_simpson hits tight tolerances") {
  auto f = [](double x) { return 1.0 / (1.0 + 25.0 * x * x); };
  const double exact = std::atan(5.0) / 5.0 * 2.0;  // over [-1, 1]
  CHECK(adaptive_simpson(f, -1.0, 1.0, 1e-12) ==
        doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("Gauss-Legendre nodes integrate high-degree polynomials") {
  GaussLegendre gl(16);
  REQUIRE(gl.nodes.size() == 16);
  // exact for degree <= 31
  double s20 = 0.0, s31 = 0.0, w = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    s20 += gl.weights[i] * std::pow(gl.nodes[i], 20);
    s31 += gl.weights[i] * std::pow(gl.nodes[i], 31);
    w += gl.weights[i];
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s20 == doctest::Approx(2.0 / 21.0).epsilon(1e-13));
  CHECK(s31 == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("GaussLegendre(128) retains full precision") {
  GaussLegendre gl(128);
  double w = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    w += gl.weights[i];
    s2 += gl.weights[i] * gl.nodes[i] * gl.nodes[i];
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("CdfInverter round trip") {
  CdfInverter inv([](double x) { return 2.0 * x; });  // cdf = x^2
  CHECK(inv.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(inv.cdf(0.5) == doctest::Approx(0.25).epsilon(1e-8));
  for (double q : {0.1, 0.37, 0.5, 0.93}) {
    const double x = inv.invert(q);
    CHECK(inv.cdf(x) == doctest::Approx(q).epsilon(1e-10));
    CHECK(x == doctest::Approx(std::sqrt(q)).epsilon(1e-6));
  }
}

TEST_CASE("CdfInverter on the uniform density is the identity") {
  CdfInverter inv([](double) { return 1.0; });
  for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    CHECK(inv.invert(q) == doctest::Approx(q).epsilon(1e-10));
  }
}
