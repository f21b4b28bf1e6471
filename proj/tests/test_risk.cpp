#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "epcde/risk.hpp"

using namespace epcde;

namespace {

TrueModel line_model_with_design(std::function<double(double)> p) {
  TrueModel m;
  m.cd = [](double, double) { return 1.0; };  // unused by line-loss difficulty
  m.design.kind = DesignKind::random;
  m.design.density = std::move(p);
  m.support = ResponseSupport::line_strip;
  return m;
}

}  // namespace

TEST_CASE("coefficient of difficulty closed cases") {
  TrueModel unif;
  unif.cd = [](double, double) { return 1.0; };
  unif.design = DesignSpec::uniform();
  unif.support = ResponseSupport::unit_square;
  CHECK(coefficient_of_difficulty(unif, Loss::square) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(coefficient_of_difficulty(unif, Loss::line) ==
        doctest::Approx(1.0).epsilon(1e-9));

  auto tilted = line_model_with_design([](double x) { return (1.0 + x) / 1.5; });
  // int 1.5/(1+x) dx = 1.5 ln 2
  CHECK(coefficient_of_difficulty(tilted, Loss::line) ==
        doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-8));
  CHECK(coefficient_of_difficulty(tilted, Loss::line) ==
        doctest::Approx(1.03972).epsilon(1e-5));
}

TEST_CASE("univariate sharp constant") {
  // closed forms: 3^{1/3}(2 pi)^{-2/3} and 5^{1/5}(2/(3 pi))^{4/5}
  CHECK(pinsker_uni(1) ==
        doctest::Approx(std::cbrt(3.0) * std::pow(2.0 * M_PI, -2.0 / 3.0))
            .epsilon(1e-12));
  CHECK(pinsker_uni(2) ==
        doctest::Approx(std::pow(5.0, 0.2) * std::pow(2.0 / (3.0 * M_PI), 0.8))
            .epsilon(1e-12));
  CHECK(pinsker_uni(1) == doctest::Approx(0.42357).epsilon(1e-4));
  CHECK(pinsker_uni(2) == doctest::Approx(0.39921).epsilon(1e-4));
  CHECK(pinsker_uni(2) < pinsker_uni(1));
  CHECK(pinsker_uni(5) < pinsker_uni(2));
  CHECK_THROWS_AS(pinsker_uni(0), std::invalid_argument);
}

TEST_CASE("region integrals at (1,1) have closed polar forms") {
  auto [j1, j2] = j_integrals(1.0, 1.0);
  CHECK(j1 == doctest::Approx(M_PI / 24.0).epsilon(1e-8));
  CHECK(j2 == doctest::Approx(M_PI / 12.0).epsilon(1e-8));
}

TEST_CASE("region integrals are ordered and symmetric") {
  for (double a : {0.5, 1.0, 2.0, 4.0}) {
    for (double b : {0.5, 1.0, 2.0, 4.0}) {
      auto [j1, j2] = j_integrals(a, b);
      CHECK(j1 > 0.0);
      CHECK(j2 > j1);  // 1 - sqrt(s) > sqrt(s) - s on (0,1)... integrated
      auto [s1, s2] = j_integrals(b, a);
      CHECK(j1 == doctest::Approx(s1).epsilon(1e-10));
      CHECK(j2 == doctest::Approx(s2).epsilon(1e-10));
    }
  }
}

TEST_CASE("anisotropic sharp constant") {
  CHECK(pinsker_aniso(1.0, 1.0) == doctest::Approx(0.23033).epsilon(1e-5));
  CHECK(pinsker_aniso(2.0, 1.0) == doctest::Approx(pinsker_aniso(1.0, 2.0)).epsilon(1e-10));
  CHECK(pinsker_aniso(2.0, 2.0) > 0.0);
}

TEST_CASE("closed-form risks at reference points") {
  // analytic class, gamma1 = gamma2 = 1, d = 1, n = e^10
  auto analytic = SmoothnessClass::analytic(1.0, 1.0);
  const std::size_t n = 22027;  // ceil(e^10)
  const double lnn = std::log(static_cast<double>(n));
  CHECK(class_risk(analytic, 1.0, n) ==
        doctest::Approx(lnn * lnn / (M_PI * static_cast<double>(n))).epsilon(1e-12));
  CHECK(class_risk(analytic, 1.0, n) == doctest::Approx(1.4451e-3).epsilon(1e-3));

  auto sob = SmoothnessClass::sobolev(1, 1, 1.0);
  CHECK(class_risk(sob, 1.0, 10000) == doctest::Approx(2.3033e-3).epsilon(1e-3));

  auto uni = SmoothnessClass::uni_analytic(1.0);
  CHECK(class_risk(uni, 1.0, n) ==
        doctest::Approx(lnn / (M_PI * static_cast<double>(n))).epsilon(1e-12));
  CHECK(class_risk(uni, 1.0, n) == doctest::Approx(1.4451e-4).epsilon(1e-3));
}

TEST_CASE("closed-form risk is monotone in n, Q and d") {
  auto sob = SmoothnessClass::sobolev(2, 1, 1.0);
  CHECK(class_risk(sob, 1.0, 2000) < class_risk(sob, 1.0, 1000));
  CHECK(class_risk(sob, 2.0, 1000) > class_risk(sob, 1.0, 1000));
  auto bigger_q = SmoothnessClass::sobolev(2, 1, 3.0);
  CHECK(class_risk(bigger_q, 1.0, 1000) > class_risk(sob, 1.0, 1000));
}

TEST_CASE("bounded-spectrum rate") {
  auto bs = SmoothnessClass::bounded_spectrum(2.0);
  CHECK(class_risk(bs, 1.5, 300) == doctest::Approx(2.0 * 1.5 / 300.0).epsilon(1e-12));
}

TEST_CASE("sequence-space equation solves to small residual") {
  auto sob = SmoothnessClass::sobolev(1, 1, 1.0);
  auto sol = solve_eta(sob, 1.0, 10000);
  CHECK(sol.residual <= 1e-6);
  CHECK(sol.eta > 0.0);
  CHECK(sol.series_risk > 0.0);
}

TEST_CASE("series risk approaches the closed form") {
  // The finite sum sits above its first-order asymptote and tightens as n
  // grows; reference ratios cross-checked against an independent evaluation.
  auto s11 = SmoothnessClass::sobolev(1, 1, 1.0);
  const double r11 = solve_eta(s11, 1.0, 1000000).series_risk /
                     class_risk(s11, 1.0, 1000000);
  CHECK(r11 == doctest::Approx(1.0438).epsilon(2e-3));

  auto s22 = SmoothnessClass::sobolev(2, 2, 1.0);
  const double r22_6 = solve_eta(s22, 1.0, 1000000).series_risk /
                       class_risk(s22, 1.0, 1000000);
  const double r22_8 = solve_eta(s22, 1.0, 100000000).series_risk /
                       class_risk(s22, 1.0, 100000000);
  CHECK(r22_6 == doctest::Approx(1.1915).epsilon(2e-3));
  CHECK(r22_8 == doctest::Approx(1.0864).epsilon(2e-3));
  CHECK(r22_8 < r22_6);  // approaches 1 from above
}

TEST_CASE("a tiny budget collapses the series risk to d/n") {
  auto sob = SmoothnessClass::sobolev(1, 1, 1e-10);
  auto sol = solve_eta(sob, 1.0, 100);
  CHECK(sol.series_risk == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("risk_report is populated per kind") {
  auto sob = SmoothnessClass::sobolev(1, 1, 1.0);
  auto rep = risk_report(sob, 1.0, 10000);
  CHECK(rep.coefficient_of_difficulty == doctest::Approx(1.0));
  CHECK(rep.pinsker == doctest::Approx(pinsker_aniso(1.0, 1.0)).epsilon(1e-12));
  CHECK(rep.risk_closed_form == doctest::Approx(2.3033e-3).epsilon(1e-3));
  REQUIRE(rep.risk_series.has_value());
  REQUIRE(rep.eta.has_value());
  REQUIRE(rep.residual.has_value());
  CHECK(*rep.residual <= 1e-6);
  CHECK_FALSE(rep.constant_up_to_c);

  auto bs = SmoothnessClass::bounded_spectrum(1.0);
  auto rep2 = risk_report(bs, 1.0, 10000);
  CHECK(rep2.constant_up_to_c);
  CHECK_FALSE(rep2.risk_series.has_value());

  auto ana = SmoothnessClass::analytic(1.0, 2.0);
  auto rep3 = risk_report(ana, 1.0, 10000);
  CHECK(rep3.risk_closed_form > 0.0);
  CHECK(std::isfinite(rep3.pinsker));
  CHECK(rep3.pinsker > 0.0);
}

TEST_CASE("class factories validate their parameters") {
  CHECK_THROWS_AS(SmoothnessClass::sobolev(0, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SmoothnessClass::sobolev(1, 1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(SmoothnessClass::analytic(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SmoothnessClass::uni_sobolev(-2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SmoothnessClass::bounded_spectrum(0.0), std::invalid_argument);
}
