#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "epcde/model.hpp"
#include "epcde/types.hpp"

namespace epcde {

// Smoothness classes accepted by the closed-form risk calculators. Bivariate
// kinds describe the conditional density; uni_* kinds the marginal response
// density under the independence null.
struct SmoothnessClass {
  enum class Kind {
    sobolev,           // m_y, m_x positive integers
    analytic_sobolev,  // gamma, m_x
    analytic,          // gamma1, gamma2
    uni_sobolev,       // alpha
    uni_analytic,      // gamma
    bounded_spectrum,  // q
  };
  Kind kind = Kind::sobolev;
  int m_y = 1;
  int m_x = 1;
  int alpha = 1;
  double gamma = 1.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double q = 1.0;
  double Q = 1.0;

  static SmoothnessClass sobolev(int m_y, int m_x, double Q);
  static SmoothnessClass analytic_sobolev(double gamma, int m_x, double Q);
  static SmoothnessClass analytic(double gamma1, double gamma2);
  static SmoothnessClass uni_sobolev(int alpha, double Q);
  static SmoothnessClass uni_analytic(double gamma);
  static SmoothnessClass bounded_spectrum(double q);
};

struct RiskReport {
  double coefficient_of_difficulty = 0.0;
  double pinsker = 0.0;
  double risk_closed_form = 0.0;
  std::optional<double> risk_series;
  std::optional<double> eta;
  std::optional<double> residual;  // series-equation residual, relative
  bool constant_up_to_c = false;   // bound carries a generic constant
};

// d(f, p): double integral of f/p over the unit square (square loss) or the
// integral of 1/p (line loss).
double coefficient_of_difficulty(const TrueModel& model, Loss loss);

// Sharp univariate minimax constant
// (2m+1)^{1/(2m+1)} [m/(pi(m+1))]^{2m/(2m+1)}.
double pinsker_uni(int m);

// The two region integrals over {u^{2a} + v^{2b} <= 1, u,v >= 0} entering
// the anisotropic constant; returns (J1, J2).
std::pair<double, double> j_integrals(double alpha, double beta);

// Anisotropic constant pi^{-4t/(2t+1)} J1^{-1/(2t+1)} J2 with
// 1/(2t) = 1/(2a) + 1/(2b).
double pinsker_aniso(double alpha, double beta);

// Closed-form minimax risk for the declared class.
double class_risk(const SmoothnessClass& cls, double difficulty, std::size_t n);

// Solves the sequence-space equation for eta and evaluates the series risk;
// the pair (eta, series risk). Valid for sobolev, analytic_sobolev and
// analytic kinds.
struct EtaSolution {
  double eta = 0.0;
  double series_risk = 0.0;
  double residual = 0.0;  // |sum - Qn/d| / (Qn/d)
};
EtaSolution solve_eta(const SmoothnessClass& cls, double difficulty,
                      std::size_t n);

// Full report for one class at sample size n.
RiskReport risk_report(const SmoothnessClass& cls, double difficulty,
                       std::size_t n);

}  // namespace epcde
