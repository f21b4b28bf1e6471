#include "epcde/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "epcde/quadrature.hpp"

namespace epcde {

SmoothnessClass SmoothnessClass::sobolev(int m_y, int m_x, double Q) {
  if (m_y < 1 || m_x < 1 || !(Q > 0.0)) {
    throw std::invalid_argument("sobolev: need positive integer orders and Q > 0");
  }
  SmoothnessClass c;
  c.kind = Kind::sobolev;
  c.m_y = m_y;
  c.m_x = m_x;
  c.Q = Q;
  return c;
}

SmoothnessClass SmoothnessClass::analytic_sobolev(double gamma, int m_x, double Q) {
  if (!(gamma > 0.0) || m_x < 1 || !(Q > 0.0)) {
    throw std::invalid_argument("analytic_sobolev: bad parameters");
  }
  SmoothnessClass c;
  c.kind = Kind::analytic_sobolev;
  c.gamma = gamma;
  c.m_x = m_x;
  c.Q = Q;
  return c;
}

SmoothnessClass SmoothnessClass::analytic(double gamma1, double gamma2) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) {
    throw std::invalid_argument("analytic: gammas must be positive");
  }
  SmoothnessClass c;
  c.kind = Kind::analytic;
  c.gamma1 = gamma1;
  c.gamma2 = gamma2;
  return c;
}

SmoothnessClass SmoothnessClass::uni_sobolev(int alpha, double Q) {
  if (alpha < 1 || !(Q > 0.0)) throw std::invalid_argument("uni_sobolev: bad parameters");
  SmoothnessClass c;
  c.kind = Kind::uni_sobolev;
  c.alpha = alpha;
  c.Q = Q;
  return c;
}

SmoothnessClass SmoothnessClass::uni_analytic(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("uni_analytic: gamma must be positive");
  SmoothnessClass c;
  c.kind = Kind::uni_analytic;
  c.gamma = gamma;
  return c;
}

SmoothnessClass SmoothnessClass::bounded_spectrum(double q) {
  if (!(q > 0.0)) throw std::invalid_argument("bounded_spectrum: q must be positive");
  SmoothnessClass c;
  c.kind = Kind::bounded_spectrum;
  c.q = q;
  return c;
}

double coefficient_of_difficulty(const TrueModel& model, Loss loss) {
  model.design.validate();
  const auto& p = model.design.density;
  if (loss == Loss::line) {
    return quad::adaptive_simpson([&](double x) { return 1.0 / p(x); }, 0.0,
                                  1.0, 1e-10);
  }
  if (!model.cd) throw std::invalid_argument("coefficient_of_difficulty: model has no density");
  return quad::simpson2d(
      [&](double x, double y) { return model.cd(y, x) / p(x); }, 0.0, 1.0, 0.0,
      1.0, 256, 256);
}

double pinsker_uni(int m) {
  if (m < 1) throw std::invalid_argument("pinsker_uni: m must be >= 1");
  const double md = static_cast<double>(m);
  return std::pow(2.0 * md + 1.0, 1.0 / (2.0 * md + 1.0)) *
         std::pow(md / (M_PI * (md + 1.0)), 2.0 * md / (2.0 * md + 1.0));
}

std::pair<double, double> j_integrals(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("j_integrals: exponents must be positive");
  }
  // Map {u^{2a} + v^{2b} <= 1} to the unit square via
  // v = (1 - u^{2a})^{1/(2b)} t; the Jacobian absorbs the curved boundary.
  static const quad::GaussLegendre gl(128);
  double j1 = 0.0, j2 = 0.0;
  for (std::size_t iu = 0; iu < gl.nodes.size(); ++iu) {
    const double u = 0.5 * (gl.nodes[iu] + 1.0);
    const double wu = 0.5 * gl.weights[iu];
    const double ua = std::pow(u, 2.0 * alpha);
    const double vmax = std::pow(1.0 - ua, 1.0 / (2.0 * beta));
    double inner1 = 0.0, inner2 = 0.0;
    for (std::size_t it = 0; it < gl.nodes.size(); ++it) {
      const double t = 0.5 * (gl.nodes[it] + 1.0);
      const double wt = 0.5 * gl.weights[it];
      const double v = vmax * t;
      const double sdist = ua + std::pow(v, 2.0 * beta);
      const double root = std::sqrt(sdist);
      inner1 += wt * (root - sdist);
      inner2 += wt * (1.0 - root);
    }
    j1 += wu * vmax * inner1;
    j2 += wu * vmax * inner2;
  }
  return {j1, j2};
}

double pinsker_aniso(double alpha, double beta) {
  const double tau = alpha * beta / (alpha + beta);
  const auto [j1, j2] = j_integrals(alpha, beta);
  return std::pow(M_PI, -4.0 * tau / (2.0 * tau + 1.0)) *
         std::pow(j1, -1.0 / (2.0 * tau + 1.0)) * j2;
}

double class_risk(const SmoothnessClass& cls, double difficulty,
                  std::size_t n) {
  if (n < 2 || !(difficulty > 0.0)) {
    throw std::invalid_argument("class_risk: need n >= 2, difficulty > 0");
  }
  const double d = difficulty;
  const double nd = static_cast<double>(n);
  const double logn = std::log(nd);
  switch (cls.kind) {
    case SmoothnessClass::Kind::sobolev: {
      const double tau = static_cast<double>(cls.m_y) * cls.m_x /
                         (static_cast<double>(cls.m_y) + cls.m_x);
      return pinsker_aniso(cls.m_y, cls.m_x) *
             std::pow(cls.Q, 1.0 / (2.0 * tau + 1.0)) *
             std::pow(d / nd, 2.0 * tau / (2.0 * tau + 1.0));
    }
    case SmoothnessClass::Kind::analytic_sobolev: {
      const double m = cls.m_x;
      const double expo = 2.0 * m / (2.0 * m + 1.0);
      return pinsker_uni(cls.m_x) * std::pow(cls.Q, 1.0 / (2.0 * m + 1.0)) *
             std::pow(d / nd, expo) *
             std::pow(2.0 * m * logn / ((2.0 * m + 1.0) * M_PI * cls.gamma),
                      expo);
    }
    case SmoothnessClass::Kind::analytic:
      return d * logn * logn / (M_PI * cls.gamma1 * cls.gamma2 * nd);
    case SmoothnessClass::Kind::uni_sobolev: {
      const double a = cls.alpha;
      return pinsker_uni(cls.alpha) * std::pow(cls.Q, 1.0 / (2.0 * a + 1.0)) *
             std::pow(d / nd, 2.0 * a / (2.0 * a + 1.0));
    }
    case SmoothnessClass::Kind::uni_analytic:
      return d * logn / (M_PI * cls.gamma * nd);
    case SmoothnessClass::Kind::bounded_spectrum:
      return cls.q * d / nd;  // up to a generic constant (C = 1 reported)
  }
  throw std::invalid_argument("class_risk: unsupported class kind");
}

namespace {

// Sequence weights for the series risk, with a zero (0,0) entry throughout.
struct SequenceWeights {
  const SmoothnessClass& cls;
  bool univariate;

  double a_y(long j) const {
    switch (cls.kind) {
      case SmoothnessClass::Kind::sobolev:
        return std::pow(M_PI * static_cast<double>(j), 2.0 * cls.m_y);
      case SmoothnessClass::Kind::analytic_sobolev:
        return std::exp(M_PI * cls.gamma * static_cast<double>(j));
      case SmoothnessClass::Kind::analytic:
        return std::exp(M_PI * cls.gamma1 * static_cast<double>(j));
      case SmoothnessClass::Kind::uni_sobolev:
        return std::pow(M_PI * static_cast<double>(j), 2.0 * cls.alpha);
      case SmoothnessClass::Kind::uni_analytic:
        return j == 0 ? 0.0 : std::exp(M_PI * cls.gamma * static_cast<double>(j));
      default:
        throw std::invalid_argument("solve_eta: unsupported class kind");
    }
  }

  double a_x(long r) const {
    switch (cls.kind) {
      case SmoothnessClass::Kind::sobolev:
        return std::pow(M_PI * static_cast<double>(r), 2.0 * cls.m_x);
      case SmoothnessClass::Kind::analytic_sobolev:
        return std::pow(M_PI * static_cast<double>(r), 2.0 * cls.m_x);
      case SmoothnessClass::Kind::analytic:
        return std::exp(cls.gamma2 * static_cast<double>(r));
      default:
        return 0.0;
    }
  }

  double at(long j, long r) const {
    if (univariate) return a_y(j);
    if (j == 0 && r == 0) return 0.0;
    switch (cls.kind) {
      case SmoothnessClass::Kind::sobolev:
        return a_y(j) + a_x(r);
      case SmoothnessClass::Kind::analytic_sobolev:
      case SmoothnessClass::Kind::analytic:
        return a_y(j) + a_x(r);
      default:
        throw std::invalid_argument("solve_eta: unsupported class kind");
    }
  }
};

// Applies fn(a_jr) to every index with a_jr < bound (the active set of the
// series equation).
template <typename Fn>
void for_active(const SequenceWeights& w, double bound, Fn&& fn) {
  for (long j = 0;; ++j) {
    if (j > 0 && w.a_y(j) >= bound) break;
    if (w.univariate) {
      fn(w.at(j, 0));
      if (j > (1L << 40)) throw std::runtime_error("solve_eta: runaway index");
      continue;
    }
    bool any = false;
    for (long r = 0;; ++r) {
      const double a = w.at(j, r);
      if (r > 0 && a >= bound) break;
      if (a < bound) {
        fn(a);
        any = true;
      } else if (r > 0) {
        break;
      }
      if (r > (1L << 40)) throw std::runtime_error("solve_eta: runaway index");
    }
    if (!any && j > 0) break;
    if (j > (1L << 40)) throw std::runtime_error("solve_eta: runaway index");
  }
}

double series_sum(const SequenceWeights& w, double eta) {
  double sum = 0.0;
  for_active(w, 1.0 / eta, [&](double a) {
    const double term = std::sqrt(a / eta) - a;
    if (term > 0.0) sum += term;
  });
  return sum;
}

}  // namespace

EtaSolution solve_eta(const SmoothnessClass& cls, double difficulty,
                      std::size_t n) {
  if (n < 2 || !(difficulty > 0.0)) {
    throw std::invalid_argument("solve_eta: need n >= 2, difficulty > 0");
  }
  const bool univariate = cls.kind == SmoothnessClass::Kind::uni_sobolev ||
                          cls.kind == SmoothnessClass::Kind::uni_analytic;
  const SequenceWeights w{cls, univariate};
  const double target = cls.Q * static_cast<double>(n) / difficulty;

  // Geometric bracketing from eta = 1 (the series sum is decreasing in eta).
  double lo = 1.0, hi = 1.0;
  if (series_sum(w, 1.0) < target) {
    while (series_sum(w, lo) < target) {
      hi = lo;
      lo *= 0.25;
      if (lo < 1e-300) throw std::runtime_error("solve_eta: bracketing failure");
    }
  } else {
    while (series_sum(w, hi) >= target) {
      lo = hi;
      hi *= 4.0;
      if (hi > 1e300) throw std::runtime_error("solve_eta: bracketing failure");
    }
  }
  double eta = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    eta = 0.5 * (lo + hi);
    const double s = series_sum(w, eta);
    if (std::abs(s - target) <= 1e-7 * target) break;
    (s > target ? lo : hi) = eta;
  }

  EtaSolution sol;
  sol.eta = eta;
  sol.residual = std::abs(series_sum(w, eta) - target) / target;
  double rsum = 0.0;
  for_active(w, 1.0 / eta, [&](double a) {
    const double term = 1.0 - std::sqrt(a * eta);
    if (term > 0.0) rsum += term;
  });
  sol.series_risk = difficulty / static_cast<double>(n) * rsum;
  return sol;
}

RiskReport risk_report(const SmoothnessClass& cls, double difficulty,
                       std::size_t n) {
  RiskReport rep;
  rep.coefficient_of_difficulty = difficulty;
  switch (cls.kind) {
    case SmoothnessClass::Kind::sobolev:
      rep.pinsker = pinsker_aniso(cls.m_y, cls.m_x);
      break;
    case SmoothnessClass::Kind::analytic_sobolev:
      rep.pinsker = pinsker_uni(cls.m_x);
      break;
    case SmoothnessClass::Kind::analytic:
      rep.pinsker = 1.0 / (M_PI * cls.gamma1 * cls.gamma2);
      break;
    case SmoothnessClass::Kind::uni_sobolev:
      rep.pinsker = pinsker_uni(cls.alpha);
      break;
    case SmoothnessClass::Kind::uni_analytic:
      rep.pinsker = 1.0 / (M_PI * cls.gamma);
      break;
    case SmoothnessClass::Kind::bounded_spectrum:
      rep.pinsker = 1.0;
      rep.constant_up_to_c = true;
      break;
  }
  rep.risk_closed_form = class_risk(cls, difficulty, n);
  if (cls.kind == SmoothnessClass::Kind::sobolev ||
      cls.kind == SmoothnessClass::Kind::uni_sobolev) {
    const auto sol = solve_eta(cls, difficulty, n);
    rep.risk_series = sol.series_risk;
    rep.eta = sol.eta;
    rep.residual = sol.residual;
  }
  return rep;
}

}  // namespace epcde
