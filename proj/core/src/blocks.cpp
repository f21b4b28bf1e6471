#include "epcde/blocks.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "epcde/fourier.hpp"
#include "epcde/quadrature.hpp"

namespace epcde {

namespace {

void check_uni_range(const BlockSchedule& s, int k) {
  if (k < 1 || k > s.K) throw std::out_of_range("block index k out of [1,K]");
}

void check_bi_range(const BlockSchedule& s, int k, int tau) {
  if (k < 1 || k > s.T || tau < 1 || tau > s.T) {
    throw std::out_of_range("block indices (k,tau) out of [1,T]^2");
  }
}

}  // namespace

long BlockSchedule::uni_len(int k) const {
  check_uni_range(*this, k);
  return uni_edges[k] - uni_edges[k - 1];
}

long BlockSchedule::bi_len(int k, int tau) const {
  check_bi_range(*this, k, tau);
  return (bi_edges[k] - bi_edges[k - 1]) * (bi_edges[tau] - bi_edges[tau - 1]);
}

double BlockSchedule::uni_threshold(int k) const {
  check_uni_range(*this, k);
  return uni_thresholds[k - 1];
}

double BlockSchedule::bi_threshold(int k, int tau) const {
  return 1.0 / std::log(std::log((k + 3.0) * (tau + 3.0)));
}

std::pair<long, long> BlockSchedule::uni_members(int k) const {
  check_uni_range(*this, k);
  return {uni_edges[k - 1], uni_edges[k]};
}

BiBlockMembers BlockSchedule::bi_members(int k, int tau) const {
  check_bi_range(*this, k, tau);
  BiBlockMembers b;
  b.j_begin = bi_edges[k - 1];
  b.j_end = bi_edges[k];
  b.r_begin = bi_edges[tau - 1] + 1;
  b.r_end = bi_edges[tau] + 1;
  return b;
}

LineBlockMembers BlockSchedule::bi_members_line(int k, int tau) const {
  check_bi_range(*this, k, tau);
  LineBlockMembers b;
  b.u_lo = static_cast<double>(bi_edges[k - 1]);
  b.u_hi = static_cast<double>(bi_edges[k]);
  b.r_begin = bi_edges[tau - 1] + 1;
  b.r_end = bi_edges[tau] + 1;
  return b;
}

std::vector<long> default_uni_edges(std::size_t count) {
  std::vector<long> edges;
  edges.reserve(count);
  edges.push_back(0);
  long len = 1;
  for (std::size_t k = 1; edges.size() < count; ++k) {
    edges.push_back(edges.back() + len);
    const double growth =
        1.0 + 1.0 / std::log(static_cast<double>(k) + 2.0);
    const long next = (k == 1) ? 2
                               : static_cast<long>(std::ceil(
                                     static_cast<double>(len) * growth - 1e-12));
    len = next;
  }
  return edges;
}

double default_uni_threshold(int k) {
  return 1.0 / std::log(static_cast<double>(k) + 2.0);
}

std::vector<long> bivariate_edges(std::size_t n, std::size_t count) {
  const double logn = std::log(static_cast<double>(n));
  const double lnln = std::log(logn);
  std::vector<long> edges;
  edges.reserve(count);
  edges.push_back(0);
  if (count == 1) return edges;
  const long b2 = 1 + static_cast<long>(std::pow(logn, 0.75));
  edges.push_back(b2);
  for (std::size_t s = 2; edges.size() < count; ++s) {
    const double step = static_cast<double>(b2) *
                        std::pow(1.0 + 1.0 / lnln, static_cast<double>(s) - 2.0);
    edges.push_back(edges.back() + static_cast<long>(step));
  }
  return edges;
}

BlockSchedule build_schedule(std::size_t n, Loss loss,
                             const std::optional<CustomUniSchedule>& uni_spec) {
  if (n < 16) throw std::invalid_argument("build_schedule: need n >= 16");
  const double lnln = std::log(std::log(static_cast<double>(n)));
  BlockSchedule s;
  s.n = n;
  s.loss = loss;

  // Univariate cutoff: minimal K with b_{K+1} > n^{1/3} lnln(n).
  const double uni_bound = std::cbrt(static_cast<double>(n)) * lnln;
  if (uni_spec.has_value()) {
    const auto& cu = *uni_spec;
    if (cu.edges.empty() || cu.edges.front() != 0) {
      throw std::invalid_argument("custom schedule: edges must start at 0");
    }
    for (std::size_t i = 1; i < cu.edges.size(); ++i) {
      if (cu.edges[i] <= cu.edges[i - 1]) {
        throw std::invalid_argument("custom schedule: edges must increase");
      }
    }
    int K = 0;
    for (std::size_t i = 1; i < cu.edges.size(); ++i) {
      if (static_cast<double>(cu.edges[i]) > uni_bound) {
        K = static_cast<int>(i);
        break;
      }
    }
    if (K == 0) throw std::invalid_argument("custom schedule: edges end before the cutoff");
    if (cu.thresholds.size() < static_cast<std::size_t>(K)) {
      throw std::invalid_argument("custom schedule: not enough thresholds");
    }
    double roughness = 0.0;
    for (int k = 1; k <= K; ++k) {
      const double t = cu.thresholds[k - 1];
      if (!(t > 0.0)) throw std::invalid_argument("custom schedule: thresholds must be positive");
      if (k > 1 && t > cu.thresholds[k - 2] + 1e-15) {
        throw std::invalid_argument("custom schedule: thresholds must be nonincreasing");
      }
      const double len = static_cast<double>(cu.edges[k] - cu.edges[k - 1]);
      roughness += 1.0 / (len * len) * std::pow(t, -5.0);
    }
    if (roughness > kMaxScheduleRoughness) {
      throw std::invalid_argument("custom schedule: roughness sum exceeds the declared bound");
    }
    s.K = K;
    s.uni_edges.assign(cu.edges.begin(), cu.edges.begin() + K + 1);
    s.uni_thresholds.assign(cu.thresholds.begin(), cu.thresholds.begin() + K);
  } else {
    std::vector<long> edges = default_uni_edges(2);
    while (static_cast<double>(edges.back()) <= uni_bound) {
      edges = default_uni_edges(edges.size() + 1);
    }
    s.K = static_cast<int>(edges.size()) - 1;
    s.uni_edges = std::move(edges);
    s.uni_thresholds.resize(s.K);
    for (int k = 1; k <= s.K; ++k) s.uni_thresholds[k - 1] = default_uni_threshold(k);
  }

  // Bivariate cutoff: minimal T with b'_{T+1} > n^{1/4} lnln(n).
  const double bi_bound = std::pow(static_cast<double>(n), 0.25) * lnln;
  std::vector<long> bi = bivariate_edges(n, 2);
  while (static_cast<double>(bi.back()) <= bi_bound) {
    bi = bivariate_edges(n, bi.size() + 1);
  }
  s.T = static_cast<int>(bi.size()) - 1;
  s.bi_edges = std::move(bi);
  return s;
}

double adjusted_length(const BlockSchedule& schedule, int k, int tau,
                       const std::function<double(double, double)>& cd,
                       const std::function<double(double)>& design_density,
                       double y_min, double y_max) {
  const long n_j = schedule.bi_edges[k] - schedule.bi_edges[k - 1];
  const long n_r = schedule.bi_edges[tau] - schedule.bi_edges[tau - 1];
  const double L = static_cast<double>(n_j * n_r);

  // |∫ p^{-1} phi_{2r}| depends only on r in either regime.
  const auto members = schedule.bi_members(k, tau);
  double sum_a = 0.0;
  for (long r = members.r_begin; r < members.r_end; ++r) {
    // Fixed composite rule: an adaptive one can alias on phi_{2r}, whose
    // period divides the initial probe spacing.
    const std::size_t nx = std::max<std::size_t>(256, 64 * static_cast<std::size_t>(r));
    const double a = quad::simpson(
        [&](double x) {
          return cosine_basis(static_cast<unsigned>(2 * r), x) / design_density(x);
        },
        0.0, 1.0, nx);
    sum_a += std::abs(a);
  }

  double denom = 0.0;
  if (schedule.loss == Loss::square) {
    double sum_b = 0.0;
    for (long j = members.j_begin; j < members.j_end; ++j) {
      const std::size_t ny = std::max<std::size_t>(128, 8 * static_cast<std::size_t>(j + 1));
      sum_b += quad::simpson(
          [&](double x) {
            const double inner = quad::simpson(
                [&](double y) {
                  return cd(y, x) * cosine_basis(static_cast<unsigned>(j), y);
                },
                0.0, 1.0, ny);
            return inner * inner;
          },
          0.0, 1.0, 128);
    }
    denom = static_cast<double>(n_j) * sum_a + static_cast<double>(n_r) * sum_b;
  } else {
    const auto line = schedule.bi_members_line(k, tau);
    // ∫ over the u-interval of ∫_0^1 |h(u|x)|^2 dx.
    const auto char_mod2 = [&](double u) {
      return quad::simpson(
          [&](double x) {
            const std::size_t ny = std::max<std::size_t>(
                256, static_cast<std::size_t>(2.0 * u * (y_max - y_min)) * 2 + 2);
            std::complex<double> h(0.0, 0.0);
            const double step = (y_max - y_min) / static_cast<double>(ny);
            // Simpson accumulation of exp(iuy) f(y|x).
            double re_odd = 0, re_even = 0, im_odd = 0, im_even = 0;
            for (std::size_t i = 1; i < ny; ++i) {
              const double y = y_min + step * static_cast<double>(i);
              const double fy = cd(y, x);
              const double cr = std::cos(u * y) * fy, ci = std::sin(u * y) * fy;
              if (i % 2 == 1) { re_odd += cr; im_odd += ci; }
              else { re_even += cr; im_even += ci; }
            }
            const double f0 = cd(y_min, x), f1 = cd(y_max, x);
            const double re = step / 3.0 * (std::cos(u * y_min) * f0 + std::cos(u * y_max) * f1 +
                                            4 * re_odd + 2 * re_even);
            const double im = step / 3.0 * (std::sin(u * y_min) * f0 + std::sin(u * y_max) * f1 +
                                            4 * im_odd + 2 * im_even);
            h = {re, im};
            return std::norm(h);
          },
          0.0, 1.0, 64);
    };
    const std::size_t nu = std::max<std::size_t>(
        32, static_cast<std::size_t>((line.u_hi - line.u_lo) / 0.25) * 2 + 2);
    const double int_g = quad::simpson(char_mod2, line.u_lo, line.u_hi, nu);
    denom = (line.u_hi - line.u_lo) * sum_a + static_cast<double>(n_r) * int_g;
  }
  // Guard well above quadrature roundoff so a functional that is analytically
  // zero is reported rather than amplified into a huge adjusted length.
  if (!(denom > 1e-12)) {
    throw std::runtime_error("adjusted_length: block functional vanishes");
  }
  return L / denom;
}

}  // namespace epcde
