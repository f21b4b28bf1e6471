#include "epcde/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epcde/quadrature.hpp"
#include "epcde/risk.hpp"
#include "epcde/stats.hpp"

namespace epcde {

namespace {

constexpr double kTailBlockTiny = 1e-14;   // declared tail horizon
constexpr int kTailTinyRun = 50;
constexpr double kTailDecayFraction = 1e-10;

// Resolution caps for out-of-schedule functionals; contributions beyond them
// raise the tail warning when they have not decayed.
constexpr long kUniTailCoeffCap = 384;
constexpr long kBiTailJCap = 128;
constexpr long kBiTailRCap = 80;

std::vector<double> simpson_weights(std::size_t intervals, double step) {
  std::vector<double> w(intervals + 1, 0.0);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[i] = c * step / 3.0;
  }
  return w;
}

int block_of(const std::vector<long>& edges, long j) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), j);
  return static_cast<int>(it - edges.begin());
}

std::size_t node_of_edge(long edge) {
  return static_cast<std::size_t>(edge) * 20;  // grid step 0.05
}

double simpson_phase(std::span<const std::complex<double>> values,
                     std::span<const double> grid, std::size_t i0,
                     std::size_t i1, double y) {
  const double du = grid[1] - grid[0];
  const std::complex<double> step(std::cos(du * y), -std::sin(du * y));
  std::complex<double> phase(std::cos(grid[i0] * y), -std::sin(grid[i0] * y));
  double sum_end = 0.0, sum_odd = 0.0, sum_even = 0.0;
  for (std::size_t i = i0; i <= i1; ++i) {
    const double v = (values[i] * phase).real();
    if (i == i0 || i == i1) {
      sum_end += v;
    } else if ((i - i0) % 2 == 1) {
      sum_odd += v;
    } else {
      sum_even += v;
    }
    phase *= step;
  }
  return du / 3.0 * (sum_end + 4.0 * sum_odd + 2.0 * sum_even);
}

double simpson_mod2(std::span<const std::complex<double>> values, double du,
                    std::size_t i0, std::size_t i1) {
  double sum_end = std::norm(values[i0]) + std::norm(values[i1]);
  double sum_odd = 0.0, sum_even = 0.0;
  for (std::size_t i = i0 + 1; i < i1; ++i) {
    ((i - i0) % 2 == 1 ? sum_odd : sum_even) += std::norm(values[i]);
  }
  return du / 3.0 * (sum_end + 4.0 * sum_odd + 2.0 * sum_even);
}

// Exact series coefficients of the x-marginal mixture, j = 0..j_count-1
// (square loss; response restricted to [0,1]).
std::vector<double> uni_theta(const TrueModel& m, long j_count) {
  if (!m.cd) throw std::invalid_argument("true_functionals: model has no density");
  // The oscillation of phi_j needs ~48 nodes per unit frequency for the
  // quadrature noise to stay below the tail threshold once squared.
  std::size_t ny = std::max<std::size_t>(2048, 48 * static_cast<std::size_t>(j_count));
  ny += ny % 2;
  static const quad::GaussLegendre gl(64);
  std::vector<double> g(ny + 1, 0.0);
  for (std::size_t iy = 0; iy <= ny; ++iy) {
    const double y = static_cast<double>(iy) / static_cast<double>(ny);
    double acc = 0.0;
    for (std::size_t ix = 0; ix < gl.nodes.size(); ++ix) {
      acc += 0.5 * gl.weights[ix] * m.cd(y, 0.5 * (gl.nodes[ix] + 1.0));
    }
    g[iy] = acc;
  }
  const auto w = simpson_weights(ny, 1.0 / static_cast<double>(ny));
  std::vector<double> theta(static_cast<std::size_t>(j_count), 0.0);
  for (long j = 0; j < j_count; ++j) {
    double acc = 0.0;
    for (std::size_t iy = 0; iy <= ny; ++iy) {
      const double y = static_cast<double>(iy) / static_cast<double>(ny);
      acc += w[iy] * g[iy] * cosine_basis(static_cast<unsigned>(j), y);
    }
    theta[static_cast<std::size_t>(j)] = acc;
  }
  return theta;
}

// Exact bivariate coefficients theta[j][r-1], j = 0..j_count-1, r = 1..r_count
// (square loss).
std::vector<std::vector<double>> bi_theta(const TrueModel& m, long j_count,
                                          long r_count) {
  if (!m.cd) throw std::invalid_argument("true_functionals: model has no density");
  std::size_t ny = std::max<std::size_t>(1024, 48 * static_cast<std::size_t>(j_count));
  std::size_t nx = std::max<std::size_t>(1024, 48 * static_cast<std::size_t>(r_count));
  ny += ny % 2;
  nx += nx % 2;
  const auto wy = simpson_weights(ny, 1.0 / static_cast<double>(ny));
  const auto wx = simpson_weights(nx, 1.0 / static_cast<double>(nx));
  // A[r-1][iy] = integral over x of f(y|x) phi_r(x), one x-sweep.
  std::vector<std::vector<double>> a(
      static_cast<std::size_t>(r_count), std::vector<double>(ny + 1, 0.0));
  std::vector<double> col(ny + 1);
  for (std::size_t ix = 0; ix <= nx; ++ix) {
    const double x = static_cast<double>(ix) / static_cast<double>(nx);
    for (std::size_t iy = 0; iy <= ny; ++iy) {
      col[iy] = m.cd(static_cast<double>(iy) / static_cast<double>(ny), x);
    }
    for (long r = 1; r <= r_count; ++r) {
      const double c = wx[ix] * cosine_basis(static_cast<unsigned>(r), x);
      auto& row = a[static_cast<std::size_t>(r - 1)];
      for (std::size_t iy = 0; iy <= ny; ++iy) row[iy] += c * col[iy];
    }
  }
  std::vector<std::vector<double>> theta(
      static_cast<std::size_t>(j_count),
      std::vector<double>(static_cast<std::size_t>(r_count), 0.0));
  std::vector<double> phi(ny + 1);
  for (long j = 0; j < j_count; ++j) {
    for (std::size_t iy = 0; iy <= ny; ++iy) {
      phi[iy] = wy[iy] * cosine_basis(static_cast<unsigned>(j),
                                      static_cast<double>(iy) / static_cast<double>(ny));
    }
    for (long r = 1; r <= r_count; ++r) {
      const auto& row = a[static_cast<std::size_t>(r - 1)];
      double acc = 0.0;
      for (std::size_t iy = 0; iy <= ny; ++iy) acc += phi[iy] * row[iy];
      theta[static_cast<std::size_t>(j)][static_cast<std::size_t>(r - 1)] = acc;
    }
  }
  return theta;
}

// Evaluates the exact characteristic slices h_r(u) = integral over x of
// h(u|x) phi_r(x). Uses the model's closed form when present; otherwise works
// from series profiles A_r(y) precomputed on the response window.
class LineSliceEvaluator {
 public:
  LineSliceEvaluator(const TrueModel& m, long r_max) : m_(&m), rmax_(r_max) {
    std::size_t nx = std::max<std::size_t>(1024, 48 * static_cast<std::size_t>(r_max + 1));
    nx += nx % 2;
    xw_ = simpson_weights(nx, 1.0 / static_cast<double>(nx));
    xs_.resize(nx + 1);
    for (std::size_t i = 0; i <= nx; ++i) {
      xs_[i] = static_cast<double>(i) / static_cast<double>(nx);
    }
    closed_ = static_cast<bool>(m.char_fn);
    if (closed_) return;
    if (!m.cd) throw std::invalid_argument("line slices: model has no density");
    const std::size_t ny = 4096;
    y0_ = m.y_min;
    hy_ = (m.y_max - m.y_min) / static_cast<double>(ny);
    const auto yw = simpson_weights(ny, hy_);
    b_.assign(static_cast<std::size_t>(r_max + 1),
              std::vector<double>(ny + 1, 0.0));
    std::vector<double> col(ny + 1);
    for (std::size_t ix = 0; ix < xs_.size(); ++ix) {
      const double x = xs_[ix];
      for (std::size_t iy = 0; iy <= ny; ++iy) {
        col[iy] = m.cd(y0_ + hy_ * static_cast<double>(iy), x);
      }
      for (long r = 0; r <= r_max; ++r) {
        const double c = xw_[ix] * cosine_basis(static_cast<unsigned>(r), x);
        auto& row = b_[static_cast<std::size_t>(r)];
        for (std::size_t iy = 0; iy <= ny; ++iy) row[iy] += c * col[iy];
      }
    }
    // Fold the response quadrature weights in once.
    for (auto& row : b_) {
      for (std::size_t iy = 0; iy <= ny; ++iy) row[iy] *= yw[iy];
    }
  }

  long r_max() const { return rmax_; }

  std::complex<double> slice(long r, double u) const {
    if (r < 0 || r > rmax_) throw std::out_of_range("line slices: r out of range");
    if (closed_) {
      std::complex<double> acc(0.0, 0.0);
      for (std::size_t ix = 0; ix < xs_.size(); ++ix) {
        acc += xw_[ix] * cosine_basis(static_cast<unsigned>(r), xs_[ix]) *
               m_->char_fn(u, xs_[ix]);
      }
      return acc;
    }
    const auto& row = b_[static_cast<std::size_t>(r)];
    const std::complex<double> step(std::cos(u * hy_), std::sin(u * hy_));
    std::complex<double> phase(std::cos(u * y0_), std::sin(u * y0_));
    std::complex<double> acc(0.0, 0.0);
    for (double wv : row) {
      acc += wv * phase;
      phase *= step;
    }
    return acc;
  }

  // All slices 0..r_max at one frequency (shares the characteristic column).
  void slice_all(double u, std::vector<std::complex<double>>& out) const {
    out.assign(static_cast<std::size_t>(rmax_) + 1, {0.0, 0.0});
    if (closed_) {
      for (std::size_t ix = 0; ix < xs_.size(); ++ix) {
        const std::complex<double> hv = xw_[ix] * m_->char_fn(u, xs_[ix]);
        for (long r = 0; r <= rmax_; ++r) {
          out[static_cast<std::size_t>(r)] +=
              cosine_basis(static_cast<unsigned>(r), xs_[ix]) * hv;
        }
      }
      return;
    }
    for (long r = 0; r <= rmax_; ++r) out[static_cast<std::size_t>(r)] = slice(r, u);
  }

  double slice_sq(long r, double u) const { return std::norm(slice(r, u)); }

 private:
  const TrueModel* m_;
  long rmax_ = 0;
  bool closed_ = false;
  std::vector<double> xs_, xw_;
  std::vector<std::vector<double>> b_;  // weighted A_r profiles (fallback)
  double y0_ = 0.0, hy_ = 0.0;
};

// Integral of |h_r|^2 over [a, b), chunked so that a localized hump cannot be
// stepped over by the adaptive rule; bails out once the tail is dead.
double integrate_slice_sq(const LineSliceEvaluator& ev, long r, double a,
                          double b) {
  double total = 0.0;
  int dead = 0;
  for (double lo = a; lo < b; lo += 5.0) {
    const double hi = std::min(lo + 5.0, b);
    const double piece = quad::adaptive_simpson(
        [&](double u) { return ev.slice_sq(r, u); }, lo, hi, 1e-15);
    total += piece;
    if (std::abs(piece) < 1e-18) {
      if (++dead >= 3) break;
    } else {
      dead = 0;
    }
  }
  return total;
}

std::vector<long> extended_uni_edges(long beyond) {
  std::size_t count = 48;
  auto edges = default_uni_edges(count);
  while (edges.back() <= beyond && count < 512) {
    count += 32;
    edges = default_uni_edges(count);
  }
  return edges;
}

std::vector<long> extended_bi_edges(std::size_t n, long beyond) {
  std::size_t count = 24;
  auto edges = bivariate_edges(n, count);
  while (edges.back() <= beyond && count < 128) {
    count += 16;
    edges = bivariate_edges(n, count);
  }
  return edges;
}

struct TailAccumulator {
  double sum = 0.0;
  double threshold = 0.0;  // decay target for the warning
  int tiny_run = 0;
  bool satisfied = false;  // the horizon rule fired
  double last = 0.0;

  void add(double contribution) {
    sum += contribution;
    last = contribution;
    if (std::abs(contribution) < kTailBlockTiny) {
      if (++tiny_run >= kTailTinyRun) satisfied = true;
    } else {
      tiny_run = 0;
    }
  }
  bool warn() const {
    return !satisfied && std::abs(last) > threshold;
  }
};

}  // namespace

std::complex<double> TrueModel::char_at(double u, double x) const {
  if (char_fn) return char_fn(u, x);
  if (!cd) throw std::invalid_argument("char_at: model has no density");
  const std::size_t ny = 2048;
  const double a = lo(), b = hi();
  const double h = (b - a) / static_cast<double>(ny);
  const std::complex<double> step(std::cos(u * h), std::sin(u * h));
  std::complex<double> phase(std::cos(u * a), std::sin(u * a));
  std::complex<double> ends(0.0, 0.0), odd(0.0, 0.0), even(0.0, 0.0);
  for (std::size_t i = 0; i <= ny; ++i) {
    const std::complex<double> v = cd(a + h * static_cast<double>(i), x) * phase;
    if (i == 0 || i == ny) {
      ends += v;
    } else if (i % 2 == 1) {
      odd += v;
    } else {
      even += v;
    }
    phase *= step;
  }
  return h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
}

void TrueModel::validate(double tol) const {
  if (!cd) throw std::invalid_argument("TrueModel: density callable missing");
  design.validate();
  const double a = lo(), b = hi();
  for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (int i = 0; i <= 200; ++i) {
      const double y = a + (b - a) * static_cast<double>(i) / 200.0;
      if (cd(y, x) < -1e-12) {
        throw std::runtime_error("TrueModel: density is negative");
      }
    }
    const double mass =
        quad::adaptive_simpson([&](double y) { return cd(y, x); }, a, b,
                               0.01 * tol);
    if (std::abs(mass - 1.0) > tol) {
      throw std::runtime_error("TrueModel: conditional slice mass is not one");
    }
  }
}

TrueFunctionals true_functionals(const TrueModel& model,
                                 const BlockSchedule& schedule, Loss loss) {
  TrueFunctionals out;
  out.difficulty = coefficient_of_difficulty(model, loss);
  const long uni_top = schedule.uni_edges.back();
  const long bi_top = schedule.bi_edges.back();
  out.uni.assign(static_cast<std::size_t>(schedule.K), 0.0);
  out.bi.assign(static_cast<std::size_t>(schedule.T),
                std::vector<double>(static_cast<std::size_t>(schedule.T), 0.0));
  if (loss == Loss::square) {
    const auto tu = uni_theta(model, uni_top);
    for (int k = 1; k <= schedule.K; ++k) {
      const auto [e0, e1] = schedule.uni_members(k);
      double s = 0.0;
      for (long j = e0; j < e1; ++j) s += tu[static_cast<std::size_t>(j)] * tu[static_cast<std::size_t>(j)];
      out.uni[static_cast<std::size_t>(k - 1)] = s / static_cast<double>(e1 - e0);
    }
    const auto tb = bi_theta(model, bi_top, bi_top);
    for (int k = 1; k <= schedule.T; ++k) {
      for (int tau = 1; tau <= schedule.T; ++tau) {
        const auto b = schedule.bi_members(k, tau);
        double s = 0.0;
        for (long j = b.j_begin; j < b.j_end; ++j) {
          for (long r = b.r_begin; r < b.r_end; ++r) {
            const double v = tb[static_cast<std::size_t>(j)][static_cast<std::size_t>(r - 1)];
            s += v * v;
          }
        }
        out.bi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)] =
            s / static_cast<double>(schedule.bi_len(k, tau));
      }
    }
    return out;
  }
  const LineSliceEvaluator ev(model, bi_top);
  const double u_top = static_cast<double>(std::max(uni_top, bi_top));
  const auto grid = char_u_grid(0.0, u_top);
  std::vector<std::vector<std::complex<double>>> h(
      static_cast<std::size_t>(bi_top) + 1);
  {
    std::vector<std::complex<double>> column;
    for (auto& row : h) row.resize(grid.size());
    for (std::size_t iu = 0; iu < grid.size(); ++iu) {
      ev.slice_all(grid[iu], column);
      for (long r = 0; r <= bi_top; ++r) {
        h[static_cast<std::size_t>(r)][iu] = column[static_cast<std::size_t>(r)];
      }
    }
  }
  const double du = kCharGridStep;
  for (int k = 1; k <= schedule.K; ++k) {
    const auto [e0, e1] = schedule.uni_members(k);
    out.uni[static_cast<std::size_t>(k - 1)] =
        simpson_mod2(h[0], du, node_of_edge(e0), node_of_edge(e1)) /
        static_cast<double>(e1 - e0);
  }
  for (int k = 1; k <= schedule.T; ++k) {
    for (int tau = 1; tau <= schedule.T; ++tau) {
      const auto b = schedule.bi_members_line(k, tau);
      const auto i0 = node_of_edge(static_cast<long>(b.u_lo));
      const auto i1 = node_of_edge(static_cast<long>(b.u_hi));
      double s = 0.0;
      for (long r = b.r_begin; r < b.r_end; ++r) {
        s += simpson_mod2(h[static_cast<std::size_t>(r)], du, i0, i1);
      }
      out.bi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)] =
          s / static_cast<double>(schedule.bi_len(k, tau));
    }
  }
  return out;
}

OracleWeights oracle_weights(const TrueModel& model,
                             const BlockSchedule& schedule, Loss loss) {
  OracleWeights out;
  out.functionals = true_functionals(model, schedule, loss);
  out.difficulty = out.functionals.difficulty;
  const double noise = out.difficulty / static_cast<double>(schedule.n);
  out.uni.resize(out.functionals.uni.size());
  for (std::size_t k = 0; k < out.uni.size(); ++k) {
    const double t = out.functionals.uni[k];
    out.uni[k] = t > 0.0 ? t / (t + noise) : 0.0;
  }
  out.bi.resize(out.functionals.bi.size());
  for (std::size_t k = 0; k < out.bi.size(); ++k) {
    out.bi[k].resize(out.functionals.bi[k].size());
    for (std::size_t tau = 0; tau < out.bi[k].size(); ++tau) {
      const double t = out.functionals.bi[k][tau];
      out.bi[k][tau] = t > 0.0 ? t / (t + noise) : 0.0;
    }
  }
  return out;
}

CondDensityFit oracle_fit(const SamplePairs& data, const TrueModel& model,
                          const BlockSchedule& schedule, Loss loss) {
  const auto w = oracle_weights(model, schedule, loss);
  FixedWeights fixed;
  fixed.difficulty = w.difficulty;
  fixed.uni = w.uni;
  fixed.bi = w.bi;
  const auto phat = estimate_design(data.x);
  return fit_with_weights(data, loss, schedule, phat, fixed);
}

OracleMise oracle_mise_expression(
    const TrueModel& model, const BlockSchedule& schedule, Loss loss,
    std::size_t n, const std::optional<std::vector<double>>& nu_uni,
    const std::optional<std::vector<std::vector<double>>>& nu_bi) {
  if (n < 2) throw std::invalid_argument("oracle_mise_expression: n too small");
  const auto fx = true_functionals(model, schedule, loss);
  const double d = fx.difficulty;
  const double noise = d / static_cast<double>(n);
  const double cstar = loss == Loss::square ? 1.0 : 1.0 / M_PI;
  const int K = schedule.K, T = schedule.T;

  std::vector<double> mu_uni(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) {
    const double t = fx.uni[static_cast<std::size_t>(k - 1)];
    mu_uni[static_cast<std::size_t>(k - 1)] = t > 0.0 ? t / (t + noise) : 0.0;
  }
  std::vector<std::vector<double>> mu_bi(
      static_cast<std::size_t>(T), std::vector<double>(static_cast<std::size_t>(T)));
  for (int k = 1; k <= T; ++k) {
    for (int tau = 1; tau <= T; ++tau) {
      const double t = fx.bi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)];
      mu_bi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)] =
          t > 0.0 ? t / (t + noise) : 0.0;
    }
  }

  OracleMise out;
  double weighted = 0.0;
  for (int k = 1; k <= K; ++k) {
    weighted += static_cast<double>(schedule.uni_len(k)) *
                mu_uni[static_cast<std::size_t>(k - 1)];
  }
  for (int k = 1; k <= T; ++k) {
    for (int tau = 1; tau <= T; ++tau) {
      weighted += static_cast<double>(schedule.bi_len(k, tau)) *
                  mu_bi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)];
    }
  }
  out.main = cstar * noise * weighted;

  // --- squared-bias tail beyond the schedule ---------------------------------
  const double decay_thr = std::max(kTailDecayFraction * out.main, kTailBlockTiny);
  const long uni_top = schedule.uni_edges.back();
  const long bi_top = schedule.bi_edges.back();
  if (loss == Loss::square) {
    // Univariate: group indices past b_{K+1} by the default block recursion.
    TailAccumulator acc;
    acc.threshold = decay_thr;
    const auto tu = uni_theta(model, std::min(kUniTailCoeffCap,
                                              uni_top + kUniTailCoeffCap));
    const long jcap = static_cast<long>(tu.size());
    auto ext = extended_uni_edges(jcap);
    long lo = uni_top;
    for (std::size_t e = 0; e + 1 < ext.size() && !acc.satisfied; ++e) {
      if (ext[e + 1] <= lo) continue;
      const long hi = std::min(ext[e + 1], jcap);
      if (hi <= lo) break;
      double s = 0.0;
      for (long j = lo; j < hi; ++j) {
        s += tu[static_cast<std::size_t>(j)] * tu[static_cast<std::size_t>(j)];
      }
      acc.add(cstar * s);
      lo = hi;
      if (lo >= jcap) break;
    }
    out.tail += acc.sum;
    out.tail_warning = out.tail_warning || acc.warn();
    // Bivariate: everything with j past the cutoff or r past the cutoff.
    const auto tb = bi_theta(model, kBiTailJCap, kBiTailRCap);
    if (bi_top >= kBiTailJCap - 4 || bi_top >= kBiTailRCap - 4) {
      out.tail_warning = true;
    }
    double bisum = 0.0;
    double edge_rows = 0.0, edge_cols = 0.0;
    for (long j = 0; j < kBiTailJCap; ++j) {
      for (long r = 1; r <= kBiTailRCap; ++r) {
        if (j < bi_top && r <= bi_top) continue;
        const double v = tb[static_cast<std::size_t>(j)][static_cast<std::size_t>(r - 1)];
        bisum += v * v;
        if (j >= kBiTailJCap - 5) edge_rows += v * v;
        if (r > kBiTailRCap - 5) edge_cols += v * v;
      }
    }
    out.tail += cstar * bisum;
    if (cstar * std::max(edge_rows, edge_cols) > decay_thr) out.tail_warning = true;
  } else {
    const long rcap = std::min<long>(kBiTailRCap, std::max<long>(bi_top + 8, 32));
    const LineSliceEvaluator ev(model, rcap);
    // Univariate frequency tail past b_{K+1}.
    {
      TailAccumulator acc;
      acc.threshold = decay_thr;
      auto ext = extended_uni_edges(uni_top + 4096);
      double lo = static_cast<double>(uni_top);
      for (std::size_t e = 0; e + 1 < ext.size() && !acc.satisfied; ++e) {
        if (static_cast<double>(ext[e + 1]) <= lo) continue;
        const double hi = static_cast<double>(ext[e + 1]);
        acc.add(cstar * integrate_slice_sq(ev, 0, lo, hi));
        lo = hi;
        if (lo > 2e4) break;
      }
      out.tail += acc.sum;
      out.tail_warning = out.tail_warning || acc.warn();
    }
    // Bivariate, frequencies past the cutoff at in-schedule r.
    {
      TailAccumulator acc;
      acc.threshold = decay_thr;
      auto ext = extended_bi_edges(n, bi_top + 4096);
      double lo = static_cast<double>(bi_top);
      for (std::size_t e = 0; e + 1 < ext.size() && !acc.satisfied; ++e) {
        if (static_cast<double>(ext[e + 1]) <= lo) continue;
        const double hi = static_cast<double>(ext[e + 1]);
        double s = 0.0;
        for (long r = 1; r <= bi_top; ++r) {
          s += integrate_slice_sq(ev, r, lo, hi);
        }
        acc.add(cstar * s);
        lo = hi;
        if (lo > 2e4) break;
      }
      out.tail += acc.sum;
      out.tail_warning = out.tail_warning || acc.warn();
    }
    // Bivariate, r past the cutoff (all frequencies).
    {
      TailAccumulator acc;
      acc.threshold = decay_thr;
      auto ext = extended_bi_edges(n, rcap);
      long rlo = bi_top;
      for (std::size_t e = 0; e + 1 < ext.size() && !acc.satisfied; ++e) {
        if (ext[e + 1] <= rlo) continue;
        const long rhi = std::min(ext[e + 1], rcap);
        if (rhi <= rlo) break;
        double s = 0.0;
        for (long r = rlo + 1; r <= rhi; ++r) {
          s += integrate_slice_sq(ev, r, 0.0, 2e4);
        }
        acc.add(cstar * s);
        rlo = rhi;
        if (rlo >= rcap) break;
      }
      out.tail += acc.sum;
      out.tail_warning = out.tail_warning || acc.warn();
    }
  }

  // --- remainder bounds (generic constant C = 1, informational) --------------
  std::vector<double> nuk;
  if (nu_uni) {
    if (static_cast<int>(nu_uni->size()) != K) {
      throw std::invalid_argument("oracle_mise_expression: nu array size");
    }
    for (double v : *nu_uni) {
      if (!(v > 0.0 && v < 1.0)) {
        throw std::invalid_argument("oracle_mise_expression: nu out of (0,1)");
      }
    }
    nuk = *nu_uni;
  } else {
    nuk.resize(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
      const double mu = mu_uni[static_cast<std::size_t>(k - 1)];
      const double raw = std::sqrt(
          mu * (1.0 / static_cast<double>(schedule.uni_len(k)) +
                std::pow(static_cast<double>(n), -0.25)));
      nuk[static_cast<std::size_t>(k - 1)] = std::clamp(raw, 1e-6, 1.0 - 1e-6);
    }
  }
  std::vector<std::vector<double>> lstar(
      static_cast<std::size_t>(T), std::vector<double>(static_cast<std::size_t>(T)));
  for (int k = 1; k <= T; ++k) {
    for (int tau = 1; tau <= T; ++tau) {
      double v;
      try {
        v = adjusted_length(schedule, k, tau, model.cd, model.design.density,
                            model.lo(), model.hi());
      } catch (const std::runtime_error&) {
        v = static_cast<double>(schedule.bi_len(k, tau));
      }
      lstar[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)] = v;
    }
  }
  std::vector<std::vector<double>> nukt(
      static_cast<std::size_t>(T), std::vector<double>(static_cast<std::size_t>(T)));
  if (nu_bi) {
    if (static_cast<int>(nu_bi->size()) != T) {
      throw std::invalid_argument("oracle_mise_expression: nu table size");
    }
    for (const auto& row : *nu_bi) {
      if (static_cast<int>(row.size()) != T) {
        throw std::invalid_argument("oracle_mise_expression: nu table size");
      }
      for (double v : row) {
        if (!(v > 0.0 && v < 1.0)) {
          throw std::invalid_argument("oracle_mise_expression: nu out of (0,1)");
        }
      }
    }
    nukt = *nu_bi;
  } else {
    for (int k = 1; k <= T; ++k) {
      for (int tau = 1; tau <= T; ++tau) {
        const double mu = mu_bi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)];
        const double raw = std::sqrt(
            mu / lstar[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)]);
        nukt[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)] =
            std::clamp(raw, 1e-6, 1.0 - 1e-6);
      }
    }
  }
  double dstar = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double mu = mu_uni[static_cast<std::size_t>(k - 1)];
    const double nu = nuk[static_cast<std::size_t>(k - 1)];
    const double lk = static_cast<double>(schedule.uni_len(k));
    dstar += lk * mu *
             (nu + mu * (1.0 / lk + std::pow(static_cast<double>(n), -0.25)) / nu);
  }
  for (int k = 1; k <= T; ++k) {
    for (int tau = 1; tau <= T; ++tau) {
      const double mu = mu_bi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)];
      const double nu = nukt[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)];
      const double ls = lstar[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)];
      dstar += static_cast<double>(schedule.bi_len(k, tau)) * mu *
               (nu + mu / (ls * nu));
    }
  }
  out.delta_star_bound = cstar * noise * dstar;

  double db = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double mu = mu_uni[static_cast<std::size_t>(k - 1)];
    const double lk = static_cast<double>(schedule.uni_len(k));
    const double t = schedule.uni_threshold(k);
    db += lk * mu * (std::sqrt(t) + std::pow(lk, -0.5) * std::pow(t, -1.5)) +
          std::pow(lk, -2.0) * std::pow(t, -5.0);
  }
  for (int k = 1; k <= T; ++k) {
    for (int tau = 1; tau <= T; ++tau) {
      const double mu = mu_bi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)];
      const double ls = lstar[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(tau - 1)];
      const double lkt = static_cast<double>(schedule.bi_len(k, tau));
      const double t = schedule.bi_threshold(k, tau);
      db += lkt * mu * (std::sqrt(t) + std::pow(ls, -0.5) * std::pow(t, -1.5)) +
            std::pow(ls, -2.0) * std::pow(t, -5.0);
    }
  }
  out.delta_bound = db / static_cast<double>(n);
  return out;
}

double super_oracle_bandwidth(std::size_t n) {
  if (n < 2) throw std::invalid_argument("super_oracle_bandwidth: n >= 2 required");
  return std::pow(4.0 / 3.0, 0.2) * std::pow(static_cast<double>(n), -0.2);
}

namespace {

std::vector<double> gaussian_kde(std::span<const double> samples,
                                 std::span<const double> grid, double h) {
  std::vector<double> out(grid.size(), 0.0);
  const double scale = 1.0 / (static_cast<double>(samples.size()) * h);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double y : samples) acc += stats::normal_pdf((grid[g] - y) / h);
    out[g] = scale * acc;
  }
  return out;
}

}  // namespace

std::vector<double> kernel_super_oracle(std::span<const double> y_samples,
                                        std::span<const double> y_grid) {
  return gaussian_kde(y_samples, y_grid, super_oracle_bandwidth(y_samples.size()));
}

double sub_oracle_bandwidth(std::span<const double> y_samples) {
  const std::size_t n = y_samples.size();
  if (n < 3) throw std::invalid_argument("sub_oracle_bandwidth: n >= 3 required");
  const double sd = stats::sample_sd(y_samples);
  if (!(sd > 0.0)) {
    throw std::runtime_error("sub_oracle_bandwidth: zero sample variance");
  }
  const double iqr = stats::interquartile_range(y_samples);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> kernel_sub_oracle(std::span<const double> y_samples,
                                      std::span<const double> y_grid) {
  return gaussian_kde(y_samples, y_grid, sub_oracle_bandwidth(y_samples));
}

UnivariateFit univariate_ep_density(std::span<const double> y_samples,
                                    const BlockSchedule& schedule, Loss loss) {
  const std::size_t n = y_samples.size();
  if (n < 16) throw std::invalid_argument("univariate_ep_density: n >= 16 required");
  if (schedule.n != n) {
    throw std::invalid_argument("univariate_ep_density: schedule built for a different n");
  }
  UnivariateFit f;
  f.loss = loss;
  f.schedule = schedule;
  const long top = schedule.uni_edges.back();
  if (loss == Loss::square) {
    std::size_t inside = 0;
    f.coeffs.assign(static_cast<std::size_t>(top), 0.0);
    for (double y : y_samples) {
      if (y < 0.0 || y > 1.0) continue;
      ++inside;
      for (long j = 0; j < top; ++j) {
        f.coeffs[static_cast<std::size_t>(j)] += cosine_basis(static_cast<unsigned>(j), y);
      }
    }
    for (auto& c : f.coeffs) c /= static_cast<double>(n);
    f.difficulty = static_cast<double>(inside) / static_cast<double>(n);
    f.energies.resize(static_cast<std::size_t>(schedule.K));
    f.weights.resize(static_cast<std::size_t>(schedule.K));
    const double noise = f.difficulty / static_cast<double>(n);
    for (int k = 1; k <= schedule.K; ++k) {
      const auto [e0, e1] = schedule.uni_members(k);
      double s = 0.0;
      for (long j = e0; j < e1; ++j) {
        s += f.coeffs[static_cast<std::size_t>(j)] * f.coeffs[static_cast<std::size_t>(j)];
      }
      f.energies[static_cast<std::size_t>(k - 1)] =
          s / static_cast<double>(e1 - e0) - noise;
      f.weights[static_cast<std::size_t>(k - 1)] =
          shrink_weight(f.energies[static_cast<std::size_t>(k - 1)],
                        schedule.uni_threshold(k), f.difficulty, n);
    }
    return f;
  }
  f.difficulty = 1.0;
  f.u_grid = char_u_grid(0.0, static_cast<double>(top));
  f.slice.assign(f.u_grid.size(), {0.0, 0.0});
  for (double y : y_samples) {
    const std::complex<double> step(std::cos(kCharGridStep * y),
                                    std::sin(kCharGridStep * y));
    std::complex<double> phase(1.0, 0.0);
    for (auto& v : f.slice) {
      v += phase;
      phase *= step;
    }
  }
  for (auto& v : f.slice) v /= static_cast<double>(n);
  f.energies.resize(static_cast<std::size_t>(schedule.K));
  f.weights.resize(static_cast<std::size_t>(schedule.K));
  const double noise = 1.0 / static_cast<double>(n);
  for (int k = 1; k <= schedule.K; ++k) {
    const auto [e0, e1] = schedule.uni_members(k);
    f.energies[static_cast<std::size_t>(k - 1)] =
        simpson_mod2(f.slice, kCharGridStep, node_of_edge(e0), node_of_edge(e1)) /
            static_cast<double>(e1 - e0) -
        noise;
    f.weights[static_cast<std::size_t>(k - 1)] =
        shrink_weight(f.energies[static_cast<std::size_t>(k - 1)],
                      schedule.uni_threshold(k), f.difficulty, n);
  }
  return f;
}

double evaluate(const UnivariateFit& f, double y) {
  const auto& s = f.schedule;
  if (f.loss == Loss::square) {
    if (!(y >= 0.0 && y <= 1.0)) {
      throw std::domain_error("evaluate: y must lie in [0,1] under square loss");
    }
    double sum = 0.0;
    for (long j = 0; j < static_cast<long>(f.coeffs.size()); ++j) {
      const int k = block_of(s.uni_edges, j);
      const double w = f.weights[static_cast<std::size_t>(k - 1)];
      if (w == 0.0) continue;
      sum += w * f.coeffs[static_cast<std::size_t>(j)] *
             cosine_basis(static_cast<unsigned>(j), y);
    }
    return sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= s.K; ++k) {
    const double w = f.weights[static_cast<std::size_t>(k - 1)];
    if (w == 0.0) continue;
    const auto [e0, e1] = s.uni_members(k);
    sum += w * simpson_phase(f.slice, f.u_grid, node_of_edge(e0),
                             node_of_edge(e1), y);
  }
  return sum / M_PI;
}

}  // namespace epcde
