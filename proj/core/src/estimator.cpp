#include "epcde/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epcde/quadrature.hpp"

namespace epcde {

namespace {

// Block index (1-based) containing integer index j, for edges b_1..b_{K+1}.
int block_of(const std::vector<long>& edges, long j) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), j);
  return static_cast<int>(it - edges.begin());
}

// Block index containing r under the shifted convention b_tau < r <= b_{tau+1}.
int block_of_r(const std::vector<long>& edges, long r) {
  const auto it = std::lower_bound(edges.begin(), edges.end(), r);
  return static_cast<int>(it - edges.begin());
}

std::size_t node_of_edge(long edge) {
  return static_cast<std::size_t>(edge) * 20;  // grid step 0.05
}

// Simpson integral of Re{v(u) e^{-iuy}} over the node range [i0, i1].
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

// Empirical coefficients / slices without weights.
void compute_raw(const SamplePairs& data, CondDensityFit& f) {
  const std::size_t n = data.size();
  const auto& s = f.schedule;
  if (f.loss == Loss::square) {
    const long j_uni = s.uni_edges.back();
    const long j_bi = s.bi_edges.back();
    const long r_bi = s.bi_edges.back();
    const long j_max = std::max(j_uni, j_bi);
    f.uni_coeffs.assign(static_cast<std::size_t>(j_uni), 0.0);
    f.bi_coeffs.assign(static_cast<std::size_t>(j_bi),
                       std::vector<double>(static_cast<std::size_t>(r_bi), 0.0));
    std::vector<double> phi_y(static_cast<std::size_t>(j_max));
    std::vector<double> phi_x(static_cast<std::size_t>(r_bi) + 1);
    for (std::size_t l = 0; l < n; ++l) {
      const double y = data.y[l];
      if (y < 0.0 || y > 1.0) continue;
      const double x = data.x[l];
      const double w = 1.0 / f.phat(x);
      for (long j = 0; j < j_max; ++j) {
        phi_y[j] = cosine_basis(static_cast<unsigned>(j), y);
      }
      for (long r = 1; r <= r_bi; ++r) {
        phi_x[r] = cosine_basis(static_cast<unsigned>(r), x);
      }
      for (long j = 0; j < j_uni; ++j) f.uni_coeffs[j] += phi_y[j] * w;
      for (long j = 0; j < j_bi; ++j) {
        const double wy = phi_y[j] * w;
        auto& row = f.bi_coeffs[j];
        for (long r = 1; r <= r_bi; ++r) row[r - 1] += wy * phi_x[r];
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& c : f.uni_coeffs) c *= inv_n;
    for (auto& row : f.bi_coeffs) {
      for (auto& c : row) c *= inv_n;
    }
  } else {
    const double u_uni = static_cast<double>(s.uni_edges.back());
    const double u_bi = static_cast<double>(s.bi_edges.back());
    const long r_bi = s.bi_edges.back();
    f.u_grid_uni = char_u_grid(0.0, u_uni);
    f.u_grid_bi = char_u_grid(0.0, u_bi);
    const std::size_t m_uni = f.u_grid_uni.size();
    const std::size_t m_bi = f.u_grid_bi.size();
    const std::size_t m_max = std::max(m_uni, m_bi);
    f.uni_slice.assign(m_uni, {0.0, 0.0});
    f.bi_slices.assign(static_cast<std::size_t>(r_bi),
                       std::vector<std::complex<double>>(m_bi, {0.0, 0.0}));
    std::vector<std::complex<double>> phases(m_max);
    for (std::size_t l = 0; l < n; ++l) {
      const double y = data.y[l];
      const double x = data.x[l];
      const double pinv = 1.0 / f.phat(x);
      const std::complex<double> step(std::cos(kCharGridStep * y),
                                      std::sin(kCharGridStep * y));
      std::complex<double> phase(1.0, 0.0);
      for (std::size_t i = 0; i < m_max; ++i) {
        phases[i] = phase;
        phase *= step;
      }
      for (std::size_t i = 0; i < m_uni; ++i) f.uni_slice[i] += pinv * phases[i];
      for (long r = 1; r <= r_bi; ++r) {
        const double wr = cosine_basis(static_cast<unsigned>(r), x) * pinv;
        if (wr == 0.0) continue;
        auto& slice = f.bi_slices[r - 1];
        for (std::size_t i = 0; i < m_bi; ++i) slice[i] += wr * phases[i];
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : f.uni_slice) v *= inv_n;
    for (auto& slice : f.bi_slices) {
      for (auto& v : slice) v *= inv_n;
    }
  }
}

void compute_energies(CondDensityFit& f) {
  const auto& s = f.schedule;
  const std::size_t n = s.n;
  f.uni_energies.assign(s.K, 0.0);
  f.bi_energies.assign(s.T, std::vector<double>(s.T, 0.0));
  const double noise = f.difficulty / static_cast<double>(n);
  if (f.loss == Loss::square) {
    for (int k = 1; k <= s.K; ++k) {
      const auto [j0, j1] = s.uni_members(k);
      double ss = 0.0;
      for (long j = j0; j < j1; ++j) ss += f.uni_coeffs[j] * f.uni_coeffs[j];
      f.uni_energies[k - 1] = ss / static_cast<double>(j1 - j0) - noise;
    }
    for (int k = 1; k <= s.T; ++k) {
      for (int tau = 1; tau <= s.T; ++tau) {
        const auto b = s.bi_members(k, tau);
        double ss = 0.0;
        for (long j = b.j_begin; j < b.j_end; ++j) {
          for (long r = b.r_begin; r < b.r_end; ++r) {
            ss += f.bi_coeffs[j][r - 1] * f.bi_coeffs[j][r - 1];
          }
        }
        f.bi_energies[k - 1][tau - 1] =
            ss / static_cast<double>(b.count()) - noise;
      }
    }
  } else {
    const double du = kCharGridStep;
    for (int k = 1; k <= s.K; ++k) {
      const auto [e0, e1] = s.uni_members(k);
      const double integral =
          simpson_mod2(f.uni_slice, du, node_of_edge(e0), node_of_edge(e1));
      f.uni_energies[k - 1] =
          integral / static_cast<double>(e1 - e0) - noise;
    }
    for (int k = 1; k <= s.T; ++k) {
      for (int tau = 1; tau <= s.T; ++tau) {
        const auto b = s.bi_members_line(k, tau);
        const auto i0 = node_of_edge(static_cast<long>(b.u_lo));
        const auto i1 = node_of_edge(static_cast<long>(b.u_hi));
        double total = 0.0;
        for (long r = b.r_begin; r < b.r_end; ++r) {
          total += simpson_mod2(f.bi_slices[r - 1], du, i0, i1);
        }
        f.bi_energies[k - 1][tau - 1] =
            total / static_cast<double>(s.bi_len(k, tau)) - noise;
      }
    }
  }
}

}  // namespace

double CondDensityFit::shrunken_uni(std::size_t j) const {
  const int k = block_of(schedule.uni_edges, static_cast<long>(j));
  return uni_weights[k - 1] * uni_coeffs[j];
}

double CondDensityFit::bi_weight_at(long j, long r) const {
  const int k = block_of(schedule.bi_edges, j);
  const int tau = block_of_r(schedule.bi_edges, r);
  return bi_weights[k - 1][tau - 1];
}

double estimate_difficulty(const SamplePairs& data,
                           const DesignDensityEstimate& phat, Loss loss) {
  if (data.size() == 0) throw std::invalid_argument("estimate_difficulty: empty sample");
  if (loss == Loss::square) {
    double sum = 0.0;
    for (std::size_t l = 0; l < data.size(); ++l) {
      const double y = data.y[l];
      if (y < 0.0 || y > 1.0) continue;
      const double p = phat(data.x[l]);
      sum += 1.0 / (p * p);
    }
    return sum / static_cast<double>(data.size());
  }
  return quad::simpson([&](double x) { return 1.0 / phat(x); }, 0.0, 1.0, 4096);
}

double block_energy_coeffs(std::span<const double> block_coeffs, long block_len,
                           double difficulty, std::size_t n) {
  double ss = 0.0;
  for (double c : block_coeffs) ss += c * c;
  return ss / static_cast<double>(block_len) -
         difficulty / static_cast<double>(n);
}

double block_energy_slice(std::span<const std::complex<double>> values,
                          double du, double block_len, double difficulty,
                          std::size_t n) {
  if (values.size() < 3 || values.size() % 2 == 0) {
    throw std::invalid_argument("block_energy_slice: need odd node count >= 3");
  }
  const double integral = simpson_mod2(values, du, 0, values.size() - 1);
  return integral / block_len - difficulty / static_cast<double>(n);
}

double shrink_weight(double energy, double threshold, double difficulty,
                     std::size_t n) {
  const double noise = difficulty / static_cast<double>(n);
  if (!(energy > threshold * noise)) return 0.0;
  return energy / (energy + noise);
}

CondDensityFit fit(const SamplePairs& data, Loss loss,
                   std::optional<BlockSchedule> schedule,
                   std::optional<DesignDensityEstimate> phat) {
  const std::size_t n = data.size();
  if (n < 16) throw std::invalid_argument("fit: need n >= 16");
  CondDensityFit f;
  f.loss = loss;
  f.schedule = schedule ? std::move(*schedule) : build_schedule(n, loss);
  if (f.schedule.n != n) throw std::invalid_argument("fit: schedule built for a different n");
  f.phat = phat ? std::move(*phat) : estimate_design(data.x);
  f.difficulty = estimate_difficulty(data, f.phat, loss);
  compute_raw(data, f);
  compute_energies(f);
  const auto& s = f.schedule;
  f.uni_weights.assign(s.K, 0.0);
  f.bi_weights.assign(s.T, std::vector<double>(s.T, 0.0));
  for (int k = 1; k <= s.K; ++k) {
    f.uni_weights[k - 1] = shrink_weight(f.uni_energies[k - 1],
                                         s.uni_threshold(k), f.difficulty, n);
  }
  for (int k = 1; k <= s.T; ++k) {
    for (int tau = 1; tau <= s.T; ++tau) {
      f.bi_weights[k - 1][tau - 1] =
          shrink_weight(f.bi_energies[k - 1][tau - 1], s.bi_threshold(k, tau),
                        f.difficulty, n);
    }
  }
  return f;
}

CondDensityFit fit_with_weights(const SamplePairs& data, Loss loss,
                                const BlockSchedule& schedule,
                                const DesignDensityEstimate& phat,
                                const FixedWeights& weights) {
  const std::size_t n = data.size();
  if (n < 16) throw std::invalid_argument("fit_with_weights: need n >= 16");
  if (weights.uni.size() != static_cast<std::size_t>(schedule.K) ||
      weights.bi.size() != static_cast<std::size_t>(schedule.T)) {
    throw std::invalid_argument("fit_with_weights: weight arrays do not match the schedule");
  }
  CondDensityFit f;
  f.loss = loss;
  f.schedule = schedule;
  f.phat = phat;
  f.difficulty = weights.difficulty;
  compute_raw(data, f);
  compute_energies(f);
  f.uni_weights = weights.uni;
  f.bi_weights = weights.bi;
  return f;
}

double evaluate_uni(const CondDensityFit& f, double y) {
  const auto& s = f.schedule;
  if (f.loss == Loss::square) {
    double sum = 0.0;
    for (int k = 1; k <= s.K; ++k) {
      const double w = f.uni_weights[k - 1];
      if (w == 0.0) continue;
      const auto [j0, j1] = s.uni_members(k);
      for (long j = j0; j < j1; ++j) {
        sum += w * f.uni_coeffs[j] * cosine_basis(static_cast<unsigned>(j), y);
      }
    }
    return sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= s.K; ++k) {
    const double w = f.uni_weights[k - 1];
    if (w == 0.0) continue;
    const auto [e0, e1] = s.uni_members(k);
    sum += w * simpson_phase(f.uni_slice, f.u_grid_uni, node_of_edge(e0),
                             node_of_edge(e1), y);
  }
  return sum / M_PI;
}

std::vector<double> bi_profile(const CondDensityFit& f, double y) {
  const auto& s = f.schedule;
  const long r_max = s.bi_edges.back();
  std::vector<double> profile(static_cast<std::size_t>(r_max), 0.0);
  if (f.loss == Loss::square) {
    for (int k = 1; k <= s.T; ++k) {
      const auto b0 = s.bi_members(k, 1);
      std::vector<double> phi_y(static_cast<std::size_t>(b0.j_end - b0.j_begin));
      for (long j = b0.j_begin; j < b0.j_end; ++j) {
        phi_y[j - b0.j_begin] = cosine_basis(static_cast<unsigned>(j), y);
      }
      for (int tau = 1; tau <= s.T; ++tau) {
        const double w = f.bi_weights[k - 1][tau - 1];
        if (w == 0.0) continue;
        const auto b = s.bi_members(k, tau);
        for (long r = b.r_begin; r < b.r_end; ++r) {
          double sum = 0.0;
          for (long j = b.j_begin; j < b.j_end; ++j) {
            sum += f.bi_coeffs[j][r - 1] * phi_y[j - b.j_begin];
          }
          profile[r - 1] += w * sum;
        }
      }
    }
  } else {
    for (int tau = 1; tau <= s.T; ++tau) {
      const auto b0 = s.bi_members_line(1, tau);
      for (long r = b0.r_begin; r < b0.r_end; ++r) {
        double sum = 0.0;
        for (int k = 1; k <= s.T; ++k) {
          const double w = f.bi_weights[k - 1][tau - 1];
          if (w == 0.0) continue;
          const auto b = s.bi_members_line(k, tau);
          sum += w * simpson_phase(f.bi_slices[r - 1], f.u_grid_bi,
                                   node_of_edge(static_cast<long>(b.u_lo)),
                                   node_of_edge(static_cast<long>(b.u_hi)), y);
        }
        profile[r - 1] = sum / M_PI;
      }
    }
  }
  return profile;
}

double evaluate(const CondDensityFit& f, double y, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("evaluate: x must lie in [0,1]");
  }
  if (f.loss == Loss::square && !(y >= 0.0 && y <= 1.0)) {
    throw std::domain_error("evaluate: y must lie in [0,1] under square loss");
  }
  double sum = evaluate_uni(f, y);
  const auto profile = bi_profile(f, y);
  for (std::size_t r = 1; r <= profile.size(); ++r) {
    if (profile[r - 1] != 0.0) {
      sum += profile[r - 1] * cosine_basis(static_cast<unsigned>(r), x);
    }
  }
  return sum;
}

std::vector<std::vector<double>> evaluate_grid(const CondDensityFit& f,
                                               std::span<const double> ys,
                                               std::span<const double> xs) {
  const long r_max = f.schedule.bi_edges.back();
  std::vector<std::vector<double>> phi_x(static_cast<std::size_t>(r_max));
  for (long r = 1; r <= r_max; ++r) {
    phi_x[r - 1].resize(xs.size());
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      phi_x[r - 1][ix] = cosine_basis(static_cast<unsigned>(r), xs[ix]);
    }
  }
  std::vector<std::vector<double>> out(ys.size(),
                                       std::vector<double>(xs.size(), 0.0));
  for (std::size_t iy = 0; iy < ys.size(); ++iy) {
    const double uni = evaluate_uni(f, ys[iy]);
    const auto profile = bi_profile(f, ys[iy]);
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      double v = uni;
      for (long r = 1; r <= r_max; ++r) {
        v += profile[r - 1] * phi_x[r - 1][ix];
      }
      out[iy][ix] = v;
    }
  }
  return out;
}

ProjectionResult project_nonneg(const std::vector<std::vector<double>>& values,
                                double y_step, Loss loss) {
  ProjectionResult res;
  res.values = values;
  const std::size_t ny = values.size();
  const std::size_t nx = ny == 0 ? 0 : values.front().size();
  res.zero_slice.assign(nx, false);
  for (auto& row : res.values) {
    for (auto& v : row) v = std::max(0.0, v);
  }
  for (std::size_t ix = 0; ix < nx; ++ix) {
    double mass = 0.0;
    for (std::size_t iy = 0; iy < ny; ++iy) mass += res.values[iy][ix] * y_step;
    if (mass <= 0.0) {
      res.zero_slice[ix] = true;
      continue;
    }
    if (loss == Loss::line) {
      for (std::size_t iy = 0; iy < ny; ++iy) res.values[iy][ix] /= mass;
    }
  }
  return res;
}

}  // namespace epcde
