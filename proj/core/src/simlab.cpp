#include "epcde/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "epcde/quadrature.hpp"
#include "epcde/stats.hpp"

namespace epcde {

namespace {

std::vector<double> simpson_weights(std::size_t intervals, double step) {
  std::vector<double> w(intervals + 1, 0.0);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[i] = c * step / 3.0;
  }
  return w;
}

std::vector<double> linspace(double a, double b, std::size_t nodes) {
  std::vector<double> v(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(nodes - 1);
  }
  return v;
}

std::size_t odd_nodes(std::size_t n) { return n < 3 ? 3 : (n % 2 == 0 ? n + 1 : n); }

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

int thread_budget(int requested) {
  int t = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  if (const char* env = std::getenv("EP_CDE_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) t = std::min(t, cap);
    } catch (const std::exception&) {
      // Malformed values are ignored; the variable is an optional cap.
    }
  }
  return t;
}

}  // namespace

ModelSpec ModelSpec::independent(std::function<double(double)> density,
                                 std::function<double(double)> quantile,
                                 ResponseDomain domain) {
  if (!density || !quantile) {
    throw std::invalid_argument("ModelSpec: density and quantile required");
  }
  ModelSpec s;
  s.kind = Kind::independent;
  s.marginal = std::move(density);
  s.marginal_quantile = std::move(quantile);
  s.design = DesignSpec::uniform();
  s.response_domain = domain;
  return s;
}

ModelSpec ModelSpec::additive(std::function<double(double)> m,
                              std::function<double(double)> sigma,
                              std::function<double(double)> q,
                              std::function<double(double)> q_quantile,
                              ResponseDomain domain) {
  if (!m || !sigma || !q || !q_quantile) {
    throw std::invalid_argument("ModelSpec: all four callables required");
  }
  ModelSpec s;
  s.kind = Kind::additive;
  s.m = std::move(m);
  s.sigma = std::move(sigma);
  s.q = std::move(q);
  s.q_quantile = std::move(q_quantile);
  s.design = DesignSpec::uniform();
  s.response_domain = domain;
  return s;
}

ModelSpec ModelSpec::independent_normal() {
  auto s = independent([](double y) { return stats::normal_pdf(y); },
                       [](double p) { return stats::normal_quantile(p); },
                       ResponseDomain::real_line);
  s.char1 = [](double u) {
    return std::complex<double>(std::exp(-0.5 * u * u), 0.0);
  };
  return s;
}

TrueModel truth_model(const ModelSpec& spec) {
  TrueModel t;
  t.design = spec.design;
  t.support = spec.response_domain == ResponseDomain::unit_interval
                  ? ResponseSupport::unit_square
                  : ResponseSupport::line_strip;
  t.y_min = spec.y_min;
  t.y_max = spec.y_max;
  if (spec.kind == ModelSpec::Kind::independent) {
    auto g = spec.marginal;
    t.cd = [g](double y, double) { return g(y); };
    if (spec.char1) {
      auto c = spec.char1;
      t.char_fn = [c](double u, double) { return c(u); };
    }
    return t;
  }
  auto m = spec.m;
  auto s = spec.sigma;
  auto q = spec.q;
  t.cd = [m, s, q](double y, double x) {
    const double sd = s(x);
    return q((y - m(x)) / sd) / sd;
  };
  if (spec.char1) {
    auto c = spec.char1;
    t.char_fn = [c, m, s](double u, double x) {
      const std::complex<double> shift(std::cos(u * m(x)), std::sin(u * m(x)));
      return shift * c(u * s(x));
    };
  }
  return t;
}

SamplePairs generate_dataset(const ModelSpec& spec, std::size_t n,
                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n >= 1 required");
  spec.design.validate();
  stats::Rng rng(seed);
  SamplePairs out;
  out.kind = spec.design.kind;
  if (spec.design.kind == DesignKind::fixed) {
    out.x = generate_fixed_design(spec.design, n);
  } else {
    const quad::CdfInverter inv(spec.design.density);
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.x[i] = inv.invert(rng.uniform());
  }
  out.y.resize(n);
  if (spec.kind == ModelSpec::Kind::independent) {
    for (std::size_t i = 0; i < n; ++i) {
      out.y[i] = spec.marginal_quantile(rng.uniform());
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out.y[i] = spec.m(out.x[i]) +
                 spec.sigma(out.x[i]) * spec.q_quantile(rng.uniform());
    }
  }
  return out;
}

IseResult ise(const CondDensityFit& fit, const TrueModel& truth, Loss loss,
              std::size_t ny, std::size_t nx) {
  ny = odd_nodes(ny);
  nx = odd_nodes(nx);
  const double ya = loss == Loss::square ? 0.0 : truth.y_min;
  const double yb = loss == Loss::square ? 1.0 : truth.y_max;
  const auto ys = linspace(ya, yb, ny);
  const auto xs = linspace(0.0, 1.0, nx);
  const auto wy = simpson_weights(ny - 1, (yb - ya) / static_cast<double>(ny - 1));
  const auto wx = simpson_weights(nx - 1, 1.0 / static_cast<double>(nx - 1));
  const auto grid = evaluate_grid(fit, ys, xs);
  IseResult res;
  double acc = 0.0;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    double row = 0.0;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double diff = grid[iy][ix] - truth.cd(ys[iy], xs[ix]);
      row += wx[ix] * diff * diff;
    }
    acc += wy[iy] * row;
  }
  res.value = acc;
  if (loss == Loss::line) {
    for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      double inside = 0.0;
      for (std::size_t iy = 0; iy < ny; ++iy) inside += wy[iy] * truth.cd(ys[iy], x);
      res.tail_mass = std::max(res.tail_mass, 1.0 - inside);
    }
    res.tail_warning = res.tail_mass > 1e-6;
  }
  return res;
}

double ise_univariate(std::span<const double> values,
                      const std::function<double(double)>& truth,
                      std::span<const double> grid) {
  if (values.size() != grid.size() || grid.size() < 3 || grid.size() % 2 == 0) {
    throw std::invalid_argument("ise_univariate: need matching odd-sized grids");
  }
  const double step = grid[1] - grid[0];
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double diff = values[i] - truth(grid[i]);
    sq[i] = diff * diff;
  }
  return quad::simpson_samples(sq, step);
}

MonteCarloReport run_study(const StudyConfig& config) {
  if (config.replicates < 1) {
    throw std::invalid_argument("run_study: replicates >= 1 required");
  }
  if (config.n_values.empty()) {
    throw std::invalid_argument("run_study: empty sample-size list");
  }
  const auto truth = truth_model(config.model);
  const bool kernels = config.model.kind == ModelSpec::Kind::independent &&
                       config.loss == Loss::line;
  const std::size_t ny = odd_nodes(config.grid_ny);
  const auto y_window = linspace(truth.y_min, truth.y_max, ny);

  MonteCarloReport rep;
  rep.n_values = config.n_values;
  rep.replicates = config.replicates;
  rep.seed = config.seed;
  const std::size_t ncells = config.n_values.size();
  rep.ise_ep.assign(ncells, std::vector<double>(config.replicates, nan_value()));
  rep.ise_super = rep.ise_ep;
  rep.ise_sub = rep.ise_ep;
  rep.ise_oracle = rep.ise_ep;
  rep.median_ratio_super.assign(ncells, nan_value());
  rep.median_ratio_sub.assign(ncells, nan_value());
  rep.mean_ise_ep.assign(ncells, nan_value());
  rep.mean_ise_oracle.assign(ncells, nan_value());
  rep.failures.assign(ncells, 0);

  const int threads = thread_budget(config.threads);

  for (std::size_t cell = 0; cell < ncells; ++cell) {
    const std::size_t n = config.n_values[cell];
    const auto schedule = build_schedule(n, config.loss);
    FixedWeights oracle_w;
    if (config.with_oracle) {
      const auto w = oracle_weights(truth, schedule, config.loss);
      oracle_w.difficulty = w.difficulty;
      oracle_w.uni = w.uni;
      oracle_w.bi = w.bi;
    }

    auto one_replicate = [&](std::size_t r) {
      const std::uint64_t seed = stats::hash64(config.seed, n, r);
      try {
        const auto data = generate_dataset(config.model, n, seed);
        const auto f = fit(data, config.loss, schedule);
        rep.ise_ep[cell][r] =
            ise(f, truth, config.loss, config.grid_ny, config.grid_nx).value;
        if (kernels) {
          rep.ise_super[cell][r] = ise_univariate(
              kernel_super_oracle(data.y, y_window), config.model.marginal,
              y_window);
          rep.ise_sub[cell][r] = ise_univariate(
              kernel_sub_oracle(data.y, y_window), config.model.marginal,
              y_window);
        }
        if (config.with_oracle) {
          const auto of = fit_with_weights(data, config.loss, schedule,
                                           estimate_design(data.x), oracle_w);
          rep.ise_oracle[cell][r] =
              ise(of, truth, config.loss, config.grid_ny, config.grid_nx).value;
        }
      } catch (const std::exception&) {
        // Leave the slots NaN; counted below.
      }
    };

    if (threads <= 1 || config.replicates == 1) {
      for (std::size_t r = 0; r < config.replicates; ++r) one_replicate(r);
    } else {
      std::vector<std::thread> pool;
      const int nt = std::min<int>(threads, static_cast<int>(config.replicates));
      pool.reserve(static_cast<std::size_t>(nt));
      for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t r = static_cast<std::size_t>(t);
               r < config.replicates; r += static_cast<std::size_t>(nt)) {
            one_replicate(r);
          }
        });
      }
      for (auto& th : pool) th.join();
    }

    std::vector<double> ok_ep, ratio_super, ratio_sub, ok_or;
    for (std::size_t r = 0; r < config.replicates; ++r) {
      const double e = rep.ise_ep[cell][r];
      if (std::isnan(e)) {
        ++rep.failures[cell];
        continue;
      }
      ok_ep.push_back(e);
      if (kernels && rep.ise_super[cell][r] > 0.0) {
        ratio_super.push_back(e / rep.ise_super[cell][r]);
      }
      if (kernels && rep.ise_sub[cell][r] > 0.0) {
        ratio_sub.push_back(e / rep.ise_sub[cell][r]);
      }
      if (config.with_oracle && !std::isnan(rep.ise_oracle[cell][r])) {
        ok_or.push_back(rep.ise_oracle[cell][r]);
      }
    }
    if (!ok_ep.empty()) rep.mean_ise_ep[cell] = stats::mean(ok_ep);
    if (!ok_or.empty()) rep.mean_ise_oracle[cell] = stats::mean(ok_or);
    if (!ratio_super.empty()) {
      rep.median_ratio_super[cell] = stats::median(ratio_super);
    }
    if (!ratio_sub.empty()) rep.median_ratio_sub[cell] = stats::median(ratio_sub);
  }
  return rep;
}

std::pair<double, double> rate_regression(std::span<const double> n_values,
                                          std::span<const double> ise_values) {
  if (n_values.size() != ise_values.size() || n_values.size() < 3) {
    throw std::invalid_argument("rate_regression: need >= 3 (n, ISE) pairs");
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (!(n_values[i] > 0.0) || !(ise_values[i] > 0.0)) {
      throw std::invalid_argument("rate_regression: positive inputs required");
    }
    lx.push_back(std::log(n_values[i]));
    ly.push_back(std::log(ise_values[i]));
  }
  const double mx = stats::mean(lx), my = stats::mean(ly);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 1e-12) {
    throw std::invalid_argument("rate_regression: degenerate regressor");
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace epcde
