#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "epcde/estimator.hpp"
#include "epcde/model.hpp"
#include "epcde/oracle.hpp"
#include "epcde/types.hpp"

namespace epcde {

enum class ResponseDomain { unit_interval, real_line };

// Synthetic truth: either an independence model (the response ignores the
// predictor) or the location-scale model Y = m(X) + sigma(X) eps with error
// density q. Quantile callables drive inverse-CDF sampling; characteristic
// callables, when given, spare the line-loss machinery a quadrature.
struct ModelSpec {
  enum class Kind { independent, additive };
  Kind kind = Kind::independent;

  std::function<double(double)> marginal;           // density of Y
  std::function<double(double)> marginal_quantile;  // inverse CDF of Y

  std::function<double(double)> m, sigma;
  std::function<double(double)> q;           // error density
  std::function<double(double)> q_quantile;  // inverse CDF of the error

  // Characteristic function of the marginal (independent) or of the error
  // (additive); optional.
  std::function<std::complex<double>(double)> char1;

  DesignSpec design;
  ResponseDomain response_domain = ResponseDomain::real_line;
  double y_min = -8.0;
  double y_max = 8.0;

  static ModelSpec independent(std::function<double(double)> density,
                               std::function<double(double)> quantile,
                               ResponseDomain domain = ResponseDomain::real_line);
  static ModelSpec additive(std::function<double(double)> m,
                            std::function<double(double)> sigma,
                            std::function<double(double)> q,
                            std::function<double(double)> q_quantile,
                            ResponseDomain domain = ResponseDomain::real_line);
  // Standard-normal response independent of a uniform predictor.
  static ModelSpec independent_normal();
};

TrueModel truth_model(const ModelSpec& spec);

// Deterministic draws: the predictor stream first (skipped entirely for fixed
// designs), then the response stream, from a single seeded generator.
SamplePairs generate_dataset(const ModelSpec& spec, std::size_t n,
                             std::uint64_t seed);

struct IseResult {
  double value = 0.0;
  double tail_mass = 0.0;   // largest truth mass outside the y-window
  bool tail_warning = false;
};

// Tensor-Simpson integrated squared error of the (raw) fit against the truth;
// node counts are forced odd. Line loss integrates y over the truth's window.
IseResult ise(const CondDensityFit& fit, const TrueModel& truth, Loss loss,
              std::size_t ny = 201, std::size_t nx = 101);

// Simpson ISE of grid samples of a univariate estimate against a density.
double ise_univariate(std::span<const double> values,
                      const std::function<double(double)>& truth,
                      std::span<const double> grid);

struct StudyConfig {
  ModelSpec model;
  std::vector<std::size_t> n_values;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  Loss loss = Loss::line;
  std::size_t grid_ny = 201;
  std::size_t grid_nx = 101;
  bool with_oracle = false;  // also fit the Wiener-weight benchmark
  int threads = 0;           // 0 = hardware default, capped by EP_CDE_THREADS
};

struct MonteCarloReport {
  std::vector<std::size_t> n_values;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  // Per n (outer), per replicate (inner); NaN marks a failed replicate.
  std::vector<std::vector<double>> ise_ep;
  std::vector<std::vector<double>> ise_super;
  std::vector<std::vector<double>> ise_sub;
  std::vector<std::vector<double>> ise_oracle;
  std::vector<double> median_ratio_super;
  std::vector<double> median_ratio_sub;
  std::vector<double> mean_ise_ep;
  std::vector<double> mean_ise_oracle;
  std::vector<std::size_t> failures;
};

// Seeded Monte Carlo sweep over sample sizes. Kernel benchmarks (and their
// median ISE ratios) are produced for independence models only; the Wiener
// benchmark is produced when requested. Bit-reproducible per (config, seed)
// regardless of thread count.
MonteCarloReport run_study(const StudyConfig& config);

// Least-squares slope/intercept of ln(ISE) on ln(n).
std::pair<double, double> rate_regression(std::span<const double> n_values,
                                          std::span<const double> ise_values);

}  // namespace epcde
