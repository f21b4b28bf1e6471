#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "epcde/blocks.hpp"
#include "epcde/estimator.hpp"
#include "epcde/model.hpp"
#include "epcde/types.hpp"

namespace epcde {

// Block functionals of the true pair (f(y|x), p(x)): per-block mean squares
// of the exact series coefficients (square loss) or characteristic-slice
// energies (line loss).
struct TrueFunctionals {
  double difficulty = 0.0;                 // d(f, p)
  std::vector<double> uni;                 // Theta_k, k = 1..K
  std::vector<std::vector<double>> bi;     // [k-1][tau-1], T x T
};
TrueFunctionals true_functionals(const TrueModel& model,
                                 const BlockSchedule& schedule, Loss loss);

// Wiener weights mu = Theta / (Theta + d/n), no threshold indicator.
struct OracleWeights {
  double difficulty = 0.0;
  std::vector<double> uni;
  std::vector<std::vector<double>> bi;
  TrueFunctionals functionals;
};
OracleWeights oracle_weights(const TrueModel& model,
                             const BlockSchedule& schedule, Loss loss);

// Benchmark fit: the usual pipeline (empirical coefficients, estimated
// design) with the shrinkage weights replaced by the Wiener weights of the
// true model.
CondDensityFit oracle_fit(const SamplePairs& data, const TrueModel& model,
                          const BlockSchedule& schedule, Loss loss);

// The oracle's exact-risk decomposition: in-schedule variance-type main term,
// out-of-schedule squared-bias tail, and the two remainder bounds (generic
// constant C = 1; informational only).
struct OracleMise {
  double main = 0.0;
  double tail = 0.0;
  double delta_star_bound = 0.0;
  double delta_bound = 0.0;
  bool tail_warning = false;  // tail horizon hit before decay below 1e-10*main
};
OracleMise oracle_mise_expression(
    const TrueModel& model, const BlockSchedule& schedule, Loss loss,
    std::size_t n, const std::optional<std::vector<double>>& nu_uni = {},
    const std::optional<std::vector<std::vector<double>>>& nu_bi = {});

// Gaussian-kernel density estimate with the fixed bandwidth that is exactly
// optimal for a standard normal target: h = (4/3)^{1/5} n^{-1/5}.
double super_oracle_bandwidth(std::size_t n);
std::vector<double> kernel_super_oracle(std::span<const double> y_samples,
                                        std::span<const double> y_grid);

// Gaussian-kernel estimate with the data-driven normal-reference bandwidth
// 0.9 min(sd, IQR/1.34) n^{-1/5}.
double sub_oracle_bandwidth(std::span<const double> y_samples);
std::vector<double> kernel_sub_oracle(std::span<const double> y_samples,
                                      std::span<const double> y_grid);

// Univariate blockwise-shrinkage density estimate: the uni-part pipeline
// specialized to a single sample, with difficulty n^{-1} sum I(Y in [0,1])
// (square loss) or 1 (line loss) and a unit design density.
struct UnivariateFit {
  Loss loss = Loss::square;
  BlockSchedule schedule;
  double difficulty = 0.0;
  std::vector<double> coeffs;                   // square loss, j < b_{K+1}
  std::vector<double> u_grid;                   // line loss
  std::vector<std::complex<double>> slice;      // line loss
  std::vector<double> energies;                 // per block k
  std::vector<double> weights;
};
UnivariateFit univariate_ep_density(std::span<const double> y_samples,
                                    const BlockSchedule& schedule, Loss loss);
double evaluate(const UnivariateFit& fit, double y);

}  // namespace epcde
