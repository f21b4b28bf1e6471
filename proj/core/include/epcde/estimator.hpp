#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "epcde/blocks.hpp"
#include "epcde/design.hpp"
#include "epcde/fourier.hpp"
#include "epcde/types.hpp"

namespace epcde {

// Fitted blockwise-shrinkage conditional-density estimate. Raw empirical
// coefficients (square loss) or characteristic-function slices (line loss)
// are stored together with the per-block shrinkage weights; evaluation
// applies the weights on the fly, so grids are derived views.
struct CondDensityFit {
  Loss loss = Loss::square;
  BlockSchedule schedule;
  DesignDensityEstimate phat;
  double difficulty = 0.0;

  // Square loss: raw coefficients. uni_coeffs[j] for j < b_{K+1};
  // bi_coeffs[j][r-1] for j < b'_{T+1}, 1 <= r <= b'_{T+1}.
  std::vector<double> uni_coeffs;
  std::vector<std::vector<double>> bi_coeffs;

  // Line loss: raw slices on uniform frequency grids.
  std::vector<double> u_grid_uni;  // [0, b_{K+1}]
  std::vector<double> u_grid_bi;   // [0, b'_{T+1}]
  std::vector<std::complex<double>> uni_slice;               // h-hat_0
  std::vector<std::vector<std::complex<double>>> bi_slices;  // [r-1][node]

  std::vector<double> uni_energies;               // Theta-tilde_k
  std::vector<double> uni_weights;                // mu-tilde_k
  std::vector<std::vector<double>> bi_energies;   // [k-1][tau-1]
  std::vector<std::vector<double>> bi_weights;

  // Shrunken univariate coefficient (square loss).
  double shrunken_uni(std::size_t j) const;
  // Shrinkage weight applied to bivariate index (j, r).
  double bi_weight_at(long j, long r) const;
};

// Plug-in coefficient of difficulty: empirical sum of 1/phat^2 over responses
// inside [0,1] for square loss, the integral of 1/phat for line loss.
double estimate_difficulty(const SamplePairs& data,
                           const DesignDensityEstimate& phat, Loss loss);

// Block mean-square of empirical coefficients minus the noise level d/n.
double block_energy_coeffs(std::span<const double> block_coeffs, long block_len,
                           double difficulty, std::size_t n);
// Same for a slice: block integral of |h|^2 / L minus d/n. `values` spans the
// block's nodes on a uniform grid with spacing `du` (odd count).
double block_energy_slice(std::span<const std::complex<double>> values,
                          double du, double block_len, double difficulty,
                          std::size_t n);

// Wiener weight with threshold indicator:
// [E/(E + d/n)] * I(E > t d/n); always in [0, 1).
double shrink_weight(double energy, double threshold, double difficulty,
                     std::size_t n);

CondDensityFit fit(const SamplePairs& data, Loss loss,
                   std::optional<BlockSchedule> schedule = {},
                   std::optional<DesignDensityEstimate> phat = {});

// Identical pipeline with externally supplied shrinkage weights (no
// thresholding); used by the Wiener-oracle benchmark.
struct FixedWeights {
  double difficulty = 0.0;
  std::vector<double> uni;                  // per k = 1..K
  std::vector<std::vector<double>> bi;      // [k-1][tau-1]
};
CondDensityFit fit_with_weights(const SamplePairs& data, Loss loss,
                                const BlockSchedule& schedule,
                                const DesignDensityEstimate& phat,
                                const FixedWeights& weights);

double evaluate(const CondDensityFit& fit, double y, double x);

// Row-major evaluation on a rectangular grid: result[iy][ix].
std::vector<std::vector<double>> evaluate_grid(const CondDensityFit& fit,
                                               std::span<const double> ys,
                                               std::span<const double> xs);

// Univariate component f-tilde(y) and the bivariate slice profile c_r(y)
// such that the fit equals f-tilde(y) + sum_r c_r(y) phi_r(x).
double evaluate_uni(const CondDensityFit& fit, double y);
std::vector<double> bi_profile(const CondDensityFit& fit, double y);

struct ProjectionResult {
  std::vector<std::vector<double>> values;  // [iy][ix]
  std::vector<bool> zero_slice;             // per x column, all-zero after clipping
};

// Clips negative grid values; for line loss each x-slice is rescaled to unit
// mass (Riemann cell rule with spacing y_step) when its clipped mass is
// positive. Square-loss slices are clipped only.
ProjectionResult project_nonneg(const std::vector<std::vector<double>>& values,
                                double y_step, Loss loss);

}  // namespace epcde
