#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "epcde/types.hpp"

namespace epcde {

// Finite-n surrogate bound for the roughness sum of a custom univariate
// schedule (sum over k <= K of L_k^-2 t_k^-5).
inline constexpr double kMaxScheduleRoughness = 100.0;

struct CustomUniSchedule {
  std::vector<long> edges;         // b_1 = 0 < b_2 < ...
  std::vector<double> thresholds;  // t_1, t_2, ...
};

// Index members of one bivariate block, half-open in both directions.
struct BiBlockMembers {
  long j_begin = 0, j_end = 0;  // j in [j_begin, j_end)
  long r_begin = 0, r_end = 0;  // r in [r_begin, r_end)
  long count() const { return (j_end - j_begin) * (r_end - r_begin); }
};

// Line-loss bivariate block: a frequency interval crossed with an r-range.
struct LineBlockMembers {
  double u_lo = 0.0, u_hi = 0.0;  // u in [u_lo, u_hi)
  long r_begin = 0, r_end = 0;    // r in [r_begin, r_end)
};

struct BlockSchedule {
  std::vector<long> uni_edges;        // b_1..b_{K+1}
  std::vector<long> bi_edges;         // b'_1..b'_{T+1}
  std::vector<double> uni_thresholds; // t_1..t_K
  int K = 0;
  int T = 0;
  std::size_t n = 0;
  Loss loss = Loss::square;

  long uni_len(int k) const;                   // L_k
  long bi_len(int k, int tau) const;           // L_{k,tau}
  double uni_threshold(int k) const;           // t_k
  double bi_threshold(int k, int tau) const;   // t_{k,tau} = 1/lnln((k+3)(tau+3))
  // Univariate members: integer range [j_begin, j_end) for square loss, the
  // same numeric edges read as a u-interval for line loss.
  std::pair<long, long> uni_members(int k) const;
  BiBlockMembers bi_members(int k, int tau) const;
  LineBlockMembers bi_members_line(int k, int tau) const;
};

// Default univariate block edges b_1..b_count (L_1 = 1, L_2 = 2,
// L_{k+1} = ceil(L_k (1 + 1/ln(k+2)))).
std::vector<long> default_uni_edges(std::size_t count);
double default_uni_threshold(int k);

// Bivariate edge recursion b'_1 = 0, b'_2 = 1 + floor(ln^{3/4} n),
// b'_{s+1} = b'_s + floor(b'_2 (1 + 1/lnln n)^{s-2}).
std::vector<long> bivariate_edges(std::size_t n, std::size_t count);

// Assembles the full schedule for sample size n (>= 16). A custom univariate
// (edges, thresholds) pair may replace the default; it is rejected when the
// thresholds increase or the roughness sum exceeds kMaxScheduleRoughness.
BlockSchedule build_schedule(std::size_t n, Loss loss,
                             const std::optional<CustomUniSchedule>& uni_spec = {});

// Adjusted bivariate block length: L_{k,tau} divided by the block functional
// of the true pair (f(y|x), p(x)). The response window [y_min, y_max] is used
// for line loss; square loss integrates the response over [0,1].
double adjusted_length(const BlockSchedule& schedule, int k, int tau,
                       const std::function<double(double, double)>& cd,
                       const std::function<double(double)>& design_density,
                       double y_min = 0.0, double y_max = 1.0);

// Univariate adjusted lengths coincide with the plain lengths.
inline double uni_adjusted_length(const BlockSchedule& s, int k) {
  return static_cast<double>(s.uni_len(k));
}

}  // namespace epcde
