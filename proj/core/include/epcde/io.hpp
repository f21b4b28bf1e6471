#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "epcde/simlab.hpp"
#include "epcde/types.hpp"

namespace epcde {
namespace io {

//! Malformed file contents (as opposed to estimator preconditions); messages
//! cite the offending row or key.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset CSV: header "y,x", one pair per row, optional "# design: ..."
// annotation. Rejects NaN/Inf anywhere and x outside [0,1].
SamplePairs read_dataset(const std::string& path);
void write_dataset(const std::string& path, const SamplePairs& data);

struct GridMeta {
  Loss loss = Loss::square;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string version;
  double dhat = 0.0;
  int K = 0;
  int T = 0;
};

// Rectangular evaluation grid, row-major over y (outer) then x (inner), with
// a "#"-prefixed metadata preamble and header "y,x,fhat". Serialization uses
// 17 significant digits, so a write/read round trip is bit exact.
struct GridData {
  GridMeta meta;
  std::vector<double> ys;
  std::vector<double> xs;
  std::vector<std::vector<double>> values;  // [iy][ix]
};
void write_grid(const std::string& path, const GridData& grid);
GridData read_grid(const std::string& path);

std::string format_double(double v);  // %.17g

// Flat "key = value" config lines; '#' starts a comment, blank lines ignored.
// Duplicate keys are rejected.
std::map<std::string, std::string> read_config(const std::string& path);

// Builds a Monte Carlo study from config keys:
//   model = independent_normal | additive
//   (additive only) m_base, m_amp, m_freq, sigma
//   n_list = comma-separated sample sizes
//   replicates, seed, loss = square | line, grid_ny, grid_nx,
//   y_window (half-width), with_oracle = 0|1, threads
// Unknown keys are rejected.
StudyConfig study_from_config(const std::map<std::string, std::string>& cfg);

}  // namespace io
}  // namespace epcde
