#include "epcde/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "epcde/stats.hpp"

namespace epcde {
namespace io {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_finite(const std::string& token, std::size_t row,
                    const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row) + ": bad " + what + " value '" +
                     token + "'");
  }
  if (used != token.size() || !std::isfinite(v)) {
    throw ParseError("row " + std::to_string(row) + ": bad " + what + " value '" +
                     token + "'");
  }
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SamplePairs read_dataset(const std::string& path) {
  auto in = open_in(path);
  SamplePairs data;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto pos = t.find("design:");
      if (pos != std::string::npos) {
        const std::string kind = trim(t.substr(pos + 7));
        if (kind == "fixed") {
          data.kind = DesignKind::fixed;
        } else if (kind == "random") {
          data.kind = DesignKind::random;
        } else {
          throw ParseError("row " + std::to_string(row) +
                           ": unknown design kind '" + kind + "'");
        }
      }
      continue;
    }
    if (!header_seen) {
      if (t != "y,x") {
        throw ParseError("row " + std::to_string(row) + ": expected header 'y,x'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      throw ParseError("row " + std::to_string(row) + ": expected two columns");
    }
    const double y = parse_finite(trim(t.substr(0, comma)), row, "y");
    const double x = parse_finite(trim(t.substr(comma + 1)), row, "x");
    if (x < 0.0 || x > 1.0) {
      throw ParseError("row " + std::to_string(row) + ": x = " +
                       format_double(x) + " outside [0,1]");
    }
    data.y.push_back(y);
    data.x.push_back(x);
  }
  if (!header_seen) throw ParseError("'" + path + "': missing header 'y,x'");
  return data;
}

void write_dataset(const std::string& path, const SamplePairs& data) {
  auto out = open_out(path);
  out << "# design: " << (data.kind == DesignKind::fixed ? "fixed" : "random")
      << "\n";
  out << "y,x\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_double(data.y[i]) << ',' << format_double(data.x[i]) << "\n";
  }
}

void write_grid(const std::string& path, const GridData& grid) {
  if (grid.values.size() != grid.ys.size()) {
    throw std::invalid_argument("write_grid: row count mismatch");
  }
  for (const auto& row : grid.values) {
    if (row.size() != grid.xs.size()) {
      throw std::invalid_argument("write_grid: column count mismatch");
    }
  }
  auto out = open_out(path);
  out << "# loss: " << (grid.meta.loss == Loss::square ? "square" : "line") << "\n";
  out << "# n: " << grid.meta.n << "\n";
  out << "# seed: " << grid.meta.seed << "\n";
  out << "# version: " << grid.meta.version << "\n";
  out << "# dhat: " << format_double(grid.meta.dhat) << "\n";
  out << "# K: " << grid.meta.K << "\n";
  out << "# T: " << grid.meta.T << "\n";
  out << "y,x,fhat\n";
  for (std::size_t iy = 0; iy < grid.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < grid.xs.size(); ++ix) {
      out << format_double(grid.ys[iy]) << ',' << format_double(grid.xs[ix])
          << ',' << format_double(grid.values[iy][ix]) << "\n";
    }
  }
}

GridData read_grid(const std::string& path) {
  auto in = open_in(path);
  GridData grid;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  std::vector<double> ys_raw, xs_raw, vals;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto colon = t.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(t.substr(1, colon - 1));
      const std::string val = trim(t.substr(colon + 1));
      if (key == "loss") {
        if (val == "square") {
          grid.meta.loss = Loss::square;
        } else if (val == "line") {
          grid.meta.loss = Loss::line;
        } else {
          throw ParseError("row " + std::to_string(row) + ": unknown loss '" + val + "'");
        }
      } else if (key == "n") {
        grid.meta.n = static_cast<std::size_t>(std::stoull(val));
      } else if (key == "seed") {
        grid.meta.seed = std::stoull(val);
      } else if (key == "version") {
        grid.meta.version = val;
      } else if (key == "dhat") {
        grid.meta.dhat = parse_finite(val, row, "dhat");
      } else if (key == "K") {
        grid.meta.K = std::stoi(val);
      } else if (key == "T") {
        grid.meta.T = std::stoi(val);
      }
      continue;
    }
    if (!header_seen) {
      if (t != "y,x,fhat") {
        throw ParseError("row " + std::to_string(row) + ": expected header 'y,x,fhat'");
      }
      header_seen = true;
      continue;
    }
    std::stringstream ss(t);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
        !std::getline(ss, c)) {
      throw ParseError("row " + std::to_string(row) + ": expected three columns");
    }
    ys_raw.push_back(parse_finite(trim(a), row, "y"));
    xs_raw.push_back(parse_finite(trim(b), row, "x"));
    vals.push_back(parse_finite(trim(c), row, "fhat"));
  }
  if (!header_seen) throw ParseError("'" + path + "': missing header 'y,x,fhat'");
  if (vals.empty()) throw ParseError("'" + path + "': empty grid");
  // Reconstruct the rectangle: x cycles fastest, y is constant per row band.
  std::size_t nx = 1;
  while (nx < xs_raw.size() && xs_raw[nx] != xs_raw[0]) ++nx;
  if (vals.size() % nx != 0) {
    throw ParseError("'" + path + "': ragged grid");
  }
  const std::size_t nyr = vals.size() / nx;
  grid.xs.assign(xs_raw.begin(), xs_raw.begin() + static_cast<long>(nx));
  grid.ys.resize(nyr);
  grid.values.assign(nyr, std::vector<double>(nx));
  for (std::size_t iy = 0; iy < nyr; ++iy) {
    grid.ys[iy] = ys_raw[iy * nx];
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t idx = iy * nx + ix;
      if (xs_raw[idx] != grid.xs[ix] || ys_raw[idx] != grid.ys[iy]) {
        throw ParseError("'" + path + "': grid is not a complete rectangle");
      }
      grid.values[iy][ix] = vals[idx];
    }
  }
  return grid;
}

std::map<std::string, std::string> read_config(const std::string& path) {
  auto in = open_in(path);
  std::map<std::string, std::string> cfg;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("row " + std::to_string(row) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty() || val.empty()) {
      throw ParseError("row " + std::to_string(row) + ": empty key or value");
    }
    if (!cfg.emplace(key, val).second) {
      throw ParseError("row " + std::to_string(row) + ": duplicate key '" + key + "'");
    }
  }
  return cfg;
}

StudyConfig study_from_config(const std::map<std::string, std::string>& cfg) {
  StudyConfig sc;
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = cfg.find(key);
    return it == cfg.end() ? nullptr : &it->second;
  };
  static const char* known[] = {"model",      "m_base", "m_amp",   "m_freq",
                                "sigma",      "n_list", "replicates", "seed",
                                "loss",       "grid_ny", "grid_nx", "y_window",
                                "with_oracle", "threads"};
  for (const auto& [key, value] : cfg) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ParseError("unknown config key '" + key + "'");
  }
  const auto* model = get("model");
  if (!model) throw ParseError("missing config key 'model'");
  if (*model == "independent_normal") {
    sc.model = ModelSpec::independent_normal();
  } else if (*model == "additive") {
    const double base = get("m_base") ? std::stod(*get("m_base")) : 0.0;
    const double amp = get("m_amp") ? std::stod(*get("m_amp")) : 0.0;
    const double freq = get("m_freq") ? std::stod(*get("m_freq")) : 1.0;
    const double s = get("sigma") ? std::stod(*get("sigma")) : 1.0;
    if (!(s > 0.0)) throw ParseError("sigma must be positive");
    sc.model = ModelSpec::additive(
        [base, amp, freq](double x) {
          return base + amp * std::cos(2.0 * M_PI * freq * x);
        },
        [s](double) { return s; },
        [](double z) { return stats::normal_pdf(z); },
        [](double p) { return stats::normal_quantile(p); });
    sc.model.char1 = [](double u) {
      return std::complex<double>(std::exp(-0.5 * u * u), 0.0);
    };
  } else {
    throw ParseError("unknown model '" + *model + "'");
  }
  const auto* nlist = get("n_list");
  if (!nlist) throw ParseError("missing config key 'n_list'");
  std::stringstream ss(*nlist);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string t = trim(tok);
    if (t.empty()) continue;
    const long v = std::stol(t);
    if (v < 16) throw ParseError("n_list entries must be >= 16");
    sc.n_values.push_back(static_cast<std::size_t>(v));
  }
  if (sc.n_values.empty()) throw ParseError("n_list is empty");
  if (const auto* v = get("replicates")) {
    const long r = std::stol(*v);
    if (r < 1) throw ParseError("replicates must be >= 1");
    sc.replicates = static_cast<std::size_t>(r);
  }
  if (const auto* v = get("seed")) sc.seed = std::stoull(*v);
  if (const auto* v = get("loss")) {
    if (*v == "square") {
      sc.loss = Loss::square;
    } else if (*v == "line") {
      sc.loss = Loss::line;
    } else {
      throw ParseError("loss must be 'square' or 'line'");
    }
  }
  if (const auto* v = get("grid_ny")) sc.grid_ny = static_cast<std::size_t>(std::stoul(*v));
  if (const auto* v = get("grid_nx")) sc.grid_nx = static_cast<std::size_t>(std::stoul(*v));
  if (const auto* v = get("y_window")) {
    const double w = std::stod(*v);
    if (!(w > 0.0)) throw ParseError("y_window must be positive");
    sc.model.y_min = -w;
    sc.model.y_max = w;
  }
  if (const auto* v = get("with_oracle")) sc.with_oracle = *v != "0";
  if (const auto* v = get("threads")) sc.threads = std::stoi(*v);
  if (sc.loss == Loss::square &&
      sc.model.response_domain == ResponseDomain::real_line) {
    sc.model.response_domain = ResponseDomain::unit_interval;
  }
  return sc;
}

}  // namespace io
}  // namespace epcde
