//! Batch front end: estimate / risk / simulate / design subcommands over the
//! CSV formats documented in the README. Exit codes: 0 success, 2 bad flags
//! or malformed files, 3 estimator precondition failures.

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epcde/blocks.hpp"
#include "epcde/design.hpp"
#include "epcde/estimator.hpp"
#include "epcde/io.hpp"
#include "epcde/quadrature.hpp"
#include "epcde/risk.hpp"
#include "epcde/simlab.hpp"

namespace {

using epcde::Loss;

#ifndef EPCDE_VERSION
#define EPCDE_VERSION "0.0.0"
#endif

std::vector<double> linspace(double a, double b, std::size_t nodes) {
  std::vector<double> v(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(nodes - 1);
  }
  return v;
}

Loss parse_loss(const std::string& s) {
  if (s == "square") return Loss::square;
  if (s == "line") return Loss::line;
  throw epcde::io::ParseError("loss must be 'square' or 'line'");
}

struct EstimateArgs {
  std::string input, output, loss = "square";
  std::vector<std::size_t> grid{101, 51};
  bool project = false;
  double y_min = -8.0, y_max = 8.0;
};

int run_estimate(const EstimateArgs& a) {
  const Loss loss = parse_loss(a.loss);
  const auto data = epcde::io::read_dataset(a.input);
  const auto f = epcde::fit(data, loss);
  const std::size_t ny = std::max<std::size_t>(a.grid[0], 2);
  const std::size_t nx = std::max<std::size_t>(a.grid[1], 2);
  const double ya = loss == Loss::square ? 0.0 : a.y_min;
  const double yb = loss == Loss::square ? 1.0 : a.y_max;
  if (!(yb > ya)) throw epcde::io::ParseError("empty response window");
  const auto ys = linspace(ya, yb, ny);
  const auto xs = linspace(0.0, 1.0, nx);
  auto values = epcde::evaluate_grid(f, ys, xs);
  if (a.project) {
    values = epcde::project_nonneg(values, ys[1] - ys[0], loss).values;
  }
  epcde::io::GridData grid;
  grid.meta.loss = loss;
  grid.meta.n = data.size();
  grid.meta.version = EPCDE_VERSION;
  grid.meta.dhat = f.difficulty;
  grid.meta.K = f.schedule.K;
  grid.meta.T = f.schedule.T;
  grid.ys = ys;
  grid.xs = xs;
  grid.values = values;
  epcde::io::write_grid(a.output, grid);
  std::cout << "wrote " << a.output << " (" << ny << "x" << nx
            << " grid, K=" << f.schedule.K << ", T=" << f.schedule.T << ")\n";
  return 0;
}

struct RiskArgs {
  std::vector<std::string> cls;
  double Q = -1.0;
  std::size_t n = 0;
  std::string loss = "square";
  std::string design = "uniform";
  std::string output;
};

int run_risk(const RiskArgs& a) {
  const Loss loss = parse_loss(a.loss);
  if (a.cls.empty()) throw epcde::io::ParseError("--class is required");
  const std::string& name = a.cls[0];
  auto num = [&](std::size_t i) -> double {
    if (i >= a.cls.size()) {
      throw epcde::io::ParseError("class '" + name + "' needs more parameters");
    }
    return std::stod(a.cls[i]);
  };
  auto need_q = [&]() -> double {
    if (!(a.Q > 0.0)) throw epcde::io::ParseError("--Q is required for this class");
    return a.Q;
  };
  epcde::SmoothnessClass cls = epcde::SmoothnessClass::bounded_spectrum(1.0);
  if (name == "sobolev") {
    cls = epcde::SmoothnessClass::sobolev(static_cast<int>(num(1)),
                                          static_cast<int>(num(2)), need_q());
  } else if (name == "analytic_sobolev") {
    cls = epcde::SmoothnessClass::analytic_sobolev(num(1),
                                                   static_cast<int>(num(2)),
                                                   need_q());
  } else if (name == "analytic") {
    cls = epcde::SmoothnessClass::analytic(num(1), num(2));
  } else if (name == "uni_sobolev") {
    cls = epcde::SmoothnessClass::uni_sobolev(static_cast<int>(num(1)), need_q());
  } else if (name == "uni_analytic") {
    cls = epcde::SmoothnessClass::uni_analytic(num(1));
  } else if (name == "bounded_spectrum") {
    cls = epcde::SmoothnessClass::bounded_spectrum(num(1));
  } else {
    throw epcde::io::ParseError("unknown class '" + name + "'");
  }

  double difficulty = 1.0;
  if (a.design != "uniform") {
    // Any non-uniform design is supplied as a dataset file; the plug-in
    // difficulty is computed from it.
    const auto data = epcde::io::read_dataset(a.design);
    const auto phat = epcde::estimate_design(data.x);
    difficulty = epcde::estimate_difficulty(data, phat, loss);
  }
  const auto rep = epcde::risk_report(cls, difficulty, a.n);
  std::cout << "difficulty," << epcde::io::format_double(rep.coefficient_of_difficulty) << "\n";
  std::cout << "pinsker," << epcde::io::format_double(rep.pinsker) << "\n";
  std::cout << "risk," << epcde::io::format_double(rep.risk_closed_form)
            << (rep.constant_up_to_c ? " (up to a generic constant)" : "") << "\n";
  if (rep.risk_series) {
    std::cout << "risk_series," << epcde::io::format_double(*rep.risk_series) << "\n";
    std::cout << "eta," << epcde::io::format_double(*rep.eta) << "\n";
    std::cout << "residual," << epcde::io::format_double(*rep.residual) << "\n";
  }
  if (!a.output.empty()) {
    std::ofstream out(a.output);
    if (!out) throw std::runtime_error("cannot write '" + a.output + "'");
    out << "difficulty,pinsker,risk,risk_series,eta,residual\n";
    out << epcde::io::format_double(rep.coefficient_of_difficulty) << ','
        << epcde::io::format_double(rep.pinsker) << ','
        << epcde::io::format_double(rep.risk_closed_form) << ','
        << (rep.risk_series ? epcde::io::format_double(*rep.risk_series) : "") << ','
        << (rep.eta ? epcde::io::format_double(*rep.eta) : "") << ','
        << (rep.residual ? epcde::io::format_double(*rep.residual) : "") << "\n";
  }
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = epcde::io::read_config(config_path);
  const auto sc = epcde::io::study_from_config(cfg);
  const auto report = epcde::run_study(sc);
  std::filesystem::create_directories(out_dir);

  std::ofstream summary(out_dir + "/summary.csv");
  if (!summary) throw std::runtime_error("cannot write summary.csv");
  summary << "n,replicates,failures,mean_ise_ep,mean_ise_oracle,"
             "med_ratio_super,med_ratio_sub\n";
  std::size_t total_fail = 0;
  for (std::size_t i = 0; i < report.n_values.size(); ++i) {
    total_fail += report.failures[i];
    summary << report.n_values[i] << ',' << report.replicates << ','
            << report.failures[i] << ','
            << epcde::io::format_double(report.mean_ise_ep[i]) << ','
            << epcde::io::format_double(report.mean_ise_oracle[i]) << ','
            << epcde::io::format_double(report.median_ratio_super[i]) << ','
            << epcde::io::format_double(report.median_ratio_sub[i]) << "\n";
  }
  std::ofstream detail(out_dir + "/replicates.csv");
  if (!detail) throw std::runtime_error("cannot write replicates.csv");
  detail << "n,replicate,ise_ep,ise_super,ise_sub,ise_oracle\n";
  for (std::size_t i = 0; i < report.n_values.size(); ++i) {
    for (std::size_t r = 0; r < report.replicates; ++r) {
      detail << report.n_values[i] << ',' << r << ','
             << epcde::io::format_double(report.ise_ep[i][r]) << ','
             << epcde::io::format_double(report.ise_super[i][r]) << ','
             << epcde::io::format_double(report.ise_sub[i][r]) << ','
             << epcde::io::format_double(report.ise_oracle[i][r]) << "\n";
    }
  }
  std::cout << "wrote " << out_dir << "/summary.csv and replicates.csv\n";
  const std::size_t cells = report.n_values.size() * report.replicates;
  if (total_fail == cells) {
    std::cerr << "error: every replicate failed\n";
    return 1;
  }
  if (total_fail > 0) {
    std::cout << total_fail << " replicate(s) failed; see NaN rows\n";
  }
  return 0;
}

struct DesignArgs {
  std::string target;
  std::string sigma_file, mass_file;
  std::size_t grid = 101;
  std::string output;
};

std::vector<double> read_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw epcde::io::ParseError("cannot open '" + path + "'");
  std::vector<double> v;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string t = line;
    t.erase(0, t.find_first_not_of(" \t\r"));
    if (!t.empty()) t.erase(t.find_last_not_of(" \t\r") + 1);
    if (t.empty()) continue;
    double val = 0.0;
    try {
      val = std::stod(t);
    } catch (const std::exception&) {
      throw epcde::io::ParseError("row " + std::to_string(row) + ": bad value '" + t + "'");
    }
    if (!std::isfinite(val) || val <= 0.0) {
      throw epcde::io::ParseError("row " + std::to_string(row) +
                                  ": samples must be positive and finite");
    }
    v.push_back(val);
  }
  if (v.size() < 2) throw epcde::io::ParseError("'" + path + "': need >= 2 samples");
  return v;
}

int run_design(const DesignArgs& a) {
  const bool sigma = !a.sigma_file.empty();
  if (sigma == !a.mass_file.empty()) {
    throw epcde::io::ParseError("exactly one of --sigma-file/--mass-file required");
  }
  epcde::DesignTarget target;
  if (a.target == "regression") {
    target = epcde::DesignTarget::regression;
  } else if (a.target == "cdensity") {
    target = epcde::DesignTarget::cdensity;
  } else {
    throw epcde::io::ParseError("--target must be 'regression' or 'cdensity'");
  }
  if (sigma != (target == epcde::DesignTarget::regression)) {
    throw epcde::io::ParseError(
        "--sigma-file pairs with regression, --mass-file with cdensity");
  }
  const auto samples = read_column(sigma ? a.sigma_file : a.mass_file);
  // Piecewise-linear reading of the samples as values on the uniform grid.
  auto fn = [samples](double x) {
    const double pos = x * static_cast<double>(samples.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(pos), samples.size() - 2);
    const double t = pos - static_cast<double>(i);
    return (1.0 - t) * samples[i] + t * samples[i + 1];
  };
  const auto density = epcde::optimal_design(target, fn);
  const std::size_t nodes = std::max<std::size_t>(a.grid, 3);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output);
    if (!file) throw std::runtime_error("cannot write '" + a.output + "'");
    out = &file;
  }
  *out << "x,density\n";
  for (std::size_t i = 0; i < nodes; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(nodes - 1);
    *out << epcde::io::format_double(x) << ','
         << epcde::io::format_double(density(x)) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blockwise-shrinkage conditional density estimation toolkit"};
  app.set_version_flag("--version", EPCDE_VERSION);
  app.require_subcommand(1);

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Fit a conditional density from a dataset CSV");
  est->add_option("--input", ea.input, "dataset CSV (header y,x)")->required();
  est->add_option("--loss", ea.loss, "square | line");
  est->add_option("--grid", ea.grid, "NY NX evaluation grid")->expected(2);
  est->add_flag("--project", ea.project, "clip/renormalize to a nonnegative grid");
  est->add_option("--y-min", ea.y_min, "response grid lower edge (line loss)");
  est->add_option("--y-max", ea.y_max, "response grid upper edge (line loss)");
  est->add_option("--output", ea.output, "grid CSV path")->required();

  RiskArgs ra;
  auto* risk = app.add_subcommand("risk", "Closed-form minimax risk for a smoothness class");
  risk->add_option("--class", ra.cls,
                   "class name and numeric parameters (sobolev M_Y M_X | "
                   "analytic_sobolev GAMMA M_X | analytic G1 G2 | uni_sobolev A | "
                   "uni_analytic G | bounded_spectrum Q)")
      ->expected(1, 3)->required();
  risk->add_option("--Q", ra.Q, "Sobolev radius");
  risk->add_option("--n", ra.n, "sample size")->required();
  risk->add_option("--loss", ra.loss, "square | line");
  risk->add_option("--design", ra.design, "'uniform' or a dataset CSV path");
  risk->add_option("--output", ra.output, "optional CSV path");

  std::string sim_config, sim_out;
  auto* sim = app.add_subcommand("simulate", "Run a seeded Monte Carlo study");
  sim->add_option("--config", sim_config, "study config file")->required();
  sim->add_option("--output", sim_out, "output directory")->required();

  DesignArgs da;
  auto* des = app.add_subcommand("design", "Optimal design density from function samples");
  des->add_option("--target", da.target, "regression | cdensity")->required();
  des->add_option("--sigma-file", da.sigma_file, "sigma(x) samples on a uniform grid");
  des->add_option("--mass-file", da.mass_file, "mass(x) samples on a uniform grid");
  des->add_option("--grid", da.grid, "output grid size");
  des->add_option("--output", da.output, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (est->parsed()) return run_estimate(ea);
    if (risk->parsed()) return run_risk(ra);
    if (sim->parsed()) return run_simulate(sim_config, sim_out);
    if (des->parsed()) return run_design(da);
  } catch (const epcde::io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
