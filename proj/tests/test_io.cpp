#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <string>

#include "epcde/io.hpp"
#include "epcde/stats.hpp"

using namespace epcde;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("epcde_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("dataset round trip is bit exact") {
  TempDir tmp;
  SamplePairs d;
  stats::Rng rng(23);
  for (int i = 0; i < 64; ++i) {
    d.y.push_back(4.0 * (rng.uniform() - 0.5));
    d.x.push_back(rng.uniform());
  }
  d.kind = DesignKind::fixed;
  const auto path = tmp.file("data.csv");
  io::write_dataset(path, d);
  auto back = io::read_dataset(path);
  CHECK(back.y == d.y);
  CHECK(back.x == d.x);
  CHECK(back.kind == DesignKind::fixed);
}

TEST_CASE("dataset reader rejects malformed rows with their row number") {
  TempDir tmp;
  const auto path = tmp.file("bad.csv");

  write_text(path, "y,x\n0.5,0.5\n0.3,1.2\n");
  try {
    io::read_dataset(path);
    FAIL("expected ParseError");
  } catch (const io::ParseError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }

  write_text(path, "y,x\nnan,0.5\n");
  CHECK_THROWS_AS(io::read_dataset(path), io::ParseError);

  write_text(path, "y,x\n0.5,inf\n");
  CHECK_THROWS_AS(io::read_dataset(path), io::ParseError);

  write_text(path, "a,b\n0.5,0.5\n");
  CHECK_THROWS_AS(io::read_dataset(path), io::ParseError);

  write_text(path, "y,x\n0.5\n");
  CHECK_THROWS_AS(io::read_dataset(path), io::ParseError);

  CHECK_THROWS_AS(io::read_dataset(tmp.file("missing.csv")), io::ParseError);
}

TEST_CASE("grid round trip preserves metadata and values") {
  TempDir tmp;
  io::GridData g;
  g.meta.loss = Loss::line;
  g.meta.n = 1234;
  g.meta.seed = 99;
  g.meta.version = "0.0.0-test";
  g.meta.dhat = 1.0000000001234;
  g.meta.K = 5;
  g.meta.T = 3;
  stats::Rng rng(5);
  for (int i = 0; i < 5; ++i) g.ys.push_back(-2.0 + i);
  for (int i = 0; i < 3; ++i) g.xs.push_back(0.25 * (i + 1));
  for (std::size_t iy = 0; iy < g.ys.size(); ++iy) {
    g.values.emplace_back();
    for (std::size_t ix = 0; ix < g.xs.size(); ++ix) {
      g.values.back().push_back(2.0 * rng.uniform() - 1.0);
    }
  }
  const auto path = tmp.file("grid.csv");
  io::write_grid(path, g);
  auto back = io::read_grid(path);
  CHECK(back.meta.loss == Loss::line);
  CHECK(back.meta.n == 1234);
  CHECK(back.meta.seed == 99);
  CHECK(back.meta.dhat == g.meta.dhat);
  CHECK(back.meta.K == 5);
  CHECK(back.meta.T == 3);
  CHECK(back.ys == g.ys);
  CHECK(back.xs == g.xs);
  CHECK(back.values == g.values);
}

TEST_CASE("grid reader verifies rectangle completeness") {
  TempDir tmp;
  io::GridData g;
  g.meta.loss = Loss::square;
  g.meta.n = 100;
  g.ys = {0.0, 0.5, 1.0};
  g.xs = {0.25, 0.75};
  g.values = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  const auto path = tmp.file("grid.csv");
  io::write_grid(path, g);

  // drop the last row
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();
  text.erase(text.find_last_of('\n', text.size() - 2) + 1);
  const auto truncated = tmp.file("trunc.csv");
  write_text(truncated, text);
  CHECK_THROWS_AS(io::read_grid(truncated), io::ParseError);
}

TEST_CASE("format_double survives a strtod round trip") {
  for (double v : {1.0 / 3.0, 0.1, 1e-300, 6.02e23, -0.0, 3.141592653589793}) {
    const std::string s = io::format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("config parsing") {
  TempDir tmp;
  const auto path = tmp.file("a.cfg");
  write_text(path,
             "# comment line\n"
             "model = independent_normal\n"
             "n_list = 100, 200\n"
             "\n"
             "seed = 42   # trailing comment\n"
             "replicates = 3\n");
  auto cfg = io::read_config(path);
  CHECK(cfg.at("model") == "independent_normal");
  CHECK(cfg.at("seed") == "42");
  CHECK(cfg.at("n_list") == "100, 200");

  write_text(path, "seed = 1\nseed = 2\n");
  CHECK_THROWS_AS(io::read_config(path), io::ParseError);
  write_text(path, "not a key value line\n");
  CHECK_THROWS_AS(io::read_config(path), io::ParseError);
}

TEST_CASE("study_from_config builds a full study") {
  std::map<std::string, std::string> cfg{
      {"model", "independent_normal"}, {"n_list", "100,150,200"},
      {"replicates", "7"},             {"seed", "123"},
      {"loss", "line"},                {"grid_ny", "101"},
      {"grid_nx", "51"},               {"with_oracle", "1"},
      {"threads", "2"},
  };
  auto study = io::study_from_config(cfg);
  CHECK(study.n_values == std::vector<std::size_t>{100, 150, 200});
  CHECK(study.replicates == 7);
  CHECK(study.seed == 123);
  CHECK(study.loss == Loss::line);
  CHECK(study.grid_ny == 101);
  CHECK(study.with_oracle);
  CHECK(study.threads == 2);
  CHECK(study.model.kind == ModelSpec::Kind::independent);
}

TEST_CASE("study_from_config rejects bad keys and values") {
  std::map<std::string, std::string> base{
      {"model", "independent_normal"}, {"n_list", "100"}, {"replicates", "2"},
      {"seed", "1"}};
  auto bad = base;
  bad["surprise"] = "1";
  CHECK_THROWS_AS(io::study_from_config(bad), io::ParseError);

  auto tiny = base;
  tiny["n_list"] = "8";  // below the schedule minimum
  CHECK_THROWS_AS(io::study_from_config(tiny), io::ParseError);

  auto unknown_model = base;
  unknown_model["model"] = "mystery";
  CHECK_THROWS_AS(io::study_from_config(unknown_model), io::ParseError);

  auto bad_loss = base;
  bad_loss["loss"] = "cubed";
  CHECK_THROWS_AS(io::study_from_config(bad_loss), io::ParseError);
}

TEST_CASE("additive study configs wire the location-scale model") {
  std::map<std::string, std::string> cfg{
      {"model", "additive"}, {"m_base", "0.5"},   {"m_amp", "0.3"},
      {"m_freq", "1"},       {"sigma", "0.1"},    {"n_list", "100"},
      {"replicates", "2"},   {"seed", "9"},       {"loss", "square"},
  };
  auto study = io::study_from_config(cfg);
  CHECK(study.model.kind == ModelSpec::Kind::additive);
  CHECK(study.loss == Loss::square);
  CHECK(study.model.response_domain == ResponseDomain::unit_interval);
  CHECK(study.model.m(0.0) == doctest::Approx(0.8));
  CHECK(study.model.sigma(0.3) == doctest::Approx(0.1));
}
