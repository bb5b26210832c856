// Runs the command-line tool end to end; BRANCHWAVE_CLI is its path.

#include "doctest.h"

#include "csv.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("branchwave_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

int run(const std::string& args, const Scratch& s) {
  const std::string cmd = "cd '" + s.dir.string() + "' && '" BRANCHWAVE_CLI "' " + args + " > out.txt 2> err.txt";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

json load(const std::string& path) {
  std::ifstream is(path);
  return json::parse(is);
}

}  // namespace

TEST_CASE("wave report and profile") {
  Scratch s("wave");
  REQUIRE(run("wave --c 2 --r 0 --i-minus 2.0 --out w", s) == 0);
  const json j = load(s / "w.json");
  for (const char* key : {"limits", "residuals", "rates"}) CHECK(j.contains(key));
  CHECK(std::abs(j["limits"]["i_plus_inf"].get<double>()) < 1e-3);
  CHECK(j["limits"]["sum_residual"].get<double>() < 1e-3);
  const auto t = csvio::read_file(s / "w.csv");
  CHECK(t.header == std::vector<std::string>{"z", "a", "b", "i"});
  CHECK(t.rows() > 100);

  REQUIRE(run("wave --c 2 --r 0 --i-minus 1.8 --out w", s) == 0);
  CHECK(load(s / "w.json")["limits"]["i_plus_inf"].get<double>() == doctest::Approx(0.2).epsilon(5e-3));
}

TEST_CASE("config files and precedence") {
  Scratch s("config");
  {
    std::ofstream cfg(s / "run.cfg");
    cfg << "# a comment\nc = 3\nr=1\ni-minus = 1.5\nout=from_config\njson=true\n";
  }
  REQUIRE(run("--config run.cfg wave", s) == 0);
  json j = load(s / "from_config.json");
  CHECK(j["c"].get<double>() == 3.0);
  CHECK(j["r"].get<double>() == 1.0);
  CHECK(j["i_minus"].get<double>() == 1.5);

  REQUIRE(run("wave --config run.cfg --c 2 --out flag", s) == 0);
  j = load(s / "flag.json");
  CHECK(j["c"].get<double>() == 2.0);
  CHECK(j["r"].get<double>() == 1.0);

  {
    std::ofstream bad(s / "bad.cfg");
    bad << "no-such-option=1\n";
  }
  CHECK(run("--config bad.cfg wave", s) == 64);
  CHECK(run("--config missing.cfg wave", s) == 64);
}

TEST_CASE("file initial data round-trips") {
  Scratch s("ic");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  csvio::Table ic;
  ic.header = {"x", "A", "I"};
  ic.columns.resize(3);
  const int n = 64;
  for (int k = 0; k < n; ++k) {
    ic.columns[0].push_back(-3.2 + 0.1 * k);
    ic.columns[1].push_back(u(rng) * 1e-3);
    ic.columns[2].push_back(u(rng));
  }
  // the grid is rebuilt from the end points, so store what the tool will reproduce
  for (int k = 0; k < n; ++k) ic.columns[0][k] = -3.2 + k * ((ic.columns[0].back() + 3.2) / (n - 1));
  csvio::write_file(s / "ic.csv", ic);

  REQUIRE(run("pde --ic file --ic-file ic.csv --t-end 0.2 --snapshot-dt 0.1 --out p", s) == 0);
  const auto series = csvio::read_file(s / "p_series.csv");
  CHECK(series.header == std::vector<std::string>{"t", "x", "A", "I"});
  REQUIRE(series.rows() == 3 * n);
  for (int k = 0; k < n; ++k) {
    REQUIRE(series.column("t")[k] == 0.0);
    REQUIRE(series.column("A")[k] == ic.columns[1][k]);
    REQUIRE(series.column("I")[k] == ic.columns[2][k]);
    REQUIRE(std::abs(series.column("x")[k] - ic.columns[0][k]) < 1e-12);
  }
  const json rep = load(s / "p.json");
  CHECK(rep.contains("c_est"));
  CHECK(rep.contains("window"));
  CHECK(rep.contains("residual"));

  REQUIRE(run("pde --ic file --ic-file ic.csv --t-end 0.2 --series-format json --out q", s) == 0);
  const json js = load(s / "q_series.json");
  CHECK(js["snapshots"][0]["A"][5].get<double>() == ic.columns[1][5]);

  {
    std::ofstream bad(s / "ragged.csv");
    bad << "x,A,I\n0,1,2\n0.1,1\n";
  }
  CHECK(run("pde --ic file --ic-file ragged.csv", s) == 64);
}

TEST_CASE("pde defaults reproduce the front") {
  Scratch s("pde");
  REQUIRE(run("pde --json --out f", s) == 0);
  const json j = load(s / "f.json");
  CHECK(j["c_est"].get<double>() == doctest::Approx(2.0).epsilon(0.05));
  CHECK(j["plateau"].get<double>() == doctest::Approx(2.0).epsilon(0.02));

  REQUIRE(run("pde --ic steady --level 0.7 --grid 101:-10:10 --t-end 2 --out st", s) == 0);
  const json st = load(s / "st.json");
  CHECK(st["max_change"].get<double>() == 0.0);
  CHECK(st["c_est"].is_null());
}

TEST_CASE("evans outputs") {
  Scratch s("evans");
  REQUIRE(run("evans --self-test --out self", s) == 0);
  CHECK(load(s / "self.json")["winding"].get<int>() == 1);

  REQUIRE(run("evans --contour 1e-3:1000:24 --out e", s) == 0);
  const json j = load(s / "e.json");
  CHECK(j["winding"].get<int>() == 0);
  CHECK(j["deviation"].get<double>() < 0.1);
  CHECK(j["caveats"].size() == 2);
  const auto t = csvio::read_file(s / "e.csv");
  CHECK(t.header == std::vector<std::string>{"re_gamma", "im_gamma", "re_E", "im_E"});
  CHECK(t.rows() == j["samples"].get<std::size_t>());
}
