#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "gplab/config.hpp"
#include "gplab/io.hpp"
#include "gplab/run.hpp"

using namespace gplab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gplab_cli_io_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

}  // namespace

TEST_CASE("config defaults and round trip") {
  const auto d = config::parse_config_text("[run]\ncommand = scatter\n");
  CHECK(d == config::RunConfig{});
  auto c = config::parse_config_text(
      "# comment\n[run]\ncommand = verify-ops\nseed = 17\n; other comment\n[grid]\ndim = 2\npoints = 16\n"
      "length = 3.25\n[scatter]\nscaling_factors = 2, 3\n[experiment]\ndepths = 0.1,0.2\n");
  CHECK(c.command == "verify-ops");
  CHECK(c.seed == 17);
  CHECK(c.dim == 2);
  CHECK(c.length == 3.25);
  CHECK(c.scaling_factors == std::vector<int>{2, 3});
  CHECK(c.experiment_depths == std::vector<double>{0.1, 0.2});
  const auto again = config::parse_config_text(config::serialize(c));
  CHECK(again == c);
  c.dt = 0.1 + 0.2;  // not representable in a short decimal
  CHECK(config::parse_config_text(config::serialize(c)).dt == c.dt);
}

TEST_CASE("config validation reports every problem") {
  try {
    config::parse_config_text("[run]\ncommand = nope\n[grid]\npoints = 12\nlength = -1\n[gp]\nbogus = 1\n");
    FAIL("expected a ConfigError");
  } catch (const config::ConfigError& e) {
    CHECK(e.errors().size() >= 4);
  }
  CHECK_THROWS_AS(config::parse_config_text("[grid]\ndim = two\n"), config::ConfigError);
  CHECK_THROWS_AS(config::parse_config("/nonexistent/gplab.ini"), config::ConfigError);
}

TEST_CASE("relative paths are anchored at the config file") {
  const auto dir = scratch("paths");
  fs::create_directories(dir / "sub");
  spit(dir / "sub" / "pot.txt", "0 1\n0.5 1\n1 0\n");
  spit(dir / "sub" / "run.ini", "[potential]\nkind = table\ntable = pot.txt\n[gp]\ninitial = gaussian\n");
  const auto c = config::parse_config((dir / "sub" / "run.ini").string());
  CHECK(fs::path(c.table) == (fs::absolute(dir) / "sub" / "pot.txt").lexically_normal());
  CHECK(c.initial == "gaussian");
  fs::remove_all(dir);
}

TEST_CASE("GPF1 field round trip and corruption") {
  const auto dir = scratch("gpf");
  fs::create_directories(dir);
  const auto g = gp::Grid::cube(2, 8, 3.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  gp::Field f(g);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = cplx(d(rng), d(rng));
  const auto p = (dir / "f.gpf").string();
  io::write_field(p, f);
  const auto r = io::read_field(p);
  CHECK(r.grid == g);
  CHECK(r.values == f.values);
  // 4 magic + 4 dim + 2*4 points + 2*8 spacing + 64 * 16 values
  CHECK(fs::file_size(p) == 4 + 4 + 8 + 16 + 64 * 16);

  auto bytes = slurp(p);
  spit(dir / "bad.gpf", "XPF1" + bytes.substr(4));
  CHECK_THROWS(io::read_field((dir / "bad.gpf").string()));
  spit(dir / "short.gpf", bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS(io::read_field((dir / "short.gpf").string()));
  bytes[4] = 7;
  spit(dir / "dim.gpf", bytes);
  CHECK_THROWS(io::read_field((dir / "dim.gpf").string()));
  fs::remove_all(dir);
}

TEST_CASE("MBF1 state round trip and sector mismatch") {
  const auto dir = scratch("mbf");
  fs::create_directories(dir);
  const fock::Ladder L(4, 2);
  fock::FockVector psi{fock::Vec::Random(static_cast<Eigen::Index>(L.basis(2).dimension())), 4, 2};
  const auto p = (dir / "s.mbf").string();
  io::write_state(p, psi);
  const auto r = io::read_state(p);
  CHECK(r.modes == 4);
  CHECK(r.particles == 2);
  CHECK(r.coeffs == psi.coeffs);
  auto bytes = slurp(p);
  bytes[8] = 3;  // particles 2 -> 3 no longer matches the stored dimension
  spit(dir / "bad.mbf", bytes);
  CHECK_THROWS(io::read_state((dir / "bad.mbf").string()));
  spit(dir / "short.mbf", slurp(p).substr(0, 30));
  CHECK_THROWS(io::read_state((dir / "short.mbf").string()));
  fs::remove_all(dir);
}

TEST_CASE("CSV numbers round trip exactly") {
  const double x = 0.1 + 0.2;
  CHECK(std::stod(io::format_double(x)) == x);
  CHECK(std::stod(io::format_double(-1e-300)) == -1e-300);
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  io::write_csv((dir / "t.csv").string(), {"a", "b"}, {{1.0, x}, {2.5, -3.0}});
  std::ifstream in(dir / "t.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,b");
  std::getline(in, line);
  CHECK(std::stod(line.substr(line.find(',') + 1)) == x);
  fs::remove_all(dir);
}

TEST_CASE("runs are deterministic and write the report schema") {
  const auto dir = scratch("run");
  auto cfg = config::parse_config_text(
      "[run]\ncommand = verify-ops\nseed = 3\n[grid]\ndim = 1\npoints = 4\nlength = 4\n"
      "[manybody]\nparticles = 2\ninteraction_scale = 1\n[renorm]\ncutoff = 0.5\nrandom_draws = 10\n");
  cfg.output_dir = (dir / "a").string();
  const auto a = run::run(cfg);
  cfg.output_dir = (dir / "b").string();
  const auto b = run::run(cfg);
  REQUIRE(a.checks.size() == b.checks.size());
  for (size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].measured == b.checks[i].measured);
  CHECK(a.results.dump() == b.results.dump());

  const auto j = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
  CHECK(j["schema"] == "gplab-report-1");
  CHECK(j["command"] == "verify-ops");
  CHECK(j["seed"] == 3);
  CHECK(j["checks"].is_array());
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("anchor"));
    CHECK(c.contains("measured"));
    CHECK(c.contains("tolerance"));
    CHECK(c.contains("passed"));
  }
  CHECK(config::parse_config_text(j["config"].get<std::string>()).seed == 3);
  fs::remove_all(dir);
}

TEST_CASE("check relations") {
  CHECK(run::make_check("x", "a", 1.0, 2.0).passed);
  CHECK_FALSE(run::make_check("x", "a", 3.0, 2.0).passed);
  CHECK(run::make_check("x", "a", 3.0, 2.0, ">=").passed);
  CHECK_FALSE(run::make_check("x", "a", 2.0, 2.0, ">").passed);
  CHECK_FALSE(run::make_check("x", "a", std::nan(""), 2.0).passed);
  CHECK_THROWS_AS(run::make_check("x", "a", 1.0, 2.0, "~"), PreconditionError);
}

TEST_CASE("shipped configs parse") {
  for (const auto& e : fs::directory_iterator(fs::path(GPLAB_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".ini") continue;
    INFO(e.path().string());
    CHECK_NOTHROW(config::parse_config(e.path().string()));
  }
}
