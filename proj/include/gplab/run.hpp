#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gplab/config.hpp"
#include "gplab/gp_solver.hpp"
#include "gplab/scattering.hpp"

namespace gplab::run {

struct Check {
  std::string name;
  std::string anchor;  // tag of the identity or bound being exercised
  double measured = 0.0;
  double tolerance = 0.0;
  std::string relation = "<=";  // measured <relation> tolerance
  bool passed = false;
};

Check make_check(std::string name, std::string anchor, double measured, double tolerance,
                 std::string relation = "<=");

struct Report {
  std::string command;
  std::string version;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  std::string config_text;
  std::vector<Check> checks;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> artifacts;

  bool passed() const;
  nlohmann::json to_json() const;
};

std::string version();

// Helpers shared with the tests and bindings.
scattering::RadialPotential make_potential(const config::RunConfig& cfg);
gp::Grid make_grid(const config::RunConfig& cfg);
gp::Field initial_field(const config::RunConfig& cfg, const gp::Grid& grid);
// GP coupling matching the lattice many-body scaling: 8 pi a N / s in 3D. The 1D/2D testbeds
// have no scattering renormalization and use the Born value (N / s) int V.
double effective_coupling(const scattering::ScatteringSolution& sol, int N, double scale, int dim = 3);

// Runs the configured command, writes CSV/binary artifacts and report.json into
// cfg.output_dir and returns the report.
Report run(const config::RunConfig& cfg);

}  // namespace gplab::run
