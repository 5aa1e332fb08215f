#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gplab::config {

// Every validation problem found in one pass.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

private:
  std::vector<std::string> errors_;
};

struct RunConfig {
  // [run]
  std::string command = "scatter";
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  // [grid]
  int dim = 1;
  int points = 8;
  double length = 8.0;

  // [potential] kind is zero, square_well, smooth_bump or table
  std::string potential = "square_well";
  double depth = 2.0;
  double radius = 1.0;
  double dr = 1e-3;
  std::string table;

  // [scatter]
  double r_max = 8.0;
  double scatter_tol = 1e-6;
  int trial_family_size = 64;
  std::vector<int> scaling_factors{2, 4, 8};

  // [gp] initial is gaussian, constant, plane_wave or a GPF1 file path
  double coupling = 0.0;
  double trap_strength = 0.0;
  std::string initial = "gaussian";
  double width = 1.0;
  std::vector<int> wave_vector{1, 0, 0};
  double dtau = 0.0;  // 0 picks 0.5 for the preconditioned flow
  double gp_tol = 1e-8;
  int max_iterations = 200000;
  double dt = 1e-3;
  int steps = 1000;
  int sample_every = 10;
  std::string scheme = "strang";

  // [manybody] state is product, correlated or ground
  int particles = 2;
  std::string interaction = "sampled";
  double interaction_scale = 0.0;
  std::string state = "product";
  double mb_dt = 0.01;
  int mb_steps = 100;
  int mb_sample_every = 10;
  int gp_substeps = 10;
  int krylov_dim = 24;
  double krylov_tol = 1e-13;
  double eig_tol = 1e-9;
  std::uint64_t dimension_cap = 4000000;

  // [renorm]
  double cutoff = 0.5;
  double identity_tol = 1e-8;
  int random_draws = 200;
  double fd_dt = 1e-2;

  // [experiment]
  std::vector<int> experiment_particles{2, 3};
  std::vector<double> experiment_depths{0.25, 0.5, 1.0};
  double experiment_trap = 1.0;
  std::string experiment_interaction = "cell_averaged";
  std::string label = "3d";

  bool operator==(const RunConfig&) const = default;
};

const std::vector<std::string>& commands();

// key = value text with [section] headers; '#' and ';' start comments.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");
std::string serialize(const RunConfig& cfg);

}  // namespace gplab::config
