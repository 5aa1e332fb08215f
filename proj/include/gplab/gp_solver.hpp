#pragma once

#include <optional>
#include <vector>

#include "gplab/grid.hpp"

namespace gplab::gp {

struct GpParams {
  double coupling = 0.0;                  // g = 8 pi a
  std::optional<Eigen::VectorXd> trap;    // V_ext at the grid sites

  void validate(const Grid& grid) const;
};

// Harmonic trap strength * |x|^2 sampled on the grid.
Eigen::VectorXd harmonic_trap(const Grid& grid, double strength);

struct EnergyBreakdown {
  double kinetic = 0.0;
  double trap = 0.0;
  double interaction = 0.0;
  double total = 0.0;
};

struct GradientResult {
  Field residual;
  double mu = 0.0;
};

EnergyBreakdown gp_energy(const Spectral& sp, const Field& phi, const GpParams& p);
// r = (-Delta + V_ext + g|phi|^2) phi - mu phi with mu the Rayleigh quotient.
GradientResult gp_gradient(const Spectral& sp, const Field& phi, const GpParams& p);

struct MinimizeOptions {
  int max_iterations = 200000;
  double dtau_min = 1e-12;
};

struct GroundState {
  Field phi;
  EnergyBreakdown energy;
  double mu = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double boundary_density = 0.0;  // max |phi| on the outer shell of sites
  std::vector<double> energy_history;  // energies of accepted steps
};

// Projected gradient flow phi <- normalize(phi - dtau P r) with the kinetic preconditioner
// P = (sigma + |k|^2)^{-1}. dtau is halved on energy increase and regrows up to its initial value.
GroundState minimize_imaginary_time(const Spectral& sp, const GpParams& p, const Field& init,
                                    double dtau, double tol, const MinimizeOptions& opt = {});

enum class SplitScheme { Strang, Yoshida4 };

struct EvolveOptions {
  int sample_every = 1;
  SplitScheme scheme = SplitScheme::Strang;
  double t0 = 0.0;
};

struct Trajectory {
  Grid grid;
  double coupling = 0.0;
  double dt = 0.0;         // integrator step
  double sample_dt = 0.0;  // spacing of stored samples
  std::vector<double> times;
  std::vector<Field> samples;
  double max_step_mass_drift = 0.0;

  // Index of the sample at time t, or error if t is not a sample time.
  size_t index_of(double t) const;
};

Trajectory evolve_split_step(const Spectral& sp, const Field& phi0, const GpParams& p, double dt,
                             int n_steps, const EvolveOptions& opt = {});

double sobolev_norm(const Spectral& sp, const Field& phi, int m);

// -i(-Delta + g|phi|^2) phi.
Field gp_time_derivative(const Spectral& sp, const Field& phi, double coupling);
// -i[(-Delta + 2g|phi|^2) dphi + g phi^2 conj(dphi)].
Field gp_second_time_derivative(const Spectral& sp, const Field& phi, const Field& dphi,
                                double coupling);

// Analytic derivative of the given order evaluated from the sample at time t.
Field time_derivative(const Spectral& sp, const Trajectory& traj, int order, double t);
// Centered finite difference of the samples around t.
Field fd_time_derivative(const Trajectory& traj, int order, double t);

struct TrajectoryObservables {
  double t, mass, e_kin, e_int, e_total, h1, h2, h4;
};
std::vector<TrajectoryObservables> observables(const Spectral& sp, const Trajectory& traj);

}  // namespace gplab::gp
