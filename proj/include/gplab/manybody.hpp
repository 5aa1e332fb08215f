#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gplab/fock.hpp"
#include "gplab/gp_solver.hpp"
#include "gplab/lattice.hpp"
#include "gplab/linalg.hpp"
#include "gplab/renorm.hpp"
#include "gplab/scattering.hpp"

namespace gplab::manybody {

using fock::FockVector;
using fock::Mat;
using fock::SparseOperator;
using fock::Vec;

struct ManyBodyConfig {
  gp::Grid grid;
  int particles = 2;
  scattering::RadialPotential potential;
  lattice::InteractionModel interaction = lattice::InteractionModel::Sampled;
  double interaction_scale = 0.0;  // 0 selects the particle number
  std::optional<Eigen::VectorXd> trap;
  size_t dimension_cap = 0;  // 0 selects fock::dimension_cap()

  double scale() const { return interaction_scale > 0.0 ? interaction_scale : particles; }
};

// Lattice model plus the sector ladder 0..N it acts on.
struct System {
  lattice::LatticeModel model;
  fock::Ladder ladder;
  int particles;
};

System make_system(const ManyBodyConfig& cfg);

// sum (T + trap)_ij a*_i a_j + 1/2 sum W_ij a*_i a*_j a_j a_i on the N-particle sector.
SparseOperator build_H(const System& sys);

struct GroundState {
  double energy = 0.0;
  FockVector state;
  double residual = 0.0;
};
GroundState ground_state(const System& sys, const SparseOperator& H, double tol);

struct EvolveOptions {
  int krylov_dim = 24;
  bool adaptive = true;
  double tol = 1e-13;
  int sample_every = 1;
  double t0 = 0.0;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<FockVector> states;
  int substeps = 0;
};

Trajectory evolve(const SparseOperator& H, const FockVector& psi0, double dt, int n_steps,
                  const EvolveOptions& opt = {});

// gamma_ij = <a*_j a_i> / N.
Mat reduced_density(const FockVector& psi, const fock::Ladder& ladder);

struct Depletion {
  double depletion = 0.0;   // 1 - <phi, gamma phi>
  double n_perp = 0.0;      // <N_perp>
  double discrepancy = 0.0; // |depletion - n_perp / N|
};
Depletion depletion(const FockVector& psi, const gp::Field& phi_ref, const fock::Ladder& ladder);

// prod_{i<j} f(s|x_i - x_j|) prod_i phi(x_i), symmetrized into the occupation basis, normalized.
FockVector correlated_product_state(const gp::Field& phi, const scattering::ScatteringSolution& sol,
                                    int N, const fock::Ladder& ladder, double scale = 0.0);

// GP coupling matching the lattice interaction V_s on N particles: 8 pi a N / s in 3D, the Born
// value (N / s) int V on the 1D/2D testbeds.
double gp_coupling(const scattering::RadialPotential& V, double a, int N, double scale, int dim);

// <u, T u> + g/2 h^{-d} sum |u|^4 for a mode vector u.
double lattice_gp_energy(const Vec& u, const Eigen::MatrixXd& T, double g, double hd);

double expectation(const SparseOperator& A, const FockVector& psi);
double fidelity_to_condensate(const FockVector& psi, const gp::Field& phi, const fock::Ladder& ladder);

struct DepletionRecord {
  double t = 0.0;
  double depletion = 0.0;
  double n_perp = 0.0;
  double gronwall = 0.0;
  double energy = 0.0;
  double fidelity = 0.0;
  double local_constant = 0.0;  // smallest C making the operator bound hold at t
  double identity_defect = 0.0; // depletion two-route disagreement
};

struct GronwallReport {
  std::vector<DepletionRecord> records;
  double constant = 0.0;      // max of the local constants
  double growth_rate = 0.0;   // least-squares slope of log G(t)
  double fitted_c = 0.0;      // smallest c with G(t) <= G(0) exp(e^{ct} - 1)
  bool dominates = true;      // G(t) >= <N_perp> at every sample
  double worst_margin = 0.0;  // min_t G(t) - <N_perp>
};

struct GronwallInput {
  const System* system = nullptr;
  const SparseOperator* H = nullptr;
  const scattering::ScatteringSolution* solution = nullptr;
  double cutoff_radius = 0.0;
  double coupling = 0.0;
  double scale = 0.0;  // kernel interaction scale, 0 selects N
};

GronwallReport gronwall_monitor(const Trajectory& traj, const gp::Trajectory& gp_traj,
                                const gp::Spectral& sp, const GronwallInput& in);

struct TrappedSpec {
  gp::Grid grid;
  std::vector<int> particles;
  std::vector<double> depths;  // multipliers of the base potential
  scattering::RadialPotential potential;
  double trap_strength = 1.0;
  lattice::InteractionModel interaction = lattice::InteractionModel::CellAveraged;
  double interaction_scale = 0.0;
  double r_max = 8.0;
  double gp_tol = 1e-9;
  double eig_tol = 1e-9;
  size_t dimension_cap = 0;
  std::string label;
};

struct TrappedRow {
  std::string label;
  int particles = 0;
  double depth = 0.0;
  double l1_norm = 0.0;
  double scattering_length = 0.0;
  double depletion = 0.0;
  double n_depletion = 0.0;
  double energy = 0.0;
  size_t dimension = 0;
};

std::vector<TrappedRow> trapped_depletion_experiment(const TrappedSpec& spec);

}  // namespace gplab::manybody
