#pragma once

#include <array>
#include <memory>
#include <vector>

#include "gplab/fock.hpp"
#include "gplab/gp_solver.hpp"
#include "gplab/lattice.hpp"
#include "gplab/scattering.hpp"

namespace gplab::renorm {

using fock::Mat;
using fock::SparseOperator;
using fock::Vec;

// C^2 cutoff: 1 on [0, r], quintic smoothstep down to 0 on [r, 2r], 0 beyond.
double cutoff(double d, double r);
double cutoff_derivative(double d, double r);

// k(x,y) = N (1 - f)(s|x-y|) chi(|x-y|) phi(x) phi(y) on the lattice, with s the interaction
// scale (s = N in the Gross-Pitaevskii scaling). The discrete matrix K = h^d k is stored as a
// translation-invariant profile times the condensate mode vector.
struct CorrelationKernel {
  gp::Grid grid;
  int particles = 0;
  double scale = 0.0;
  double radius = 0.0;
  gp::Field phi;
  std::vector<double> profile;  // rho(d) = N (1 - f(s d)) chi(d), indexed by lattice difference
  std::shared_ptr<const scattering::ScatteringSolution> solution;

  Vec mode_vector() const { return phi.mode_vector(); }
  cplx entry(size_t x, size_t y) const;  // K_xy
  Mat matrix() const;                    // dense K (M x M)
  // ||k||_HS, i.e. (int int |k|^2)^{1/2}.
  double hs_norm() const;
  // ||k(., x)||_2 for every site x.
  std::vector<double> column_norms() const;
  bool is_zero() const;
};

CorrelationKernel build_kernel(const gp::Field& phi, const scattering::ScatteringSolution& sol,
                               int N, double r, double scale = 0.0);

// Discrete kernels of the first and second time derivative from phi, dphi, d2phi (product rule).
std::pair<Mat, Mat> kernel_time_derivatives(const CorrelationKernel& k, const gp::Field& dphi,
                                            const gp::Field& d2phi);
// Same along a trajectory at a sample time, analytic time derivatives of phi.
std::pair<Mat, Mat> kernel_time_derivatives(const gp::Spectral& sp, const gp::Trajectory& traj,
                                            const scattering::ScatteringSolution& sol, int N,
                                            double r, double t, double scale = 0.0);
// Centered finite differences of build_kernel along the trajectory.
std::pair<Mat, Mat> kernel_fd_derivatives(const gp::Trajectory& traj,
                                          const scattering::ScatteringSolution& sol, int N,
                                          double r, double t, double scale = 0.0);

struct KernelReport {
  double hs_norm = 0.0;
  double column_constant = 0.0;  // max_x ||k_x|| / |phi(x)|
  double f_norm = 0.0;           // ||f_t||_HS, closed form N(1-f)(-Delta_1)(chi phi phi)
  double f_subtracted_norm = 0.0;  // ||-Delta_1 k - singular subtractions||_HS on the lattice
  double g_norm = 0.0;           // ||g_t||_HS
};
// Needs a dense grid of at most dense_cap sites.
KernelReport kernel_diagnostics(const CorrelationKernel& k, size_t dense_cap = 4096);

// ||k||_HS for a normalized constant condensate on a 3D cube of side 4 max(radii) with
// `points` sites per axis. N = s is chosen so the scaled core R/s spans half a lattice spacing;
// then the 1/|x| tail dominates and ||k|| ~ r^{1/2}. exponent is the least-squares slope of
// log ||k|| against log r.
struct NormScaling {
  std::vector<double> radii;
  std::vector<double> norms;
  double scale = 0.0;
  double exponent = 0.0;
};
NormScaling kernel_norm_scaling(const scattering::ScatteringSolution& sol,
                                const std::vector<double>& radii, int points = 128);

// Condensate data shared by the operator builders on sectors n <= N.
class RenormContext {
public:
  RenormContext(const fock::Ladder& ladder, int N, const Vec& u, const Mat& K);

  const fock::Ladder& ladder() const { return *ladder_; }
  int N() const { return N_; }
  const Vec& u() const { return u_; }
  const Mat& Q() const { return Q_; }
  const Mat& K() const { return K_; }
  const Mat& J() const { return J_; }  // Q K Q^T

  SparseOperator a_phi(int n) const;        // a(phi): n -> n-1
  SparseOperator a_phi_dag(int n) const;    // a*(phi): n -> n+1
  SparseOperator a_phi2(int n) const;       // a(phi)^2: n -> n-2
  SparseOperator A(size_t x, int n) const;  // a(Q_x): n -> n-1
  SparseOperator n_perp(int n) const;
  SparseOperator n_phi(int n) const;        // a*(phi) a(phi)

private:
  const fock::Ladder* ladder_;
  int N_;
  Vec u_;
  Mat Q_, K_, J_;
};

// b_x: N -> N-1 and b*_y: N-1 -> N assembled from their defining formulas.
SparseOperator op_b_field(const RenormContext& c, size_t x, int n);
SparseOperator op_b_dagger(const RenormContext& c, size_t y, int n);
// b(g) = sum_y conj(g_y) b_y.
SparseOperator op_b_smeared(const RenormContext& c, const Vec& g, int n);

SparseOperator build_N_ren(const RenormContext& c, int n);
SparseOperator build_Q_ren(const RenormContext& c, const Mat& dK, int n);
// (K_ren, V_ren) on sector N.
std::pair<SparseOperator, SparseOperator> build_H_ren(const RenormContext& c,
                                                      const lattice::LatticeModel& model);

struct RenormOperators {
  SparseOperator cH_N;
  std::array<SparseOperator, 5> parts;
  double on_shell_residual = 0.0;
};

// H_N minus the condensate contributions. Throws if w misses the lattice GP equation by more
// than on_shell_tol (skipped when on_shell_tol <= 0); the residual is stored when requested.
SparseOperator build_cH_N(const RenormContext& c, const SparseOperator& H_N,
                          const lattice::LatticeModel& model, const Vec& w, double e_gp, double g,
                          double on_shell_tol, double* on_shell_residual = nullptr);

// H_N minus the condensate contributions, directly and as the sum of five parts.
// w is the mode vector of i d/dt phi; g the coupling of the lattice GP flow.
RenormOperators build_cH_N_and_parts(const RenormContext& c, const SparseOperator& H_N,
                                     const lattice::LatticeModel& model, const Vec& w, double e_gp,
                                     double g, double on_shell_tol);

struct CommutatorReport {
  double b_commutator = 0.0;          // displayed [b_x, N_ren] expansion, worst site
  double b_commutator_literal = 0.0;  // same with <J_x, J_z> in place of <J_z, J_x>
  double b_dagger_commutator = 0.0;   // [b*_x, N_ren] + [b_x, N_ren]*
  double nperp_ladder = 0.0;          // [N_perp, a*(Q_x) a(phi)] - a*(Q_x) a(phi)
  double nperp_condensate = 0.0;      // [N_perp, a*(phi) a(phi)]
};
CommutatorReport commutator_identities(const RenormContext& c);

// -(u (Q du)^* + (Q du) u^*).
Mat dtQ_formula(const Vec& u, const Vec& du);

struct Sandwich {
  double c_minus = 0.0;
  double c_plus = 0.0;
};
// C_-^{-1}(N_perp + 1) <= N_ren + 1 <= C_+ (N_perp + 1).
Sandwich sandwich_constants(const SparseOperator& N_ren, const SparseOperator& N_perp);
// Smallest C with -C(N_ren + 1) <= Q_ren <= C(N_ren + 1).
double q_bound_constant(const SparseOperator& Q_ren, const SparseOperator& N_ren);

struct AuxBound {
  double constant = 0.0;     // smallest C >= 0 making X + C(N_ren + 1) positive semidefinite
  double min_eigenvalue = 0.0;  // of cH_N + Q_ren + C(N_ren + 1) - N_perp at that C
};
AuxBound aux_bound(const SparseOperator& cH_N, const SparseOperator& Q_ren,
                   const SparseOperator& N_ren, const SparseOperator& N_perp);

}  // namespace gplab::renorm
