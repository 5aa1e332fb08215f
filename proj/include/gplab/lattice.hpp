#pragma once

#include <optional>

#include "gplab/grid.hpp"
#include "gplab/scattering.hpp"

namespace gplab::lattice {

enum class InteractionModel {
  Sampled,       // W(d) = V_s(|d|) at the minimum-image distance, including d = 0
  CellAveraged,  // W(d) = h^{-d} int V_s(|z|) tent(z - d) dz, so sum_d W(d) h^d = int V_s
};

// V_s(r) = s^{dim-1} V(s r) as an M x M matrix in the chosen lattice convention. In 3D this is
// s^2 V(s r); for s = N the integral of V_s is int V / N in every dimension.
Eigen::MatrixXd interaction_matrix(const gp::Grid& grid, const scattering::RadialPotential& V,
                                   double scale, InteractionModel model);

// One-body and two-body data of the lattice Hamiltonian
//   H = sum T_ij a*_i a_j + sum trap_i a*_i a_i + 1/2 sum W_ij a*_i a*_j a_j a_i.
struct LatticeModel {
  gp::Grid grid;
  Eigen::MatrixXd kinetic;      // spectral -Delta
  Eigen::MatrixXd interaction;  // W
  std::optional<Eigen::VectorXd> trap;

  Eigen::MatrixXd one_body() const;
};

LatticeModel build_model(const gp::Grid& grid, const scattering::RadialPotential& V, double scale,
                         InteractionModel model, std::optional<Eigen::VectorXd> trap = std::nullopt);

}  // namespace gplab::lattice
