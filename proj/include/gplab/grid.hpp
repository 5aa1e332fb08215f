#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "gplab/common.hpp"

namespace gplab::gp {

// Periodic d-dimensional lattice centred at the origin. Site coordinates along an axis are
// (i - n/2) h for i = 0..n-1; sites are stored row-major (last axis fastest).
struct Grid {
  int dim = 1;
  std::array<int, 3> points{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};

  static Grid cube(int dim, int points, double length);

  void validate() const;
  size_t size() const;
  double cell_volume() const;
  double volume() const;
  double length(int axis) const { return points[axis] * spacing[axis]; }
  double min_length() const;

  std::array<int, 3> coords(size_t site) const;
  size_t site(const std::array<int, 3>& c) const;
  std::array<double, 3> position(size_t site) const;
  // Minimum-image displacement x_a - x_b.
  std::array<double, 3> displacement(size_t a, size_t b) const;
  double distance(size_t a, size_t b) const;
  // Site index of the periodic difference x_a - x_b (as a lattice vector).
  size_t difference_site(size_t a, size_t b) const;
  // Minimum-image length of the lattice vector with index i.
  double vector_length(size_t i) const;
  bool on_boundary(size_t site) const;
  // Squared plane-wave momentum |k|^2 of the FFT mode with index i.
  double k_squared(size_t i) const;
  std::array<double, 3> k_vector(size_t i) const;

  bool operator==(const Grid&) const = default;
};

// Complex function on a Grid, continuum normalization h^d sum |phi|^2.
struct Field {
  Grid grid;
  Eigen::VectorXcd values;

  Field() = default;
  Field(const Grid& g) : grid(g), values(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.size()))) {}
  Field(const Grid& g, Eigen::VectorXcd v);

  double norm() const;
  cplx inner(const Field& other) const;  // conjugate-linear in *this
  Field normalized() const;
  // Unit-normalized coefficient vector h^{d/2} phi used by the lattice Fock operators.
  Eigen::VectorXcd mode_vector() const;
  static Field from_mode_vector(const Grid& g, const Eigen::VectorXcd& u);

  static Field constant(const Grid& g);
  static Field gaussian(const Grid& g, double width);
  // exp(i k.x)/sqrt(vol) with k = 2 pi n / L.
  static Field plane_wave(const Grid& g, const std::array<int, 3>& n);
};

// FFTW-backed spectral operations on a fixed Grid.
class Spectral {
public:
  explicit Spectral(const Grid& g);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const Grid& grid() const { return grid_; }
  // Unnormalized forward transform.
  Eigen::VectorXcd forward(const Eigen::VectorXcd& x) const;
  // Inverse transform including the 1/M factor.
  Eigen::VectorXcd backward(const Eigen::VectorXcd& x) const;

  // -Delta applied spectrally.
  Eigen::VectorXcd laplacian(const Eigen::VectorXcd& x) const;
  // Partial derivative along an axis (spectral, Nyquist mode dropped).
  Eigen::VectorXcd derivative(const Eigen::VectorXcd& x, int axis) const;
  // exp(-i |k|^2 t) x.
  Eigen::VectorXcd free_propagate(const Eigen::VectorXcd& x, double t) const;
  // int |grad phi|^2 = h^d / M sum |k|^2 |phi_hat|^2.
  double kinetic_energy(const Eigen::VectorXcd& x) const;
  // (h^d / M sum (1 + |k|^2)^m |phi_hat|^2)^{1/2}.
  double sobolev_norm(const Eigen::VectorXcd& x, int m) const;
  const std::vector<double>& k_squared() const { return ksq_; }
  double max_k_squared() const;

  // Dense matrix of -Delta acting on site values (real symmetric).
  Eigen::MatrixXd laplacian_matrix() const;

private:
  struct Plans;
  Grid grid_;
  std::vector<double> ksq_;
  std::unique_ptr<Plans> plans_;
};

// Second-order finite-difference -Delta as a dense matrix, for cross-checking.
Eigen::MatrixXd stencil_laplacian_matrix(const Grid& g);

}  // namespace gplab::gp
