#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gplab/common.hpp"

namespace gplab::fock {

using SpMat = Eigen::SparseMatrix<cplx>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Largest sector dimension any basis may reach. Defaults to GPLAB_DIMENSION_CAP or 4e6.
size_t dimension_cap();
void set_dimension_cap(size_t cap);

// C(M + n - 1, n), saturating at SIZE_MAX.
size_t sector_dimension(int modes, int particles);

// Occupation vectors of n bosons in M modes, in descending lexicographic order.
class SectorBasis {
public:
  SectorBasis(int modes, int particles, size_t cap = dimension_cap());

  int modes() const { return modes_; }
  int particles() const { return particles_; }
  size_t dimension() const { return dim_; }
  const std::uint8_t* state(size_t i) const { return occ_.data() + i * static_cast<size_t>(modes_); }
  std::vector<int> occupations(size_t i) const;
  // Position of an occupation vector; it must sum to particles().
  size_t index(const std::uint8_t* occ) const;
  size_t index(const std::vector<int>& occ) const;

private:
  int modes_;
  int particles_;
  size_t dim_;
  std::vector<std::uint8_t> occ_;
  std::vector<std::vector<size_t>> count_;  // count_[m][k] = C(m + k - 1, k)
};

// Operator between two particle-number sectors over the same modes. A particle number of -1
// marks the truncated Fock space 0..n_max.
struct SparseOperator {
  SpMat matrix;
  int modes = 0;
  int domain_n = 0;
  int codomain_n = 0;

  SparseOperator adjoint() const;
  Mat dense() const { return Mat(matrix); }
  double max_abs() const;
  SparseOperator& prune(double tol = 0.0);
  void write_coo(std::ostream& out) const;
};

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator*(cplx c, const SparseOperator& a);
// [a, b] = ab - ba for operators on a common sector.
SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);
// Largest |entry| of a - b.
double max_abs_diff(const SparseOperator& a, const SparseOperator& b);

struct FockVector {
  Vec coeffs;
  int modes = 0;
  int particles = 0;
};

// Sector bases 0..n_top over M modes and the operator builders acting between them. All
// mode-vector arguments use the lattice convention a(f) = sum_i conj(f_i) a_i.
class Ladder {
public:
  Ladder(int modes, int n_top, size_t cap = dimension_cap());

  int modes() const { return modes_; }
  int top() const { return static_cast<int>(bases_.size()) - 1; }
  const SectorBasis& basis(int n) const;

  SparseOperator identity(int n) const;
  // a(f): n -> n-1.
  SparseOperator annihilate(const Vec& f, int n) const;
  // a*(f): n -> n+1.
  SparseOperator create(const Vec& f, int n) const;
  // sum_ij G_ij a*_i a_j on sector n.
  SparseOperator one_body(const Mat& G, int n) const;
  // sum_ij G_ij a*_i a*_j: n -> n+2.
  SparseOperator pair_create(const Mat& G, int n) const;
  // 1/2 sum_ij W_ij a*_i a*_j a_j a_i on sector n (diagonal).
  SparseOperator density_density(const Eigen::MatrixXd& W, int n) const;

private:
  int modes_;
  std::vector<SectorBasis> bases_;
  void check_sector(int n) const;
};

// Direct sum of sectors 0..n_max with block offsets.
class FockSpace {
public:
  FockSpace(int modes, int n_max, size_t cap = dimension_cap());
  const Ladder& ladder() const { return ladder_; }
  int n_max() const { return ladder_.top(); }
  size_t dimension() const { return offsets_.back(); }
  size_t offset(int n) const { return offsets_[static_cast<size_t>(n)]; }

  SparseOperator annihilate(const Vec& f) const;
  // a*(f) truncated: the sector n_max is mapped to zero.
  SparseOperator create(const Vec& f) const;

private:
  Ladder ladder_;
  std::vector<size_t> offsets_;
};

struct CcrDefect {
  double restricted = 0.0;  // sectors n <= n_max - 1
  double top = 0.0;         // sector n_max (truncation artifact)
};
// Operator norm of [a(f), a*(g)] - <f,g> on the truncated space.
CcrDefect ccr_defect(const Vec& f, const Vec& g, const FockSpace& space);

// Q = 1 - u u* for a unit mode vector u.
Mat projector_Q(const Vec& u);
// N_perp = sum_ij Q_ij a*_i a_j on sector n.
SparseOperator op_excitation_number(const Vec& u, const Ladder& ladder, int n);

// Product state u^{(x)N} in the occupation basis.
FockVector product_state(const Vec& u, const Ladder& ladder, int n);
// Symmetric first-quantized amplitudes psi(i_1..i_n), index sum_k i_k M^{n-1-k}.
Vec to_first_quantized(const FockVector& psi);
// Projection of first-quantized amplitudes onto the symmetric sector.
FockVector from_first_quantized(const Vec& amplitudes, const Ladder& ladder, int n);

}  // namespace gplab::fock
