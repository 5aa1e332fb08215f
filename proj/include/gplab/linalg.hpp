#pragma once

#include <cstdint>

#include "gplab/fock.hpp"

namespace gplab::linalg {

using fock::Mat;
using fock::SpMat;
using fock::Vec;

struct EigenPair {
  double value = 0.0;
  Vec vector;
  double residual = 0.0;  // ||H v - E v||
  int iterations = 0;
};

struct LanczosOptions {
  int krylov_max = 200;
  int restarts = 60;
  std::uint64_t seed = 12345;
  size_t dense_threshold = 400;  // dense diagonalization at or below this dimension
};

// Lowest eigenpair of a Hermitian operator, restarted Lanczos with full reorthogonalization.
EigenPair lowest_eigenpair(const SpMat& H, double tol, const LanczosOptions& opt = {});

// All eigenvalues of a Hermitian matrix, ascending.
Eigen::VectorXd hermitian_eigenvalues(const Mat& A);
double min_eigenvalue(const Mat& A);

struct Extremes {
  double min = 0.0;
  double max = 0.0;
};
// Extreme eigenvalues of the pencil (A, B) with A Hermitian and B Hermitian positive definite.
Extremes generalized_extremes(const Mat& A, const Mat& B);

// Largest |A - A*| entry.
double hermiticity_defect(const SpMat& A);
double hermiticity_defect(const Mat& A);

struct KrylovStats {
  int substeps = 0;
  double error_estimate = 0.0;
};

// exp(-i H dt) v by a Lanczos projection of dimension m. With adaptive set, dt is split until
// the a-posteriori error estimate is below tol.
Vec expm_krylov(const SpMat& H, const Vec& v, double dt, int m, bool adaptive, double tol,
                KrylovStats* stats = nullptr);

}  // namespace gplab::linalg
