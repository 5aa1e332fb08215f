#pragma once

// Dense first-quantized reference operators for small (M, n). Everything here works on the full
// tensor space C^{M^n} and only uses the library for the ordering of the occupation basis.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gplab/fock.hpp"

namespace oracle {

using gplab::cplx;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline long ipow(long b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Tuple (i_1..i_n) of a flat index, first slot most significant.
inline std::vector<int> digits(long idx, int M, int n) {
  std::vector<int> d(static_cast<size_t>(n));
  for (int k = n - 1; k >= 0; --k) {
    d[static_cast<size_t>(k)] = static_cast<int>(idx % M);
    idx /= M;
  }
  return d;
}

inline long flat(const std::vector<int>& d, int M) {
  long idx = 0;
  for (int v : d) idx = idx * M + v;
  return idx;
}

inline double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Isometry from the occupation basis of n bosons into C^{M^n}: |occ> maps to
// sqrt(prod n_k! / n!) times the sum over the distinct orderings.
inline Mat embedding(const gplab::fock::SectorBasis& basis) {
  const int M = basis.modes(), n = basis.particles();
  const long D = ipow(M, n);
  Mat E = Mat::Zero(D, static_cast<Eigen::Index>(basis.dimension()));
  for (long i = 0; i < D; ++i) {
    std::vector<int> occ(static_cast<size_t>(M), 0);
    for (int v : digits(i, M, n)) occ[static_cast<size_t>(v)]++;
    double w = 1.0;
    for (int k : occ) w *= factorial(k);
    E(i, static_cast<Eigen::Index>(basis.index(occ))) = std::sqrt(w / factorial(n));
  }
  return E;
}

// a*(f): C^{M^n} -> C^{M^{n+1}}, (a* psi)(x_1..x_{n+1}) = (n+1)^{-1/2} sum_j f(x_j) psi(.. no x_j ..).
inline Mat create(const Vec& f, int M, int n) {
  const long Din = ipow(M, n), Dout = ipow(M, n + 1);
  Mat A = Mat::Zero(Dout, Din);
  for (long o = 0; o < Dout; ++o) {
    const auto d = digits(o, M, n + 1);
    for (int j = 0; j <= n; ++j) {
      std::vector<int> rest;
      for (int k = 0; k <= n; ++k)
        if (k != j) rest.push_back(d[static_cast<size_t>(k)]);
      A(o, flat(rest, M)) += f[d[static_cast<size_t>(j)]] / std::sqrt(n + 1.0);
    }
  }
  return A;
}

// a(f) = create(f)^*, mapping C^{M^n} -> C^{M^{n-1}}.
inline Mat annihilate(const Vec& f, int M, int n) { return create(f, M, n - 1).adjoint(); }

// sum_j G acting on slot j.
inline Mat one_body(const Mat& G, int M, int n) {
  const long D = ipow(M, n);
  Mat A = Mat::Zero(D, D);
  for (long c = 0; c < D; ++c) {
    const auto d = digits(c, M, n);
    for (int j = 0; j < n; ++j)
      for (int x = 0; x < M; ++x) {
        auto e = d;
        e[static_cast<size_t>(j)] = x;
        A(flat(e, M), c) += G(x, d[static_cast<size_t>(j)]);
      }
  }
  return A;
}

// Multiplication by sum_{j<k} W(x_j, x_k).
inline Mat pair_potential(const Eigen::MatrixXd& W, int M, int n) {
  const long D = ipow(M, n);
  Mat A = Mat::Zero(D, D);
  for (long c = 0; c < D; ++c) {
    const auto d = digits(c, M, n);
    double s = 0;
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) s += W(d[static_cast<size_t>(j)], d[static_cast<size_t>(k)]);
    A(c, c) = s;
  }
  return A;
}

// Symmetric-sector representation E_out^* A E_in of a tensor-space operator.
inline Mat restrict(const Mat& A, const gplab::fock::SectorBasis& out, const gplab::fock::SectorBasis& in) {
  return embedding(out).adjoint() * A * embedding(in);
}

// gamma_ij = sum_rest psi(i, rest) conj(psi(j, rest)) for a normalized symmetric tensor.
inline Mat partial_trace(const Vec& psi, int M, int n) {
  const long R = ipow(M, n - 1);
  Mat g = Mat::Zero(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (long r = 0; r < R; ++r) g(i, j) += psi[i * R + r] * std::conj(psi[j * R + r]);
  return g;
}

}  // namespace oracle
