#include "gplab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace gplab::linalg {

namespace {

// Lanczos basis with full reorthogonalization. Returns the number of vectors built.
int lanczos(const SpMat& H, const Vec& start, int m, Mat& V, Eigen::VectorXd& alpha,
            Eigen::VectorXd& beta) {
  const Eigen::Index d = H.rows();
  V.resize(d, m);
  alpha.resize(m);
  beta.resize(m);
  V.col(0) = start.normalized();
  int k = 0;
  for (; k < m; ++k) {
    Vec w = H * V.col(k);
    alpha[k] = V.col(k).dot(w).real();
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const Vec c = V.leftCols(k + 1).adjoint() * w;
      w -= V.leftCols(k + 1) * c;
    }
    beta[k] = w.norm();
    if (k + 1 == m) {
      ++k;
      break;
    }
    const double scale = std::max(1.0, std::abs(alpha[k]));
    if (beta[k] <= 1e-13 * scale) {
      ++k;
      break;
    }
    V.col(k + 1) = w / beta[k];
  }
  return k;
}

Eigen::MatrixXd tridiag(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int k) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    T(i, i) = a[i];
    if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = b[i];
  }
  return T;
}

}  // namespace

EigenPair lowest_eigenpair(const SpMat& H, double tol, const LanczosOptions& opt) {
  require(H.rows() == H.cols() && H.rows() > 0, "eigenproblem needs a non-empty square operator");
  const Eigen::Index d = H.rows();
  EigenPair out;
  if (static_cast<size_t>(d) <= opt.dense_threshold) {
    Mat Hd(H);
    Hd = 0.5 * (Hd + Hd.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(Hd);
    out.value = es.eigenvalues()[0];
    out.vector = es.eigenvectors().col(0);
    out.residual = (H * out.vector - out.value * out.vector).norm();
    return out;
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = cplx(nd(rng), nd(rng));
  const int m = static_cast<int>(std::min<Eigen::Index>(opt.krylov_max, d));
  Mat V;
  Eigen::VectorXd a, b;
  for (int r = 0; r < opt.restarts; ++r) {
    const int k = lanczos(H, v, m, V, a, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiag(a, b, k));
    const Eigen::VectorXd y = es.eigenvectors().col(0);
    v = V.leftCols(k) * y.cast<cplx>();
    v.normalize();
    out.value = es.eigenvalues()[0];
    out.vector = v;
    out.residual = (H * v - out.value * v).norm();
    out.iterations = r + 1;
    if (out.residual <= tol) return out;
  }
  throw ConvergenceError("Lanczos did not converge; residual " + std::to_string(out.residual));
}

Eigen::VectorXd hermitian_eigenvalues(const Mat& A) {
  const Mat h = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const Mat& A) { return hermitian_eigenvalues(A)[0]; }

Extremes generalized_extremes(const Mat& A, const Mat& B) {
  require(A.rows() == B.rows() && A.cols() == B.cols(), "pencil shape mismatch");
  const Mat Bh = 0.5 * (B + B.adjoint());
  Eigen::LLT<Mat> llt(Bh);
  if (llt.info() != Eigen::Success) throw ConvergenceError("generalized eigenproblem: B is not positive definite");
  const Mat L = llt.matrixL();
  Mat C = L.triangularView<Eigen::Lower>().solve(0.5 * (A + A.adjoint()));
  C = L.triangularView<Eigen::Lower>().solve(C.adjoint()).adjoint();
  const auto ev = hermitian_eigenvalues(C);
  return {ev[0], ev[ev.size() - 1]};
}

double hermiticity_defect(const SpMat& A) {
  const SpMat d = A - SpMat(A.adjoint());
  double m = 0.0;
  for (Eigen::Index k = 0; k < d.outerSize(); ++k)
    for (SpMat::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double hermiticity_defect(const Mat& A) {
  if (A.size() == 0) return 0.0;
  return (A - A.adjoint()).cwiseAbs().maxCoeff();
}

namespace {

Vec expm_single(const SpMat& H, const Vec& v, double dt, int m, double* err) {
  const double nv = v.norm();
  if (nv == 0.0) {
    *err = 0.0;
    return v;
  }
  Mat V;
  Eigen::VectorXd a, b;
  const int k = lanczos(H, v, std::min<int>(m, static_cast<int>(H.rows())), V, a, b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiag(a, b, k));
  const Eigen::MatrixXd& Q = es.eigenvectors();
  Eigen::VectorXcd c(k);
  for (int i = 0; i < k; ++i) c[i] = std::polar(1.0, -es.eigenvalues()[i] * dt) * Q(0, i);
  const Eigen::VectorXcd y = Q.cast<cplx>() * c;
  // Residual-based estimate beta_k |e_k^T exp(-i T dt) e_1|.
  *err = nv * b[k - 1] * std::abs(y[k - 1]) * std::abs(dt);
  return nv * (V.leftCols(k) * y);
}

}  // namespace

Vec expm_krylov(const SpMat& H, const Vec& v, double dt, int m, bool adaptive, double tol,
                KrylovStats* stats) {
  require(m >= 1, "Krylov dimension must be positive");
  int parts = 1;
  while (true) {
    Vec w = v;
    double total = 0.0;
    bool ok = true;
    for (int p = 0; p < parts; ++p) {
      double err = 0.0;
      w = expm_single(H, w, dt / parts, m, &err);
      total += err;
      if (adaptive && total > tol) {
        ok = false;
        break;
      }
    }
    if (ok) {
      if (stats) {
        stats->substeps += parts;
        stats->error_estimate += total;
      }
      return w;
    }
    parts *= 2;
    if (parts > (1 << 20)) throw ConvergenceError("Krylov exponential failed to meet tolerance");
  }
}

}  // namespace gplab::linalg
