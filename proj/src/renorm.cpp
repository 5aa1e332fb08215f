#include "gplab/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gplab/linalg.hpp"

namespace gplab::renorm {

double cutoff(double d, double r) {
  d = std::abs(d);
  if (d <= r) return 1.0;
  if (d >= 2 * r) return 0.0;
  const double s = (d - r) / r;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double cutoff_derivative(double d, double r) {
  d = std::abs(d);
  if (d <= r || d >= 2 * r) return 0.0;
  const double s = (d - r) / r;
  return -30.0 * s * s * (1 - s) * (1 - s) / r;
}

cplx CorrelationKernel::entry(size_t x, size_t y) const {
  const double h = std::sqrt(grid.cell_volume());
  return profile[grid.difference_site(x, y)] * phi.values[static_cast<Eigen::Index>(x)] *
         phi.values[static_cast<Eigen::Index>(y)] * h * h;
}

Mat CorrelationKernel::matrix() const {
  const auto M = static_cast<Eigen::Index>(grid.size());
  require(M <= 8192, "dense kernel matrix too large");
  const Vec u = mode_vector();
  Mat K(M, M);
  for (Eigen::Index x = 0; x < M; ++x)
    for (Eigen::Index y = 0; y < M; ++y)
      K(x, y) = profile[grid.difference_site(static_cast<size_t>(x), static_cast<size_t>(y))] * u[x] * u[y];
  return K;
}

namespace {

// conv(x) = sum_y |rho(x - y)|^2 |u_y|^2 by FFT.
Eigen::VectorXd weighted_profile_convolution(const CorrelationKernel& k) {
  gp::Spectral sp(k.grid);
  const auto M = static_cast<Eigen::Index>(k.grid.size());
  Vec r2(M), a(M);
  const Vec u = k.mode_vector();
  for (Eigen::Index i = 0; i < M; ++i) {
    r2[i] = k.profile[static_cast<size_t>(i)] * k.profile[static_cast<size_t>(i)];
    a[i] = std::norm(u[i]);
  }
  const Vec c = sp.backward(sp.forward(r2).cwiseProduct(sp.forward(a)));
  return c.real();
}

}  // namespace

double CorrelationKernel::hs_norm() const {
  const Eigen::VectorXd conv = weighted_profile_convolution(*this);
  const Vec u = mode_vector();
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += std::norm(u[i]) * conv[i];
  return std::sqrt(std::max(0.0, s));
}

std::vector<double> CorrelationKernel::column_norms() const {
  const Eigen::VectorXd conv = weighted_profile_convolution(*this);
  std::vector<double> out(grid.size());
  const double hd = grid.cell_volume();
  const Vec u = mode_vector();
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = std::sqrt(std::max(0.0, conv[static_cast<Eigen::Index>(i)]) / hd) * std::abs(u[static_cast<Eigen::Index>(i)]);
  return out;
}

bool CorrelationKernel::is_zero() const {
  for (double p : profile)
    if (p != 0.0) return false;
  return true;
}

CorrelationKernel build_kernel(const gp::Field& phi, const scattering::ScatteringSolution& sol,
                               int N, double r, double scale) {
  require(N >= 1, "particle number must be positive");
  require(r > 0.0, "cutoff radius must be positive");
  require(r <= 0.5 * phi.grid.min_length(), "cutoff radius larger than half the torus width");
  CorrelationKernel k;
  k.grid = phi.grid;
  k.particles = N;
  k.scale = scale > 0.0 ? scale : static_cast<double>(N);
  k.radius = r;
  k.phi = phi;
  k.solution = std::make_shared<scattering::ScatteringSolution>(sol);
  k.profile.resize(phi.grid.size());
  for (size_t i = 0; i < k.profile.size(); ++i) {
    const double d = phi.grid.vector_length(i);
    const double chi = cutoff(d, r);
    k.profile[i] = chi == 0.0 ? 0.0 : N * (1.0 - sol.f_at(k.scale * d)) * chi;
  }
  return k;
}

std::pair<Mat, Mat> kernel_time_derivatives(const CorrelationKernel& k, const gp::Field& dphi,
                                            const gp::Field& d2phi) {
  const auto M = static_cast<Eigen::Index>(k.grid.size());
  const Vec u = k.mode_vector(), du = dphi.mode_vector(), d2u = d2phi.mode_vector();
  Mat a(M, M), b(M, M);
  for (Eigen::Index x = 0; x < M; ++x)
    for (Eigen::Index y = 0; y < M; ++y) {
      const double p = k.profile[k.grid.difference_site(static_cast<size_t>(x), static_cast<size_t>(y))];
      a(x, y) = p * (du[x] * u[y] + u[x] * du[y]);
      b(x, y) = p * (d2u[x] * u[y] + 2.0 * du[x] * du[y] + u[x] * d2u[y]);
    }
  return {a, b};
}

std::pair<Mat, Mat> kernel_time_derivatives(const gp::Spectral& sp, const gp::Trajectory& traj,
                                            const scattering::ScatteringSolution& sol, int N,
                                            double r, double t, double scale) {
  const auto& phi = traj.samples[traj.index_of(t)];
  const auto k = build_kernel(phi, sol, N, r, scale);
  const auto d1 = gp::time_derivative(sp, traj, 1, t);
  const auto d2 = gp::time_derivative(sp, traj, 2, t);
  return kernel_time_derivatives(k, d1, d2);
}

std::pair<Mat, Mat> kernel_fd_derivatives(const gp::Trajectory& traj,
                                          const scattering::ScatteringSolution& sol, int N,
                                          double r, double t, double scale) {
  const size_t i = traj.index_of(t);
  require(i >= 1 && i + 1 < traj.samples.size(), "finite difference needs samples on both sides of t");
  const Mat a = build_kernel(traj.samples[i - 1], sol, N, r, scale).matrix();
  const Mat b = build_kernel(traj.samples[i], sol, N, r, scale).matrix();
  const Mat c = build_kernel(traj.samples[i + 1], sol, N, r, scale).matrix();
  const double h = traj.sample_dt;
  return {(c - a) / (2 * h), (c - 2.0 * b + a) / (h * h)};
}

namespace {

bool is_constant(const gp::Field& phi) {
  const cplx v0 = phi.values[0];
  for (Eigen::Index i = 1; i < phi.values.size(); ++i)
    if (std::abs(phi.values[i] - v0) > 1e-12 * std::max(1.0, std::abs(v0))) return false;
  return true;
}

double hs(const Mat& F, double hd) { return hd * F.norm(); }

}  // namespace

NormScaling kernel_norm_scaling(const scattering::ScatteringSolution& sol,
                                const std::vector<double>& radii, int points) {
  require(radii.size() >= 2, "scaling fit needs at least two radii");
  require(sol.support_radius() > 0.0, "scaling fit needs a potential with nonzero range");
  const double rmax = *std::max_element(radii.begin(), radii.end());
  const auto g = gp::Grid::cube(3, points, 4.0 * rmax);
  const auto phi = gp::Field::constant(g);
  const double s = 2.0 * sol.support_radius() / g.spacing[0];
  const int N = std::max(1, static_cast<int>(std::lround(s)));
  NormScaling out;
  out.radii = radii;
  out.scale = N;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double r : radii) {
    out.norms.push_back(build_kernel(phi, sol, N, r, N).hs_norm());
    const double x = std::log(r), y = std::log(out.norms.back());
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(radii.size());
  out.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

KernelReport kernel_diagnostics(const CorrelationKernel& k, size_t dense_cap) {
  KernelReport rep;
  rep.hs_norm = k.hs_norm();
  {
    const auto cols = k.column_norms();
    for (size_t x = 0; x < cols.size(); ++x) {
      const double p = std::abs(k.phi.values[static_cast<Eigen::Index>(x)]);
      if (p > 1e-300) rep.column_constant = std::max(rep.column_constant, cols[x] / p);
    }
  }
  if (k.is_zero()) return rep;
  const auto& g = k.grid;
  const auto& sol = *k.solution;
  const double N = k.particles, s = k.scale, r = k.radius;
  const double hd = g.cell_volume();
  const auto M = static_cast<Eigen::Index>(g.size());
  gp::Spectral sp(g);

  // Per difference vector: closed-form prefactor, subtraction terms.
  std::vector<double> one_minus_f(g.size()), vf(g.size()), dfr(g.size()), chi(g.size()), dchi(g.size());
  std::vector<std::array<double, 3>> dir(g.size());
  for (size_t i = 0; i < g.size(); ++i) {
    const double d = g.vector_length(i);
    one_minus_f[i] = N * (1.0 - sol.f_at(s * d));
    vf[i] = 0.5 * N * s * s * sol.potential.at(s * d) * sol.f_at(s * d);
    dfr[i] = 2.0 * N * s * sol.df_at(s * d);
    chi[i] = cutoff(d, r);
    dchi[i] = cutoff_derivative(d, r);
    const auto c = g.coords(i);
    std::array<double, 3> e{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
      int m = c[a];
      if (2 * m > g.points[a]) m -= g.points[a];
      e[a] = d > 0 ? m * g.spacing[a] / d : 0.0;
    }
    dir[i] = e;
  }

  if (is_constant(k.phi)) {
    // Translation-invariant path: every kernel is phi0^2 times a profile in x - y.
    const cplx p2 = k.phi.values[0] * k.phi.values[0];
    const double p4 = std::norm(p2);
    Vec rho(M), chiv(M);
    for (Eigen::Index i = 0; i < M; ++i) {
      rho[i] = k.profile[static_cast<size_t>(i)];
      chiv[i] = chi[static_cast<size_t>(i)];
    }
    const Vec lap_rho = sp.laplacian(rho);
    const Vec lap_chi = sp.laplacian(chiv);
    double fc = 0.0, fsub = 0.0;
    for (Eigen::Index i = 0; i < M; ++i) {
      const auto si = static_cast<size_t>(i);
      const double closed = one_minus_f[si] * lap_chi[i].real();
      const double grad = dfr[si] * dchi[si];  // d-hat . d-hat = 1
      const double sub = lap_rho[i].real() - vf[si] - grad;
      fc += closed * closed;
      fsub += sub * sub;
    }
    // ||F||^2 = h^{2d} M sum_d |F(d)|^2 |phi0|^4.
    rep.f_norm = std::sqrt(hd * hd * M * fc * p4);
    rep.f_subtracted_norm = std::sqrt(hd * hd * M * fsub * p4);
    // g(e) = |phi0|^4 h^d sum_c sum_w (d_c rho)(e + w) conj(d_c rho)(w).
    Vec ghat = Vec::Zero(M);
    for (int a = 0; a < g.dim; ++a) {
      const Vec dr = sp.forward(sp.derivative(rho, a));
      ghat += dr.cwiseAbs2().cast<cplx>();
    }
    const Vec gprof = sp.backward(ghat) * (hd * p4);
    rep.g_norm = std::sqrt(hd * hd * M * gprof.squaredNorm());
    return rep;
  }

  require(static_cast<size_t>(M) <= dense_cap, "kernel diagnostics on a non-constant condensate need a small grid");
  const Eigen::MatrixXd T = sp.laplacian_matrix();
  const Vec& phi = k.phi.values;
  std::array<Vec, 3> grad_phi;
  for (int a = 0; a < g.dim; ++a) grad_phi[a] = sp.derivative(phi, a);
  Mat kc(M, M), cm(M, M), sub(M, M);
  for (Eigen::Index x = 0; x < M; ++x)
    for (Eigen::Index y = 0; y < M; ++y) {
      const size_t i = g.difference_site(static_cast<size_t>(x), static_cast<size_t>(y));
      kc(x, y) = k.profile[i] * phi[x] * phi[y];
      cm(x, y) = chi[i] * phi[x] * phi[y];
      cplx gradterm = 0.0;
      for (int a = 0; a < g.dim; ++a)
        gradterm += dir[i][a] * (dchi[i] * dir[i][a] * phi[x] + chi[i] * grad_phi[a][x]) * phi[y];
      sub(x, y) = vf[i] * phi[x] * phi[y] + dfr[i] * gradterm;
    }
  Mat closed = T.cast<cplx>() * cm;
  for (Eigen::Index x = 0; x < M; ++x)
    for (Eigen::Index y = 0; y < M; ++y)
      closed(x, y) *= one_minus_f[g.difference_site(static_cast<size_t>(x), static_cast<size_t>(y))];
  rep.f_norm = hs(closed, hd);
  rep.f_subtracted_norm = hs(T.cast<cplx>() * kc - sub, hd);
  // g_t = h^d sum_c (d_2 k)(d_2 k)^*, derivative along the second index.
  Mat gt = Mat::Zero(M, M);
  for (int a = 0; a < g.dim; ++a) {
    Mat D(M, M);
    Vec e = Vec::Zero(M);
    for (Eigen::Index j = 0; j < M; ++j) {
      e.setZero();
      e[j] = 1.0;
      D.col(j) = sp.derivative(e, a);
    }
    const Mat G = kc * D.transpose();
    gt += hd * G * G.adjoint();
  }
  rep.g_norm = hs(gt, hd);
  return rep;
}

RenormContext::RenormContext(const fock::Ladder& ladder, int N, const Vec& u, const Mat& K)
    : ladder_(&ladder), N_(N), u_(u), K_(K) {
  require(N >= 1, "particle number must be positive");
  require(ladder.top() >= N, "ladder does not reach the N-particle sector");
  require(u.size() == ladder.modes() && K.rows() == u.size() && K.cols() == u.size(),
          "condensate or kernel does not match the modes");
  Q_ = fock::projector_Q(u);
  J_ = Q_ * K_ * Q_.transpose();
}

SparseOperator RenormContext::a_phi(int n) const { return ladder_->annihilate(u_, n); }
SparseOperator RenormContext::a_phi_dag(int n) const { return ladder_->create(u_, n); }
SparseOperator RenormContext::a_phi2(int n) const { return a_phi(n - 1) * a_phi(n); }
SparseOperator RenormContext::A(size_t x, int n) const {
  return ladder_->annihilate(Q_.col(static_cast<Eigen::Index>(x)), n);
}
SparseOperator RenormContext::n_perp(int n) const { return ladder_->one_body(Q_, n); }
SparseOperator RenormContext::n_phi(int n) const { return ladder_->one_body(u_ * u_.adjoint(), n); }

SparseOperator op_b_field(const RenormContext& c, size_t x, int n) {
  SparseOperator b = c.A(x, n);
  if (n >= 2) {
    const Vec jx = c.J().row(static_cast<Eigen::Index>(x)).transpose();
    b = b + (1.0 / c.N()) * (c.ladder().create(jx, n - 2) * c.a_phi2(n));
  }
  return b;
}

SparseOperator op_b_dagger(const RenormContext& c, size_t y, int n) {
  // n - 1 -> n.
  SparseOperator b = c.ladder().create(c.Q().col(static_cast<Eigen::Index>(y)), n - 1);
  if (n >= 2) {
    const Vec jy = c.J().row(static_cast<Eigen::Index>(y)).transpose();
    const auto dag2 = c.a_phi_dag(n - 1) * c.a_phi_dag(n - 2);
    b = b + (1.0 / c.N()) * (dag2 * c.ladder().annihilate(jy, n - 1));
  }
  return b;
}

SparseOperator op_b_smeared(const RenormContext& c, const Vec& g, int n) {
  SparseOperator b = c.ladder().annihilate(c.Q() * g, n);
  if (n >= 2) {
    const Vec v = c.J().transpose() * g.conjugate();
    b = b + (1.0 / c.N()) * (c.ladder().create(v, n - 2) * c.a_phi2(n));
  }
  return b;
}

SparseOperator build_N_ren(const RenormContext& c, int n) {
  SparseOperator r = c.n_perp(n);
  if (n >= 2) {
    const auto P = c.ladder().pair_create(c.J(), n - 2) * c.a_phi2(n);
    r = r + (1.0 / c.N()) * (P + P.adjoint());
  }
  return r;
}

SparseOperator build_Q_ren(const RenormContext& c, const Mat& dK, int n) {
  const auto d = static_cast<Eigen::Index>(c.ladder().basis(n).dimension());
  SparseOperator r{fock::SpMat(d, d), c.ladder().modes(), n, n};
  if (n >= 2) {
    const Mat G = c.Q() * (cplx(0, 1) * dK) * c.Q().transpose();
    const auto P = c.ladder().pair_create(G, n - 2) * c.a_phi2(n);
    r = (0.5 / c.N()) * (P + P.adjoint());
  }
  return r;
}

std::pair<SparseOperator, SparseOperator> build_H_ren(const RenormContext& c,
                                                      const lattice::LatticeModel& model) {
  const int N = c.N();
  const auto M = static_cast<Eigen::Index>(c.ladder().modes());
  require(model.kinetic.rows() == M, "lattice model does not match the modes");
  const auto d = static_cast<Eigen::Index>(c.ladder().basis(N).dimension());
  SparseOperator K{fock::SpMat(d, d), static_cast<int>(M), N, N};
  SparseOperator V = K;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.kinetic);
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < M; ++k) {
    const double lam = es.eigenvalues()[k];
    if (std::abs(lam) <= 1e-14 * std::max(1.0, lmax)) continue;
    const auto b = op_b_smeared(c, es.eigenvectors().col(k).cast<cplx>(), N);
    K = K + cplx(lam) * (b.adjoint() * b);
  }
  for (Eigen::Index x = 0; x < M; ++x) {
    const Eigen::VectorXd wx = model.interaction.row(x).transpose();
    if (wx.cwiseAbs().maxCoeff() == 0.0) continue;
    const Mat O = c.Q() * wx.cast<cplx>().asDiagonal() * c.Q();
    const auto b = op_b_field(c, static_cast<size_t>(x), N);
    V = V + 0.5 * (b.adjoint() * (c.ladder().one_body(O, N - 1) * b));
  }
  return {K, V};
}

SparseOperator build_cH_N(const RenormContext& c, const SparseOperator& H_N,
                          const lattice::LatticeModel& model, const Vec& w, double e_gp, double g,
                          double on_shell_tol, double* on_shell_residual) {
  const int N = c.N();
  const auto& L = c.ladder();
  const Vec& u = c.u();
  const auto M = u.size();
  require(w.size() == M, "time derivative does not match the modes");
  require(H_N.domain_n == N && H_N.codomain_n == N, "H_N must act on the N-particle sector");
  const double hd = model.grid.cell_volume();

  // Lattice GP right-hand side in mode-vector units.
  Vec gt(M);
  for (Eigen::Index i = 0; i < M; ++i) gt[i] = g / hd * std::norm(u[i]) * u[i];
  const double res = (c.Q() * (w - (model.kinetic.cast<cplx>() * u + gt))).norm();
  if (on_shell_residual) *on_shell_residual = res;
  if (on_shell_tol > 0.0 && res > on_shell_tol)
    throw PreconditionError("phi and d/dt phi do not satisfy the lattice GP equation (residual " +
                            std::to_string(res) + ")");

  const auto X = c.a_phi_dag(N - 1) * L.annihilate(c.Q() * w, N);
  return H_N - cplx(N * e_gp) * L.identity(N) - (X + X.adjoint()) + w.dot(u) * c.n_perp(N);
}

RenormOperators build_cH_N_and_parts(const RenormContext& c, const SparseOperator& H_N,
                                     const lattice::LatticeModel& model, const Vec& w, double e_gp,
                                     double g, double on_shell_tol) {
  const int N = c.N();
  const auto& L = c.ladder();
  const Vec& u = c.u();
  const Mat& Q = c.Q();
  const auto M = u.size();
  const double hd = model.grid.cell_volume();
  const Eigen::MatrixXd& T = model.kinetic;
  const Eigen::MatrixXd& W = model.interaction;

  RenormOperators out;
  out.cH_N = build_cH_N(c, H_N, model, w, e_gp, g, on_shell_tol, &out.on_shell_residual);
  Vec gt(M);
  for (Eigen::Index i = 0; i < M; ++i) gt[i] = g / hd * std::norm(u[i]) * u[i];

  const auto I = L.identity(N);
  const auto Nperp = c.n_perp(N);
  const auto nphi = c.n_phi(N);
  const cplx wu = w.dot(u);

  Vec hvec(M);
  const Eigen::VectorXd dens = u.cwiseAbs2();
  const Eigen::VectorXd wd = W * dens;
  for (Eigen::Index l = 0; l < M; ++l) hvec[l] = wd[l] * u[l];

  // H0
  {
    const double c0 = dens.dot(W * dens);
    const double tu = (u.dot(T.cast<cplx>() * u)).real();
    SparseOperator h0 = cplx(-N * e_gp) * I + cplx(tu) * nphi + wu * Nperp;
    if (N >= 2) {
      const auto dag2 = c.a_phi_dag(N - 1) * c.a_phi_dag(N - 2);
      h0 = h0 + cplx(0.5 * c0) * (dag2 * c.a_phi2(N));
    }
    out.parts[0] = h0;
  }
  // H1
  {
    const auto X = c.a_phi_dag(N - 1) * L.annihilate(Q * hvec, N);
    const auto Y = c.a_phi_dag(N - 1) * L.annihilate(Q * gt, N);
    const auto Z = X * (cplx(N) * I - Nperp) - Y;
    out.parts[1] = Z + Z.adjoint();
  }
  // H2
  {
    Mat G2(M, M);
    for (Eigen::Index x = 0; x < M; ++x)
      for (Eigen::Index y = 0; y < M; ++y) G2(x, y) = W(x, y) * u[x] * std::conj(u[y]);
    const Mat D1 = wd.cast<cplx>().asDiagonal();
    SparseOperator h2 = L.one_body(Q * T.cast<cplx>() * Q, N) + L.one_body(Q * (D1 + G2) * Q, N) * nphi;
    if (N >= 2) {
      Mat G3(M, M);
      for (Eigen::Index x = 0; x < M; ++x)
        for (Eigen::Index y = 0; y < M; ++y) G3(x, y) = W(x, y) * u[x] * u[y];
      const auto P = L.pair_create(Q * G3 * Q.transpose(), N - 2) * c.a_phi2(N);
      h2 = h2 + 0.5 * (P + P.adjoint());
    }
    out.parts[2] = h2;
  }
  // H3 and H4
  {
    const auto d = static_cast<Eigen::Index>(L.basis(N).dimension());
    SparseOperator h3{fock::SpMat(d, d), static_cast<int>(M), N, N};
    SparseOperator h4 = h3;
    if (N >= 2) {
      SparseOperator s3{fock::SpMat(d, d), static_cast<int>(M), N, N};
      const auto aphi = c.a_phi(N);
      for (Eigen::Index x = 0; x < M; ++x) {
        const Eigen::VectorXd wx = W.row(x).transpose();
        if (wx.cwiseAbs().maxCoeff() == 0.0) continue;
        const Vec vx = wx.cast<cplx>().cwiseProduct(u);
        const auto Ax1 = c.A(static_cast<size_t>(x), N - 1);
        const auto Adx = L.create(Q.col(x), N - 1);
        s3 = s3 + Adx * (L.create(Q * vx, N - 2) * (Ax1 * aphi));
        const auto AxN = c.A(static_cast<size_t>(x), N);
        const Mat O = Q * wx.cast<cplx>().asDiagonal() * Q;
        h4 = h4 + 0.5 * (AxN.adjoint() * (L.one_body(O, N - 1) * AxN));
      }
      h3 = s3 + s3.adjoint();
    }
    out.parts[3] = h3;
    out.parts[4] = h4;
  }
  return out;
}

CommutatorReport commutator_identities(const RenormContext& c) {
  const int N = c.N();
  const auto& L = c.ladder();
  const Mat& J = c.J();
  const auto M = c.u().size();
  CommutatorReport rep;
  const auto NrenN = build_N_ren(c, N);
  const auto NrenN1 = build_N_ren(c, N - 1);
  const auto I = L.identity(N);
  const double invN2 = 1.0 / (static_cast<double>(N) * N);
  SparseOperator pairs_ann, aa_dag_aa, two_nphi_plus_1;
  if (N >= 2) {
    pairs_ann = L.pair_create(J, N - 2).adjoint();  // sum_z a(J_z) a_z: N -> N-2
    aa_dag_aa = (c.a_phi_dag(N - 1) * c.a_phi_dag(N - 2)) * c.a_phi2(N);
    two_nphi_plus_1 = 2.0 * c.n_phi(N) + I;
  }
  for (Eigen::Index x = 0; x < M; ++x) {
    const auto bx = op_b_field(c, static_cast<size_t>(x), N);
    const auto lhs = bx * NrenN - NrenN1 * bx;
    SparseOperator rhs = bx, rhs_lit = bx;
    if (N >= 2) {
      const Vec jx = J.row(x).transpose();
      // c_z = <J_z, J_x> and its conjugate.
      const Vec cz = J.conjugate() * jx;
      const auto t2 = L.annihilate(cz.conjugate(), N) * aa_dag_aa;
      const auto t2_lit = L.annihilate(cz, N) * aa_dag_aa;
      const auto t3 = L.create(jx, N - 2) * (pairs_ann * two_nphi_plus_1);
      rhs = bx - (2.0 * invN2) * t2 + (2.0 * invN2) * t3;
      rhs_lit = bx - (2.0 * invN2) * t2_lit + (2.0 * invN2) * t3;
    }
    rep.b_commutator = std::max(rep.b_commutator, fock::max_abs_diff(lhs, rhs));
    rep.b_commutator_literal = std::max(rep.b_commutator_literal, fock::max_abs_diff(lhs, rhs_lit));
    const auto bdx = op_b_dagger(c, static_cast<size_t>(x), N);
    const auto lhs_dag = bdx * NrenN1 - NrenN * bdx;
    rep.b_dagger_commutator = std::max(rep.b_dagger_commutator, fock::max_abs_diff(lhs_dag, cplx(-1.0) * lhs.adjoint()));
    const auto Np = c.n_perp(N);
    const auto op = L.create(c.Q().col(x), N - 1) * c.a_phi(N);
    rep.nperp_ladder = std::max(rep.nperp_ladder, fock::max_abs_diff(fock::commutator(Np, op), op));
  }
  rep.nperp_condensate = fock::commutator(c.n_perp(N), c.n_phi(N)).max_abs();
  return rep;
}

Mat dtQ_formula(const Vec& u, const Vec& du) {
  const Mat Q = fock::projector_Q(u);
  const Vec q = Q * du;
  return -(u * q.adjoint() + q * u.adjoint());
}

Sandwich sandwich_constants(const SparseOperator& N_ren, const SparseOperator& N_perp) {
  const Mat A = N_ren.dense() + Mat::Identity(N_ren.matrix.rows(), N_ren.matrix.cols());
  const Mat B = N_perp.dense() + Mat::Identity(N_perp.matrix.rows(), N_perp.matrix.cols());
  const auto ex = linalg::generalized_extremes(A, B);
  require(ex.min > 0.0, "N_ren + 1 is not positive definite");
  return {1.0 / ex.min, ex.max};
}

double q_bound_constant(const SparseOperator& Q_ren, const SparseOperator& N_ren) {
  const Mat B = N_ren.dense() + Mat::Identity(N_ren.matrix.rows(), N_ren.matrix.cols());
  const auto ex = linalg::generalized_extremes(Q_ren.dense(), B);
  return std::max(ex.max, -ex.min);
}

AuxBound aux_bound(const SparseOperator& cH_N, const SparseOperator& Q_ren,
                   const SparseOperator& N_ren, const SparseOperator& N_perp) {
  const Mat X = (cH_N + Q_ren - N_perp).dense();
  const Mat Y = N_ren.dense() + Mat::Identity(N_ren.matrix.rows(), N_ren.matrix.cols());
  const auto ex = linalg::generalized_extremes(-X, Y);
  AuxBound r;
  r.constant = std::max(0.0, ex.max);
  r.min_eigenvalue = linalg::min_eigenvalue(X + r.constant * Y);
  return r;
}

}  // namespace gplab::renorm
