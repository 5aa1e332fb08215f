#include <doctest.h>

#include <random>

#include "gplab/lattice.hpp"
#include "gplab/linalg.hpp"
#include "gplab/renorm.hpp"
#include "oracle.hpp"

using namespace gplab;
using namespace gplab::renorm;

namespace {

std::mt19937_64 rng(77);

Vec rvec(Eigen::Index n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(d(rng), d(rng));
  return v;
}

Mat rsym(Eigen::Index n) {
  Mat m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = rvec(n);
  return 0.3 * (m + m.transpose());
}

double diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

const scattering::ScatteringSolution& well() {
  static const auto sol =
      scattering::solve_zero_energy(scattering::RadialPotential::square_well(2.0, 1.0, 1e-3), 8.0, 1e-6);
  return sol;
}

// Tensor-space b_x = a(Q_x) + (1/N) sum_z J_xz a*_z a(phi)^2 on n particles.
Mat dense_b(const Mat& Q, const Mat& J, const Vec& u, int N, int x, int n) {
  const int M = static_cast<int>(u.size());
  Mat b = oracle::annihilate(Q.col(x), M, n);
  if (n >= 2) {
    const Mat aa = oracle::annihilate(u, M, n - 1) * oracle::annihilate(u, M, n);
    for (int z = 0; z < M; ++z) b += J(x, z) / double(N) * oracle::create(Vec::Unit(M, z), M, n - 2) * aa;
  }
  return b;
}

Mat dense_N_ren(const Mat& Q, const Mat& J, const Vec& u, int N, int n) {
  const int M = static_cast<int>(u.size());
  Mat r = oracle::one_body(Q, M, n);
  if (n >= 2) {
    const Mat aa = oracle::annihilate(u, M, n - 1) * oracle::annihilate(u, M, n);
    Mat P = Mat::Zero(r.rows(), r.cols());
    for (int z = 0; z < M; ++z)
      for (int w = 0; w < M; ++w)
        P += J(z, w) * oracle::create(Vec::Unit(M, z), M, n - 1) * oracle::create(Vec::Unit(M, w), M, n - 2) * aa;
    r += (P + P.adjoint()) / double(N);
  }
  return r;
}

struct Setup {
  gp::Grid grid;
  lattice::LatticeModel model;
  fock::Ladder ladder;
  Vec u;
  Mat K;
};

Setup small_setup(int N) {
  const auto grid = gp::Grid::cube(1, 4, 4.0);
  const auto V = scattering::RadialPotential::square_well(2.0, 1.0, 1e-3);
  auto model = lattice::build_model(grid, V, 1.0, lattice::InteractionModel::Sampled);
  return {grid, model, fock::Ladder(4, N), rvec(4).normalized(), rsym(4)};
}

}  // namespace

TEST_CASE("cutoff is C2 with the stated support") {
  const double r = 0.7;
  CHECK(cutoff(0.0, r) == 1.0);
  CHECK(cutoff(r, r) == 1.0);
  CHECK(cutoff(2 * r, r) == 0.0);
  CHECK(cutoff(1.5 * r, r) == doctest::Approx(0.5));
  for (double d : {0.8, 1.0, 1.2, 1.35}) {
    const double e = 1e-5;
    const double fd = (cutoff(d + e, r) - cutoff(d - e, r)) / (2 * e);
    CHECK(cutoff_derivative(d, r) == doctest::Approx(fd).epsilon(1e-7));
  }
  // second derivative vanishes at both joins
  const double e = 1e-4;
  for (double d : {r, 2 * r}) {
    const double d2 = (cutoff(d + e, r) - 2 * cutoff(d, r) + cutoff(d - e, r)) / (e * e);
    CHECK(std::abs(d2) < 1e-2);
  }
}

TEST_CASE("kernel entries, matrix and norms") {
  const auto grid = gp::Grid::cube(2, 8, 4.0);
  const auto phi = gp::Field::gaussian(grid, 1.0);
  const int N = 3;
  const auto k = build_kernel(phi, well(), N, 1.0);
  const double hd = grid.cell_volume();
  const Mat K = k.matrix();
  for (size_t x : {size_t(0), size_t(9), size_t(36)})
    for (size_t y : {size_t(36), size_t(37), size_t(45), size_t(63)}) {
      const double d = grid.distance(x, y);
      const double ref = N * (1 - well().f_at(N * d)) * cutoff(d, 1.0) * phi.values[long(x)].real() *
                         phi.values[long(y)].real() * hd;
      CHECK(std::abs(k.entry(x, y) - ref) < 1e-14);
      CHECK(std::abs(K(long(x), long(y)) - ref) < 1e-14);
    }
  CHECK(k.hs_norm() == doctest::Approx(K.norm()).epsilon(1e-10));
  const auto cols = k.column_norms();
  for (long x = 0; x < K.cols(); x += 7) CHECK(cols[size_t(x)] == doctest::Approx(K.col(x).norm() / std::sqrt(hd)).epsilon(1e-9));
  CHECK(diff(K, K.transpose()) < 1e-15);
  CHECK_THROWS_AS(build_kernel(phi, well(), N, 3.0), PreconditionError);
}

TEST_CASE("kernel norm scales like the square root of the cutoff") {
  const auto ns = kernel_norm_scaling(well(), {0.5, 0.25, 0.125}, 64);
  CHECK(ns.norms.size() == 3);
  CHECK(std::abs(ns.exponent - 0.5) < 0.1);
}

TEST_CASE("renormalized fields and N_ren against tensor-space products") {
  for (int N : {2, 3}) {
    const auto s = small_setup(N);
    const RenormContext c(s.ladder, N, s.u, s.K);
    const Mat Q = c.Q(), J = c.J();
    CHECK(diff(J, Q * s.K * Q.transpose()) < 1e-14);
    const auto& bN = s.ladder.basis(N);
    const auto& bN1 = s.ladder.basis(N - 1);
    for (int x = 0; x < 4; ++x) {
      const Mat ref = oracle::restrict(dense_b(Q, J, s.u, N, x, N), bN1, bN);
      CHECK(diff(op_b_field(c, size_t(x), N).dense(), ref) < 1e-10);
      CHECK(diff(op_b_dagger(c, size_t(x), N).dense(), ref.adjoint()) < 1e-10);
    }
    const Vec g = rvec(4);
    Mat smeared = Mat::Zero(Eigen::Index(bN1.dimension()), Eigen::Index(bN.dimension()));
    for (int y = 0; y < 4; ++y) smeared += std::conj(g[y]) * op_b_field(c, size_t(y), N).dense();
    CHECK(diff(op_b_smeared(c, g, N).dense(), smeared) < 1e-10);
    CHECK(diff(build_N_ren(c, N).dense(), oracle::restrict(dense_N_ren(Q, J, s.u, N, N), bN, bN)) < 1e-10);
  }
}

TEST_CASE("K_ren and V_ren against site sums, both non-negative") {
  const int N = 3;
  const auto s = small_setup(N);
  const RenormContext c(s.ladder, N, s.u, s.K);
  const Mat Q = c.Q(), J = c.J();
  const auto& bN = s.ladder.basis(N);
  std::vector<Mat> b;
  for (int x = 0; x < 4; ++x) b.push_back(dense_b(Q, J, s.u, N, x, N));
  const long D = oracle::ipow(4, N);
  Mat Kr = Mat::Zero(D, D), Vr = Mat::Zero(D, D);
  const auto& T = s.model.kinetic;
  const auto& W = s.model.interaction;
  for (int x = 0; x < 4; ++x) {
    Mat inner = Mat::Zero(oracle::ipow(4, N - 1), oracle::ipow(4, N - 1));
    for (int y = 0; y < 4; ++y) {
      Kr += T(x, y) * b[size_t(x)].adjoint() * b[size_t(y)];
      inner += W(x, y) * oracle::create(Q.col(y), 4, N - 2) * oracle::annihilate(Q.col(y), 4, N - 1);
    }
    Vr += 0.5 * b[size_t(x)].adjoint() * inner * b[size_t(x)];
  }
  const auto [Kop, Vop] = build_H_ren(c, s.model);
  CHECK(diff(Kop.dense(), oracle::restrict(Kr, bN, bN)) < 1e-10);
  CHECK(diff(Vop.dense(), oracle::restrict(Vr, bN, bN)) < 1e-10);
  CHECK(linalg::hermiticity_defect(Kop.matrix) < 1e-10);
  CHECK(linalg::min_eigenvalue(Kop.dense()) >= -1e-8);
  CHECK(linalg::min_eigenvalue(Vop.dense()) >= -1e-8);
}

TEST_CASE("five-part decomposition and the product-state expectation") {
  const int N = 3;
  auto s = small_setup(N);
  const RenormContext c(s.ladder, N, s.u, s.K);
  const double g = 0.8, hd = s.grid.cell_volume();
  Vec w = s.model.kinetic.cast<cplx>() * s.u;
  for (Eigen::Index i = 0; i < 4; ++i) w[i] += g / hd * std::norm(s.u[i]) * s.u[i];
  w += cplx(0.3, 0.0) * s.u;  // components along phi are unconstrained
  const double e_gp = 1.7;
  auto H = s.ladder.one_body(s.model.one_body().cast<cplx>(), N) + s.ladder.density_density(s.model.interaction, N);
  const auto ops = build_cH_N_and_parts(c, H, s.model, w, e_gp, g, 1e-10);
  auto sum = ops.parts[0];
  for (int j = 1; j < 5; ++j) sum = sum + ops.parts[size_t(j)];
  CHECK(fock::max_abs_diff(sum, ops.cH_N) < 1e-8);
  CHECK(ops.on_shell_residual < 1e-12);

  const auto ps = fock::product_state(s.u, s.ladder, N);
  const double hN = ps.coeffs.dot(H.matrix * ps.coeffs).real();
  CHECK(ps.coeffs.dot(ops.cH_N.matrix * ps.coeffs).real() == doctest::Approx(hN - N * e_gp).epsilon(1e-12));

  Vec off = w;
  off[0] += 0.1;
  CHECK_THROWS_AS(build_cH_N(c, H, s.model, off, e_gp, g, 1e-8), PreconditionError);
}

TEST_CASE("commutator identities") {
  for (int N : {2, 3}) {
    const auto s = small_setup(N);
    const RenormContext c(s.ladder, N, s.u, s.K);
    const auto r = commutator_identities(c);
    CHECK(r.b_commutator < 1e-10);
    CHECK(r.b_dagger_commutator < 1e-10);
    CHECK(r.nperp_ladder < 1e-10);
    CHECK(r.nperp_condensate < 1e-10);
    // With a complex kernel the two inner-product orders differ.
    CHECK(r.b_commutator_literal > 1e-6);
  }
}

TEST_CASE("sandwich, Q_ren and auxiliary bounds") {
  const int N = 3;
  const auto s = small_setup(N);
  {
    const RenormContext c(s.ladder, N, s.u, Mat::Zero(4, 4));
    const auto sw = sandwich_constants(build_N_ren(c, N), c.n_perp(N));
    CHECK(sw.c_minus == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sw.c_plus == doctest::Approx(1.0).epsilon(1e-12));
  }
  const RenormContext c(s.ladder, N, s.u, 0.2 * s.K);
  const auto Nr = build_N_ren(c, N), Np = c.n_perp(N);
  const auto sw = sandwich_constants(Nr, Np);
  CHECK(sw.c_minus >= 1.0);
  CHECK(sw.c_plus >= 1.0);
  const Mat A = Nr.dense() + Mat::Identity(Nr.matrix.rows(), Nr.matrix.cols());
  const Mat B = Np.dense() + Mat::Identity(Np.matrix.rows(), Np.matrix.cols());
  CHECK(linalg::min_eigenvalue(sw.c_plus * B - A) >= -1e-10);
  CHECK(linalg::min_eigenvalue(A - B / sw.c_minus) >= -1e-10);

  const Mat dK = rsym(4);
  const auto Qr = build_Q_ren(c, dK, N);
  CHECK(linalg::hermiticity_defect(Qr.matrix) < 1e-12);
  const double C = q_bound_constant(Qr, Nr);
  CHECK(linalg::min_eigenvalue(C * A + Qr.dense()) >= -1e-8);
  CHECK(linalg::min_eigenvalue(C * A - Qr.dense()) >= -1e-8);

  auto H = s.ladder.one_body(s.model.one_body().cast<cplx>(), N) + s.ladder.density_density(s.model.interaction, N);
  const Vec w = s.model.kinetic.cast<cplx>() * s.u;
  const auto cH = build_cH_N(c, H, s.model, w, 0.0, 0.0, 0.0);
  const auto ab = aux_bound(cH, Qr, Nr, Np);
  CHECK(ab.constant >= 0.0);
  CHECK(ab.min_eigenvalue >= -1e-8);
}

TEST_CASE("projector and kernel time derivatives converge at second order") {
  const auto grid = gp::Grid::cube(1, 16, 6.0);
  gp::Spectral sp(grid);
  const auto phi0 = gp::Field::gaussian(grid, 1.0);
  const gp::GpParams p{3.0, std::nullopt};
  double pq = 0, pk = 0, pk2 = 0;
  for (double dt : {0.02, 0.01, 0.005}) {
    gp::EvolveOptions o;
    o.scheme = gp::SplitScheme::Yoshida4;
    const auto traj = gp::evolve_split_step(sp, phi0, p, dt, 2, o);
    const Vec u = traj.samples[1].mode_vector();
    const Vec du = gp::time_derivative(sp, traj, 1, dt).mode_vector();
    const Mat fdq = (fock::projector_Q(traj.samples[2].mode_vector()) - fock::projector_Q(traj.samples[0].mode_vector())) / (2 * dt);
    const double eq = diff(fdq, dtQ_formula(u, du));
    const auto [a1, a2] = kernel_time_derivatives(sp, traj, well(), 2, 1.0, dt);
    const auto [f1, f2] = kernel_fd_derivatives(traj, well(), 2, 1.0, dt);
    const double ek = diff(a1, f1), ek2 = diff(a2, f2);
    if (pq > 0) {
      CHECK(std::log2(pq / eq) > 1.8);
      CHECK(std::log2(pk / ek) > 1.8);
      CHECK(std::log2(pk2 / ek2) > 1.8);
    }
    pq = eq;
    pk = ek;
    pk2 = ek2;
  }
}
