#include <doctest.h>

#include <random>

#include "gplab/fock.hpp"
#include "gplab/verify.hpp"
#include "oracle.hpp"

using namespace gplab;
using namespace gplab::fock;

namespace {

std::mt19937_64 rng(2024);

Vec rvec(Eigen::Index n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(d(rng), d(rng));
  return v;
}

Mat rmat(Eigen::Index n) {
  Mat m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = rvec(n);
  return m;
}

double diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("sector dimensions and indexing") {
  CHECK(sector_dimension(3, 2) == 6);
  CHECK(sector_dimension(8, 3) == 120);
  CHECK(sector_dimension(64, 3) == 45760);
  CHECK(sector_dimension(5, 0) == 1);
  const SectorBasis b(4, 3);
  CHECK(b.dimension() == 20);
  for (size_t i = 0; i < b.dimension(); ++i) {
    const auto occ = b.occupations(i);
    int sum = 0;
    for (int k : occ) sum += k;
    CHECK(sum == 3);
    CHECK(b.index(occ) == i);
    if (i > 0) CHECK(b.occupations(i - 1) > occ);  // descending lexicographic
  }
  CHECK_THROWS_AS(SectorBasis(64, 6, 1000), CapacityError);
}

TEST_CASE("embedding into the tensor space is an isometry") {
  for (int M : {1, 2, 3})
    for (int n : {0, 1, 2, 3}) {
      const SectorBasis b(M, n);
      const auto E = oracle::embedding(b);
      CHECK(diff(E.adjoint() * E, Mat::Identity(E.cols(), E.cols())) < 1e-12);
    }
}

TEST_CASE("sparse assemblies match the first-quantized oracle") {
  for (int M : {1, 2, 3}) {
    const Ladder L(M, 3);
    for (int n = 0; n <= 3; ++n) {
      const auto& bn = L.basis(n);
      const Vec f = rvec(M);
      if (n < 3) {
        const Mat ref = oracle::restrict(oracle::create(f, M, n), L.basis(n + 1), bn);
        CHECK(diff(L.create(f, n).dense(), ref) < 1e-10);
      }
      if (n > 0) {
        const Mat ref = oracle::restrict(oracle::annihilate(f, M, n), L.basis(n - 1), bn);
        CHECK(diff(L.annihilate(f, n).dense(), ref) < 1e-10);
      }
      const Mat G = rmat(M);
      CHECK(diff(L.one_body(G, n).dense(), oracle::restrict(oracle::one_body(G, M, n), bn, bn)) < 1e-10);
      Eigen::MatrixXd W = Eigen::MatrixXd::Random(M, M);
      W = (W + W.transpose()).eval();
      CHECK(diff(L.density_density(W, n).dense(),
                 oracle::restrict(oracle::pair_potential(W, M, n), bn, bn)) < 1e-10);
      if (n + 2 <= 3) {
        Mat ref = Mat::Zero(oracle::ipow(M, n + 2), oracle::ipow(M, n));
        for (int i = 0; i < M; ++i)
          for (int j = 0; j < M; ++j)
            ref += G(i, j) * oracle::create(Vec::Unit(M, i), M, n + 1) * oracle::create(Vec::Unit(M, j), M, n);
        CHECK(diff(L.pair_create(G, n).dense(), oracle::restrict(ref, L.basis(n + 2), bn)) < 1e-10);
      }
    }
  }
}

TEST_CASE("first-quantized conversions") {
  const Ladder L(3, 3);
  const Vec u = rvec(3).normalized();
  const auto ps = product_state(u, L, 3);
  Vec kron = u;
  for (int k = 1; k < 3; ++k) {
    Vec next(kron.size() * 3);
    for (Eigen::Index i = 0; i < kron.size(); ++i) next.segment(i * 3, 3) = kron[i] * u;
    kron = next;
  }
  CHECK((to_first_quantized(ps) - kron).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((oracle::embedding(L.basis(3)) * ps.coeffs - kron).cwiseAbs().maxCoeff() < 1e-12);
  const FockVector r{rvec(static_cast<Eigen::Index>(L.basis(3).dimension())), 3, 3};
  CHECK((from_first_quantized(to_first_quantized(r), L, 3).coeffs - r.coeffs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hopping expectation on a product state") {
  const Ladder L(4, 3);
  const Vec u = rvec(4).normalized(), f = rvec(4), g = rvec(4);
  const auto ps = product_state(u, L, 3);
  const auto op = L.create(f, 2) * L.annihilate(g, 3);
  const cplx got = ps.coeffs.dot(op.matrix * ps.coeffs);
  CHECK(std::abs(got - 3.0 * u.dot(f) * g.dot(u)) < 1e-12);
}

TEST_CASE("canonical commutation relations on the truncated space") {
  const FockSpace F(3, 4);
  CHECK(F.dimension() == 35);
  const Vec f = rvec(3), g = rvec(3);
  const auto d = ccr_defect(f, g, F);
  CHECK(d.restricted < 1e-12);
  CHECK(d.top > 1e-3);  // truncation shows up only in the last sector
  const auto A = F.annihilate(f), B = F.create(g);
  const Mat c = (A * B - B * A).dense();
  const Eigen::Index lo = static_cast<Eigen::Index>(F.offset(1));
  CHECK(std::abs(c(lo, lo) - f.dot(g)) < 1e-12);
}

TEST_CASE("projector and excitation number") {
  const int M = 5;
  const Vec u = rvec(M).normalized();
  const Mat Q = projector_Q(u);
  CHECK(diff(Q * Q, Q) < 1e-12);
  CHECK(diff(Q, Q.adjoint()) < 1e-12);
  CHECK((Q * u).norm() < 1e-12);
  CHECK(std::abs(Q.trace() - cplx(M - 1)) < 1e-10);

  const Ladder L(3, 3);
  const Vec v = rvec(3).normalized();
  const auto Np = op_excitation_number(v, L, 3);
  const Mat ref = oracle::restrict(oracle::one_body(projector_Q(v), 3, 3), L.basis(3), L.basis(3));
  CHECK(diff(Np.dense(), ref) < 1e-10);
  const auto direct = cplx(3) * L.identity(3) - L.create(v, 2) * L.annihilate(v, 3);
  CHECK(max_abs_diff(direct, Np) < 1e-10);
  CHECK(std::abs(product_state(v, L, 3).coeffs.dot(Np.matrix * product_state(v, L, 3).coeffs)) < 1e-12);
}

TEST_CASE("operator algebra helpers") {
  const Ladder L(3, 2);
  const Vec f = rvec(3);
  const auto A = L.annihilate(f, 2);
  CHECK(max_abs_diff(A.adjoint(), L.create(f, 1)) < 1e-14);
  const auto N1 = L.one_body(Mat::Identity(3, 3), 2);
  CHECK(max_abs_diff(N1, cplx(2) * L.identity(2)) < 1e-14);
  CHECK(commutator(N1, L.one_body(rmat(3), 2)).max_abs() < 1e-12);
  CHECK_THROWS_AS(L.one_body(Mat::Identity(3, 3), 3), PreconditionError);
}

TEST_CASE("Fock inequality suite") {
  const auto s = verify::fock_lemma_suite(4, 2, 40, 7);
  CHECK(s.n_perp_two_route < 1e-10);
  CHECK(s.inequalities.size() >= 10);
  for (const auto& r : s.inequalities) {
    INFO(r.name);
    CHECK(r.passed);
    CHECK(r.draws == 40);
  }
}
