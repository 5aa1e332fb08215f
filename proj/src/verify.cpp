#include "gplab/verify.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace gplab::verify {

using fock::Mat;
using fock::SparseOperator;
using fock::Vec;

namespace {

Vec random_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(d(rng), d(rng));
  return v;
}

double expect(const SparseOperator& A, const Vec& v) { return v.dot(A.matrix * v).real(); }

}  // namespace

FockSuite fock_lemma_suite(int M, int N, int draws, std::uint64_t seed, double tol) {
  require(M >= 1 && N >= 1 && draws >= 1, "suite needs modes, particles and draws");
  const fock::Ladder L(M, N + 2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::map<std::string, InequalityResult> res;
  std::vector<std::string> order;
  auto record = [&](const std::string& name, double lhs, double rhs) {
    auto [it, fresh] = res.try_emplace(name);
    if (fresh) {
      order.push_back(name);
      it->second.name = name;
      it->second.worst_slack = std::numeric_limits<double>::infinity();
    }
    auto& r = it->second;
    r.draws++;
    const double s = (rhs - lhs) / std::max(1.0, std::abs(rhs));
    r.worst_slack = std::min(r.worst_slack, s);
    if (s < -tol) r.passed = false;
  };

  FockSuite out;
  const auto dimN = static_cast<Eigen::Index>(L.basis(N).dimension());
  const auto dimN2 = static_cast<Eigen::Index>(L.basis(N + 2).dimension());
  for (int k = 0; k < draws; ++k) {
    const Vec u = random_vec(rng, M).normalized();
    const Mat Q = fock::projector_Q(u);
    const Vec f = random_vec(rng, M), g = random_vec(rng, M);
    const Mat h = Mat::NullaryExpr(M, M, [&]() {
      std::normal_distribution<double> d;
      return cplx(d(rng), d(rng));
    });
    Vec psi;
    if (k % 2 == 0) {
      psi = random_vec(rng, dimN);
    } else {
      psi = fock::product_state(u, L, N).coeffs + (0.05 * unif(rng)) * random_vec(rng, dimN);
    }
    psi.normalize();
    Vec xi = random_vec(rng, dimN2).normalized();

    const auto Np = fock::op_excitation_number(u, L, N);
    const auto Np2 = fock::op_excitation_number(u, L, N + 2);
    const double np = expect(Np, psi);

    if (k == 0) {
      // Operator identity, once per suite.
      SparseOperator sum{fock::SpMat(dimN, dimN), M, N, N};
      for (int x = 0; x < M; ++x) {
        const auto A = L.annihilate(Q.col(x), N);
        sum = sum + A.adjoint() * A;
      }
      const auto direct = cplx(N) * L.identity(N) - L.create(u, N - 1) * L.annihilate(u, N);
      out.n_perp_two_route = std::max(fock::max_abs_diff(direct, Np), fock::max_abs_diff(sum, Np));
    }

    record("0 <= N_perp", 0.0, np);
    record("N_perp <= N", np, N);
    record("|a(f) psi| <= |f| sqrt(N)", (L.annihilate(f, N).matrix * psi).norm(), f.norm() * std::sqrt(N));
    record("|a*(f) psi| <= |f| sqrt(N+1)", (L.create(f, N).matrix * psi).norm(), f.norm() * std::sqrt(N + 1.0));
    record("|a(Qf) psi| <= |f| |N_perp^1/2 psi|", (L.annihilate(Q * f, N).matrix * psi).norm(),
           f.norm() * std::sqrt(std::max(0.0, np)));
    record("|a*(Qf) psi| <= |f| |(N_perp+1)^1/2 psi|", (L.create(Q * f, N).matrix * psi).norm(),
           f.norm() * std::sqrt(np + 1.0));
    {
      const auto op = L.create(f, N - 1) * L.annihilate(g, N);
      record("|<a*(f) a(g)>| <= N |f| |g|", std::abs(psi.dot(op.matrix * psi)), N * f.norm() * g.norm());
      const auto opq = L.create(Q * f, N - 1) * L.annihilate(Q * g, N);
      record("|<a*(Qf) a(Qg)>| <= |Qf| |Qg| <N_perp>", std::abs(psi.dot(opq.matrix * psi)),
             (Q * f).norm() * (Q * g).norm() * np);
    }
    {
      // Kernel bounds. Pair creation changes N, so it is paired with xi in sector N+2 and
      // bounded through Cauchy-Schwarz in x.
      double s_pair = 0, s_pair_q = 0, s_hop = 0, s_hop_q = 0;
      for (int x = 0; x < M; ++x) {
        const Vec hx = h.row(x).transpose();
        const Vec ex = Vec::Unit(M, x);
        const auto pair = L.create(ex, N + 1) * L.create(hx, N);
        s_pair += std::abs(xi.dot(pair.matrix * psi));
        const auto pair_q = L.create(Q.col(x), N + 1) * L.create(Q * hx, N);
        s_pair_q += std::abs(xi.dot(pair_q.matrix * psi));
        const auto hop = L.create(ex, N - 1) * L.annihilate(hx, N);
        s_hop += std::abs(psi.dot(hop.matrix * psi));
        const auto hop_q = L.create(Q.col(x), N - 1) * L.annihilate(Q * hx, N);
        s_hop_q += std::abs(psi.dot(hop_q.matrix * psi));
      }
      const double hn = h.norm();
      record("sum_x |<xi, a*_x a*(h_x) psi>| <= sqrt((N+1)(N+2)) |h|", s_pair,
             std::sqrt((N + 1.0) * (N + 2.0)) * hn);
      record("sum_x |<xi, a*(Q_x) a*(Q h_x) psi>| <= |h| <N_perp>_xi^1/2 <N_perp+1>_psi^1/2", s_pair_q,
             hn * std::sqrt(std::max(0.0, expect(Np2, xi))) * std::sqrt(np + 1.0));
      record("sum_x |<a*_x a(h_x)>| <= N |h|", s_hop, N * hn);
      record("sum_x |<a*(Q_x) a(Q h_x)>| <= |h| <N_perp>", s_hop_q, hn * np);
    }
  }
  for (const auto& n : order) out.inequalities.push_back(res[n]);
  return out;
}

}  // namespace gplab::verify
