#include <doctest.h>

#include <random>

#include "gplab/manybody.hpp"
#include "oracle.hpp"

using namespace gplab;
using namespace gplab::manybody;

namespace {

std::mt19937_64 rng(99);

Vec rvec(Eigen::Index n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(d(rng), d(rng));
  return v;
}

double diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

const scattering::RadialPotential& well() {
  static const auto V = scattering::RadialPotential::square_well(2.0, 1.0, 1e-3);
  return V;
}

const scattering::ScatteringSolution& well_solution() {
  static const auto sol = scattering::solve_zero_energy(well(), 8.0, 1e-6);
  return sol;
}

ManyBodyConfig config_1d(int points, double length, int N) {
  ManyBodyConfig c;
  c.grid = gp::Grid::cube(1, points, length);
  c.particles = N;
  c.potential = well();
  return c;
}

}  // namespace

TEST_CASE("sampled interaction is s^{d-1} V(s |x - y|)") {
  const auto g = gp::Grid::cube(2, 8, 4.0);
  const double s = 1.5;
  const auto W = lattice::interaction_matrix(g, well(), s, lattice::InteractionModel::Sampled);
  for (size_t x : {size_t(0), size_t(27)})
    for (size_t y = 0; y < g.size(); y += 5)
      CHECK(W(long(x), long(y)) == doctest::Approx(s * well().at(s * g.distance(x, y))));
  CHECK((W - W.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cell-averaged interaction integrates to int V / s") {
  const auto V = scattering::RadialPotential::smooth_bump(2.0, 1.0, 1e-3);
  for (int dim : {1, 2, 3}) {
    const auto g = gp::Grid::cube(dim, dim == 3 ? 8 : 16, 4.0);
    const double s = 1.3;
    const auto W = lattice::interaction_matrix(g, V, s, lattice::InteractionModel::CellAveraged);
    const double sum = W.row(0).sum() * g.cell_volume();
    CHECK(sum == doctest::Approx(V.integral(dim) / s).epsilon(2e-3));
  }
}

TEST_CASE("one particle: H is the one-body matrix") {
  auto cfg = config_1d(8, 4.0, 1);
  cfg.trap = gp::harmonic_trap(cfg.grid, 0.5);
  const auto sys = make_system(cfg);
  const auto H = build_H(sys);
  CHECK(diff(H.dense(), sys.model.one_body().cast<cplx>()) < 1e-12);
}

TEST_CASE("H_N against the first-quantized oracle") {
  for (int N : {2, 3}) {
    auto cfg = config_1d(4, 3.0, N);
    cfg.interaction_scale = 1.0;
    cfg.trap = gp::harmonic_trap(cfg.grid, 0.7);
    const auto sys = make_system(cfg);
    const auto& b = sys.ladder.basis(N);
    const Mat ref = oracle::one_body(sys.model.one_body().cast<cplx>(), 4, N) +
                    oracle::pair_potential(sys.model.interaction, 4, N);
    CHECK(diff(build_H(sys).dense(), oracle::restrict(ref, b, b)) < 1e-10);
  }
}

TEST_CASE("reduced density against a tensor-space partial trace") {
  const fock::Ladder L(3, 3);
  const FockVector psi{rvec(long(L.basis(3).dimension())).normalized(), 3, 3};
  const Vec fq = oracle::embedding(L.basis(3)) * psi.coeffs;
  const Mat g = reduced_density(psi, L);
  CHECK(diff(g, oracle::partial_trace(fq, 3, 3)) < 1e-12);
  CHECK(std::abs(g.trace() - 1.0) < 1e-12);
  CHECK(diff(g, g.adjoint()) < 1e-12);
}

TEST_CASE("depletion two routes on random states") {
  const auto grid = gp::Grid::cube(1, 8, 4.0);
  const fock::Ladder L(8, 3);
  const auto phi = gp::Field::gaussian(grid, 1.0);
  for (int k = 0; k < 5; ++k) {
    const FockVector psi{rvec(long(L.basis(3).dimension())).normalized(), 8, 3};
    const auto d = depletion(psi, phi, L);
    CHECK(d.discrepancy < 1e-10);
    CHECK(d.depletion >= 0.0);
    CHECK(d.depletion <= 1.0);
  }
  const auto ps = fock::product_state(phi.mode_vector(), L, 3);
  CHECK(std::abs(depletion(ps, phi, L).depletion) < 1e-12);
}

TEST_CASE("Krylov propagation against a dense exponential") {
  auto cfg = config_1d(8, 4.0, 2);
  const auto sys = make_system(cfg);
  const auto H = build_H(sys);
  const Mat Hd = H.dense();
  Eigen::SelfAdjointEigenSolver<Mat> es(Hd);
  const auto psi0 = fock::product_state(gp::Field::gaussian(cfg.grid, 0.7).mode_vector(), sys.ladder, 2);
  EvolveOptions o;
  o.sample_every = 5;
  const auto tr = evolve(H, psi0, 0.05, 20, o);
  for (size_t k = 0; k < tr.times.size(); ++k) {
    const Eigen::VectorXcd ph = (es.eigenvalues() * cplx(0, -tr.times[k])).array().exp();
    const Vec ex = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * psi0.coeffs;
    CHECK((tr.states[k].coeffs - ex).norm() < 1e-10);
    CHECK(std::abs(tr.states[k].coeffs.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("Lanczos ground state against dense diagonalization") {
  auto cfg = config_1d(16, 8.0, 3);
  cfg.trap = gp::harmonic_trap(cfg.grid, 1.0);
  const auto sys = make_system(cfg);
  const auto H = build_H(sys);
  CHECK(sys.ladder.basis(3).dimension() == 816);
  const auto gs = ground_state(sys, H, 1e-9);
  CHECK(gs.energy == doctest::Approx(linalg::min_eigenvalue(H.dense())).epsilon(1e-10));
  CHECK(gs.residual < 1e-9);
}

TEST_CASE("correlated ansatz") {
  auto cfg = config_1d(16, 8.0, 2);
  cfg.trap = gp::harmonic_trap(cfg.grid, 1.0);
  const auto phi = gp::Field::gaussian(cfg.grid, 1.0);
  {
    auto c0 = cfg;
    c0.potential = scattering::RadialPotential::zero(1e-3, 1.0);
    const auto sys = make_system(c0);
    const auto sol = scattering::solve_zero_energy(c0.potential, 8.0, 1e-6);
    const auto corr = correlated_product_state(phi, sol, 2, sys.ladder);
    const auto prod = fock::product_state(phi.mode_vector(), sys.ladder, 2);
    CHECK((corr.coeffs - prod.coeffs).cwiseAbs().maxCoeff() < 1e-13);
    const auto H0 = build_H(sys);
    CHECK(std::abs(expectation(H0, corr) - expectation(H0, prod)) < 1e-12);
  }
  const auto sys = make_system(cfg);
  const auto H = build_H(sys);
  const auto corr = correlated_product_state(phi, well_solution(), 2, sys.ladder);
  const auto prod = fock::product_state(phi.mode_vector(), sys.ladder, 2);
  const double e0 = ground_state(sys, H, 1e-9).energy;
  CHECK(expectation(H, corr) < expectation(H, prod));
  CHECK(expectation(H, corr) >= e0 - 1e-10);
  // Amplitudes carry the pair factor: ratio between a pair at distance d and a doubly occupied site.
  const Vec fq = fock::to_first_quantized(corr);
  const Vec pq = fock::to_first_quantized(prod);
  const long i = 8 * 16 + 9, j = 8 * 16 + 8;
  CHECK(std::abs((fq[i] / pq[i]) / (fq[j] / pq[j]) -
                 well_solution().f_at(2 * 0.5) / well_solution().f_at(0.0)) < 1e-12);
}

TEST_CASE("GP coupling conventions") {
  CHECK(gp_coupling(well(), 0.2, 3, 3.0, 3) == doctest::Approx(8 * kPi * 0.2));
  CHECK(gp_coupling(well(), 0.2, 4, 2.0, 3) == doctest::Approx(8 * kPi * 0.2 * 2));
  CHECK(gp_coupling(well(), 0.2, 2, 2.0, 1) == doctest::Approx(well().integral(1)));
  CHECK_THROWS_AS(gp_coupling(well(), 0.2, 2, 0.0, 1), PreconditionError);
}

TEST_CASE("Gronwall monitor on a stationary free condensate") {
  auto cfg = config_1d(8, 4.0, 2);
  cfg.potential = scattering::RadialPotential::zero(1e-3, 1.0);
  const auto sys = make_system(cfg);
  const auto H = build_H(sys);
  const auto sol = scattering::solve_zero_energy(cfg.potential, 8.0, 1e-6);
  gp::Spectral sp(cfg.grid);
  const auto phi = gp::Field::constant(cfg.grid);
  const auto gtraj = gp::evolve_split_step(sp, phi, gp::GpParams{}, 0.05, 4);
  const auto psi0 = fock::product_state(phi.mode_vector(), sys.ladder, 2);
  const auto tr = evolve(H, psi0, 0.05, 4);
  GronwallInput in{&sys, &H, &sol, 1.0, 0.0, 0.0};
  const auto rep = gronwall_monitor(tr, gtraj, sp, in);
  CHECK(rep.records.size() == 5);
  CHECK(rep.dominates);
  for (const auto& r : rep.records) {
    CHECK(std::abs(r.depletion) < 1e-12);
    CHECK(r.identity_defect < 1e-10);
    CHECK(std::abs(r.gronwall) < 1e-8);
    CHECK(r.fidelity == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Gronwall functional dominates the excitation number for an interacting run") {
  auto cfg = config_1d(8, 4.0, 2);
  cfg.interaction_scale = 1.0;
  const auto sys = make_system(cfg);
  const auto H = build_H(sys);
  gp::Spectral sp(cfg.grid);
  const double g = gp_coupling(well(), well_solution().a, 2, 1.0, 1);
  const auto phi = gp::Field::gaussian(cfg.grid, 0.8);
  gp::EvolveOptions go;
  go.sample_every = 10;
  go.scheme = gp::SplitScheme::Yoshida4;
  const auto gtraj = gp::evolve_split_step(sp, phi, gp::GpParams{g, std::nullopt}, 0.01, 30, go);
  const auto psi0 = correlated_product_state(phi, well_solution(), 2, sys.ladder, 1.0);
  EvolveOptions o;
  o.sample_every = 10;
  const auto tr = evolve(H, psi0, 0.01, 30, o);
  GronwallInput in{&sys, &H, &well_solution(), 0.5, g, 1.0};
  const auto rep = gronwall_monitor(tr, gtraj, sp, in);
  CHECK(rep.dominates);
  CHECK(rep.worst_margin >= -1e-8);
  for (const auto& r : rep.records) CHECK(r.identity_defect < 1e-10);
}

TEST_CASE("trapped experiment: no interaction means no depletion") {
  TrappedSpec spec;
  spec.grid = gp::Grid::cube(1, 8, 6.0);
  spec.particles = {2, 3};
  spec.depths = {0.0, 0.5};
  spec.potential = well();
  spec.interaction_scale = 0.0;
  const auto rows = trapped_depletion_experiment(spec);
  REQUIRE(rows.size() == 4);
  CHECK(std::abs(rows[0].depletion) < 1e-8);
  CHECK(std::abs(rows[1].depletion) < 1e-8);
  CHECK(rows[2].depletion > rows[0].depletion);
  CHECK(rows[1].dimension == 120);
}

TEST_CASE("capacity guard") {
  auto cfg = config_1d(16, 8.0, 3);
  cfg.dimension_cap = 100;
  CHECK_THROWS_AS(make_system(cfg), CapacityError);
}
