#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "gplab/scattering.hpp"

using namespace gplab;
using namespace gplab::scattering;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// RK4 on u'' = (V/2) u from u(0) = 0, u'(0) = 1, then a = R - u(R)/u'(R).
double rk4_length(const std::function<double(double)>& V, double R, int steps) {
  const double h = R / steps;
  double u = 0, p = 1, r = 0;
  auto acc = [&](double rr, double uu) { return 0.5 * V(rr) * uu; };
  for (int i = 0; i < steps; ++i) {
    const double k1u = p, k1p = acc(r, u);
    const double k2u = p + 0.5 * h * k1p, k2p = acc(r + 0.5 * h, u + 0.5 * h * k1u);
    const double k3u = p + 0.5 * h * k2p, k3p = acc(r + 0.5 * h, u + 0.5 * h * k2u);
    const double k4u = p + h * k3p, k4p = acc(r + h, u + h * k3u);
    u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    r += h;
  }
  return R - u / p;
}

}  // namespace

TEST_CASE("square well matches the matching condition") {
  const auto V = RadialPotential::square_well(2.0, 1.0, 1e-3);
  const auto sol = solve_zero_energy(V, 8.0, 1e-6);
  const double exact = 1.0 - std::tanh(1.0);
  CHECK(rel(sol.a, exact) < 1e-4);
  CHECK(rel(integral_identity_length(sol), exact) < 1e-4);
  CHECK(rel(scattering_length_variational(V, 64), exact) < 1e-4);
  CHECK(asymptote_residual(sol) < 1e-6);
}

TEST_CASE("deeper square well") {
  // kappa = sqrt(V0 / 2); a = R - tanh(kappa R) / kappa.
  const auto V = RadialPotential::square_well(8.0, 0.5, 1e-4);
  const auto sol = solve_zero_energy(V, 4.0, 1e-6);
  CHECK(rel(sol.a, 0.5 - std::tanh(1.0) / 2.0) < 1e-4);
}

TEST_CASE("smooth bump against an independent RK4 integration") {
  const double depth = 3.0, R = 1.2;
  const auto V = RadialPotential::smooth_bump(depth, R, 1e-3);
  const auto sol = solve_zero_energy(V, 8.0, 1e-6);
  const double oracle = rk4_length(
      [&](double r) {
        const double q = 1 - (r / R) * (r / R);
        return r < R ? depth * q * q : 0.0;
      },
      R, 200000);
  CHECK(rel(sol.a, oracle) < 1e-7);
}

TEST_CASE("integral identity over several potentials") {
  const std::vector<RadialPotential> pots{
      RadialPotential::square_well(2.0, 1.0, 1e-3), RadialPotential::square_well(0.5, 2.0, 1e-3),
      RadialPotential::smooth_bump(1.0, 1.0, 1e-3), RadialPotential::smooth_bump(10.0, 0.7, 1e-3),
      RadialPotential::square_well(2.0, 1.0, 1e-3).times(0.1)};
  for (const auto& V : pots) {
    const auto sol = solve_zero_energy(V, 10.0, 1e-6);
    CHECK(rel(integral_identity_length(sol), sol.a) < 1e-6);
    // Born bound a <= |V|_1 / 8 pi.
    CHECK(sol.a <= V.l1_norm() / (8 * kPi) + 1e-12);
  }
}

TEST_CASE("scaling law a(n^2 V(n .)) = a / n") {
  const auto V = RadialPotential::smooth_bump(2.0, 1.0, 1e-3);
  const auto sol = solve_zero_energy(V, 8.0, 1e-6);
  for (int n : {2, 4, 8}) {
    const auto Vn = V.scaled(n);
    CHECK(Vn.support_radius() == doctest::Approx(V.support_radius() / n));
    CHECK(Vn.l1_norm() == doctest::Approx(V.l1_norm() / n).epsilon(1e-12));
    const auto sn = solve_zero_energy(Vn, 8.0 / n, 1e-6);
    CHECK(rel(n * sn.a, sol.a) < 1e-6);
  }
}

TEST_CASE("profile is monotone, bounded and follows 1 - a/r outside") {
  const auto sol = solve_zero_energy(RadialPotential::square_well(2.0, 1.0, 1e-3), 8.0, 1e-6);
  for (size_t i = 1; i < sol.f.size(); ++i) CHECK(sol.f[i] >= sol.f[i - 1] - 1e-14);
  CHECK(sol.f.front() >= 0.0);
  CHECK(sol.f.back() <= 1.0);
  CHECK(sol.f_at(3.0) == doctest::Approx(1 - sol.a / 3.0).epsilon(1e-9));
  CHECK(sol.f_at(20.0) == doctest::Approx(1 - sol.a / 20.0).epsilon(1e-12));
  CHECK(sol.df_at(20.0) == doctest::Approx(sol.a / 400.0).epsilon(1e-9));
}

TEST_CASE("zero potential") {
  const auto V = RadialPotential::zero(1e-3, 1.0);
  CHECK(V.is_zero());
  const auto sol = solve_zero_energy(V, 8.0, 1e-6);
  CHECK(std::abs(sol.a) < 1e-12);
  CHECK(std::abs(integral_identity_length(sol)) < 1e-12);
}

TEST_CASE("integrals in one to three dimensions") {
  // square well of depth 2 and radius 1, up to half-node trapezoid effects at the edge.
  const auto V = RadialPotential::square_well(2.0, 1.0, 1e-4);
  CHECK(V.integral(1) == doctest::Approx(4.0).epsilon(1e-4));
  CHECK(V.integral(2) == doctest::Approx(2 * kPi).epsilon(1e-4));
  CHECK(V.integral(3) == doctest::Approx(8 * kPi / 3).epsilon(1e-4));
  CHECK_THROWS_AS(V.integral(4), PreconditionError);
}

TEST_CASE("potential table round trip") {
  const auto path = std::filesystem::temp_directory_path() / "gplab_test_table.txt";
  const auto V = RadialPotential::smooth_bump(2.0, 1.0, 1e-3);
  {
    std::ofstream out(path);
    out.precision(17);
    out << "# r V\n";
    for (size_t i = 0; i < V.samples().size(); ++i) out << i * V.dr() << ' ' << V.samples()[i] << '\n';
  }
  const auto T = RadialPotential::from_table(path.string());
  CHECK(T.samples().size() == V.samples().size());
  CHECK(T.l1_norm() == doctest::Approx(V.l1_norm()).epsilon(1e-9));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(RadialPotential::from_table("/nonexistent/table"), PreconditionError);
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(RadialPotential({1.0, -1.0, 0.0}, 0.1), PreconditionError);
  CHECK_THROWS_AS(RadialPotential::square_well(-1.0, 1.0, 1e-3), PreconditionError);
  CHECK_THROWS_AS(RadialPotential({1.0}, 0.1), PreconditionError);
  const auto V = RadialPotential::square_well(2.0, 1.0, 1e-3);
  CHECK_THROWS_AS(solve_zero_energy(V, 1.5, 1e-6), PreconditionError);
  CHECK_THROWS_AS(solve_zero_energy(V, 8.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(V.scaled(0.0), PreconditionError);
}
