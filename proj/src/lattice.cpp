#include "gplab/lattice.hpp"

#include <cmath>
#include <vector>

namespace gplab::lattice {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(static_cast<size_t>(n));
  w.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[static_cast<size_t>(i)] = z;
    w[static_cast<size_t>(i)] = 2.0 / ((1 - z * z) * dp * dp);
  }
}

// Unit directions and weights summing to the sphere measure in d dimensions.
void sphere_rule(int dim, std::vector<std::array<double, 3>>& dirs, std::vector<double>& wts) {
  dirs.clear();
  wts.clear();
  if (dim == 1) {
    dirs = {{1, 0, 0}, {-1, 0, 0}};
    wts = {1.0, 1.0};
  } else if (dim == 2) {
    const int n = 64;
    for (int i = 0; i < n; ++i) {
      const double t = 2 * kPi * (i + 0.5) / n;
      dirs.push_back({std::cos(t), std::sin(t), 0});
      wts.push_back(2 * kPi / n);
    }
  } else {
    std::vector<double> x, w;
    gauss_legendre(24, x, w);
    const int np = 48;
    for (size_t i = 0; i < x.size(); ++i) {
      const double s = std::sqrt(1 - x[i] * x[i]);
      for (int j = 0; j < np; ++j) {
        const double p = 2 * kPi * (j + 0.5) / np;
        dirs.push_back({s * std::cos(p), s * std::sin(p), x[i]});
        wts.push_back(w[i] * 2 * kPi / np);
      }
    }
  }
}

double tent(const gp::Grid& g, const std::array<double, 3>& z) {
  double t = 1.0;
  for (int a = 0; a < g.dim; ++a) {
    const double s = 1.0 - std::abs(z[a]) / g.spacing[a];
    if (s <= 0.0) return 0.0;
    t *= s;
  }
  return t;
}

}  // namespace

Eigen::MatrixXd interaction_matrix(const gp::Grid& grid, const scattering::RadialPotential& V,
                                   double scale, InteractionModel model) {
  require(scale > 0.0, "interaction scale must be positive");
  const size_t M = grid.size();
  const double amp = std::pow(scale, grid.dim - 1);
  // Profile over lattice difference vectors.
  std::vector<double> prof(M, 0.0);
  if (model == InteractionModel::Sampled) {
    for (size_t i = 0; i < M; ++i) prof[i] = amp * V.at(scale * grid.vector_length(i));
  } else {
    std::vector<std::array<double, 3>> dirs;
    std::vector<double> wts;
    sphere_rule(grid.dim, dirs, wts);
    const double rs = V.support_radius() / scale;
    const double dr = V.dr() / scale;
    const auto nr = static_cast<size_t>(std::ceil(rs / dr));
    for (size_t i = 0; i < M; ++i) {
      // Displacement of lattice vector i (minimum image).
      const auto c = grid.coords(i);
      std::array<double, 3> d{0, 0, 0};
      double far = 0.0;
      for (int a = 0; a < grid.dim; ++a) {
        int m = c[a];
        if (2 * m > grid.points[a]) m -= grid.points[a];
        d[a] = m * grid.spacing[a];
        far += std::max(0.0, std::abs(d[a]) - grid.spacing[a]) * std::max(0.0, std::abs(d[a]) - grid.spacing[a]);
      }
      if (std::sqrt(far) > rs) continue;
      double s = 0.0;
      for (size_t k = 0; k <= nr; ++k) {
        const double r = static_cast<double>(k) * dr;
        const double v = amp * V.at(scale * r);
        if (v == 0.0) continue;
        double ang = 0.0;
        for (size_t q = 0; q < dirs.size(); ++q)
          ang += wts[q] * tent(grid, {r * dirs[q][0] - d[0], r * dirs[q][1] - d[1], r * dirs[q][2] - d[2]});
        const double wk = (k == 0 || k == nr) ? 0.5 : 1.0;
        s += wk * v * std::pow(r, grid.dim - 1) * ang;
      }
      prof[i] = s * dr / grid.cell_volume();
    }
  }
  Eigen::MatrixXd W(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  for (size_t x = 0; x < M; ++x)
    for (size_t y = 0; y < M; ++y)
      W(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = prof[grid.difference_site(x, y)];
  return W;
}

Eigen::MatrixXd LatticeModel::one_body() const {
  Eigen::MatrixXd t = kinetic;
  if (trap) t.diagonal() += *trap;
  return t;
}

LatticeModel build_model(const gp::Grid& grid, const scattering::RadialPotential& V, double scale,
                         InteractionModel model, std::optional<Eigen::VectorXd> trap) {
  grid.validate();
  if (trap) require(static_cast<size_t>(trap->size()) == grid.size(), "trap samples do not match grid");
  gp::Spectral sp(grid);
  return LatticeModel{grid, sp.laplacian_matrix(), interaction_matrix(grid, V, scale, model), std::move(trap)};
}

}  // namespace gplab::lattice
