#include "gplab/gp_solver.hpp"

#include <cmath>
#include <string>

namespace gplab::gp {

void GpParams::validate(const Grid& grid) const {
  require(std::isfinite(coupling) && coupling >= 0.0, "coupling g must satisfy g >= 0");
  if (trap) {
    require(static_cast<size_t>(trap->size()) == grid.size(), "trap samples do not match grid");
    require(trap->allFinite(), "trap samples must be finite");
  }
}

Eigen::VectorXd harmonic_trap(const Grid& grid, double strength) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (size_t s = 0; s < grid.size(); ++s) {
    const auto x = grid.position(s);
    v[static_cast<Eigen::Index>(s)] = strength * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  }
  return v;
}

namespace {

void require_normalized(const Field& phi) {
  const double n = phi.norm();
  require(std::abs(n - 1.0) <= 1e-8, "field is not normalized (norm " + std::to_string(n) + ")");
}

Eigen::VectorXcd apply_h(const Spectral& sp, const Field& phi, const GpParams& p) {
  Eigen::VectorXcd y = sp.laplacian(phi.values);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double v = p.coupling * std::norm(phi.values[i]);
    if (p.trap) v += (*p.trap)[i];
    y[i] += v * phi.values[i];
  }
  return y;
}

void nonlinear_step(Eigen::VectorXcd& v, double g, double tau) {
  if (g == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] *= std::polar(1.0, -g * std::norm(v[i]) * tau);
}

void strang_step(const Spectral& sp, Eigen::VectorXcd& v, double g, double dt) {
  nonlinear_step(v, g, 0.5 * dt);
  v = sp.free_propagate(v, dt);
  nonlinear_step(v, g, 0.5 * dt);
}

}  // namespace

EnergyBreakdown gp_energy(const Spectral& sp, const Field& phi, const GpParams& p) {
  require(phi.grid == sp.grid(), "field grid does not match spectral grid");
  require_normalized(phi);
  p.validate(phi.grid);
  EnergyBreakdown e;
  const double hd = phi.grid.cell_volume();
  e.kinetic = sp.kinetic_energy(phi.values);
  double quartic = 0.0, trap = 0.0;
  for (Eigen::Index i = 0; i < phi.values.size(); ++i) {
    const double d = std::norm(phi.values[i]);
    quartic += d * d;
    if (p.trap) trap += (*p.trap)[i] * d;
  }
  e.trap = hd * trap;
  e.interaction = 0.5 * p.coupling * hd * quartic;
  e.total = e.kinetic + e.trap + e.interaction;
  return e;
}

GradientResult gp_gradient(const Spectral& sp, const Field& phi, const GpParams& p) {
  require(phi.grid == sp.grid(), "field grid does not match spectral grid");
  require_normalized(phi);
  p.validate(phi.grid);
  const Eigen::VectorXcd hphi = apply_h(sp, phi, p);
  const double hd = phi.grid.cell_volume();
  const double nn = hd * phi.values.squaredNorm();
  const double mu = (hd * phi.values.dot(hphi)).real() / nn;
  GradientResult r{Field(phi.grid, hphi - mu * phi.values), mu};
  // Remove the roundoff component along phi so that <phi, r> vanishes to machine precision.
  const cplx c = hd * phi.values.dot(r.residual.values) / nn;
  r.residual.values -= c * phi.values;
  return r;
}

GroundState minimize_imaginary_time(const Spectral& sp, const GpParams& p, const Field& init,
                                    double dtau, double tol, const MinimizeOptions& opt) {
  require(dtau > 0.0 && tol > 0.0, "dtau and tol must be positive");
  require_normalized(init);
  GroundState out;
  Field phi = init;
  double e = gp_energy(sp, phi, p).total;
  out.energy_history.push_back(e);
  // Kinetic preconditioner (sigma + |k|^2)^{-1}; sigma tracks the Rayleigh quotient.
  const auto& ksq = sp.k_squared();
  auto precondition = [&](const Eigen::VectorXcd& r, double sigma) {
    Eigen::VectorXcd h = sp.forward(r);
    for (Eigen::Index i = 0; i < h.size(); ++i) h[i] /= sigma + ksq[static_cast<size_t>(i)];
    return sp.backward(h);
  };
  const double hd = phi.grid.cell_volume();
  const double dtau_max = dtau;
  const double e_round = 1e-13;
  int it = 0;
  double res = 0.0;
  for (; it < opt.max_iterations; ++it) {
    const auto g = gp_gradient(sp, phi, p);
    res = g.residual.norm();
    if (res <= tol) break;
    Eigen::VectorXcd d = precondition(g.residual.values, std::max(1.0, std::abs(g.mu)));
    d -= (hd * phi.values.dot(d)) * phi.values;
    while (true) {
      Field cand(phi.grid, phi.values - dtau * d);
      cand = cand.normalized();
      const double ec = gp_energy(sp, cand, p).total;
      // Near convergence the energy change drops below roundoff; then the residual decides.
      bool ok = ec <= e;
      if (!ok && ec <= e + e_round * std::max(1.0, std::abs(e)))
        ok = gp_gradient(sp, cand, p).residual.norm() < res;
      if (ok) {
        phi = std::move(cand);
        e = ec;
        out.energy_history.push_back(e);
        dtau = std::min(dtau_max, 1.25 * dtau);
        break;
      }
      dtau *= 0.5;
      if (dtau < opt.dtau_min)
        throw ConvergenceError("imaginary-time flow stagnated with residual " + std::to_string(res));
    }
  }
  if (res > tol)
    throw ConvergenceError("imaginary-time flow did not reach tolerance; residual " + std::to_string(res));

  Eigen::Index imax = 0;
  phi.values.cwiseAbs().maxCoeff(&imax);
  const cplx phase = std::abs(phi.values[imax]) > 0 ? std::conj(phi.values[imax]) / std::abs(phi.values[imax]) : 1.0;
  phi.values *= phase;

  const auto g = gp_gradient(sp, phi, p);
  out.phi = phi;
  out.energy = gp_energy(sp, phi, p);
  out.mu = g.mu;
  out.residual = g.residual.norm();
  out.iterations = it;
  for (size_t s = 0; s < phi.grid.size(); ++s)
    if (phi.grid.on_boundary(s))
      out.boundary_density = std::max(out.boundary_density, std::abs(phi.values[static_cast<Eigen::Index>(s)]));
  return out;
}

size_t Trajectory::index_of(double t) const {
  for (size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
  throw PreconditionError("t = " + std::to_string(t) + " is outside the sampled window");
}

Trajectory evolve_split_step(const Spectral& sp, const Field& phi0, const GpParams& p, double dt,
                             int n_steps, const EvolveOptions& opt) {
  require(phi0.grid == sp.grid(), "field grid does not match spectral grid");
  require_normalized(phi0);
  p.validate(phi0.grid);
  require(!p.trap, "real-time evolution runs without a trap");
  require(dt > 0.0 && n_steps >= 0 && opt.sample_every >= 1, "invalid time stepping parameters");
  Trajectory tr;
  tr.grid = phi0.grid;
  tr.coupling = p.coupling;
  tr.dt = dt;
  tr.sample_dt = dt * opt.sample_every;
  tr.times.push_back(opt.t0);
  tr.samples.push_back(phi0);
  Eigen::VectorXcd v = phi0.values;
  const double hd = phi0.grid.cell_volume();
  const double m0 = std::sqrt(hd * v.squaredNorm());
  double prev = m0;
  const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
  const double w0 = 1.0 - 2.0 * w1;
  for (int n = 1; n <= n_steps; ++n) {
    if (opt.scheme == SplitScheme::Strang) {
      strang_step(sp, v, p.coupling, dt);
    } else {
      strang_step(sp, v, p.coupling, w1 * dt);
      strang_step(sp, v, p.coupling, w0 * dt);
      strang_step(sp, v, p.coupling, w1 * dt);
    }
    const double m = std::sqrt(hd * v.squaredNorm());
    tr.max_step_mass_drift = std::max(tr.max_step_mass_drift, std::abs(m - prev));
    prev = m;
    if (!std::isfinite(m) || std::abs(m - m0) > 1e-6)
      throw ConvergenceError("split-step evolution unstable: mass drift " + std::to_string(m - m0));
    if (n % opt.sample_every == 0) {
      tr.times.push_back(opt.t0 + n * dt);
      tr.samples.emplace_back(phi0.grid, v);
    }
  }
  return tr;
}

double sobolev_norm(const Spectral& sp, const Field& phi, int m) {
  require(phi.grid == sp.grid(), "field grid does not match spectral grid");
  return sp.sobolev_norm(phi.values, m);
}

Field gp_time_derivative(const Spectral& sp, const Field& phi, double coupling) {
  Eigen::VectorXcd y = sp.laplacian(phi.values);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += coupling * std::norm(phi.values[i]) * phi.values[i];
  return Field(phi.grid, cplx(0, -1) * y);
}

Field gp_second_time_derivative(const Spectral& sp, const Field& phi, const Field& dphi,
                                double coupling) {
  Eigen::VectorXcd y = sp.laplacian(dphi.values);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const cplx p = phi.values[i], d = dphi.values[i];
    y[i] += coupling * (2.0 * std::norm(p) * d + p * p * std::conj(d));
  }
  return Field(phi.grid, cplx(0, -1) * y);
}

Field time_derivative(const Spectral& sp, const Trajectory& traj, int order, double t) {
  require(order == 1 || order == 2, "time derivative order must be 1 or 2");
  const auto& phi = traj.samples[traj.index_of(t)];
  const Field d1 = gp_time_derivative(sp, phi, traj.coupling);
  if (order == 1) return d1;
  return gp_second_time_derivative(sp, phi, d1, traj.coupling);
}

Field fd_time_derivative(const Trajectory& traj, int order, double t) {
  require(order == 1 || order == 2, "time derivative order must be 1 or 2");
  const size_t i = traj.index_of(t);
  require(i >= 1 && i + 1 < traj.samples.size(), "finite difference needs samples on both sides of t");
  const auto& a = traj.samples[i - 1].values;
  const auto& b = traj.samples[i].values;
  const auto& c = traj.samples[i + 1].values;
  const double h = traj.sample_dt;
  if (order == 1) return Field(traj.grid, (c - a) / (2 * h));
  return Field(traj.grid, (c - 2.0 * b + a) / (h * h));
}

std::vector<TrajectoryObservables> observables(const Spectral& sp, const Trajectory& traj) {
  std::vector<TrajectoryObservables> out;
  GpParams p{traj.coupling, std::nullopt};
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& phi = traj.samples[i];
    const auto e = gp_energy(sp, phi, p);
    out.push_back({traj.times[i], phi.norm(), e.kinetic, e.interaction, e.total,
                   sp.sobolev_norm(phi.values, 1), sp.sobolev_norm(phi.values, 2),
                   sp.sobolev_norm(phi.values, 4)});
  }
  return out;
}

}  // namespace gplab::gp
