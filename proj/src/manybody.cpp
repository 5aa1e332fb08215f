#include "gplab/manybody.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gplab::manybody {

namespace {

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

void require_unit(const FockVector& psi, double tol = 1e-8) {
  require(std::abs(psi.coeffs.norm() - 1.0) <= tol, "state must be normalized");
}

}  // namespace

double lattice_gp_energy(const Vec& u, const Eigen::MatrixXd& T, double g, double hd) {
  const double kin = u.dot(T.cast<cplx>() * u).real();
  return kin + 0.5 * g / hd * u.cwiseAbs2().cwiseAbs2().sum();
}

System make_system(const ManyBodyConfig& cfg) {
  cfg.grid.validate();
  require(cfg.particles >= 1, "particle number must be positive");
  const size_t cap = cfg.dimension_cap ? cfg.dimension_cap : fock::dimension_cap();
  const int M = static_cast<int>(cfg.grid.size());
  const size_t dim = fock::sector_dimension(M, cfg.particles);
  if (dim > cap)
    throw CapacityError("sector dimension " + std::to_string(dim) + " exceeds the cap " + std::to_string(cap));
  auto model = lattice::build_model(cfg.grid, cfg.potential, cfg.scale(), cfg.interaction, cfg.trap);
  return System{std::move(model), fock::Ladder(M, cfg.particles, cap), cfg.particles};
}

SparseOperator build_H(const System& sys) {
  const int N = sys.particles;
  const Mat T = sys.model.one_body().cast<cplx>();
  auto H = sys.ladder.one_body(T, N);
  if (N >= 2 && sys.model.interaction.cwiseAbs().maxCoeff() > 0.0)
    H = H + sys.ladder.density_density(sys.model.interaction, N);
  H.prune();
  return H;
}

GroundState ground_state(const System& sys, const SparseOperator& H, double tol) {
  require(H.domain_n == sys.particles && H.codomain_n == sys.particles, "H must act on the N-particle sector");
  require(linalg::hermiticity_defect(H.matrix) <= 1e-12 * std::max(1.0, H.max_abs()), "H is not Hermitian");
  const auto ep = linalg::lowest_eigenpair(H.matrix, tol);
  if (!(ep.residual <= tol))
    throw ConvergenceError("Lanczos residual " + std::to_string(ep.residual) + " above tolerance");
  GroundState gs;
  gs.energy = ep.value;
  gs.state = FockVector{ep.vector, sys.ladder.modes(), sys.particles};
  // Fix the global phase by the largest coefficient.
  Eigen::Index imax = 0;
  gs.state.coeffs.cwiseAbs().maxCoeff(&imax);
  const cplx ph = gs.state.coeffs[imax] / std::abs(gs.state.coeffs[imax]);
  gs.state.coeffs /= ph;
  gs.residual = ep.residual;
  return gs;
}

Trajectory evolve(const SparseOperator& H, const FockVector& psi0, double dt, int n_steps,
                  const EvolveOptions& opt) {
  require_unit(psi0, 1e-10);
  require(H.matrix.cols() == psi0.coeffs.size(), "state does not match the operator sector");
  require(dt > 0.0 && n_steps >= 0, "dt must be positive and n_steps non-negative");
  require(opt.sample_every >= 1, "sample_every must be at least 1");
  Trajectory tr;
  tr.dt = dt;
  tr.times.push_back(opt.t0);
  tr.states.push_back(psi0);
  Vec v = psi0.coeffs;
  for (int s = 1; s <= n_steps; ++s) {
    linalg::KrylovStats st;
    v = linalg::expm_krylov(H.matrix, v, dt, opt.krylov_dim, opt.adaptive, opt.tol, &st);
    tr.substeps += st.substeps;
    if (s % opt.sample_every == 0 || s == n_steps) {
      tr.times.push_back(opt.t0 + s * dt);
      tr.states.push_back(FockVector{v, psi0.modes, psi0.particles});
    }
  }
  return tr;
}

Mat reduced_density(const FockVector& psi, const fock::Ladder& ladder) {
  const int N = psi.particles;
  require(N >= 1, "reduced density needs at least one particle");
  const auto& B = ladder.basis(N);
  require(static_cast<size_t>(psi.coeffs.size()) == B.dimension(), "state does not match the sector");
  const int M = B.modes();
  Mat g = Mat::Zero(M, M);
  std::vector<std::uint8_t> occ(static_cast<size_t>(M));
  for (size_t s = 0; s < B.dimension(); ++s) {
    const cplx cs = psi.coeffs[static_cast<Eigen::Index>(s)];
    if (cs == cplx(0.0)) continue;
    const std::uint8_t* o = B.state(s);
    std::copy(o, o + M, occ.begin());
    for (int i = 0; i < M; ++i) {
      if (!o[i]) continue;
      g(i, i) += static_cast<double>(o[i]) * std::norm(cs);
      // a*_j a_i |s> for j != i contributes to <a*_j a_i> = gamma_ij * N.
      occ[static_cast<size_t>(i)]--;
      for (int j = 0; j < M; ++j) {
        if (j == i) continue;
        occ[static_cast<size_t>(j)]++;
        const size_t t = B.index(occ.data());
        const double amp = std::sqrt(static_cast<double>(o[i]) * occ[static_cast<size_t>(j)]);
        g(i, j) += amp * std::conj(psi.coeffs[static_cast<Eigen::Index>(t)]) * cs;
        occ[static_cast<size_t>(j)]--;
      }
      occ[static_cast<size_t>(i)]++;
    }
  }
  return g / static_cast<double>(N);
}

double expectation(const SparseOperator& A, const FockVector& psi) {
  return psi.coeffs.dot(A.matrix * psi.coeffs).real();
}

Depletion depletion(const FockVector& psi, const gp::Field& phi_ref, const fock::Ladder& ladder) {
  require_unit(psi);
  const Vec u = phi_ref.mode_vector();
  require(std::abs(u.norm() - 1.0) <= 1e-8, "reference condensate must be normalized");
  const Mat g = reduced_density(psi, ladder);
  Depletion d;
  d.depletion = 1.0 - u.dot(g * u).real();
  d.n_perp = expectation(fock::op_excitation_number(u, ladder, psi.particles), psi);
  d.discrepancy = std::abs(d.depletion - d.n_perp / psi.particles);
  return d;
}

FockVector correlated_product_state(const gp::Field& phi, const scattering::ScatteringSolution& sol,
                                    int N, const fock::Ladder& ladder, double scale) {
  const double s = scale > 0.0 ? scale : static_cast<double>(N);
  const auto& B = ladder.basis(N);
  const auto& grid = phi.grid;
  const Vec u = phi.mode_vector();
  const int M = B.modes();
  require(static_cast<size_t>(M) == grid.size(), "condensate does not match the modes");
  // Pair factors f(s |x - y|) by lattice difference.
  std::vector<double> fpair(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) fpair[i] = sol.f_at(s * grid.vector_length(i));

  FockVector out{Vec(static_cast<Eigen::Index>(B.dimension())), M, N};
  const double lfN = log_factorial(N);
  std::vector<size_t> pos;
  for (size_t st = 0; st < B.dimension(); ++st) {
    const std::uint8_t* o = B.state(st);
    pos.clear();
    double lf = lfN;
    cplx amp = 1.0;
    for (int i = 0; i < M; ++i) {
      if (!o[i]) continue;
      lf -= log_factorial(o[i]);
      for (int k = 0; k < o[i]; ++k) {
        pos.push_back(static_cast<size_t>(i));
        amp *= u[i];
      }
    }
    if (amp != cplx(0.0)) {
      for (size_t a = 0; a < pos.size(); ++a)
        for (size_t b = a + 1; b < pos.size(); ++b) amp *= fpair[grid.difference_site(pos[a], pos[b])];
    }
    out.coeffs[static_cast<Eigen::Index>(st)] = std::exp(0.5 * lf) * amp;
  }
  const double nrm = out.coeffs.norm();
  if (!(nrm > 1e-300) || !std::isfinite(nrm))
    throw PreconditionError("correlated product state has vanishing norm");
  out.coeffs /= nrm;
  return out;
}

double fidelity_to_condensate(const FockVector& psi, const gp::Field& phi, const fock::Ladder& ladder) {
  const Vec u = phi.mode_vector();
  const auto p = fock::product_state(u / u.norm(), ladder, psi.particles);
  return std::norm(p.coeffs.dot(psi.coeffs));
}

GronwallReport gronwall_monitor(const Trajectory& traj, const gp::Trajectory& gp_traj,
                                const gp::Spectral& sp, const GronwallInput& in) {
  require(in.system && in.H && in.solution, "gronwall monitor needs system, H and scattering solution");
  require(gp_traj.grid == in.system->model.grid && sp.grid() == gp_traj.grid, "GP trajectory grid mismatch");
  require(!in.system->model.trap, "the renormalized operators are defined for the untrapped flow");
  const System& sys = *in.system;
  const int N = sys.particles;
  const double hd = sys.model.grid.cell_volume();
  const auto& T = sys.model.kinetic;

  GronwallReport rep;
  std::vector<renorm::SparseOperator> ops;  // cH + Q_ren, N_ren + 1 per sample
  std::vector<renorm::SparseOperator> nren;
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const double t = traj.times[k];
    size_t gi = 0;
    try {
      gi = gp_traj.index_of(t);
    } catch (const PreconditionError&) {
      throw PreconditionError("many-body sample t = " + std::to_string(t) + " has no GP sample");
    }
    const auto& phi = gp_traj.samples[gi];
    const gp::Field d1 = gp::gp_time_derivative(sp, phi, in.coupling);
    const gp::Field d2 = gp::gp_second_time_derivative(sp, phi, d1, in.coupling);
    const auto ker = renorm::build_kernel(phi, *in.solution, N, in.cutoff_radius, in.scale);
    const Mat K = ker.matrix();
    const Mat dK = renorm::kernel_time_derivatives(ker, d1, d2).first;
    const Vec u = phi.mode_vector();
    const Vec w = (cplx(0, 1) * d1.values).eval() * std::sqrt(hd);
    renorm::RenormContext ctx(sys.ladder, N, u, K);
    const double egp = lattice_gp_energy(u, T, in.coupling, hd);
    const auto parts = renorm::build_cH_N_and_parts(ctx, *in.H, sys.model, w, egp, in.coupling, 1e-6);
    const auto Nren = renorm::build_N_ren(ctx, N);
    const auto Qren = renorm::build_Q_ren(ctx, dK, N);
    const auto Nperp = ctx.n_perp(N);
    const auto ab = renorm::aux_bound(parts.cH_N, Qren, Nren, Nperp);

    const auto& psi = traj.states[k];
    DepletionRecord r;
    r.t = t;
    const auto dep = depletion(psi, phi, sys.ladder);
    r.depletion = dep.depletion;
    r.n_perp = dep.n_perp;
    r.identity_defect = dep.discrepancy;
    r.energy = expectation(*in.H, psi);
    r.fidelity = fidelity_to_condensate(psi, phi, sys.ladder);
    r.local_constant = ab.constant;
    rep.constant = std::max(rep.constant, ab.constant);
    rep.records.push_back(r);
    ops.push_back(parts.cH_N + Qren);
    nren.push_back(Nren + sys.ladder.identity(N));
  }

  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < rep.records.size(); ++k) {
    auto& r = rep.records[k];
    const auto& psi = traj.states[k];
    r.gronwall = expectation(ops[k], psi) + rep.constant * expectation(nren[k], psi);
    const double margin = r.gronwall - r.n_perp;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-8) rep.dominates = false;
  }

  // Fitted growth: slope of log G and the smallest c in G(t) <= G(0) exp(e^{ct} - 1).
  if (!rep.records.empty() && rep.records.front().gronwall > 0.0) {
    const double g0 = rep.records.front().gronwall;
    const double t0 = rep.records.front().t;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rep.records) {
      if (r.gronwall <= 0.0) continue;
      const double x = r.t - t0, y = std::log(r.gronwall);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++n;
      const double l = std::log(r.gronwall / g0);
      if (x > 0.0 && l > 0.0) rep.fitted_c = std::max(rep.fitted_c, std::log1p(l) / x);
    }
    const double den = n * sxx - sx * sx;
    if (n >= 2 && den > 0.0) rep.growth_rate = (n * sxy - sx * sy) / den;
  }
  return rep;
}

double gp_coupling(const scattering::RadialPotential& V, double a, int N, double scale, int dim) {
  require(scale > 0.0 && N >= 1, "coupling needs a positive scale and particle number");
  if (dim == 3) return 8.0 * kPi * a * N / scale;
  return V.integral(dim) * N / scale;
}

std::vector<TrappedRow> trapped_depletion_experiment(const TrappedSpec& spec) {
  spec.grid.validate();
  require(!spec.particles.empty() && !spec.depths.empty(), "experiment needs particle numbers and depths");
  require(spec.trap_strength > 0.0, "trap strength must be positive");
  gp::Spectral sp(spec.grid);
  const Eigen::VectorXd trap = gp::harmonic_trap(spec.grid, spec.trap_strength);
  const double dtau = 0.5;
  std::vector<TrappedRow> rows;
  for (double depth : spec.depths) {
    require(depth >= 0.0, "depth multipliers must be non-negative");
    const auto V = spec.potential.times(depth);
    double a = 0.0;
    if (!V.is_zero()) a = scattering::solve_zero_energy(V, spec.r_max, 1e-6).a;
    for (int N : spec.particles) {
      const double s = spec.interaction_scale > 0.0 ? spec.interaction_scale : N;
      gp::GpParams gpp{gp_coupling(V, a, N, s, spec.grid.dim), trap};
      const auto gpgs =
          gp::minimize_imaginary_time(sp, gpp, gp::Field::gaussian(spec.grid, 1.0), dtau, spec.gp_tol);
      ManyBodyConfig cfg;
      cfg.grid = spec.grid;
      cfg.particles = N;
      cfg.potential = V;
      cfg.interaction = spec.interaction;
      cfg.interaction_scale = spec.interaction_scale;
      cfg.trap = trap;
      cfg.dimension_cap = spec.dimension_cap;
      const auto sys = make_system(cfg);
      const auto H = build_H(sys);
      const auto gs = ground_state(sys, H, spec.eig_tol);
      const auto dep = depletion(gs.state, gpgs.phi, sys.ladder);
      TrappedRow row;
      row.label = spec.label;
      row.particles = N;
      row.depth = depth;
      row.l1_norm = V.l1_norm();
      row.scattering_length = a;
      row.depletion = dep.depletion;
      row.n_depletion = N * dep.depletion;
      row.energy = gs.energy;
      row.dimension = sys.ladder.basis(N).dimension();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace gplab::manybody
