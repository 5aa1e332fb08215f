#include "gplab/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "gplab/fock.hpp"
#include "gplab/io.hpp"
#include "gplab/linalg.hpp"
#include "gplab/manybody.hpp"
#include "gplab/renorm.hpp"
#include "gplab/verify.hpp"

#ifndef GPLAB_VERSION
#define GPLAB_VERSION "0.0.0"
#endif

namespace gplab::run {

namespace fs = std::filesystem;
using nlohmann::json;
using config::RunConfig;

namespace {

// Dense generalized eigenproblems per sample get slow beyond this.
constexpr size_t kDenseMonitorCap = 800;
constexpr int kFockSuiteModeCap = 16;
// Sector dimension above which verify-ops skips the five-part split and the commutators.
constexpr size_t kIdentityDimensionCap = 600;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

lattice::InteractionModel interaction_model(const std::string& s) {
  return s == "cell_averaged" ? lattice::InteractionModel::CellAveraged : lattice::InteractionModel::Sampled;
}

scattering::ScatteringSolution solve(const RunConfig& cfg, const scattering::RadialPotential& V) {
  return scattering::solve_zero_energy(V, cfg.r_max, cfg.scatter_tol);
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string out_path(const RunConfig& cfg, Report& rep, const std::string& name) {
  const auto p = (fs::path(cfg.output_dir) / name).string();
  rep.artifacts.push_back(name);
  return p;
}

// ---------------------------------------------------------------------------------------------

void run_scatter(const RunConfig& cfg, Report& rep) {
  const auto V = make_potential(cfg);
  const auto sol = solve(cfg, V);
  const double a_var = scattering::scattering_length_variational(V, cfg.trial_family_size);
  const double a_id = scattering::integral_identity_length(sol);
  const double resid = scattering::asymptote_residual(sol);
  json out = {{"a_ode", sol.a},
              {"a_variational", a_var},
              {"a_integral_identity", a_id},
              {"asymptote_residual", resid},
              {"l1_norm", V.l1_norm()},
              {"support_radius", V.support_radius()}};

  double fmin = 1.0, fmax = 0.0, worst_step = 0.0;
  for (size_t i = 0; i < sol.f.size(); ++i) {
    fmin = std::min(fmin, sol.f[i]);
    fmax = std::max(fmax, sol.f[i]);
    if (i > 0) worst_step = std::max(worst_step, sol.f[i - 1] - sol.f[i]);
  }
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < sol.f.size(); ++i) rows.push_back({sol.dr * static_cast<double>(i), sol.f[i], sol.u[i]});
  io::write_csv(out_path(cfg, rep, "profile.csv"), {"r", "f", "u"}, rows);

  const bool trivial = V.is_zero();
  rep.checks.push_back(make_check("integral identity", "int-Vf-8pi-a",
                                  trivial ? std::abs(a_id) : relative(a_id, sol.a), 1e-6));
  rep.checks.push_back(make_check("asymptote residual", "f-asymptote", resid, cfg.scatter_tol));
  rep.checks.push_back(make_check("variational upper bound", "variational-length",
                                  trivial ? -a_var : (sol.a - a_var) / sol.a, 1e-4));
  rep.checks.push_back(make_check("variational vs f = 1", "variational-length",
                                  a_var - V.l1_norm() / (8 * kPi), 1e-9));
  rep.checks.push_back(make_check("f >= 0", "f-range", -fmin, 1e-12));
  rep.checks.push_back(make_check("f <= 1", "f-range", fmax - 1.0, 1e-12));
  rep.checks.push_back(make_check("f non-decreasing", "f-range", worst_step, 1e-12));

  json scaling = json::array();
  for (int n : cfg.scaling_factors) {
    const auto Vn = V.scaled(n);
    const auto sn = scattering::solve_zero_energy(Vn, cfg.r_max / n, cfg.scatter_tol);
    const double err = trivial ? std::abs(sn.a) : relative(n * sn.a, sol.a);
    scaling.push_back({{"n", n}, {"a", sn.a}, {"n_times_a_rel_err", err}});
    rep.checks.push_back(make_check("scaling law n = " + std::to_string(n), "scaled-length", err, 1e-6));
  }
  out["scaling"] = scaling;
  rep.results = out;
  std::ofstream(out_path(cfg, rep, "scatter.json")) << out.dump(2) << '\n';
}

void run_groundstate(const RunConfig& cfg, Report& rep) {
  const auto grid = make_grid(cfg);
  gp::Spectral sp(grid);
  gp::GpParams p;
  p.coupling = cfg.coupling;
  if (cfg.trap_strength > 0) p.trap = gp::harmonic_trap(grid, cfg.trap_strength);
  const double dtau = cfg.dtau > 0 ? cfg.dtau : 0.5;
  gp::MinimizeOptions mo;
  mo.max_iterations = cfg.max_iterations;
  const auto gs = gp::minimize_imaginary_time(sp, p, initial_field(cfg, grid), dtau, cfg.gp_tol, mo);
  io::write_field(out_path(cfg, rep, "groundstate.gpf"), gs.phi);
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < gs.energy_history.size(); ++i)
    rows.push_back({static_cast<double>(i), gs.energy_history[i]});
  io::write_csv(out_path(cfg, rep, "energy_history.csv"), {"step", "energy"}, rows);

  double worst_rise = 0.0;
  for (size_t i = 1; i < gs.energy_history.size(); ++i)
    worst_rise = std::max(worst_rise, gs.energy_history[i] - gs.energy_history[i - 1]);
  const double quartic = gs.phi.values.cwiseAbs2().cwiseAbs2().sum() * grid.cell_volume();
  rep.results = {{"energy", gs.energy.total},
                 {"kinetic", gs.energy.kinetic},
                 {"trap", gs.energy.trap},
                 {"interaction", gs.energy.interaction},
                 {"mu", gs.mu},
                 {"residual", gs.residual},
                 {"iterations", gs.iterations},
                 {"boundary_density", gs.boundary_density},
                 {"h4_norm", gp::sobolev_norm(sp, gs.phi, 4)}};
  rep.checks.push_back(make_check("Euler-Lagrange residual", "euler-lagrange", gs.residual, cfg.gp_tol));
  rep.checks.push_back(make_check("mu = e + g/2 |phi|_4^4", "chemical-potential",
                                  std::abs(gs.mu - gs.energy.total - 0.5 * cfg.coupling * quartic), 1e-10));
  rep.checks.push_back(make_check("energy non-increasing", "gp-functional", worst_rise,
                                  1e-13 * std::max(1.0, std::abs(gs.energy.total))));
  rep.checks.push_back(make_check("normalization", "gp-functional", std::abs(gs.phi.norm() - 1.0), 1e-12));
}

void run_evolve_gp(const RunConfig& cfg, Report& rep) {
  require(cfg.trap_strength == 0.0, "evolve-gp propagates the untrapped flow; set gp.trap_strength = 0");
  const auto grid = make_grid(cfg);
  gp::Spectral sp(grid);
  const auto phi0 = initial_field(cfg, grid);
  gp::GpParams p;
  p.coupling = cfg.coupling;
  gp::EvolveOptions eo;
  eo.sample_every = cfg.sample_every;
  eo.scheme = cfg.scheme == "yoshida4" ? gp::SplitScheme::Yoshida4 : gp::SplitScheme::Strang;
  const auto traj = gp::evolve_split_step(sp, phi0, p, cfg.dt, cfg.steps, eo);
  const auto obs = gp::observables(sp, traj);
  std::vector<std::vector<double>> rows;
  for (const auto& o : obs) rows.push_back({o.t, o.mass, o.e_kin, o.e_int, o.e_total, o.h1, o.h2, o.h4});
  io::write_csv(out_path(cfg, rep, "observables.csv"), {"t", "mass", "e_kin", "e_int", "e_total", "h1", "h2", "h4"}, rows);
  io::write_field(out_path(cfg, rep, "final.gpf"), traj.samples.back());

  const double T = traj.times.back() - traj.times.front();
  double dm = 0.0, de = 0.0;
  for (const auto& o : obs) {
    dm = std::max(dm, std::abs(o.mass - obs.front().mass));
    de = std::max(de, std::abs(o.e_total - obs.front().e_total));
  }
  const double escale = std::max(1.0, std::abs(obs.front().e_total));
  const double per = T > 0 ? 1.0 / T : 1.0;
  rep.results = {{"duration", T},
                 {"mass_drift", dm},
                 {"energy_drift", de},
                 {"max_step_mass_drift", traj.max_step_mass_drift},
                 {"samples", traj.samples.size()}};
  rep.checks.push_back(make_check("mass drift per unit time", "mass-conservation", dm * per, 1e-10));
  rep.checks.push_back(make_check("energy drift per unit time", "energy-conservation", de / escale * per, 1e-8));
  if (cfg.initial == "plane_wave") {
    // exp(-i (|k|^2 + g / vol) t) phi_0 solves the flow exactly.
    const std::array<int, 3> n{cfg.wave_vector[0], cfg.wave_vector[1], cfg.wave_vector[2]};
    double k2 = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
      const double k = 2 * kPi * n[a] / grid.length(a);
      k2 += k * k;
    }
    const double w = k2 + cfg.coupling / grid.volume();
    double err = 0.0;
    for (size_t i = 0; i < traj.samples.size(); ++i) {
      const Eigen::VectorXcd ex = std::exp(cplx(0, -w * traj.times[i])) * phi0.values;
      err = std::max(err, (traj.samples[i].values - ex).cwiseAbs().maxCoeff());
    }
    rep.results["plane_wave_error"] = err;
    rep.checks.push_back(make_check("plane-wave phase", "plane-wave-phase", err, 1e-12));
  }
}

struct ManyBodySetup {
  manybody::System system;
  fock::SparseOperator H;
  scattering::ScatteringSolution solution;
  double coupling = 0.0;
  double scale = 0.0;
};

ManyBodySetup many_body_setup(const RunConfig& cfg, const gp::Grid& grid) {
  const auto V = make_potential(cfg);
  manybody::ManyBodyConfig mc;
  mc.grid = grid;
  mc.particles = cfg.particles;
  mc.potential = V;
  mc.interaction = interaction_model(cfg.interaction);
  mc.interaction_scale = cfg.interaction_scale;
  mc.dimension_cap = cfg.dimension_cap;
  auto sys = manybody::make_system(mc);
  auto H = manybody::build_H(sys);
  auto sol = solve(cfg, V);
  const double s = mc.scale();
  const double g = effective_coupling(sol, cfg.particles, s, grid.dim);
  return {std::move(sys), std::move(H), std::move(sol), g, s};
}

void run_evolve_manybody(const RunConfig& cfg, Report& rep) {
  require(cfg.trap_strength == 0.0, "evolve-manybody propagates the untrapped dynamics; set gp.trap_strength = 0");
  require(cfg.mb_steps % cfg.mb_sample_every == 0, "manybody.steps must be a multiple of manybody.sample_every");
  const auto grid = make_grid(cfg);
  gp::Spectral sp(grid);
  const auto setup = many_body_setup(cfg, grid);
  const auto& sys = setup.system;
  const int N = cfg.particles;
  const auto phi0 = initial_field(cfg, grid);

  fock::FockVector psi0;
  if (cfg.state == "product") {
    psi0 = fock::product_state(phi0.mode_vector(), sys.ladder, N);
  } else if (cfg.state == "correlated") {
    psi0 = manybody::correlated_product_state(phi0, setup.solution, N, sys.ladder, setup.scale);
  } else {
    psi0 = manybody::ground_state(sys, setup.H, cfg.eig_tol).state;
  }

  manybody::EvolveOptions eo;
  eo.krylov_dim = cfg.krylov_dim;
  eo.tol = cfg.krylov_tol;
  eo.sample_every = cfg.mb_sample_every;
  const auto traj = manybody::evolve(setup.H, psi0, cfg.mb_dt, cfg.mb_steps, eo);

  // GP reference sampled at the same times.
  gp::GpParams gpp;
  gpp.coupling = setup.coupling;
  gp::EvolveOptions go;
  go.sample_every = cfg.gp_substeps;
  go.scheme = gp::SplitScheme::Yoshida4;
  const double sample_dt = cfg.mb_dt * cfg.mb_sample_every;
  const int gp_steps = cfg.mb_steps / cfg.mb_sample_every * cfg.gp_substeps;
  const auto gtraj = gp::evolve_split_step(sp, phi0, gpp, sample_dt / cfg.gp_substeps, gp_steps, go);

  const size_t dim = sys.ladder.basis(N).dimension();
  const bool monitor = dim <= kDenseMonitorCap;
  std::vector<manybody::DepletionRecord> records;
  manybody::GronwallReport gr;
  if (monitor) {
    manybody::GronwallInput in;
    in.system = &sys;
    in.H = &setup.H;
    in.solution = &setup.solution;
    in.cutoff_radius = cfg.cutoff;
    in.coupling = setup.coupling;
    in.scale = setup.scale;
    gr = manybody::gronwall_monitor(traj, gtraj, sp, in);
    records = gr.records;
  } else {
    for (size_t k = 0; k < traj.states.size(); ++k) {
      const auto& phi = gtraj.samples[gtraj.index_of(traj.times[k])];
      const auto d = manybody::depletion(traj.states[k], phi, sys.ladder);
      manybody::DepletionRecord r;
      r.t = traj.times[k];
      r.depletion = d.depletion;
      r.n_perp = d.n_perp;
      r.identity_defect = d.discrepancy;
      r.gronwall = std::numeric_limits<double>::quiet_NaN();
      r.energy = manybody::expectation(setup.H, traj.states[k]);
      r.fidelity = manybody::fidelity_to_condensate(traj.states[k], phi, sys.ladder);
      records.push_back(r);
    }
  }

  std::vector<std::vector<double>> rows;
  double dnorm = 0.0, denergy = 0.0, ident = 0.0;
  const double e0 = records.front().energy;
  for (size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    rows.push_back({r.t, r.depletion, r.n_perp, r.gronwall, r.energy, r.fidelity});
    dnorm = std::max(dnorm, std::abs(traj.states[k].coeffs.norm() - 1.0));
    denergy = std::max(denergy, std::abs(r.energy - e0));
    ident = std::max(ident, r.identity_defect);
  }
  io::write_csv(out_path(cfg, rep, "depletion.csv"),
                {"t", "depletion", "n_perp", "gronwall", "energy", "fidelity_to_condensate"}, rows);
  io::write_state(out_path(cfg, rep, "final_state.mbf"), traj.states.back());

  const double T = traj.times.back() - traj.times.front();
  const double per = T > 0 ? 1.0 / T : 1.0;
  rep.results = {{"dimension", dim},
                 {"coupling", setup.coupling},
                 {"scattering_length", setup.solution.a},
                 {"interaction_scale", setup.scale},
                 {"duration", T},
                 {"krylov_substeps", traj.substeps},
                 {"norm_drift", dnorm},
                 {"energy_drift", denergy}};
  rep.checks.push_back(make_check("norm drift per unit time", "unitarity", dnorm * per, 1e-10));
  rep.checks.push_back(make_check("energy drift per unit time", "energy-conservation",
                                  denergy / std::max(1.0, std::abs(e0)) * per, 1e-8));
  rep.checks.push_back(make_check("depletion two routes", "depletion-identity", ident, 1e-10));
  if (monitor) {
    rep.results["gronwall_constant"] = gr.constant;
    rep.results["gronwall_growth_rate"] = gr.growth_rate;
    rep.results["gronwall_fitted_c"] = gr.fitted_c;
    rep.results["gronwall_worst_margin"] = gr.worst_margin;
    rep.checks.push_back(make_check("G(t) - <N_perp> >= 0", "aux-bound", gr.worst_margin, -1e-8, ">="));
  } else {
    rep.results["gronwall_skipped"] = "sector dimension above " + std::to_string(kDenseMonitorCap);
  }
}

void run_verify_ops(const RunConfig& cfg, Report& rep) {
  const auto grid = make_grid(cfg);
  gp::Spectral sp(grid);
  const int N = cfg.particles;
  require(N >= 2, "verify-ops needs at least two particles");
  const auto setup = many_body_setup(cfg, grid);
  const auto& sys = setup.system;
  const int M = static_cast<int>(grid.size());
  json out;

  // Fock layer.
  {
    // The inequalities do not depend on the lattice; large M would only blow up sector N+2.
    const int suite_modes = std::min(M, kFockSuiteModeCap);
    const auto suite = verify::fock_lemma_suite(suite_modes, N, cfg.random_draws, cfg.seed);
    out["fock_suite_modes"] = suite_modes;
    json ineq = json::array();
    bool all = true;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : suite.inequalities) {
      ineq.push_back({{"name", r.name}, {"draws", r.draws}, {"worst_slack", r.worst_slack}, {"passed", r.passed}});
      all = all && r.passed;
      worst = std::min(worst, r.worst_slack);
    }
    out["fock_inequalities"] = ineq;
    rep.checks.push_back(make_check("Fock bounds, worst relative slack", "fock-bounds", worst, -1e-10, ">="));
    rep.checks.push_back(make_check("N_perp two routes", "excitation-number", suite.n_perp_two_route, 1e-10));

    fock::FockSpace space(M, N);
    std::mt19937_64 rng(cfg.seed + 1);
    std::normal_distribution<double> nd;
    fock::Vec f(M), g(M);
    for (int i = 0; i < M; ++i) {
      f[i] = cplx(nd(rng), nd(rng));
      g[i] = cplx(nd(rng), nd(rng));
    }
    const auto ccr = fock::ccr_defect(f.normalized(), g.normalized(), space);
    out["ccr_defect"] = {{"restricted", ccr.restricted}, {"top_sector", ccr.top}};
    rep.checks.push_back(make_check("CCR defect below the top sector", "ccr", ccr.restricted, 1e-12));
  }

  // Condensate along a short GP trajectory centred at t = 0.
  const double h = cfg.fd_dt;
  gp::GpParams gpp;
  gpp.coupling = setup.coupling;
  gp::EvolveOptions go;
  go.scheme = gp::SplitScheme::Yoshida4;
  go.sample_every = 8;
  go.t0 = -2 * h;
  const auto phi0 = initial_field(cfg, grid);
  // Start the trajectory at -2h from phi0 so the samples straddle t = 0.
  const auto traj = gp::evolve_split_step(sp, phi0, gpp, h / 32, 128, go);
  const auto& phi = traj.samples[traj.index_of(0.0)];
  const auto d1 = gp::gp_time_derivative(sp, phi, setup.coupling);
  const auto d2 = gp::gp_second_time_derivative(sp, phi, d1, setup.coupling);
  const fock::Vec u = phi.mode_vector();
  const fock::Vec du = d1.mode_vector();
  const auto ker = renorm::build_kernel(phi, setup.solution, N, cfg.cutoff, setup.scale);
  const fock::Mat K = ker.matrix();
  const auto [dK, d2K] = renorm::kernel_time_derivatives(ker, d1, d2);

  // Five-point stencils under step halving.
  auto at = [&](double t) -> const gp::Field& { return traj.samples[traj.index_of(t)]; };
  json fd = json::array();
  double order_q = std::numeric_limits<double>::infinity(), order_k = order_q, order_k2 = order_q;
  std::vector<double> eq, ek, ek2;
  const fock::Mat dQ = renorm::dtQ_formula(u, du);
  for (double s : {h, h / 2, h / 4}) {
    auto Qt = [&](double t) { return fock::projector_Q(at(t).mode_vector()); };
    auto Kt = [&](double t) { return renorm::build_kernel(at(t), setup.solution, N, cfg.cutoff, setup.scale).matrix(); };
    const fock::Mat q_fd = (-Qt(2 * s) + 8.0 * Qt(s) - 8.0 * Qt(-s) + Qt(-2 * s)) / (12 * s);
    const fock::Mat k2p = Kt(2 * s), k1p = Kt(s), k1m = Kt(-s), k2m = Kt(-2 * s);
    const fock::Mat k_fd = (-k2p + 8.0 * k1p - 8.0 * k1m + k2m) / (12 * s);
    const fock::Mat k2_fd = (-k2p + 16.0 * k1p - 30.0 * K + 16.0 * k1m - k2m) / (12 * s * s);
    eq.push_back((q_fd - dQ).cwiseAbs().maxCoeff());
    ek.push_back((k_fd - dK).cwiseAbs().maxCoeff());
    ek2.push_back((k2_fd - d2K).cwiseAbs().maxCoeff());
    fd.push_back({{"step", s}, {"dQ_error", eq.back()}, {"dK_error", ek.back()}, {"d2K_error", ek2.back()}});
  }
  for (size_t i = 1; i < eq.size(); ++i) {
    order_q = std::min(order_q, std::log2(eq[i - 1] / eq[i]));
    order_k = std::min(order_k, std::log2(ek[i - 1] / ek[i]));
    order_k2 = std::min(order_k2, std::log2(ek2[i - 1] / ek2[i]));
  }
  out["finite_differences"] = fd;
  rep.checks.push_back(make_check("d/dt Q finite-difference order", "projector-derivative", order_q, 2.0, ">="));
  rep.checks.push_back(make_check("d/dt k finite-difference order", "kernel-derivative", order_k, 2.0, ">="));
  rep.checks.push_back(make_check("d2/dt2 k finite-difference order", "kernel-derivative", order_k2, 2.0, ">="));

  // Renormalized operators. The five-part split, the commutator identities and the H_ren
  // spectra are dense-heavy and only run on small sectors.
  renorm::RenormContext ctx(sys.ladder, N, u, K);
  const fock::Vec w = cplx(0, 1) * du;
  const double egp = manybody::lattice_gp_energy(u, sys.model.kinetic, setup.coupling, grid.cell_volume());
  const size_t dim = sys.ladder.basis(N).dimension();
  fock::SparseOperator cH_N;
  double on_shell = 0.0;
  if (dim <= kIdentityDimensionCap) {
    const auto parts = renorm::build_cH_N_and_parts(ctx, setup.H, sys.model, w, egp, setup.coupling, 1e-8);
    cH_N = parts.cH_N;
    on_shell = parts.on_shell_residual;
    auto sum = parts.parts[0];
    for (int j = 1; j < 5; ++j) sum = sum + parts.parts[static_cast<size_t>(j)];
    const double dec = fock::max_abs_diff(sum, parts.cH_N);
    rep.checks.push_back(make_check("cH_N = sum of five parts", "decomposition", dec, cfg.identity_tol));

    const auto com = renorm::commutator_identities(ctx);
    out["commutators"] = {{"b_commutator", com.b_commutator},
                          {"b_commutator_literal", com.b_commutator_literal},
                          {"b_dagger_commutator", com.b_dagger_commutator},
                          {"nperp_ladder", com.nperp_ladder},
                          {"nperp_condensate", com.nperp_condensate}};
    rep.checks.push_back(make_check("[b_x, N_ren] expansion", "b-commutator", com.b_commutator, 1e-10));
    rep.checks.push_back(make_check("[b*_x, N_ren] adjoint relation", "b-commutator", com.b_dagger_commutator, 1e-10));
    rep.checks.push_back(make_check("[N_perp, a*(Q_x) a(phi)]", "excitation-number", com.nperp_ladder, 1e-10));
    rep.checks.push_back(make_check("[N_perp, a*(phi) a(phi)]", "excitation-number", com.nperp_condensate, 1e-10));

    const auto [Kren, Vren] = renorm::build_H_ren(ctx, sys.model);
    const double kmin = linalg::min_eigenvalue(Kren.dense());
    const double vmin = linalg::min_eigenvalue(Vren.dense());
    out["spectra"] = {{"K_ren_min", kmin}, {"V_ren_min", vmin}};
    rep.checks.push_back(make_check("spec K_ren >= 0", "renormalized-positivity", kmin, -1e-8, ">="));
    rep.checks.push_back(make_check("spec V_ren >= 0", "renormalized-positivity", vmin, -1e-8, ">="));
  } else {
    cH_N = renorm::build_cH_N(ctx, setup.H, sys.model, w, egp, setup.coupling, 1e-8, &on_shell);
    out["identities_skipped"] = "sector dimension above " + std::to_string(kIdentityDimensionCap);
  }

  const auto Nren = renorm::build_N_ren(ctx, N);
  const auto Qren = renorm::build_Q_ren(ctx, dK, N);
  const auto Nperp = ctx.n_perp(N);
  const auto sw = renorm::sandwich_constants(Nren, Nperp);
  const double qb = renorm::q_bound_constant(Qren, Nren);
  const auto ab = renorm::aux_bound(cH_N, Qren, Nren, Nperp);
  out["constants"] = {{"c_minus", sw.c_minus},
                      {"c_plus", sw.c_plus},
                      {"q_bound", qb},
                      {"aux_constant", ab.constant},
                      {"aux_min_eigenvalue", ab.min_eigenvalue},
                      {"on_shell_residual", on_shell}};
  rep.checks.push_back(make_check("cH_N + Q_ren + C(N_ren+1) - N_perp >= 0", "aux-bound", ab.min_eigenvalue, -1e-8, ">="));

  // Cutoff radius scan: sandwich constants on the many-body sector, kernel norm on a fine 3D cube.
  {
    json scan = json::array();
    const std::vector<double> radii{cfg.cutoff, cfg.cutoff / 2, cfg.cutoff / 4};
    std::vector<double> dev;
    bool finite = true;
    for (double r : radii) {
      const auto kr_ = renorm::build_kernel(phi, setup.solution, N, r, setup.scale);
      renorm::RenormContext c(sys.ladder, N, u, kr_.matrix());
      const auto s = renorm::sandwich_constants(renorm::build_N_ren(c, N), c.n_perp(N));
      finite = finite && std::isfinite(s.c_minus) && std::isfinite(s.c_plus);
      dev.push_back(std::max(std::abs(s.c_minus - 1), std::abs(s.c_plus - 1)));
      scan.push_back({{"radius", r}, {"c_minus", s.c_minus}, {"c_plus", s.c_plus}, {"hs_norm", kr_.hs_norm()}});
    }
    double worst_step = -std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < dev.size(); ++i) worst_step = std::max(worst_step, dev[i] - dev[i - 1]);
    out["radius_scan"] = scan;
    rep.checks.push_back(make_check("sandwich constants finite over the radius scan", "sandwich", finite ? 0.0 : 1.0, 0.0));
    if (setup.solution.support_radius() > 0.0) {
      rep.checks.push_back(make_check("max |C - 1| shrinks as r decreases", "sandwich", worst_step, 0.0, "<"));
      const auto ns = renorm::kernel_norm_scaling(setup.solution, radii);
      out["norm_scaling"] = {{"radii", ns.radii}, {"norms", ns.norms}, {"exponent", ns.exponent},
                             {"scale", ns.scale}};
      rep.checks.push_back(make_check("|fitted ||k|| exponent - 0.5|", "kernel-norm", std::abs(ns.exponent - 0.5), 0.1));
    }
  }

  const auto kr = renorm::kernel_diagnostics(ker);
  out["kernel"] = {{"hs_norm", kr.hs_norm},
                   {"column_constant", kr.column_constant},
                   {"f_norm", kr.f_norm},
                   {"f_subtracted_norm", kr.f_subtracted_norm},
                   {"g_norm", kr.g_norm}};
  out["dimension"] = dim;
  out["coupling"] = setup.coupling;
  rep.results = out;
  std::ofstream(out_path(cfg, rep, "verify_ops.json")) << out.dump(2) << '\n';
}

void run_trapped(const RunConfig& cfg, Report& rep) {
  manybody::TrappedSpec spec;
  spec.grid = make_grid(cfg);
  spec.particles = cfg.experiment_particles;
  spec.depths = cfg.experiment_depths;
  spec.potential = make_potential(cfg);
  spec.trap_strength = cfg.experiment_trap;
  spec.interaction = interaction_model(cfg.experiment_interaction);
  spec.interaction_scale = cfg.interaction_scale;
  spec.r_max = cfg.r_max;
  spec.gp_tol = cfg.gp_tol;
  spec.eig_tol = cfg.eig_tol;
  spec.dimension_cap = cfg.dimension_cap;
  spec.label = cfg.label;
  const auto rows = manybody::trapped_depletion_experiment(spec);

  std::vector<std::vector<double>> csv;
  json table = json::array();
  for (const auto& r : rows) {
    csv.push_back({static_cast<double>(r.particles), r.depth, r.l1_norm, r.scattering_length, r.depletion,
                   r.n_depletion, r.energy, static_cast<double>(r.dimension)});
    table.push_back({{"N", r.particles}, {"depth", r.depth}, {"l1_norm", r.l1_norm}, {"a", r.scattering_length},
                     {"depletion", r.depletion}, {"n_depletion", r.n_depletion}, {"energy", r.energy},
                     {"dimension", r.dimension}});
  }
  io::write_csv(out_path(cfg, rep, "trapped_depletion.csv"),
                {"N", "depth", "l1_norm", "a", "depletion", "n_depletion", "energy", "dimension"}, csv);
  rep.results = {{"label", cfg.label}, {"rows", table}};

  // Exact condensation without interaction.
  for (const auto& r : rows)
    if (r.depth == 0.0)
      rep.checks.push_back(make_check("V = 0 depletion, N = " + std::to_string(r.particles), "exact-condensation",
                                      std::abs(r.depletion), 1e-8));
  // N * depletion flat across N at each non-zero depth.
  std::vector<double> depths = cfg.experiment_depths;
  std::sort(depths.begin(), depths.end());
  for (double d : depths) {
    if (d == 0.0) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rows)
      if (r.depth == d) {
        lo = std::min(lo, r.n_depletion);
        hi = std::max(hi, r.n_depletion);
      }
    rep.checks.push_back(make_check("max/min N*depletion at depth " + io::format_double(d), "depletion-rate",
                                    lo > 0 ? hi / lo : std::numeric_limits<double>::infinity(), 2.0));
  }
  // Depletion grows with the potential at fixed N.
  if (depths.size() >= 2) {
    for (int N : cfg.experiment_particles) {
      double worst = std::numeric_limits<double>::infinity();
      double prev = -1.0;
      for (double d : depths)
        for (const auto& r : rows)
          if (r.depth == d && r.particles == N) {
            if (prev >= 0.0) worst = std::min(worst, r.depletion - prev);
            prev = r.depletion;
          }
      rep.checks.push_back(make_check("depletion increasing in |V|_1, N = " + std::to_string(N), "depletion-rate",
                                      worst, 0.0, ">"));
    }
  }
}

}  // namespace

Check make_check(std::string name, std::string anchor, double measured, double tolerance, std::string relation) {
  Check c{std::move(name), std::move(anchor), measured, tolerance, std::move(relation), false};
  if (std::isnan(measured)) return c;
  if (c.relation == "<=") c.passed = measured <= tolerance;
  else if (c.relation == ">=") c.passed = measured >= tolerance;
  else if (c.relation == ">") c.passed = measured > tolerance;
  else if (c.relation == "<") c.passed = measured < tolerance;
  else throw PreconditionError("unknown check relation " + c.relation);
  return c;
}

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json Report::to_json() const {
  json cs = json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name},
                  {"anchor", c.anchor},
                  {"measured", num(c.measured)},
                  {"tolerance", c.tolerance},
                  {"relation", c.relation},
                  {"passed", c.passed}});
  return {{"schema", "gplab-report-1"},
          {"version", version},
          {"command", command},
          {"seed", seed},
          {"wall_time", wall_time},
          {"config", config_text},
          {"checks", cs},
          {"results", results},
          {"artifacts", artifacts},
          {"passed", passed()}};
}

std::string version() { return std::string("gplab ") + GPLAB_VERSION; }

scattering::RadialPotential make_potential(const RunConfig& cfg) {
  if (cfg.potential == "zero") return scattering::RadialPotential::zero(cfg.dr, cfg.radius);
  if (cfg.potential == "square_well") return scattering::RadialPotential::square_well(cfg.depth, cfg.radius, cfg.dr);
  if (cfg.potential == "smooth_bump") return scattering::RadialPotential::smooth_bump(cfg.depth, cfg.radius, cfg.dr);
  if (cfg.potential == "table") return scattering::RadialPotential::from_table(cfg.table);
  throw PreconditionError("unknown potential kind " + cfg.potential);
}

gp::Grid make_grid(const RunConfig& cfg) { return gp::Grid::cube(cfg.dim, cfg.points, cfg.length); }

gp::Field initial_field(const RunConfig& cfg, const gp::Grid& grid) {
  if (cfg.initial == "gaussian") return gp::Field::gaussian(grid, cfg.width);
  if (cfg.initial == "constant") return gp::Field::constant(grid);
  if (cfg.initial == "plane_wave")
    return gp::Field::plane_wave(grid, {cfg.wave_vector[0], cfg.wave_vector[1], cfg.wave_vector[2]});
  auto f = io::read_field(cfg.initial);
  require(f.grid == grid, "initial field grid does not match [grid]");
  return f.normalized();
}

double effective_coupling(const scattering::ScatteringSolution& sol, int N, double scale, int dim) {
  return manybody::gp_coupling(sol.potential, sol.a, N, scale, dim);
}

Report run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(cfg.output_dir);
  Report rep;
  rep.command = cfg.command;
  rep.version = version();
  rep.seed = cfg.seed;
  rep.config_text = config::serialize(cfg);
  if (cfg.command == "scatter") run_scatter(cfg, rep);
  else if (cfg.command == "groundstate") run_groundstate(cfg, rep);
  else if (cfg.command == "evolve-gp") run_evolve_gp(cfg, rep);
  else if (cfg.command == "evolve-manybody") run_evolve_manybody(cfg, rep);
  else if (cfg.command == "verify-ops") run_verify_ops(cfg, rep);
  else if (cfg.command == "experiment-trapped-depletion") run_trapped(cfg, rep);
  else throw PreconditionError("unknown command " + cfg.command);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.artifacts.push_back("report.json");
  std::ofstream((fs::path(cfg.output_dir) / "report.json").string()) << rep.to_json().dump(2) << '\n';
  return rep;
}

}  // namespace gplab::run
