#include "gplab/scattering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace gplab::scattering {

namespace {

double trapezoid(const std::vector<double>& y, double dx) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * dx;
}

// Minimal Nelder-Mead on R^n, used only to polish a grid scan.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                                std::vector<double> x0, std::vector<double> step, int max_eval,
                                double ftol) {
  const size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  for (size_t i = 0; i <= n; ++i) vals[i] = fn(pts[i]);
  int evals = static_cast<int>(n + 1);
  std::vector<size_t> order(n + 1);
  while (evals < max_eval) {
    for (size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return vals[a] < vals[b]; });
    const size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <= ftol * (std::abs(vals[best]) + 1e-300)) break;
    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (pts[worst][j] - centroid[j]);
      return p;
    };
    auto xr = along(-1.0);
    double fr = fn(xr);
    ++evals;
    if (fr < vals[best]) {
      auto xe = along(-2.0);
      double fe = fn(xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      auto xc = along(fr < vals[worst] ? -0.5 : 0.5);
      double fc = fn(xc);
      ++evals;
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
          vals[i] = fn(pts[i]);
          ++evals;
        }
      }
    }
  }
  size_t best = 0;
  for (size_t i = 1; i <= n; ++i)
    if (vals[i] < vals[best]) best = i;
  return pts[best];
}

double cubic_sample(const std::vector<double>& y, double dr, double r, bool derivative) {
  const double s = r / dr;
  const auto n = static_cast<long>(y.size());
  long i = static_cast<long>(std::floor(s));
  i = std::clamp(i, 1L, n - 3);
  const double t = s - static_cast<double>(i);
  const double p0 = y[i - 1], p1 = y[i], p2 = y[i + 1], p3 = y[i + 2];
  // Lagrange cubic through nodes -1, 0, 1, 2.
  const double l0 = -t * (t - 1) * (t - 2) / 6.0;
  const double l1 = (t + 1) * (t - 1) * (t - 2) / 2.0;
  const double l2 = -(t + 1) * t * (t - 2) / 2.0;
  const double l3 = (t + 1) * t * (t - 1) / 6.0;
  if (!derivative) return l0 * p0 + l1 * p1 + l2 * p2 + l3 * p3;
  const double d0 = -(3 * t * t - 6 * t + 2) / 6.0;
  const double d1 = (3 * t * t - 4 * t - 1) / 2.0;
  const double d2 = -(3 * t * t - 2 * t - 2) / 2.0;
  const double d3 = (3 * t * t - 1) / 6.0;
  return (d0 * p0 + d1 * p1 + d2 * p2 + d3 * p3) / dr;
}

}  // namespace

RadialPotential::RadialPotential(std::vector<double> samples, double dr)
    : samples_(std::move(samples)), dr_(dr) {
  require(dr_ > 0.0, "radial grid spacing must be positive");
  require(samples_.size() >= 2, "radial potential needs at least two samples");
  for (size_t i = 0; i < samples_.size(); ++i) {
    require(std::isfinite(samples_[i]), "radial potential sample is not finite");
    require(samples_[i] >= 0.0, "negative potential sample at r = " + std::to_string(i * dr_));
  }
  support_ = 0.0;
  for (size_t i = samples_.size(); i-- > 0;) {
    if (samples_[i] != 0.0) {
      support_ = static_cast<double>(i) * dr_;
      break;
    }
  }
}

RadialPotential RadialPotential::zero(double dr, double extent) {
  require(dr > 0.0 && extent > 0.0, "zero potential needs positive dr and extent");
  const auto n = static_cast<size_t>(std::ceil(extent / dr)) + 1;
  return RadialPotential(std::vector<double>(std::max<size_t>(n, 2), 0.0), dr);
}

RadialPotential RadialPotential::square_well(double depth, double radius, double dr) {
  require(depth >= 0.0, "square well depth must be non-negative");
  require(radius > 0.0 && dr > 0.0, "square well radius and dr must be positive");
  const double m = radius / dr;
  const auto edge = static_cast<size_t>(std::llround(m));
  require(std::abs(m - static_cast<double>(edge)) < 1e-9 * std::max(1.0, m),
          "square well radius must be a multiple of dr");
  std::vector<double> v(edge + 2, 0.0);
  for (size_t i = 0; i < edge; ++i) v[i] = depth;
  v[edge] = 0.5 * depth;
  return RadialPotential(std::move(v), dr);
}

RadialPotential RadialPotential::smooth_bump(double depth, double radius, double dr) {
  require(depth >= 0.0, "bump depth must be non-negative");
  require(radius > 0.0 && dr > 0.0, "bump radius and dr must be positive");
  const auto n = static_cast<size_t>(std::ceil(radius / dr)) + 2;
  std::vector<double> v(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) * dr / radius;
    if (s < 1.0) v[i] = depth * (1 - s * s) * (1 - s * s);
  }
  return RadialPotential(std::move(v), dr);
}

RadialPotential RadialPotential::from_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open potential table: " + path);
  std::vector<double> r, v;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) throw PreconditionError("potential table row needs two columns: " + line);
    r.push_back(a);
    v.push_back(b);
  }
  require(r.size() >= 2, "potential table needs at least two rows");
  require(std::abs(r[0]) < 1e-12, "potential table must start at r = 0");
  const double dr = r[1] - r[0];
  for (size_t i = 1; i < r.size(); ++i)
    require(std::abs(r[i] - r[i - 1] - dr) < 1e-9 * std::max(1.0, r[i]),
            "potential table must use a uniform radial grid");
  return RadialPotential(std::move(v), dr);
}

RadialPotential RadialPotential::scaled(double n) const {
  require(n > 0.0, "scale factor must be positive");
  std::vector<double> v(samples_);
  for (auto& x : v) x *= n * n;
  return RadialPotential(std::move(v), dr_ / n);
}

RadialPotential RadialPotential::times(double c) const {
  require(c >= 0.0, "potential multiplier must be non-negative");
  std::vector<double> v(samples_);
  for (auto& x : v) x *= c;
  return RadialPotential(std::move(v), dr_);
}

double RadialPotential::at(double r) const {
  if (r < 0.0) r = -r;
  const double s = r / dr_;
  const auto i = static_cast<size_t>(s);
  if (i + 1 >= samples_.size()) return i < samples_.size() ? samples_[i] : 0.0;
  const double t = s - static_cast<double>(i);
  return (1 - t) * samples_[i] + t * samples_[i + 1];
}

double RadialPotential::l1_norm() const {
  std::vector<double> y(samples_.size());
  for (size_t i = 0; i < y.size(); ++i) {
    const double r = static_cast<double>(i) * dr_;
    y[i] = samples_[i] * r * r;
  }
  return 4 * kPi * trapezoid(y, dr_);
}

double RadialPotential::integral(int dim) const {
  require(dim >= 1 && dim <= 3, "dimension must be 1, 2 or 3");
  if (dim == 3) return l1_norm();
  std::vector<double> y(samples_.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = samples_[i] * (dim == 2 ? static_cast<double>(i) * dr_ : 1.0);
  return (dim == 2 ? 2 * kPi : 2.0) * trapezoid(y, dr_);
}

double ScatteringSolution::f_at(double r) const {
  r = std::abs(r);
  if (r >= r_max) return 1.0 - a / r;
  return cubic_sample(f, dr, r, false);
}

double ScatteringSolution::df_at(double r) const {
  r = std::abs(r);
  if (r >= r_max) return a / (r * r);
  return cubic_sample(f, dr, r, true);
}

ScatteringSolution solve_zero_energy(const RadialPotential& V, double r_max, double tol) {
  require(tol > 0.0, "scattering tolerance must be positive");
  const double R = V.support_radius();
  require(r_max > R, "r_max must exceed the support radius (empty asymptotic region)");
  require(r_max > 2.0 * R, "r_max must exceed twice the support radius");
  const double dr = V.dr();
  const auto n = static_cast<size_t>(std::llround(r_max / dr));
  require(n >= 8, "r_max too small for the radial grid");

  ScatteringSolution sol;
  sol.potential = V;
  sol.dr = dr;
  sol.r_max = static_cast<double>(n) * dr;
  std::vector<double> u(n + 1), k(n + 1);
  for (size_t i = 0; i <= n; ++i) k[i] = 0.5 * (i < V.samples().size() ? V.samples()[i] : 0.0);
  const double h2 = dr * dr / 12.0;
  u[0] = 0.0;
  u[1] = dr * (1.0 + k[0] * dr * dr / 6.0);
  for (size_t i = 1; i < n; ++i) {
    u[i + 1] = (2.0 * (1.0 + 5.0 * h2 * k[i]) * u[i] - (1.0 - h2 * k[i - 1]) * u[i - 1]) /
               (1.0 - h2 * k[i + 1]);
    if (!std::isfinite(u[i + 1]))
      throw ConvergenceError("outward integration overflowed at r = " + std::to_string((i + 1) * dr));
  }

  // Affine fit u = alpha r + beta on the outer third of (R, r_max].
  const double r_fit = R + (2.0 / 3.0) * (sol.r_max - R);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (size_t i = 0; i <= n; ++i) {
    const double r = static_cast<double>(i) * dr;
    if (r <= r_fit) continue;
    sx += r;
    sy += u[i];
    sxx += r * r;
    sxy += r * u[i];
    cnt += 1;
  }
  if (cnt < 2) throw ConvergenceError("asymptotic fit region holds fewer than two samples");
  const double alpha = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  const double beta = (sy - alpha * sx) / cnt;
  if (!(alpha > 0.0)) throw ConvergenceError("non-positive asymptotic slope");
  sol.a = -beta / alpha;

  sol.u.resize(n + 1);
  sol.f.resize(n + 1);
  for (size_t i = 0; i <= n; ++i) {
    sol.u[i] = u[i] / alpha;
    sol.f[i] = i == 0 ? 1.0 / alpha : sol.u[i] / (static_cast<double>(i) * dr);
  }
  const double res = asymptote_residual(sol);
  if (!(res <= tol))
    throw ConvergenceError("asymptote residual " + std::to_string(res) + " above tolerance");
  return sol;
}

double asymptote_residual(const ScatteringSolution& sol) {
  const double R = sol.support_radius();
  require(sol.r_max > R, "empty asymptotic region");
  double worst = 0.0;
  bool any = false;
  for (size_t i = 1; i < sol.f.size(); ++i) {
    const double r = static_cast<double>(i) * sol.dr;
    if (r <= R) continue;
    any = true;
    worst = std::max(worst, std::abs(sol.f[i] - (1.0 - sol.a / r)));
  }
  require(any, "empty asymptotic region");
  return worst;
}

double integral_identity_length(const ScatteringSolution& sol) {
  const auto& v = sol.potential.samples();
  std::vector<double> y(std::min(v.size(), sol.u.size()));
  for (size_t i = 0; i < y.size(); ++i) y[i] = v[i] * sol.u[i] * static_cast<double>(i) * sol.dr;
  return 4 * kPi * trapezoid(y, sol.dr) / (8 * kPi);
}

namespace {

// Energy 4 pi int (2 f'^2 + V f^2) r^2 dr of a trial profile, given f and f' on the
// potential grid up to r_end, plus the analytic tail beyond r_end where f = 1 - b/r.
struct TrialEnergy {
  const RadialPotential& V;
  double operator()(const std::function<void(double, double&, double&)>& prof, double r_end,
                    double b_tail) const {
    const double dr = V.dr();
    // Two nodes past r_end so a jump of V at its last sample sits at an interior node.
    const auto n = static_cast<size_t>(std::ceil(r_end / dr)) + 2;
    std::vector<double> y(n + 1);
    for (size_t i = 0; i <= n; ++i) {
      const double r = static_cast<double>(i) * dr;
      double f, df;
      prof(r, f, df);
      const double vr = i < V.samples().size() ? V.samples()[i] : 0.0;
      y[i] = (2 * df * df + vr * f * f) * r * r;
    }
    const double r_last = static_cast<double>(n) * dr;
    double e = 4 * kPi * trapezoid(y, dr);
    if (r_last > 0) e += 8 * kPi * b_tail * b_tail / r_last;
    return e;
  }
};

double well_family_energy(const RadialPotential& V, double kappa, double rho) {
  kappa = std::abs(kappa);
  rho = std::abs(rho);
  if (rho < 1e-12) return V.l1_norm();
  const double kr = kappa * rho;
  // b = rho - tanh(kappa rho) / kappa, with the small-kappa series.
  const double b = kr < 1e-4 ? rho * (kr * kr / 3.0 - 2.0 * kr * kr * kr * kr / 15.0)
                             : rho - std::tanh(kr) / kappa;
  auto prof = [&](double r, double& f, double& df) {
    if (r >= rho) {
      f = 1.0 - b / r;
      df = b / (r * r);
      return;
    }
    if (kappa < 1e-10) {
      f = 1.0;
      df = 0.0;
      return;
    }
    const double ch = std::cosh(kr);
    const double x = kappa * r;
    if (x < 1e-4) {
      // sinh(x)/x and its derivative by series.
      f = (1.0 + x * x / 6.0) / ch;
      df = kappa * (x / 3.0) / ch;
      return;
    }
    f = std::sinh(x) / (x * ch);
    df = kappa * (x * std::cosh(x) - std::sinh(x)) / (x * x * ch);
  };
  const double r_end = std::max(rho, V.support_radius());
  return TrialEnergy{V}(prof, r_end, b);
}

// For f = 1 - b/max(r, r0) the energy is quadratic in b; returns the minimum over b.
double cutoff_family_energy(const RadialPotential& V, double r0) {
  r0 = std::max(std::abs(r0), 1e-9);
  std::vector<double> v = V.samples();
  v.push_back(0.0);  // keeps the support edge interior
  std::vector<double> p0(v.size()), p1(v.size()), p2(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    const double r = static_cast<double>(i) * V.dr();
    const double m = std::max(r, r0);
    p0[i] = v[i] * r * r;
    p1[i] = v[i] * r * r / m;
    p2[i] = v[i] * r * r / (m * m);
  }
  const double P0 = 4 * kPi * trapezoid(p0, V.dr());
  const double P1 = 4 * kPi * trapezoid(p1, V.dr());
  const double P2 = 4 * kPi * trapezoid(p2, V.dr());
  const double A = 8 * kPi / r0 + P2;
  const double b = P1 / A;
  return P0 - 2 * b * P1 + b * b * A;
}

}  // namespace

double scattering_length_variational(const RadialPotential& V, int trial_family_size) {
  require(trial_family_size >= 2, "trial family size must be at least 2");
  if (V.l1_norm() == 0.0) return 0.0;
  const double R = V.support_radius() > 0 ? V.support_radius() : V.dr();
  double vmax = 0.0;
  for (double x : V.samples()) vmax = std::max(vmax, x);
  const double kappa_max = 2.0 * std::sqrt(vmax / 2.0) + 1.0 / R;
  const int n = trial_family_size;

  double best = V.l1_norm();  // f = 1
  std::vector<double> best_well{0.0, R};
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const double kappa = kappa_max * i / (n - 1);
      const double rho = 2.0 * R * j / n;
      const double e = well_family_energy(V, kappa, rho);
      if (e < best) {
        best = e;
        best_well = {kappa, rho};
      }
    }
  }
  auto well = [&](const std::vector<double>& p) { return well_family_energy(V, p[0], p[1]); };
  auto xw = nelder_mead(well, best_well, {0.1 * kappa_max / n + 1e-3, 0.2 * R / n + 1e-4}, 4000, 1e-15);
  best = std::min(best, well(xw));

  double best_r0 = R;
  double best_cut = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= n; ++j) {
    const double r0 = 2.0 * R * j / n;
    const double e = cutoff_family_energy(V, r0);
    if (e < best_cut) {
      best_cut = e;
      best_r0 = r0;
    }
  }
  auto cut = [&](const std::vector<double>& p) { return cutoff_family_energy(V, p[0]); };
  auto xc = nelder_mead(cut, {best_r0}, {0.2 * R / n + 1e-4}, 500, 1e-15);
  best = std::min({best, best_cut, cut(xc)});
  return best / (8 * kPi);
}

}  // namespace gplab::scattering
