#pragma once

#include <string>
#include <vector>

#include "gplab/common.hpp"

namespace gplab::scattering {

// Non-negative radial potential sampled at r_i = i * dr.
class RadialPotential {
public:
  RadialPotential() = default;
  RadialPotential(std::vector<double> samples, double dr);

  static RadialPotential zero(double dr, double extent);
  // V = depth on [0, radius), depth/2 on the node at the discontinuity, 0 beyond.
  static RadialPotential square_well(double depth, double radius, double dr);
  // depth * (1 - (r/radius)^2)^2 on [0, radius].
  static RadialPotential smooth_bump(double depth, double radius, double dr);
  // Two-column text (r, V) on a uniform grid starting at r = 0.
  static RadialPotential from_table(const std::string& path);

  // n^2 V(n r) resampled on a grid of spacing dr / n (exact, no interpolation).
  RadialPotential scaled(double n) const;
  RadialPotential times(double c) const;

  const std::vector<double>& samples() const { return samples_; }
  double dr() const { return dr_; }
  double support_radius() const { return support_; }
  double extent() const { return dr_ * static_cast<double>(samples_.size() - 1); }
  // Linear interpolation, zero beyond the sampled range.
  double at(double r) const;
  // 4 pi int V(r) r^2 dr (trapezoid).
  double l1_norm() const;
  // int V(|x|) dx over R^dim for dim in 1..3.
  double integral(int dim) const;
  bool is_zero() const { return support_ == 0.0 && (samples_.empty() || samples_[0] == 0.0); }

private:
  std::vector<double> samples_;
  double dr_ = 0.0;
  double support_ = 0.0;
};

struct ScatteringSolution {
  RadialPotential potential;
  double dr = 0.0;
  double r_max = 0.0;
  double a = 0.0;
  std::vector<double> f;  // f(r_i)
  std::vector<double> u;  // u(r_i) = r_i f(r_i), normalized so u ~ r - a

  double support_radius() const { return potential.support_radius(); }
  // Cubic interpolation inside [0, r_max], analytic tail 1 - a/r beyond.
  double f_at(double r) const;
  double df_at(double r) const;
};

// Numerov integration of u'' = (V/2) u from u(0) = 0, u'(0) = 1.
// tol bounds the allowed asymptote residual of the fitted solution.
ScatteringSolution solve_zero_energy(const RadialPotential& V, double r_max, double tol);

// (1/8 pi) min over the trial families of int 2|f'|^2 + V f^2.
double scattering_length_variational(const RadialPotential& V, int trial_family_size);

// max over r in (R, r_max] of |f(r) - (1 - a/r)|.
double asymptote_residual(const ScatteringSolution& sol);

// (1/8 pi) int V f dx.
double integral_identity_length(const ScatteringSolution& sol);

}  // namespace gplab::scattering
