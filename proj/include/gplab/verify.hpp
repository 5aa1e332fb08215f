#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gplab/fock.hpp"

namespace gplab::verify {

// One inequality lhs <= rhs checked over many random draws. slack is the smallest
// (rhs - lhs) / max(1, rhs) seen; it must stay above -tol.
struct InequalityResult {
  std::string name;
  int draws = 0;
  double worst_slack = 0.0;
  bool passed = true;
};

struct FockSuite {
  std::vector<InequalityResult> inequalities;
  double n_perp_two_route = 0.0;  // N - a*(phi)a(phi) against sum_x a*(Q_x) a(Q_x)
};

// Random (f, g, h, phi, psi) draws on M modes in the N-particle sector. Half the states are
// small perturbations of a condensate so that the N_perp bounds are probed near saturation.
FockSuite fock_lemma_suite(int modes, int particles, int draws, std::uint64_t seed, double tol = 1e-10);

}  // namespace gplab::verify
