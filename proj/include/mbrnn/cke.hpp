#pragma once

#include <stdexcept>

#include "mbrnn/simulate.hpp"

namespace mbrnn {

struct UnsupportedModelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class OdeScheme { RK4, Euler };

struct CkeConfig {
  double h = 1e-3;        // RK4 contract; Euler cross-checks want 1e-4
  int big_state = 200;    // integration state space, well past the label cutoff
  OdeScheme scheme = OdeScheme::RK4;
};

// Numerical transient solution of the birth-death Chapman-Kolmogorov equations
// for M(t)/M/1 instances: piecewise-constant arrival rate per segment, a single
// exponential server. States above l are aggregated into the last label column
// and each sampled row is renormalized (mass drift stays below 1e-10 thanks to
// the enlarged state space).
// Throws UnsupportedModelError when any distribution is not exponential.
LabelMatrix cke_solve(const ScenarioSpec& s, const CkeConfig& cfg = {});

}  // namespace mbrnn
