#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "mbrnn/distributions.hpp"
#include "mbrnn/rng.hpp"

namespace mbrnn {

// A maximal run of periods sharing one renewal arrival process. The effective
// inter-arrival law is arrival_dists[dist] scaled to mean 1/rate; the process
// restarts with age 0 at segment boundaries.
struct ArrivalSegment {
  int start_period = 0;
  int length = 1;
  double rate = 1.0;
  int dist = 0;  // index into ScenarioSpec::arrival_dists
};

// One G(t)/GI/1 instance. Period length equals the mean service time (= 1),
// so per-period arrival rates coincide with period utilizations.
struct ScenarioSpec {
  int T = 60;
  int l = 50;
  double rho_bar = 0.7;
  int cycle_length = 0;
  std::uint64_t seed = 0;
  std::vector<Dist> arrival_dists;      // mean-1 laws, one per distinct process
  std::vector<ArrivalSegment> segments; // tile [0, T) without gaps or overlap
  Dist service{ParametricDist(Family::Exponential, 1.0, 1.0)};  // mean-1
  Eigen::VectorXd p0;                   // length l+1, sums to 1

  // Segment covering period t, i.e. the window (t-1, t] for 1-based t.
  const ArrivalSegment& segment_at(int period0) const;  // period0 in [0, T)
  void validate() const;
};

// Uniform Dirichlet over coordinates 0..k (exponential spacings), zero above k.
Eigen::VectorXd sample_initial_state(Rng& rng, int k, int l);

struct ArrivalPattern {
  int cycle_length = 0;
  std::vector<ArrivalSegment> segments;  // tiled over [0, T), dist = run index within cycle
  int num_processes = 0;                 // m
};

// In-place normalization lambda_i <- rho_bar * lambda_i / lambda_bar, where
// lambda_bar is the per-period mean over one cycle. Idempotent.
void normalize_rates(std::vector<double>& run_rates, const std::vector<int>& run_lengths, double rho_bar);

// Cycle length ~ U(T/3, 2T/3), m ~ U(1..cycle), contiguous runs with one
// U(0.5, 10) rate each, normalized so the per-period cycle mean equals rho_bar,
// then tiled across the horizon with the last cycle truncated.
ArrivalPattern sample_arrival_pattern(Rng& rng, int T, double rho_bar);

struct ScenarioConfig {
  int T = 60;
  int l = 50;
  int k = 30;                  // max occupied count at t=0
  double rho_lo = 0.5;
  double rho_hi = 1.0;
  std::optional<int> force_m;  // force a single renewal process (GI/GI/1) with 1
  // Distribution source: random PH library by default, or fixed named families.
  std::optional<ParametricDist> arrival_family;
  std::optional<ParametricDist> service_family;
  PhSamplerConfig sampler;
};

ScenarioSpec build_scenario(Rng& rng, const ScenarioConfig& cfg);

// Per-period arrival rate vector of length T.
Eigen::VectorXd rates_per_period(const ScenarioSpec& s);

}  // namespace mbrnn
