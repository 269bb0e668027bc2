#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mbrnn/parallel.hpp"
#include "mbrnn/rng.hpp"
#include "mbrnn/scenario.hpp"

namespace mbrnn {

// T x (l+1) row-stochastic matrix; row t-1 holds the distribution of
// min(N(t), l) at the end of period t. Column l aggregates >= l customers.
using LabelMatrix = Eigen::MatrixXd;

struct SimConfig {
  int num_reps = 20000;
  std::uint64_t seed = 0;
  const ThreadPool* pool = nullptr;
};

// One FIFO single-server sample path; returns min(N(t), l) for t = 1..T.
// Service is never interrupted; the arrival renewal process restarts with age
// zero at every segment boundary (a pending arrival past the boundary is
// discarded). Events at integer t are applied before the state is recorded,
// arrivals ahead of departures on ties.
std::vector<int> simulate_path(const ScenarioSpec& s, Rng& rng);

// Empirical occupancy distribution over num_reps independent replications,
// each on its own child stream. Deterministic in (s, cfg.seed) regardless of
// the pool size: counts are integers and merge commutatively.
LabelMatrix simulate(const ScenarioSpec& s, const SimConfig& cfg);

// Raw binary layout: two little-endian uint32 (T, l+1), then row-major
// little-endian float32.
void write_labels_binary(const std::string& path, const LabelMatrix& labels);
LabelMatrix read_labels_binary(const std::string& path);

}  // namespace mbrnn
