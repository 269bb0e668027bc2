#include "mbrnn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mbrnn {

const ArrivalSegment& ScenarioSpec::segment_at(int period0) const {
  for (const auto& seg : segments) {
    if (period0 >= seg.start_period && period0 < seg.start_period + seg.length) return seg;
  }
  throw std::out_of_range("ScenarioSpec: period outside segment tiling");
}

void ScenarioSpec::validate() const {
  if (T < 1) throw std::invalid_argument("ScenarioSpec: T >= 1 required");
  if (l < 1) throw std::invalid_argument("ScenarioSpec: l >= 1 required");
  if (p0.size() != l + 1) throw std::invalid_argument("ScenarioSpec: p0 must have length l+1");
  if (std::abs(p0.sum() - 1.0) > 1e-12) throw std::invalid_argument("ScenarioSpec: p0 must sum to 1");
  if (p0.minCoeff() < 0.0) throw std::invalid_argument("ScenarioSpec: p0 entries must be >= 0");
  int covered = 0;
  for (const auto& seg : segments) {
    if (seg.start_period != covered) throw std::invalid_argument("ScenarioSpec: segment tiling has a gap");
    if (seg.length < 1 || !(seg.rate > 0.0)) throw std::invalid_argument("ScenarioSpec: bad segment");
    if (seg.dist < 0 || seg.dist >= static_cast<int>(arrival_dists.size()))
      throw std::invalid_argument("ScenarioSpec: segment references missing distribution");
    covered += seg.length;
  }
  if (covered != T) throw std::invalid_argument("ScenarioSpec: segments must tile [0, T)");
  for (const auto& d : arrival_dists)
    if (std::abs(dist_mean(d) - 1.0) > 1e-9)
      throw std::invalid_argument("ScenarioSpec: arrival distributions must have mean 1");
  if (std::abs(dist_mean(service) - 1.0) > 1e-9)
    throw std::invalid_argument("ScenarioSpec: service distribution must have mean 1");
  if (cycle_length > 0) {
    const Eigen::VectorXd rates = rates_per_period(*this);
    const int c = std::min(cycle_length, T);
    const double mean = rates.head(c).mean();
    if (std::abs(mean - rho_bar) > 1e-9)
      throw std::invalid_argument("ScenarioSpec: cycle mean rate must equal rho_bar");
  }
}

Eigen::VectorXd sample_initial_state(Rng& rng, int k, int l) {
  if (k < 0 || k >= l) throw std::invalid_argument("sample_initial_state: need 0 <= k < l");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(l + 1);
  if (k == 0) {
    p(0) = 1.0;
    return p;
  }
  // Exponential spacings give the uniform Dirichlet on the k-simplex.
  double sum = 0.0;
  for (int i = 0; i <= k; ++i) {
    p(i) = rng.exponential(1.0);
    sum += p(i);
  }
  p.head(k + 1) /= sum;
  return p;
}

void normalize_rates(std::vector<double>& run_rates, const std::vector<int>& run_lengths, double rho_bar) {
  double weighted = 0.0;
  int total = 0;
  for (std::size_t i = 0; i < run_rates.size(); ++i) {
    weighted += run_rates[i] * run_lengths[i];
    total += run_lengths[i];
  }
  const double lambda_bar = weighted / total;
  for (auto& r : run_rates) r *= rho_bar / lambda_bar;
}

ArrivalPattern sample_arrival_pattern(Rng& rng, int T, double rho_bar) {
  if (T < 3) throw std::invalid_argument("sample_arrival_pattern: T >= 3 required");
  if (!(rho_bar > 0.0) || rho_bar > 1.0 + 1e-12)
    throw std::invalid_argument("sample_arrival_pattern: rho_bar must be in (0, 1]");

  ArrivalPattern pat;
  const int lo = static_cast<int>(std::ceil(T / 3.0));
  const int hi = static_cast<int>(std::floor(2.0 * T / 3.0));
  pat.cycle_length = static_cast<int>(rng.uniform_int(lo, hi));
  const int cycle = pat.cycle_length;
  const int m = static_cast<int>(rng.uniform_int(1, cycle));
  pat.num_processes = m;

  // m-1 distinct interior cut points partition the cycle into contiguous runs.
  std::vector<int> interior(cycle - 1);
  std::iota(interior.begin(), interior.end(), 1);
  for (int i = 0; i < m - 1; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(interior.size() - i));
    std::swap(interior[i], interior[j]);
  }
  std::vector<int> cuts(interior.begin(), interior.begin() + (m - 1));
  std::sort(cuts.begin(), cuts.end());
  cuts.insert(cuts.begin(), 0);
  cuts.push_back(cycle);

  std::vector<int> run_lengths(m);
  std::vector<double> run_rates(m);
  for (int r = 0; r < m; ++r) {
    run_lengths[r] = cuts[r + 1] - cuts[r];
    run_rates[r] = rng.uniform(0.5, 10.0);
  }
  normalize_rates(run_rates, run_lengths, rho_bar);

  // Tile the cycle across [0, T); the last cycle may be truncated.
  int pos = 0;
  while (pos < T) {
    for (int r = 0; r < m && pos < T; ++r) {
      ArrivalSegment seg;
      seg.start_period = pos;
      seg.length = std::min(run_lengths[r], T - pos);
      seg.rate = run_rates[r];
      seg.dist = r;
      pat.segments.push_back(seg);
      pos += seg.length;
    }
  }
  // A single process over identical rates is one renewal process, not a
  // sequence of restarts: merge across cycle boundaries.
  std::vector<ArrivalSegment> merged;
  for (const auto& seg : pat.segments) {
    if (!merged.empty() && merged.back().dist == seg.dist && merged.back().rate == seg.rate &&
        merged.back().start_period + merged.back().length == seg.start_period) {
      merged.back().length += seg.length;
    } else {
      merged.push_back(seg);
    }
  }
  pat.segments = std::move(merged);
  return pat;
}

ScenarioSpec build_scenario(Rng& rng, const ScenarioConfig& cfg) {
  ScenarioSpec s;
  s.T = cfg.T;
  s.l = cfg.l;
  s.rho_bar = cfg.rho_lo == cfg.rho_hi ? cfg.rho_lo : rng.uniform(cfg.rho_lo, cfg.rho_hi);

  if (cfg.force_m && *cfg.force_m == 1) {
    // Stationary GI/GI/1: one renewal process spanning the horizon.
    s.cycle_length = s.T;
    ArrivalSegment seg;
    seg.start_period = 0;
    seg.length = s.T;
    seg.rate = s.rho_bar;
    seg.dist = 0;
    s.segments = {seg};
    s.arrival_dists.push_back(cfg.arrival_family ? Dist(*cfg.arrival_family)
                                                 : ph_random(rng, cfg.sampler));
  } else {
    ArrivalPattern pat = sample_arrival_pattern(rng, s.T, s.rho_bar);
    s.cycle_length = pat.cycle_length;
    s.segments = pat.segments;
    if (cfg.arrival_family) {
      // One named law shared by every run; runs still differ by rate.
      s.arrival_dists.push_back(*cfg.arrival_family);
      for (auto& seg : s.segments) seg.dist = 0;
    } else {
      for (int r = 0; r < pat.num_processes; ++r) s.arrival_dists.push_back(ph_random(rng, cfg.sampler));
    }
  }
  s.service = cfg.service_family ? Dist(*cfg.service_family) : ph_random(rng, cfg.sampler);
  s.p0 = sample_initial_state(rng, cfg.k, cfg.l);
  s.validate();
  return s;
}

Eigen::VectorXd rates_per_period(const ScenarioSpec& s) {
  Eigen::VectorXd rates(s.T);
  for (const auto& seg : s.segments)
    for (int t = seg.start_period; t < seg.start_period + seg.length; ++t) rates(t) = seg.rate;
  return rates;
}

}  // namespace mbrnn
