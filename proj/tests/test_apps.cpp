#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mbrnn/apps.hpp"
#include "mbrnn/cke.hpp"

using namespace mbrnn;

namespace {

ScenarioSpec capacity_base(int T = 12) {
  ScenarioSpec s;
  s.T = T;
  s.l = 50;
  s.arrival_dists = {Dist(ParametricDist(Family::Exponential, 1.0, 1.0))};
  s.segments = {{0, T / 2, 1.5, 0}, {T / 2, T - T / 2, 0.5, 0}};
  s.p0 = Eigen::VectorXd::Zero(51);
  s.p0(3) = 1.0;
  return s;
}

}  // namespace

TEST_CASE("moment estimation from a constant log") {
  EventLog log;
  log.interarrival = std::vector<double>(10, 2.0);
  log.service = std::vector<double>(10, 1.0);
  log.initial = {0, 1, 2, 3};
  const EstimatedInputs est = estimate_inputs(log, 4, 50);
  CHECK(est.arrival(0) == 2.0);
  CHECK(est.arrival(1) == 4.0);
  CHECK(est.arrival(2) == 8.0);
  CHECK(est.arrival(3) == 16.0);
  CHECK(est.p0(0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(est.p0(3) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(est.p0.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("moment estimation is exactly scale-equivariant") {
  Rng rng(51);
  EventLog log;
  for (int i = 0; i < 500; ++i) {
    log.interarrival.push_back(rng.exponential(1.0));
    log.service.push_back(rng.exponential(2.0));
  }
  log.initial = {1};
  const EstimatedInputs base = estimate_inputs(log, 4, 50);

  EventLog scaled = log;
  const double c = 2.0;  // powers of two scale exactly in floating point
  for (auto& x : scaled.interarrival) x *= c;
  for (auto& x : scaled.service) x *= c;
  const EstimatedInputs est = estimate_inputs(scaled, 4, 50);
  double ci = 1.0;
  for (int i = 0; i < 4; ++i) {
    ci *= c;
    CHECK(est.arrival(i) == base.arrival(i) * ci);
    CHECK(est.service(i) == base.service(i) * ci);
  }
}

TEST_CASE("estimation rejects empty or invalid logs") {
  EventLog empty;
  CHECK_THROWS_AS(estimate_inputs(empty, 4, 50), std::invalid_argument);
  EventLog bad;
  bad.interarrival = {1.0};
  bad.service = {0.0};  // nonpositive
  bad.initial = {0};
  CHECK_THROWS_AS(estimate_inputs(bad, 2, 50), std::invalid_argument);
}

TEST_CASE("initial counts above l collapse into the last bin") {
  EventLog log;
  log.interarrival = {1.0};
  log.service = {1.0};
  log.initial = {60, 70, 2};
  const EstimatedInputs est = estimate_inputs(log, 1, 50);
  CHECK(est.p0(50) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(est.p0(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("event log CSV parsing") {
  const std::string path = (std::filesystem::temp_directory_path() / "mbrnn_log_test.csv").string();
  {
    std::ofstream f(path);
    f << "kind,value\narrival,1.25\nservice,0.5\ninitial,4\narrival,2.5\n";
  }
  const EventLog log = read_event_log(path);
  REQUIRE(log.interarrival.size() == 2);
  CHECK(log.interarrival[1] == 2.5);
  CHECK(log.service[0] == 0.5);
  CHECK(log.initial[0] == 4);
  std::filesystem::remove(path);
}

TEST_CASE("capacity optimization against the CKE oracle equals brute force") {
  CapacityProblem p;
  p.base = capacity_base();
  p.service_family = ParametricDist(Family::Exponential, 1.0, 1.0);
  p.rate_grid.setLinSpaced(20, 0.4, 4.0);
  p.c1 = 0.05;
  p.c2 = 10.0;
  const Predictor oracle = [](const ScenarioSpec& s) { return cke_solve(s); };
  const CapacityResult res = optimize_capacity(p, oracle);

  // Independent brute force over the same grid.
  std::optional<std::size_t> best;
  std::size_t best_any = 0;
  std::vector<double> costs;
  for (Eigen::Index i = 0; i < p.rate_grid.size(); ++i) {
    ScenarioSpec s = p.base;
    s.service = Dist(ParametricDist(Family::Exponential, 1.0 / p.rate_grid(i), 1.0));
    const LabelMatrix q = cke_solve(s);
    double hold = 0.0, worst = 0.0;
    for (int t = 0; t < s.T; ++t) {
      for (int k = 0; k <= s.l; ++k) hold += k * q(t, k);
      double tail = 0.0;
      for (int k = p.tail_level; k <= s.l; ++k) tail += q(t, k);
      worst = std::max(worst, tail);
    }
    const double cost = p.c1 * p.rate_grid(i) + p.c2 * hold;
    costs.push_back(cost);
    if (cost < costs[best_any]) best_any = static_cast<std::size_t>(i);
    if (worst <= p.tail_prob && (!best || cost < costs[*best])) best = static_cast<std::size_t>(i);
  }
  REQUIRE(res.best_feasible.has_value());
  REQUIRE(best.has_value());
  CHECK(*res.best_feasible == *best);
  CHECK(res.best_unconstrained == best_any);
  CHECK(res.table[*res.best_feasible].cost == doctest::Approx(costs[*best]).epsilon(1e-12));

  // Declared-feasible rates satisfy the constraint post hoc.
  for (const auto& pt : res.table)
    if (pt.feasible) CHECK(pt.max_tail <= p.tail_prob);
}

TEST_CASE("with zero holding cost the cheapest feasible rate is the smallest") {
  CapacityProblem p;
  p.base = capacity_base();
  p.service_family = ParametricDist(Family::Exponential, 1.0, 1.0);
  p.rate_grid.setLinSpaced(12, 0.5, 3.0);
  p.c2 = 0.0;
  const Predictor oracle = [](const ScenarioSpec& s) { return cke_solve(s); };
  const CapacityResult res = optimize_capacity(p, oracle);
  REQUIRE(res.best_feasible.has_value());
  for (std::size_t i = 0; i < *res.best_feasible; ++i) CHECK_FALSE(res.table[i].feasible);

  // Feasibility is an up-set of the grid under the oracle.
  bool seen_feasible = false;
  for (const auto& pt : res.table) {
    if (pt.feasible) seen_feasible = true;
    if (seen_feasible) CHECK(pt.feasible);
  }
}

TEST_CASE("infeasible problems report the smallest violation") {
  CapacityProblem p;
  p.base = capacity_base();
  p.base.p0.setZero();
  p.base.p0(35) = 1.0;  // the tail constraint cannot hold at t=1
  p.service_family = ParametricDist(Family::Exponential, 1.0, 1.0);
  p.rate_grid.setLinSpaced(8, 0.5, 8.0);
  p.tail_prob = 1e-12;
  const Predictor oracle = [](const ScenarioSpec& s) { return cke_solve(s); };
  const CapacityResult res = optimize_capacity(p, oracle);
  CHECK_FALSE(res.best_feasible.has_value());
  CHECK(res.min_max_tail > 1e-12);
}
