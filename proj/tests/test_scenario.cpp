#include <doctest.h>

#include <set>

#include "mbrnn/dataset.hpp"
#include "mbrnn/scenario.hpp"

using namespace mbrnn;

TEST_CASE("initial state sampling") {
  Rng rng(1);
  SUBCASE("k = 0 is the empty-system point mass") {
    const Eigen::VectorXd p = sample_initial_state(rng, 0, 50);
    CHECK(p(0) == 1.0);
    CHECK(p.sum() == 1.0);
  }
  SUBCASE("k = 30 leaves 31..50 exactly zero") {
    const Eigen::VectorXd p = sample_initial_state(rng, 30, 50);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    for (int i = 31; i <= 50; ++i) CHECK(p(i) == 0.0);
    CHECK(p.minCoeff() >= 0.0);
  }
  SUBCASE("k = 2 coordinates have Dirichlet(1,1,1) mean 1/3") {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    const int n = 100000;
    for (int i = 0; i < n; ++i) mean += sample_initial_state(rng, 2, 10).head(3);
    mean /= n;
    for (int i = 0; i < 3; ++i) CHECK(std::abs(mean(i) - 1.0 / 3.0) < 0.01);
  }
  SUBCASE("k >= l rejected") { CHECK_THROWS_AS(sample_initial_state(rng, 50, 50), std::invalid_argument); }
}

TEST_CASE("rate normalization matches the cycle-mean identity") {
  std::vector<double> rates = {1.0, 2.0, 3.0};
  std::vector<int> lengths = {1, 1, 1};
  normalize_rates(rates, lengths, 0.6);
  CHECK(rates[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(rates[1] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(rates[2] == doctest::Approx(0.9).epsilon(1e-12));

  // Idempotence.
  std::vector<double> twice = rates;
  normalize_rates(twice, lengths, 0.6);
  for (int i = 0; i < 3; ++i) CHECK(twice[i] == doctest::Approx(rates[i]).epsilon(1e-14));
}

TEST_CASE("arrival pattern sampling") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double rho = 0.5 + 0.5 * rng.u01();
    const ArrivalPattern pat = sample_arrival_pattern(rng, 60, rho);
    CHECK(pat.cycle_length >= 20);
    CHECK(pat.cycle_length <= 40);

    int covered = 0;
    for (const auto& seg : pat.segments) {
      CHECK(seg.start_period == covered);
      CHECK(seg.rate > 0.0);
      CHECK(seg.rate <= 20.0);
      covered += seg.length;
    }
    CHECK(covered == 60);

    // Per-period mean over one cycle equals rho_bar.
    std::vector<double> per_period(60);
    for (const auto& seg : pat.segments)
      for (int t = seg.start_period; t < seg.start_period + seg.length; ++t) per_period[t] = seg.rate;
    double mean = 0.0;
    for (int t = 0; t < pat.cycle_length; ++t) mean += per_period[t];
    mean /= pat.cycle_length;
    CHECK(std::abs(mean - rho) <= 1e-9);

    // Within-cycle repetition of rates across cycles.
    for (int t = 0; t + pat.cycle_length < 60; ++t)
      CHECK(per_period[t] == per_period[t + pat.cycle_length]);
  }
}

TEST_CASE("scenario generation") {
  SUBCASE("m forced to 1 yields one segment spanning the horizon") {
    Rng rng(3);
    ScenarioConfig cfg;
    cfg.T = 30;
    cfg.force_m = 1;
    const ScenarioSpec s = build_scenario(rng, cfg);
    REQUIRE(s.segments.size() == 1);
    CHECK(s.segments[0].length == 30);
    CHECK(s.segments[0].rate == doctest::Approx(s.rho_bar).epsilon(1e-12));
    CHECK(s.arrival_dists.size() == 1);
  }
  SUBCASE("fixed seed gives byte-identical JSON") {
    ScenarioConfig cfg;
    cfg.T = 24;
    Rng r1(4), r2(4);
    const ScenarioSpec a = build_scenario(r1, cfg);
    const ScenarioSpec b = build_scenario(r2, cfg);
    CHECK(scenario_to_json(a).dump() == scenario_to_json(b).dump());
  }
  SUBCASE("property sweep: generated scenarios satisfy all invariants") {
    Rng rng(5);
    ScenarioConfig cfg;
    cfg.T = 20;
    for (int i = 0; i < 1000; ++i) {
      const ScenarioSpec s = build_scenario(rng, cfg);  // build_scenario validates
      CHECK(s.rho_bar >= 0.5);
      CHECK(s.rho_bar <= 1.0);
      // Cross-cycle repetition of the distribution identity.
      const Eigen::VectorXd rates = rates_per_period(s);
      for (int t = 0; t + s.cycle_length < s.T; ++t) {
        CHECK(rates(t) == rates(t + s.cycle_length));
        CHECK(s.segment_at(t).dist == s.segment_at(t + s.cycle_length).dist);
      }
    }
  }
}

TEST_CASE("spec validation rejects broken tilings") {
  Rng rng(6);
  ScenarioConfig cfg;
  cfg.T = 12;
  ScenarioSpec s = build_scenario(rng, cfg);
  ScenarioSpec gap = s;
  gap.segments[0].length += 1;  // overlap
  CHECK_THROWS_AS(gap.validate(), std::invalid_argument);
  ScenarioSpec bad_p0 = s;
  bad_p0.p0(0) += 0.1;
  CHECK_THROWS_AS(bad_p0.validate(), std::invalid_argument);
}
