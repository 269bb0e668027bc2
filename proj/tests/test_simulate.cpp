#include <doctest.h>

#include <filesystem>

#include "mbrnn/cke.hpp"
#include "mbrnn/metrics.hpp"
#include "mbrnn/simulate.hpp"

using namespace mbrnn;

namespace {

ScenarioSpec markov_scenario(std::vector<ArrivalSegment> segments, int T, const Eigen::VectorXd& p0) {
  ScenarioSpec s;
  s.T = T;
  s.l = 50;
  s.arrival_dists = {Dist(ParametricDist(Family::Exponential, 1.0, 1.0))};
  s.segments = std::move(segments);
  s.service = Dist(ParametricDist(Family::Exponential, 1.0, 1.0));
  s.p0 = p0;
  return s;
}

Eigen::VectorXd delta(int i, int l = 50) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(l + 1);
  p(i) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("near-zero arrivals from empty stay empty") {
  ScenarioSpec s = markov_scenario({{0, 10, 1e-9, 0}}, 10, delta(0));
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto counts = simulate_path(s, rng);
    for (int c : counts) CHECK(c == 0);
  }
}

TEST_CASE("pure drain with deterministic unit service") {
  ScenarioSpec s = markov_scenario({{0, 10, 1e-9, 0}}, 10, delta(5));
  s.service = Dist(ParametricDist(Family::Deterministic, 1.0, 0.0));
  Rng rng(2);
  const auto counts = simulate_path(s, rng);
  const std::vector<int> expected = {4, 3, 2, 1, 0, 0, 0, 0, 0, 0};
  CHECK(counts == expected);
}

TEST_CASE("paths are nonnegative and capped at l") {
  ScenarioSpec s = markov_scenario({{0, 5, 3.0, 0}, {5, 10, 0.4, 0}}, 15, delta(2));
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto counts = simulate_path(s, rng);
    for (int c : counts) {
      CHECK(c >= 0);
      CHECK(c <= s.l);
    }
  }
}

TEST_CASE("simulate determinism and single-replication rows") {
  ScenarioSpec s = markov_scenario({{0, 8, 0.9, 0}}, 8, delta(1));
  SimConfig cfg;
  cfg.num_reps = 500;
  cfg.seed = 77;
  const LabelMatrix a = simulate(s, cfg);
  const LabelMatrix b = simulate(s, cfg);
  CHECK(a.isApprox(b, 0.0));
  for (int t = 0; t < s.T; ++t) CHECK(a.row(t).sum() == doctest::Approx(1.0).epsilon(1e-9));

  ThreadPool pool(2);
  SimConfig par = cfg;
  par.pool = &pool;
  CHECK(simulate(s, par).isApprox(a, 0.0));  // thread count does not change the result

  cfg.num_reps = 1;
  const LabelMatrix one = simulate(s, cfg);
  for (int t = 0; t < s.T; ++t) {
    CHECK(one.row(t).maxCoeff() == 1.0);
    CHECK(one.row(t).sum() == 1.0);
  }
}

TEST_CASE("CKE with zero arrivals keeps the empty state") {
  ScenarioSpec s = markov_scenario({{0, 6, 0.0, 0}}, 6, delta(0));
  const LabelMatrix p = cke_solve(s);
  for (int t = 0; t < 6; ++t) CHECK(p(t, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("CKE conserves mass at the null-recurrent boundary") {
  ScenarioSpec s = markov_scenario({{0, 30, 1.0, 0}}, 30, delta(0));
  const LabelMatrix p = cke_solve(s);
  for (int t = 0; t < 30; ++t) {
    CHECK(p.row(t).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.row(t).minCoeff() >= 0.0);
  }
}

TEST_CASE("CKE rejects non-Markovian input") {
  ScenarioSpec s = markov_scenario({{0, 5, 1.0, 0}}, 5, delta(0));
  s.service = Dist(ParametricDist(Family::Gamma, 1.0, 0.25));
  CHECK_THROWS_AS(cke_solve(s), UnsupportedModelError);
  s.service = Dist(ParametricDist(Family::Exponential, 1.0, 1.0));
  s.arrival_dists[0] = Dist(ParametricDist(Family::LogNormal, 1.0, 1.0));
  CHECK_THROWS_AS(cke_solve(s), UnsupportedModelError);
}

TEST_CASE("Euler cross-check agrees with RK4") {
  ScenarioSpec s = markov_scenario({{0, 5, 2.0, 0}, {5, 5, 0.2, 0}}, 10, delta(3));
  CkeConfig rk4;
  CkeConfig euler;
  euler.scheme = OdeScheme::Euler;
  euler.h = 1e-4;
  const LabelMatrix a = cke_solve(s, rk4);
  const LabelMatrix b = cke_solve(s, euler);
  for (int t = 0; t < s.T; ++t) CHECK(metrics::sae(a.row(t), b.row(t)) < 1e-4);
}

TEST_CASE("two-segment M(t)/M/1 simulation tracks the CKE solution") {
  ScenarioSpec s = markov_scenario({{0, 10, 2.0, 0}, {10, 10, 0.2, 0}}, 20, delta(0));
  const LabelMatrix truth = cke_solve(s);
  SimConfig cfg;
  cfg.num_reps = 20000;
  cfg.seed = 99;
  const LabelMatrix emp = simulate(s, cfg);
  for (int t = 0; t < s.T; ++t) CHECK(metrics::sae(truth.row(t), emp.row(t)) < 0.05);
}

TEST_CASE("mean occupancy is monotone in the arrival rate") {
  // M/M/1 from empty on a 3-point rate grid; tolerance covers the Monte Carlo
  // standard error at 30k replications.
  const int reps = 30000;
  std::vector<Eigen::VectorXd> means;
  for (double lam : {0.5, 0.8, 1.1}) {
    ScenarioSpec s = markov_scenario({{0, 12, lam, 0}}, 12, delta(0));
    SimConfig cfg;
    cfg.num_reps = reps;
    cfg.seed = 5;
    const LabelMatrix p = simulate(s, cfg);
    Eigen::VectorXd m(s.T);
    for (int t = 0; t < s.T; ++t) {
      double mt = 0.0;
      for (int k = 0; k <= s.l; ++k) mt += k * p(t, k);
      m(t) = mt;
    }
    means.push_back(m);
  }
  const double tol = 3.0 * 2.0 / std::sqrt(static_cast<double>(reps));
  for (int t = 0; t < 12; ++t) {
    CHECK(means[1](t) >= means[0](t) - tol);
    CHECK(means[2](t) >= means[1](t) - tol);
  }
}

TEST_CASE("binary label round-trip") {
  ScenarioSpec s = markov_scenario({{0, 6, 0.7, 0}}, 6, delta(2));
  SimConfig cfg;
  cfg.num_reps = 1000;
  cfg.seed = 3;
  const LabelMatrix m = simulate(s, cfg);
  const std::string path = (std::filesystem::temp_directory_path() / "mbrnn_labels_test.bin").string();
  write_labels_binary(path, m);
  const LabelMatrix r = read_labels_binary(path);
  REQUIRE(r.rows() == m.rows());
  REQUIRE(r.cols() == m.cols());
  for (Eigen::Index t = 0; t < m.rows(); ++t)
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      CHECK(r(t, k) == doctest::Approx(m(t, k)).epsilon(1e-6));
  std::filesystem::remove(path);
}
