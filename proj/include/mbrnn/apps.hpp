#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mbrnn/distributions.hpp"
#include "mbrnn/parallel.hpp"
#include "mbrnn/scenario.hpp"
#include "mbrnn/simulate.hpp"

namespace mbrnn {

// Capacity-planning instance: a fixed arrival pattern and initial state, a
// service family whose rate is the decision variable, linear capacity and
// holding costs, and a per-period tail constraint. The period stays the base
// problem's time unit; only the service mean moves to 1/rate.
struct CapacityProblem {
  ScenarioSpec base;  // service field ignored; pattern, p0, T, l used
  ParametricDist service_family{Family::Erlang, 1.0, 0.5};  // at mean 1
  Eigen::VectorXd rate_grid;                                // ascending, within [0.1, 10]
  double c1 = 0.05;   // per unit capacity
  double c2 = 10.0;   // per customer-period
  int tail_level = 30;
  double tail_prob = 0.001;

  void validate() const;
  // The base scenario with service rescaled to mean 1/rate (SCV unchanged).
  ScenarioSpec with_rate(double rate) const;
};

// Occupancy predictor: trained model, CKE oracle, or simulation.
using Predictor = std::function<LabelMatrix(const ScenarioSpec&)>;

struct RatePoint {
  double rate = 0.0;
  double cost = 0.0;
  double max_tail = 0.0;  // max_t P(N >= tail_level)
  bool feasible = false;
};

struct CapacityResult {
  std::vector<RatePoint> table;              // one row per grid rate
  std::optional<std::size_t> best_feasible;  // constrained argmin (index into table)
  std::size_t best_unconstrained = 0;        // cost argmin ignoring the constraint
  double min_max_tail = 0.0;                 // smallest violation seen (diagnostic when infeasible)
};

// Grid search: per rate, rescale service, run the predictor, price
// c1*rate + c2*sum_t e[t], and check the tail constraint at every period.
// Grid points evaluate in parallel when a pool is supplied.
CapacityResult optimize_capacity(const CapacityProblem& p, const Predictor& predictor,
                                 const ThreadPool* pool = nullptr);

// Raw event-log observations of one stationary queue.
struct EventLog {
  std::vector<double> interarrival;
  std::vector<double> service;
  std::vector<int> initial;
};

struct EstimatedInputs {
  MomentVector arrival;   // raw-moment estimates
  MomentVector service;
  Eigen::VectorXd p0;     // frequency estimate, length l+1, clipped into the last bin
};

// Standard unbiased estimators: m_i = mean of x^i, p0[i] = frequency of i.
EstimatedInputs estimate_inputs(const EventLog& log, int n_moments, int l);

// CSV with columns (kind in {arrival, service, initial}, value); an optional
// "kind,value" header line is skipped.
EventLog read_event_log(const std::string& path);

}  // namespace mbrnn
