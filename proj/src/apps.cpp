#include "mbrnn/apps.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mbrnn {

void CapacityProblem::validate() const {
  if (rate_grid.size() < 1) throw std::invalid_argument("CapacityProblem: empty rate grid");
  for (Eigen::Index i = 0; i + 1 < rate_grid.size(); ++i)
    if (!(rate_grid(i) < rate_grid(i + 1)))
      throw std::invalid_argument("CapacityProblem: rate grid must be strictly ascending");
  if (!(rate_grid(0) > 0.0)) throw std::invalid_argument("CapacityProblem: rates must be positive");
  if (c1 < 0.0 || c2 < 0.0) throw std::invalid_argument("CapacityProblem: costs must be >= 0");
  if (tail_level < 0 || tail_level > base.l)
    throw std::invalid_argument("CapacityProblem: tail level outside label range");
}

ScenarioSpec CapacityProblem::with_rate(double rate) const {
  ScenarioSpec s = base;
  s.service = Dist(service_family.scaled(1.0 / (rate * service_family.mean())));
  return s;
}

CapacityResult optimize_capacity(const CapacityProblem& p, const Predictor& predictor,
                                 const ThreadPool* pool) {
  p.validate();
  const std::size_t n = static_cast<std::size_t>(p.rate_grid.size());
  CapacityResult res;
  res.table.resize(n);
  parallel_for(pool, n, [&](std::size_t i) {
    const double rate = p.rate_grid(static_cast<Eigen::Index>(i));
    const ScenarioSpec s = p.with_rate(rate);
    const LabelMatrix pred = predictor(s);
    double hold = 0.0;
    double max_tail = 0.0;
    for (Eigen::Index t = 0; t < pred.rows(); ++t) {
      double mean = 0.0, tail = 0.0;
      for (Eigen::Index k = 0; k < pred.cols(); ++k) {
        mean += static_cast<double>(k) * pred(t, k);
        if (k >= p.tail_level) tail += pred(t, k);
      }
      hold += mean;
      if (tail > max_tail) max_tail = tail;
    }
    RatePoint pt;
    pt.rate = rate;
    pt.cost = p.c1 * rate + p.c2 * hold;
    pt.max_tail = max_tail;
    pt.feasible = max_tail <= p.tail_prob;
    res.table[i] = pt;
  });

  res.min_max_tail = res.table[0].max_tail;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pt = res.table[i];
    if (pt.max_tail < res.min_max_tail) res.min_max_tail = pt.max_tail;
    if (pt.cost < res.table[res.best_unconstrained].cost) res.best_unconstrained = i;
    if (pt.feasible && (!res.best_feasible || pt.cost < res.table[*res.best_feasible].cost))
      res.best_feasible = i;
  }
  return res;
}

EstimatedInputs estimate_inputs(const EventLog& log, int n_moments, int l) {
  if (log.interarrival.empty() || log.service.empty() || log.initial.empty())
    throw std::invalid_argument("estimate_inputs: empty stream");
  if (n_moments < 1) throw std::invalid_argument("estimate_inputs: n_moments >= 1 required");

  auto estimate = [n_moments](const std::vector<double>& xs) {
    MomentVector m = MomentVector::Zero(n_moments);
    for (double x : xs) {
      if (!(x > 0.0)) throw std::invalid_argument("estimate_inputs: nonpositive time observation");
      double p = 1.0;
      for (int i = 0; i < n_moments; ++i) {
        p *= x;
        m(i) += p;
      }
    }
    return MomentVector(m / static_cast<double>(xs.size()));
  };

  EstimatedInputs out;
  out.arrival = estimate(log.interarrival);
  out.service = estimate(log.service);
  out.p0 = Eigen::VectorXd::Zero(l + 1);
  for (int w : log.initial) {
    if (w < 0) throw std::invalid_argument("estimate_inputs: negative initial count");
    out.p0(std::min(w, l)) += 1.0;
  }
  out.p0 /= static_cast<double>(log.initial.size());
  return out;
}

EventLog read_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_event_log: cannot open " + path);
  EventLog log;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string kind, value;
    if (!std::getline(ss, kind, ',') || !std::getline(ss, value))
      throw std::runtime_error("read_event_log: malformed line " + std::to_string(line_no));
    if (kind == "kind") continue;  // header
    if (kind == "arrival") {
      log.interarrival.push_back(std::stod(value));
    } else if (kind == "service") {
      log.service.push_back(std::stod(value));
    } else if (kind == "initial") {
      log.initial.push_back(std::stoi(value));
    } else {
      throw std::runtime_error("read_event_log: unknown kind '" + kind + "' at line " +
                               std::to_string(line_no));
    }
  }
  return log;
}

}  // namespace mbrnn
