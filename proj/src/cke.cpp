#include "mbrnn/cke.hpp"

#include <cmath>

namespace mbrnn {

namespace {

bool is_exponential(const Dist& d) {
  if (const auto* p = std::get_if<ParametricDist>(&d)) return p->family() == Family::Exponential;
  const auto& ph = std::get<PhaseType>(d);
  return ph.order() == 1;
}

// dp/dt of the birth-death chain on states 0..L with birth rate lam, death mu.
void derivative(const Eigen::VectorXd& p, double lam, double mu, Eigen::VectorXd& dp) {
  const Eigen::Index L = p.size() - 1;
  dp = -(lam + mu) * p;
  dp(0) += mu * p(0);
  dp(L) += lam * p(L);
  dp.segment(1, L) += lam * p.segment(0, L);
  dp.segment(0, L) += mu * p.segment(1, L);
}

}  // namespace

LabelMatrix cke_solve(const ScenarioSpec& s, const CkeConfig& cfg) {
  for (const auto& d : s.arrival_dists)
    if (!is_exponential(d)) throw UnsupportedModelError("cke_solve: non-exponential inter-arrival law");
  if (!is_exponential(s.service)) throw UnsupportedModelError("cke_solve: non-exponential service law");
  if (!(cfg.h > 0.0) || cfg.h > 1e-3 + 1e-15)
    throw std::invalid_argument("cke_solve: step must satisfy 0 < h <= 1e-3");

  const int L = std::max(cfg.big_state, s.l + 1);
  const double mu = 1.0 / dist_mean(s.service);

  Eigen::VectorXd p = Eigen::VectorXd::Zero(L + 1);
  p.head(s.p0.size()) = s.p0;  // the aggregate >= l bin sits at state l

  const Eigen::VectorXd rates = rates_per_period(s);
  const int steps = std::max(1, static_cast<int>(std::lround(1.0 / cfg.h)));
  const double h = 1.0 / steps;  // exact period coverage

  LabelMatrix out(s.T, s.l + 1);
  Eigen::VectorXd k1(L + 1), k2(L + 1), k3(L + 1), k4(L + 1), tmp(L + 1);
  for (int t = 0; t < s.T; ++t) {
    const double lam = rates(t);
    for (int step = 0; step < steps; ++step) {
      if (cfg.scheme == OdeScheme::Euler) {
        derivative(p, lam, mu, k1);
        p += h * k1;
      } else {
        derivative(p, lam, mu, k1);
        tmp = p + 0.5 * h * k1;
        derivative(tmp, lam, mu, k2);
        tmp = p + 0.5 * h * k2;
        derivative(tmp, lam, mu, k3);
        tmp = p + h * k3;
        derivative(tmp, lam, mu, k4);
        p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    out.row(t).head(s.l) = p.head(s.l);
    out(t, s.l) = p.tail(L + 1 - s.l).sum();
    out.row(t) /= out.row(t).sum();
  }
  return out;
}

}  // namespace mbrnn
