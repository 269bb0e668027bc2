#include "mbrnn/fluid.hpp"

#include <cmath>
#include <stdexcept>

namespace mbrnn {

double occupancy_mean(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  double mean = 0.0;
  for (Eigen::Index k = 1; k < row.size(); ++k) mean += static_cast<double>(k) * row(k);
  return mean;
}

MeanTrajectory fluid_mean(const ScenarioSpec& s, double h) {
  if (!(h > 0.0) || h > 1e-2 + 1e-15)
    throw std::invalid_argument("fluid_mean: step must satisfy 0 < h <= 1e-2");
  const int steps = std::max(1, static_cast<int>(std::lround(1.0 / h)));
  const double step = 1.0 / steps;

  const Eigen::VectorXd rates = rates_per_period(s);
  double x = occupancy_mean(s.p0.transpose());
  MeanTrajectory e(s.T);
  for (int t = 0; t < s.T; ++t) {
    const double lam = rates(t);
    for (int i = 0; i < steps; ++i) x = std::max(x + step * (lam - 1.0), 0.0);
    e(t) = x;
  }
  return e;
}

}  // namespace mbrnn
