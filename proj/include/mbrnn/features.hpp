#pragma once

#include <Eigen/Dense>

#include "mbrnn/scenario.hpp"

namespace mbrnn {

// T x D model input, D = n_arrival + n_service + (l+1). Row t holds the log
// moments of the inter-arrival law active in (t-1, t] at its period rate, the
// log service moments, and p0 (repeated every row).
using FeatureMatrix = Eigen::MatrixXd;

struct FeatureLayout {
  int n_arrival = 4;
  int n_service = 4;
  int l = 50;
  int width() const { return n_arrival + n_service + l + 1; }
};

FeatureMatrix featurize(const ScenarioSpec& s, const FeatureLayout& layout = {});

// Featurization from externally supplied (e.g. estimated) moment vectors for a
// single-process instance: same layout, one arrival block for all periods.
FeatureMatrix featurize_from_moments(const MomentVector& arrival, const MomentVector& service,
                                     const Eigen::VectorXd& p0, int T, const FeatureLayout& layout = {});

}  // namespace mbrnn
