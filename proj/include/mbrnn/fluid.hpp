#pragma once

#include <Eigen/Dense>

#include "mbrnn/scenario.hpp"

namespace mbrnn {

// Mean occupancy at integer times, entries >= 0.
using MeanTrajectory = Eigen::VectorXd;

// Deterministic fluid approximation x'(t) = lambda(t) - 1{x > 0} with unit
// service rate, integrated by forward Euler with clamping at zero and sampled
// at t = 1..T. x(0) is the mean of p0.
MeanTrajectory fluid_mean(const ScenarioSpec& s, double h = 1e-2);

// Mean of a (row) occupancy distribution: sum_k k * p_k.
double occupancy_mean(const Eigen::Ref<const Eigen::RowVectorXd>& row);

}  // namespace mbrnn
