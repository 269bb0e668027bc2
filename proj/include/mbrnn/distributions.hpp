#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mbrnn/rng.hpp"

namespace mbrnn {

// Raw moments m_1..m_n of a nonnegative distribution; entry i carries time^(i+1) units.
using MomentVector = Eigen::VectorXd;

// Squared coefficient of variation m2/m1^2 - 1.
double scv_of(const MomentVector& m);

// Moment vector of the time-scaled variable cX: m_i -> m_i * c^i.
MomentVector scale_moments(const MomentVector& m, double c);

// Natural log of the first n raw moments (model featurization).
Eigen::VectorXd log_moments(const MomentVector& m, int n);

// Continuous phase-type distribution: absorption time of a Markov chain with
// initial distribution `alpha` over transient phases and sub-generator `subgen`.
class PhaseType {
 public:
  PhaseType(Eigen::VectorXd alpha, Eigen::MatrixXd subgen);

  int order() const { return static_cast<int>(alpha_.size()); }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& subgen() const { return subgen_; }

  // Exact raw moments m_i = i! * alpha' (-S)^-i 1, via linear solves.
  MomentVector moments(int n) const;

  // One absorption time of the underlying chain; strictly positive.
  double sample(Rng& rng) const;

  // Time-scale by c (X -> cX): divides the sub-generator by c.
  PhaseType scaled(double c) const;

  static PhaseType exponential(double rate);

 private:
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd subgen_;
  Eigen::VectorXd exit_rates_;  // -S*1, cached for sampling
};

// Deterministic is a degenerate member (scv = 0) used by tests and drain-style
// problems; the random library never draws it.
enum class Family { Exponential, Erlang, HyperExp2, LogNormal, Gamma, Deterministic };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

// Closed-form parametric family pinned by (mean, scv). Erlang is the compact
// representation for high phase counts (k up to 400), where a dense PhaseType
// would be wasteful.
class ParametricDist {
 public:
  ParametricDist(Family family, double mean, double scv);

  Family family() const { return family_; }
  double mean() const { return mean_; }
  double scv() const { return scv_; }
  int erlang_k() const { return erlang_k_; }

  MomentVector moments(int n) const;
  double sample(Rng& rng) const;
  ParametricDist scaled(double c) const { return ParametricDist(family_, mean_ * c, scv_); }

 private:
  Family family_;
  double mean_;
  double scv_;
  // Derived parameters.
  int erlang_k_ = 0;                    // Erlang
  double hyper_p1_ = 0, hyper_r1_ = 0, hyper_r2_ = 0;  // HyperExp2, balanced means
  double ln_mu_ = 0, ln_sigma_ = 0;     // LogNormal
  double gamma_shape_ = 0, gamma_scale_ = 0;  // Gamma
};

// Universal handle for inter-arrival/service laws.
using Dist = std::variant<PhaseType, ParametricDist>;

MomentVector dist_moments(const Dist& d, int n);
double dist_sample(const Dist& d, Rng& rng);
Dist dist_scaled(const Dist& d, double c);
double dist_mean(const Dist& d);

struct PhSamplerConfig {
  int max_order = 20;
  int max_erlang = 400;
  // Structure mixture weights: erlang, hyperexponential, coxian, dense.
  double w_erlang = 0.25;
  double w_hyper = 0.25;
  double w_coxian = 0.25;
  double w_dense = 0.25;
};

// Random mean-1 distribution from the diverse library: Erlang(k) for low SCV,
// hyperexponential branches for high SCV, Coxian chains and dense random
// sub-generators for irregular shapes. Resamples internally on numerical failure.
Dist ph_random(Rng& rng, const PhSamplerConfig& cfg = {});

// Mean-1 named family plus sampler, per the closed forms above.
ParametricDist named_family(Family family, double mean, double scv);

}  // namespace mbrnn
