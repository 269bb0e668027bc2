#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mbrnn {
namespace metrics {

// Percentiles the evaluation reports at.
inline const std::vector<double>& default_percentiles() {
  static const std::vector<double> p = {0.25, 0.50, 0.75, 0.90, 0.99, 0.999};
  return p;
}

// Sum of absolute probability differences, twice the total-variation distance.
double sae(const Eigen::Ref<const Eigen::RowVectorXd>& y, const Eigen::Ref<const Eigen::RowVectorXd>& yhat);

// Discrete inverse CDF: min{ k : sum_{i<=k} p_i >= q }.
int inverse_cdf(const Eigen::Ref<const Eigen::RowVectorXd>& p, double q);

// Percentile absolute relative error (in %); empty when the ground-truth
// percentile is zero (the pair is excluded from averages and counted).
std::optional<double> pare(const Eigen::Ref<const Eigen::RowVectorXd>& y,
                           const Eigen::Ref<const Eigen::RowVectorXd>& yhat, double percentile);

// Relative error of the mean (in %). Normalized by the ground-truth mean by
// default; `truth_denominator = false` switches to the prediction mean for
// literal replication of the published formula. Empty when the denominator is
// zero.
std::optional<double> rem(const Eigen::Ref<const Eigen::RowVectorXd>& y,
                          const Eigen::Ref<const Eigen::RowVectorXd>& yhat,
                          bool truth_denominator = true);

struct SeriesStat {
  double mean = 0.0;
  double ci_half = 0.0;  // 95% normal approximation across samples
  long count = 0;        // samples contributing (after exclusions)
};

// Aggregated accuracy for one stratum of samples.
struct MetricsReport {
  std::string stratum;  // e.g. "rho:[0.5,0.6)" or "scv:a=4,s=0.25"; empty = all
  long num_samples = 0;
  int T = 0;
  SeriesStat sae_overall;
  SeriesStat rem_overall;
  std::map<double, SeriesStat> pare_overall;  // by percentile
  Eigen::VectorXd sae_per_period;
  Eigen::VectorXd rem_per_period;
  std::map<double, Eigen::VectorXd> pare_per_period;
  long rem_excluded = 0;
  std::map<double, long> pare_excluded;
  // Optional baseline on the same samples (mean-trajectory comparison).
  std::optional<SeriesStat> fluid_rem_overall;
};

struct Sample {
  Eigen::MatrixXd truth;       // T x (l+1)
  Eigen::MatrixXd prediction;  // T x (l+1)
  std::string stratum;
  std::optional<Eigen::VectorXd> fluid_mean;  // length T, enables fluid REM
};

// Per-period and overall means with 95% CI half-widths; one report per stratum
// plus the pooled report (stratum == ""). Empty strata are simply absent.
std::vector<MetricsReport> aggregate(const std::vector<Sample>& samples,
                                     const std::vector<double>& percentiles = default_percentiles());

}  // namespace metrics
}  // namespace mbrnn
