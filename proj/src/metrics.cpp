#include "mbrnn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace mbrnn {
namespace metrics {

double sae(const Eigen::Ref<const Eigen::RowVectorXd>& y, const Eigen::Ref<const Eigen::RowVectorXd>& yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("sae: length mismatch");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) acc += std::abs(y(k) - yhat(k));
  return acc;
}

int inverse_cdf(const Eigen::Ref<const Eigen::RowVectorXd>& p, double q) {
  double cum = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    cum += p(k);
    if (cum >= q) return static_cast<int>(k);
  }
  return static_cast<int>(p.size() - 1);  // numerical shortfall of the row sum
}

std::optional<double> pare(const Eigen::Ref<const Eigen::RowVectorXd>& y,
                           const Eigen::Ref<const Eigen::RowVectorXd>& yhat, double percentile) {
  if (!(percentile > 0.0) || !(percentile < 1.0))
    throw std::invalid_argument("pare: percentile must lie in (0, 1)");
  const int fy = inverse_cdf(y, percentile);
  if (fy == 0) return std::nullopt;
  const int fyhat = inverse_cdf(yhat, percentile);
  return 100.0 * std::abs(fy - fyhat) / static_cast<double>(fy);
}

std::optional<double> rem(const Eigen::Ref<const Eigen::RowVectorXd>& y,
                          const Eigen::Ref<const Eigen::RowVectorXd>& yhat, bool truth_denominator) {
  double diff = 0.0, mean_y = 0.0, mean_yhat = 0.0;
  for (Eigen::Index k = 1; k < y.size(); ++k) {
    diff += static_cast<double>(k) * (y(k) - yhat(k));
    mean_y += static_cast<double>(k) * y(k);
    mean_yhat += static_cast<double>(k) * yhat(k);
  }
  const double denom = truth_denominator ? mean_y : mean_yhat;
  if (denom <= 0.0) return std::nullopt;
  return 100.0 * std::abs(diff) / denom;
}

namespace {

struct Accumulator {
  std::vector<double> per_sample_mean;  // one value per contributing sample
  Eigen::VectorXd period_sum;
  Eigen::VectorXd period_count;
  double total = 0.0;
  long pairs = 0;
  long excluded = 0;

  explicit Accumulator(int T) : period_sum(Eigen::VectorXd::Zero(T)), period_count(Eigen::VectorXd::Zero(T)) {}

  void add_sample(const std::vector<std::pair<int, double>>& values, int periods_seen) {
    double s = 0.0;
    for (const auto& [t, v] : values) {
      period_sum(t) += v;
      period_count(t) += 1.0;
      total += v;
      ++pairs;
      s += v;
    }
    excluded += periods_seen - static_cast<long>(values.size());
    if (!values.empty()) per_sample_mean.push_back(s / static_cast<double>(values.size()));
  }

  SeriesStat overall() const {
    SeriesStat st;
    st.count = pairs;
    if (pairs == 0) return st;
    st.mean = total / static_cast<double>(pairs);
    const auto n = per_sample_mean.size();
    if (n >= 2) {
      double m = 0.0;
      for (double v : per_sample_mean) m += v;
      m /= static_cast<double>(n);
      double var = 0.0;
      for (double v : per_sample_mean) var += (v - m) * (v - m);
      var /= static_cast<double>(n - 1);
      st.ci_half = 1.96 * std::sqrt(var / static_cast<double>(n));
    }
    return st;
  }

  Eigen::VectorXd per_period() const {
    Eigen::VectorXd out = period_sum;
    for (Eigen::Index t = 0; t < out.size(); ++t)
      out(t) = period_count(t) > 0 ? out(t) / period_count(t) : 0.0;
    return out;
  }
};

MetricsReport report_for(const std::vector<const Sample*>& group, const std::string& stratum,
                         const std::vector<double>& percentiles) {
  const int T = static_cast<int>(group.front()->truth.rows());
  MetricsReport rep;
  rep.stratum = stratum;
  rep.num_samples = static_cast<long>(group.size());
  rep.T = T;

  Accumulator acc_sae(T), acc_rem(T), acc_fluid(T);
  std::map<double, Accumulator> acc_pare;
  for (double q : percentiles) acc_pare.emplace(q, Accumulator(T));
  bool any_fluid = false;

  for (const Sample* s : group) {
    std::vector<std::pair<int, double>> v_sae, v_rem, v_fluid;
    std::map<double, std::vector<std::pair<int, double>>> v_pare;
    for (int t = 0; t < T; ++t) {
      v_sae.emplace_back(t, sae(s->truth.row(t), s->prediction.row(t)));
      if (auto r = rem(s->truth.row(t), s->prediction.row(t))) v_rem.emplace_back(t, *r);
      for (double q : percentiles)
        if (auto p = pare(s->truth.row(t), s->prediction.row(t), q)) v_pare[q].emplace_back(t, *p);
      if (s->fluid_mean) {
        double mean_y = 0.0;
        for (Eigen::Index k = 1; k < s->truth.cols(); ++k) mean_y += static_cast<double>(k) * s->truth(t, k);
        if (mean_y > 0.0) v_fluid.emplace_back(t, 100.0 * std::abs(mean_y - (*s->fluid_mean)(t)) / mean_y);
      }
    }
    acc_sae.add_sample(v_sae, T);
    acc_rem.add_sample(v_rem, T);
    for (double q : percentiles) acc_pare.at(q).add_sample(v_pare[q], T);
    if (s->fluid_mean) {
      any_fluid = true;
      acc_fluid.add_sample(v_fluid, T);
    }
  }

  rep.sae_overall = acc_sae.overall();
  rep.rem_overall = acc_rem.overall();
  rep.sae_per_period = acc_sae.per_period();
  rep.rem_per_period = acc_rem.per_period();
  rep.rem_excluded = acc_rem.excluded;
  for (double q : percentiles) {
    rep.pare_overall[q] = acc_pare.at(q).overall();
    rep.pare_per_period[q] = acc_pare.at(q).per_period();
    rep.pare_excluded[q] = acc_pare.at(q).excluded;
  }
  if (any_fluid) rep.fluid_rem_overall = acc_fluid.overall();
  return rep;
}

}  // namespace

std::vector<MetricsReport> aggregate(const std::vector<Sample>& samples,
                                     const std::vector<double>& percentiles) {
  if (samples.empty()) throw std::invalid_argument("aggregate: no samples");
  std::vector<MetricsReport> out;
  std::vector<const Sample*> all;
  std::map<std::string, std::vector<const Sample*>> by_stratum;
  for (const auto& s : samples) {
    all.push_back(&s);
    if (!s.stratum.empty()) by_stratum[s.stratum].push_back(&s);
  }
  out.push_back(report_for(all, "", percentiles));
  for (const auto& [name, group] : by_stratum) out.push_back(report_for(group, name, percentiles));
  return out;
}

}  // namespace metrics
}  // namespace mbrnn
