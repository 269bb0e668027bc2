#include "mbrnn/features.hpp"

#include <stdexcept>

namespace mbrnn {

FeatureMatrix featurize(const ScenarioSpec& s, const FeatureLayout& layout) {
  if (layout.l != s.l) throw std::invalid_argument("featurize: layout truncation differs from scenario");
  FeatureMatrix x(s.T, layout.width());

  const Eigen::VectorXd service_block = log_moments(dist_moments(s.service, layout.n_service), layout.n_service);
  // Moments of each mean-1 process, scaled per segment rate on demand.
  std::vector<MomentVector> base;
  base.reserve(s.arrival_dists.size());
  for (const auto& d : s.arrival_dists) base.push_back(dist_moments(d, layout.n_arrival));

  for (int t = 0; t < s.T; ++t) {
    const ArrivalSegment& seg = s.segment_at(t);
    const MomentVector arrival = scale_moments(base[seg.dist], 1.0 / seg.rate);
    x.row(t).head(layout.n_arrival) = log_moments(arrival, layout.n_arrival);
    x.row(t).segment(layout.n_arrival, layout.n_service) = service_block;
    x.row(t).tail(s.l + 1) = s.p0;
  }
  return x;
}

FeatureMatrix featurize_from_moments(const MomentVector& arrival, const MomentVector& service,
                                     const Eigen::VectorXd& p0, int T, const FeatureLayout& layout) {
  if (p0.size() != layout.l + 1) throw std::invalid_argument("featurize_from_moments: p0 length mismatch");
  FeatureMatrix x(T, layout.width());
  const Eigen::VectorXd a = log_moments(arrival, layout.n_arrival);
  const Eigen::VectorXd sv = log_moments(service, layout.n_service);
  for (int t = 0; t < T; ++t) {
    x.row(t).head(layout.n_arrival) = a;
    x.row(t).segment(layout.n_arrival, layout.n_service) = sv;
    x.row(t).tail(layout.l + 1) = p0;
  }
  return x;
}

}  // namespace mbrnn
