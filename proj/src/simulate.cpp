#include "mbrnn/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace mbrnn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

int draw_initial_count(const Eigen::VectorXd& p0, Rng& rng) {
  const double u = rng.u01();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p0.size(); ++i) {
    acc += p0(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p0.size() - 1);
}
}  // namespace

std::vector<int> simulate_path(const ScenarioSpec& s, Rng& rng) {
  std::vector<int> counts(s.T, 0);
  int n = draw_initial_count(s.p0, rng);
  // Customers present at t=0 start a fresh service.
  double next_dep = n > 0 ? dist_sample(s.service, rng) : kInf;
  int rec = 1;  // next integer sampling instant

  for (const auto& seg : s.segments) {
    const double seg_start = seg.start_period;
    const double seg_end = seg.start_period + seg.length;
    const Dist law = dist_scaled(s.arrival_dists[seg.dist], 1.0 / seg.rate);
    double next_arr = seg_start + dist_sample(law, rng);
    for (;;) {
      const double e = next_arr < next_dep ? next_arr : next_dep;
      if (e > seg_end) {
        // No event left in this segment: record the remaining sample points;
        // the pending arrival never occurs.
        while (rec <= seg_end && rec <= s.T) {
          counts[rec - 1] = std::min(n, s.l);
          ++rec;
        }
        break;
      }
      // Sample points strictly before the event observe the current state.
      while (rec < e && rec <= s.T) {
        counts[rec - 1] = std::min(n, s.l);
        ++rec;
      }
      if (next_arr <= next_dep) {  // arrival first on ties
        ++n;
        if (n == 1) next_dep = next_arr + dist_sample(s.service, rng);
        next_arr += dist_sample(law, rng);
      } else {
        --n;
        next_dep = n > 0 ? next_dep + dist_sample(s.service, rng) : kInf;
      }
    }
    if (rec > s.T) break;
  }
  return counts;
}

LabelMatrix simulate(const ScenarioSpec& s, const SimConfig& cfg) {
  if (cfg.num_reps < 1) throw std::invalid_argument("simulate: num_reps >= 1 required");
  using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

  const unsigned chunks = cfg.pool != nullptr ? std::min<unsigned>(cfg.pool->size() * 4, cfg.num_reps) : 1;
  std::vector<CountMatrix> partial(chunks, CountMatrix::Zero(s.T, s.l + 1));
  parallel_for(cfg.pool, chunks, [&](std::size_t c) {
    const int lo = static_cast<int>(c * static_cast<std::size_t>(cfg.num_reps) / chunks);
    const int hi = static_cast<int>((c + 1) * static_cast<std::size_t>(cfg.num_reps) / chunks);
    for (int r = lo; r < hi; ++r) {
      Rng rng(child_seed(cfg.seed, "sim.rep", static_cast<std::uint64_t>(r)));
      const std::vector<int> path = simulate_path(s, rng);
      for (int t = 0; t < s.T; ++t) partial[c](t, path[t]) += 1;
    }
  });
  CountMatrix counts = CountMatrix::Zero(s.T, s.l + 1);
  for (const auto& m : partial) counts += m;
  return counts.cast<double>() / static_cast<double>(cfg.num_reps);
}

void write_labels_binary(const std::string& path, const LabelMatrix& labels) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw std::runtime_error("write_labels_binary: cannot open " + path);
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(labels.rows()),
                                 static_cast<std::uint32_t>(labels.cols())};
  std::fwrite(dims, sizeof(std::uint32_t), 2, f);
  for (Eigen::Index t = 0; t < labels.rows(); ++t) {
    for (Eigen::Index k = 0; k < labels.cols(); ++k) {
      const float v = static_cast<float>(labels(t, k));
      std::fwrite(&v, sizeof(float), 1, f);
    }
  }
  std::fclose(f);
}

LabelMatrix read_labels_binary(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) throw std::runtime_error("read_labels_binary: cannot open " + path);
  std::uint32_t dims[2];
  if (std::fread(dims, sizeof(std::uint32_t), 2, f) != 2) {
    std::fclose(f);
    throw std::runtime_error("read_labels_binary: truncated header in " + path);
  }
  LabelMatrix out(dims[0], dims[1]);
  for (std::uint32_t t = 0; t < dims[0]; ++t) {
    for (std::uint32_t k = 0; k < dims[1]; ++k) {
      float v;
      if (std::fread(&v, sizeof(float), 1, f) != 1) {
        std::fclose(f);
        throw std::runtime_error("read_labels_binary: truncated payload in " + path);
      }
      out(t, k) = v;
    }
  }
  std::fclose(f);
  return out;
}

}  // namespace mbrnn
