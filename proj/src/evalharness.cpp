#include "mbrnn/evalharness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mbrnn/fluid.hpp"

namespace mbrnn {

using json = nlohmann::ordered_json;

namespace {

DatasetRecord make_record(long id, const ScenarioSpec& scenario, std::uint64_t rec_seed, int num_reps,
                          const ThreadPool* pool) {
  DatasetRecord rec;
  rec.id = id;
  rec.seed = rec_seed;
  rec.scenario = scenario;
  SimConfig sim;
  sim.num_reps = num_reps;
  sim.seed = child_seed(rec_seed, "labels");
  sim.pool = pool;
  rec.labels = simulate(scenario, sim);
  rec.num_reps = num_reps;
  return rec;
}

struct FamilySpec {
  Family family;
  double scv;
  const char* label;
};

const std::vector<FamilySpec>& testset2_families() {
  static const std::vector<FamilySpec> fams = {{Family::LogNormal, 0.25, "LN(0.25)"},
                                               {Family::LogNormal, 4.0, "LN(4)"},
                                               {Family::Gamma, 0.25, "G(0.25)"},
                                               {Family::Gamma, 4.0, "G(4)"},
                                               {Family::Exponential, 1.0, "M"}};
  return fams;
}

}  // namespace

std::string rho_bucket(double rho_bar) {
  if (rho_bar < 0.5) return "rho:[0.0,0.5)";
  for (int i = 0; i < 4; ++i) {
    const double lo = 0.5 + 0.1 * i;
    if (rho_bar < lo + 0.1) {
      std::ostringstream ss;
      ss.precision(1);
      ss << std::fixed << "rho:[" << lo << "," << lo + 0.1 << ")";
      return ss.str();
    }
  }
  return "rho:[0.9,1.0]";
}

std::vector<DatasetRecord> build_testset(const TestsetConfig& cfg) {
  if (cfg.size < 1) throw std::invalid_argument("build_testset: size >= 1 required");
  std::vector<DatasetRecord> out;
  out.reserve(cfg.size);

  if (cfg.kind == 1) {
    for (long i = 0; i < cfg.size; ++i) {
      const std::uint64_t rec_seed = child_seed(cfg.seed, "testset1", static_cast<std::uint64_t>(i));
      Rng rng(rec_seed);
      ScenarioConfig sc;
      sc.T = cfg.T;
      sc.l = cfg.l;
      sc.k = cfg.k;
      sc.rho_lo = 0.5;
      sc.rho_hi = 1.0;
      ScenarioSpec s = build_scenario(rng, sc);
      s.seed = rec_seed;
      out.push_back(make_record(i, s, rec_seed, cfg.num_reps, cfg.pool));
    }
    return out;
  }
  if (cfg.kind != 2) throw std::invalid_argument("build_testset: kind must be 1 or 2");

  const auto& fams = testset2_families();
  const std::vector<double> rhos = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  long id = 0;
  while (id < cfg.size) {
    for (const auto& fa : fams) {
      for (const auto& fs : fams) {
        for (double rho : rhos) {
          if (id >= cfg.size) return out;
          const std::uint64_t rec_seed = child_seed(cfg.seed, "testset2", static_cast<std::uint64_t>(id));
          Rng rng(rec_seed);
          ScenarioConfig sc;
          sc.T = cfg.T;
          sc.l = cfg.l;
          sc.k = cfg.k;
          sc.rho_lo = rho;
          sc.rho_hi = rho;
          sc.arrival_family = ParametricDist(fa.family, 1.0, fa.scv);
          sc.service_family = ParametricDist(fs.family, 1.0, fs.scv);
          ScenarioSpec s = build_scenario(rng, sc);
          s.seed = rec_seed;
          out.push_back(make_record(id, s, rec_seed, cfg.num_reps, cfg.pool));
          ++id;
        }
      }
    }
  }
  return out;
}

std::vector<metrics::Sample> evaluate_records(const Net<float>& model, const FeatureLayout& layout,
                                              const std::vector<DatasetRecord>& records,
                                              bool with_fluid, bool stratify_by_scv,
                                              const ThreadPool* pool) {
  std::vector<metrics::Sample> samples(records.size());
  parallel_for(pool, records.size(), [&](std::size_t i) {
    const DatasetRecord& rec = records[i];
    const FeatureMatrix x = rec.features ? *rec.features : featurize(rec.scenario, layout);
    const Eigen::MatrixXf yhat = forward(model, Eigen::MatrixXf(x.cast<float>()));
    metrics::Sample s;
    s.truth = rec.labels;
    s.prediction = yhat.cast<double>();
    if (stratify_by_scv) {
      std::ostringstream ss;
      ss << "scv:a=" << scv_of(dist_moments(rec.scenario.arrival_dists[0], 2))
         << ",s=" << scv_of(dist_moments(rec.scenario.service, 2));
      s.stratum = ss.str();
    } else {
      s.stratum = rho_bucket(rec.scenario.rho_bar);
    }
    if (with_fluid) s.fluid_mean = fluid_mean(rec.scenario);
    samples[i] = std::move(s);
  });
  return samples;
}

namespace {

json stat_to_json(const metrics::SeriesStat& s) {
  return {{"mean", s.mean}, {"ci_half", s.ci_half}, {"count", s.count}};
}

json report_to_json(const metrics::MetricsReport& r) {
  json j;
  j["stratum"] = r.stratum.empty() ? "all" : r.stratum;
  j["num_samples"] = r.num_samples;
  j["sae"] = stat_to_json(r.sae_overall);
  j["rem"] = stat_to_json(r.rem_overall);
  json pare;
  for (const auto& [q, st] : r.pare_overall) {
    json e = stat_to_json(st);
    e["excluded"] = r.pare_excluded.at(q);
    pare[std::to_string(q)] = e;
  }
  j["pare"] = pare;
  j["rem_excluded"] = r.rem_excluded;
  if (r.fluid_rem_overall) j["fluid_rem"] = stat_to_json(*r.fluid_rem_overall);
  return j;
}

ExperimentResult overall_experiment(int number, const Net<float>& model, const FeatureLayout& layout,
                                    const ExperimentConfig& cfg, int kind, bool per_period) {
  TestsetConfig ts;
  ts.kind = kind;
  ts.size = cfg.testset_size;
  ts.T = cfg.T;
  ts.l = cfg.l;
  ts.num_reps = cfg.num_reps;
  ts.seed = child_seed(cfg.seed, "experiment", static_cast<std::uint64_t>(number));
  ts.pool = cfg.pool;
  const auto records = build_testset(ts);

  ExperimentResult res;
  res.name = "experiment_" + std::to_string(number);
  const bool by_scv = kind == 2;
  auto samples = evaluate_records(model, layout, records, true, false, cfg.pool);
  res.reports = metrics::aggregate(samples);
  if (by_scv) {
    auto scv_samples = evaluate_records(model, layout, records, true, true, cfg.pool);
    auto scv_reports = metrics::aggregate(scv_samples);
    for (auto& r : scv_reports)
      if (!r.stratum.empty()) res.reports.push_back(std::move(r));
  }
  json strata = json::array();
  for (const auto& r : res.reports) strata.push_back(report_to_json(r));
  res.summary["name"] = res.name;
  res.summary["kind"] = kind;
  res.summary["per_period_focus"] = per_period;
  res.summary["testset_size"] = cfg.testset_size;
  res.summary["strata"] = strata;
  return res;
}

ExperimentResult diffusion_experiment(const Net<float>& model, const FeatureLayout& layout,
                                      const ExperimentConfig& cfg) {
  // Published reference values for the three stationary GI/GI/1 comparisons
  // (diffusion approximation vs. the reported model), kept as constants; the
  // harness recomputes only our model against simulation ground truth. The
  // SCVs pin the distributions: 1 -> M, 0.5 -> Erlang(2), 5 -> balanced H2.
  struct Row {
    double scv;
    Family family;
    double diffusion_sae, diffusion_rem;
    double reference_sae, reference_rem;
  };
  const std::vector<Row> rows = {{1.0, Family::Exponential, 0.035, 1.219, 0.03, 1.01},
                                 {0.5, Family::Erlang, 0.039, 0.21, 0.015, 1.15},
                                 {5.0, Family::HyperExp2, 0.286, 15.594, 0.08, 2.71}};

  ExperimentResult res;
  res.name = "experiment_5";
  json out_rows = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::uint64_t rec_seed = child_seed(cfg.seed, "experiment5", static_cast<std::uint64_t>(i));
    Rng rng(rec_seed);
    ScenarioConfig sc;
    sc.T = cfg.T;
    sc.l = cfg.l;
    sc.rho_lo = sc.rho_hi = 0.5;
    sc.force_m = 1;
    sc.arrival_family = ParametricDist(row.family, 1.0, row.scv);
    sc.service_family = ParametricDist(row.family, 1.0, row.scv);
    ScenarioSpec s = build_scenario(rng, sc);
    // Initial state: five customers, per the published setting.
    s.p0.setZero();
    s.p0(5) = 1.0;
    s.seed = rec_seed;
    const DatasetRecord rec = make_record(static_cast<long>(i), s, rec_seed, cfg.num_reps, cfg.pool);

    auto samples = evaluate_records(model, layout, {rec}, false, false, cfg.pool);
    const auto reports = metrics::aggregate(samples);
    json r;
    r["scv"] = row.scv;
    r["family"] = family_name(row.family);
    r["diffusion"] = {{"sae", row.diffusion_sae}, {"rem", row.diffusion_rem}};
    r["published_model"] = {{"sae", row.reference_sae}, {"rem", row.reference_rem}};
    r["this_model"] = {{"sae", reports[0].sae_overall.mean}, {"rem", reports[0].rem_overall.mean}};
    out_rows.push_back(std::move(r));
    res.reports.push_back(reports[0]);
    res.reports.back().stratum = std::string("scv:") + std::to_string(row.scv);
  }
  res.summary["name"] = res.name;
  res.summary["rows"] = out_rows;
  return res;
}

ExperimentResult horizon_experiment(const Net<float>& model, const FeatureLayout& layout,
                                    const ExperimentConfig& cfg) {
  TestsetConfig ts;
  ts.kind = 1;
  ts.size = cfg.testset_size;
  ts.T = 3 * cfg.T;  // three bands: trained horizon and two beyond
  ts.l = cfg.l;
  ts.num_reps = cfg.num_reps;
  ts.seed = child_seed(cfg.seed, "experiment6");
  ts.pool = cfg.pool;
  const auto records = build_testset(ts);
  auto samples = evaluate_records(model, layout, records, false, false, cfg.pool);
  for (auto& s : samples) s.stratum.clear();
  const auto reports = metrics::aggregate(samples);
  const auto& all = reports[0];

  ExperimentResult res;
  res.name = "experiment_6";
  res.reports = reports;
  json bands = json::array();
  for (int band = 0; band < 3; ++band) {
    const int lo = band * cfg.T;
    const int hi = (band + 1) * cfg.T;
    json b;
    b["periods"] = std::to_string(lo + 1) + "-" + std::to_string(hi);
    b["sae"] = all.sae_per_period.segment(lo, cfg.T).mean();
    b["rem"] = all.rem_per_period.segment(lo, cfg.T).mean();
    json pare;
    for (const auto& [q, series] : all.pare_per_period)
      pare[std::to_string(q)] = series.segment(lo, cfg.T).mean();
    b["pare"] = pare;
    bands.push_back(std::move(b));
  }
  res.summary["name"] = res.name;
  res.summary["bands"] = bands;
  res.summary["horizon"] = 3 * cfg.T;
  return res;
}

}  // namespace

ExperimentResult run_experiment(int number, const Net<float>& model, const FeatureLayout& layout,
                                const ExperimentConfig& cfg) {
  switch (number) {
    case 1: return overall_experiment(1, model, layout, cfg, 1, false);
    case 2: return overall_experiment(2, model, layout, cfg, 1, true);
    case 3: return overall_experiment(3, model, layout, cfg, 2, false);
    case 4: return overall_experiment(4, model, layout, cfg, 2, true);
    case 5: return diffusion_experiment(model, layout, cfg);
    case 6: return horizon_experiment(model, layout, cfg);
    default: throw std::invalid_argument("run_experiment: number must be 1..6");
  }
}

void write_experiment_output(const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(out_dir) / result.name;
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "summary.json");
    f << result.summary.dump(2) << "\n";
  }
  std::ofstream csv(dir / "series.csv");
  csv << "period,metric,stratum,value,ci_half\n";
  for (const auto& r : result.reports) {
    const std::string stratum = r.stratum.empty() ? "all" : r.stratum;
    for (Eigen::Index t = 0; t < r.sae_per_period.size(); ++t) {
      csv << (t + 1) << ",sae," << stratum << "," << r.sae_per_period(t) << ",\n";
      csv << (t + 1) << ",rem," << stratum << "," << r.rem_per_period(t) << ",\n";
      for (const auto& [q, series] : r.pare_per_period)
        csv << (t + 1) << ",pare_" << q << "," << stratum << "," << series(t) << ",\n";
    }
    csv << ",sae_overall," << stratum << "," << r.sae_overall.mean << "," << r.sae_overall.ci_half << "\n";
    csv << ",rem_overall," << stratum << "," << r.rem_overall.mean << "," << r.rem_overall.ci_half << "\n";
  }
}

void records_to_sets(const std::vector<DatasetRecord>& records, const FeatureLayout& layout,
                     double val_fraction, std::uint64_t seed, LabeledSet<float>& train_out,
                     LabeledSet<float>& val_out) {
  if (records.empty()) throw std::invalid_argument("records_to_sets: empty dataset");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(child_seed(seed, "split"));
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_int(i);
    std::swap(order[i - 1], order[j]);
  }
  const std::size_t val_n = static_cast<std::size_t>(std::lround(val_fraction * records.size()));
  train_out = {};
  val_out = {};
  for (std::size_t i = 0; i < order.size(); ++i) {
    const DatasetRecord& rec = records[order[i]];
    const FeatureMatrix x = rec.features ? *rec.features : featurize(rec.scenario, layout);
    auto& dst = i < val_n ? val_out : train_out;
    dst.x.push_back(x.cast<float>());
    dst.y.push_back(rec.labels.cast<float>());
  }
}

std::vector<double> moment_sweep(int n_max, const std::vector<DatasetRecord>& records,
                                 const TrainConfig& cfg, int hidden, int layers, double val_fraction) {
  if (n_max < 1 || n_max > 6) throw std::invalid_argument("moment_sweep: n_max must be 1..6");
  std::vector<double> sae_per_n;
  for (int n = 1; n <= n_max; ++n) {
    FeatureLayout layout;
    layout.n_arrival = n;
    layout.n_service = n;
    layout.l = records[0].scenario.l;
    LabeledSet<float> train_set, val_set;
    records_to_sets(records, layout, val_fraction, cfg.seed, train_set, val_set);
    Net<float> net0 = make_net<float>(layout.width(), hidden, layers,
                                      records[0].scenario.l + 1, cfg.seed);
    TrainResult<float> r = train(net0, train_set, val_set, cfg);
    sae_per_n.push_back(r.best_val_sae);
  }
  return sae_per_n;
}

}  // namespace mbrnn
