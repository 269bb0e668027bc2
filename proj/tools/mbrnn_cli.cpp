// Command-line entry point: dataset generation, training, inference,
// evaluation, and the capacity/estimation applications. Exit codes: 0 ok,
// 1 runtime error, 2 usage error.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mbrnn/apps.hpp"
#include "mbrnn/checkpoint.hpp"
#include "mbrnn/cke.hpp"
#include "mbrnn/dataset.hpp"
#include "mbrnn/evalharness.hpp"
#include "mbrnn/fluid.hpp"
#include "mbrnn/metrics.hpp"
#include "mbrnn/train.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace mbrnn;

struct GlobalOpts {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool deterministic = false;
  bool json_out = false;
  std::string out;
};

void emit(const GlobalOpts& g, const json& summary) {
  if (g.json_out) std::cout << summary.dump() << std::endl;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  return scenario_from_json(nlohmann::json::parse(in));
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ",";
      os << m(r, c);
    }
    os << "\n";
  }
}

FeatureLayout layout_for_model(const Net<float>& net, int n_arrival, int n_service) {
  FeatureLayout layout;
  layout.l = net.output - 1;
  if (n_arrival > 0 && n_service > 0) {
    layout.n_arrival = n_arrival;
    layout.n_service = n_service;
  } else {
    // Symmetric split of the moment block, the generator default.
    const int moments = net.input - net.output;
    layout.n_arrival = moments / 2;
    layout.n_service = moments - moments / 2;
  }
  if (layout.width() != net.input)
    throw std::runtime_error("feature layout does not match the checkpoint input width");
  return layout;
}

int cmd_gen_data(const GlobalOpts& g, long n, int T, int l, int k, int reps, double rho_lo,
                 double rho_hi, bool with_features, bool binary_labels, int n_arrival, int n_service) {
  ThreadPool pool(g.threads);
  FeatureLayout layout;
  layout.n_arrival = n_arrival;
  layout.n_service = n_service;
  layout.l = l;

  std::vector<DatasetRecord> records(n);
  pool.for_each(static_cast<std::size_t>(n), [&](std::size_t i) {
    const std::uint64_t rec_seed = child_seed(g.seed, "gen", static_cast<std::uint64_t>(i));
    Rng rng(rec_seed);
    ScenarioConfig sc;
    sc.T = T;
    sc.l = l;
    sc.k = k;
    sc.rho_lo = rho_lo;
    sc.rho_hi = rho_hi;
    ScenarioSpec s = build_scenario(rng, sc);
    s.seed = rec_seed;
    DatasetRecord rec;
    rec.id = static_cast<long>(i);
    rec.seed = rec_seed;
    rec.scenario = s;
    SimConfig sim;
    sim.num_reps = reps;
    sim.seed = child_seed(rec_seed, "labels");
    rec.labels = simulate(s, sim);
    rec.num_reps = reps;
    if (with_features) rec.features = featurize(s, layout);
    records[i] = std::move(rec);
  });

  DatasetManifest manifest;
  manifest.T = T;
  manifest.l = l;
  manifest.n_arrival = layout.n_arrival;
  manifest.n_service = layout.n_service;
  manifest.count = n;
  write_dataset(records, g.out, manifest, binary_labels);
  emit(g, {{"command", "gen-data"}, {"count", n}, {"out", g.out}});
  return 0;
}

int cmd_simulate(const GlobalOpts& g, const std::string& scenario_path, int reps, bool binary) {
  ThreadPool pool(g.threads);
  ScenarioSpec s = load_scenario(scenario_path);
  SimConfig cfg;
  cfg.num_reps = reps;
  cfg.seed = g.seed;
  cfg.pool = &pool;
  const LabelMatrix labels = simulate(s, cfg);
  if (binary) {
    write_labels_binary(g.out, labels);
  } else if (g.out.empty()) {
    write_matrix_csv(std::cout, labels);
  } else {
    std::ofstream f(g.out);
    write_matrix_csv(f, labels);
  }
  emit(g, {{"command", "simulate"}, {"T", s.T}, {"reps", reps}, {"out", g.out}});
  return 0;
}

int cmd_featurize(const GlobalOpts& g, const std::string& scenario_path, const std::string& data_path,
                  int n_arrival, int n_service) {
  if (!scenario_path.empty()) {
    ScenarioSpec s = load_scenario(scenario_path);
    FeatureLayout layout;
    layout.n_arrival = n_arrival;
    layout.n_service = n_service;
    layout.l = s.l;
    const FeatureMatrix x = featurize(s, layout);
    if (g.out.empty()) {
      write_matrix_csv(std::cout, x);
    } else {
      std::ofstream f(g.out);
      write_matrix_csv(f, x);
    }
    emit(g, {{"command", "featurize"}, {"rows", s.T}, {"width", layout.width()}});
    return 0;
  }
  DatasetManifest manifest;
  auto records = read_dataset(data_path, &manifest);
  manifest.n_arrival = n_arrival;
  manifest.n_service = n_service;
  FeatureLayout layout;
  layout.n_arrival = n_arrival;
  layout.n_service = n_service;
  layout.l = manifest.l;
  for (auto& rec : records) rec.features = featurize(rec.scenario, layout);
  write_dataset(records, g.out, manifest);
  emit(g, {{"command", "featurize"}, {"count", manifest.count}, {"out", g.out}});
  return 0;
}

int cmd_train(const GlobalOpts& g, const std::string& data_path, double val_fraction, TrainConfig cfg,
              int layers, int hidden, const std::string& history_path, bool verbose) {
  DatasetManifest manifest;
  const auto records = read_dataset(data_path, &manifest);
  FeatureLayout layout;
  layout.n_arrival = manifest.n_arrival;
  layout.n_service = manifest.n_service;
  layout.l = manifest.l;

  LabeledSet<float> train_set, val_set;
  records_to_sets(records, layout, val_fraction, g.seed, train_set, val_set);
  cfg.seed = g.seed;
  Net<float> net0 = make_net<float>(layout.width(), hidden, layers, manifest.l + 1, g.seed);
  TrainResult<float> result = train(net0, train_set, val_set, cfg, verbose);
  save_checkpoint(result.net, g.out);

  json hist = json::array();
  for (const auto& e : result.history)
    hist.push_back({{"train_loss", e.train_loss}, {"val_sae", e.val_sae}, {"lr", e.lr}});
  if (!history_path.empty()) {
    std::ofstream f(history_path);
    f << json({{"untrained_val_sae", result.untrained_val_sae},
               {"best_epoch", result.best_epoch},
               {"best_val_sae", result.best_val_sae},
               {"epochs", hist}})
             .dump(2)
      << "\n";
  }
  emit(g, {{"command", "train"},
           {"out", g.out},
           {"untrained_val_sae", result.untrained_val_sae},
           {"best_val_sae", result.best_val_sae},
           {"best_epoch", result.best_epoch}});
  return 0;
}

int cmd_hp_search(const GlobalOpts& g, const std::string& data_path, double val_fraction, int budget,
                  int epochs, bool verbose) {
  DatasetManifest manifest;
  const auto records = read_dataset(data_path, &manifest);
  FeatureLayout layout;
  layout.n_arrival = manifest.n_arrival;
  layout.n_service = manifest.n_service;
  layout.l = manifest.l;
  LabeledSet<float> train_set, val_set;
  records_to_sets(records, layout, val_fraction, g.seed, train_set, val_set);

  TrainConfig base;
  base.epochs = epochs;
  HpSpace space;
  const auto trials = hp_search(space, budget, g.seed, train_set, val_set, base, layout.width(),
                                manifest.l + 1, verbose);
  const HpTrial& best = best_trial(trials);

  json jt = json::array();
  for (const auto& t : trials)
    jt.push_back({{"lr", t.lr},
                  {"layers", t.layers},
                  {"width", t.width},
                  {"batch", t.batch},
                  {"weight_decay", t.weight_decay},
                  {"val_sae", t.val_sae}});
  json out = {{"command", "hp-search"},
              {"budget", static_cast<int>(trials.size())},
              {"best",
               {{"lr", best.lr},
                {"layers", best.layers},
                {"width", best.width},
                {"batch", best.batch},
                {"weight_decay", best.weight_decay},
                {"val_sae", best.val_sae}}},
              {"trials", jt}};
  if (!g.out.empty()) {
    std::ofstream f(g.out);
    f << out.dump(2) << "\n";
  }
  emit(g, out);
  return 0;
}

int cmd_infer(const GlobalOpts& g, const std::string& model_path, const std::string& scenario_path,
              int n_arrival, int n_service) {
  const Net<float> net = load_checkpoint(model_path);
  ScenarioSpec s = load_scenario(scenario_path);
  const FeatureLayout layout = layout_for_model(net, n_arrival, n_service);
  if (layout.l != s.l) throw std::runtime_error("scenario truncation differs from the model output");
  const FeatureMatrix x = featurize(s, layout);
  const Eigen::MatrixXd yhat = forward(net, Eigen::MatrixXf(x.cast<float>())).cast<double>();
  if (g.out.empty()) {
    write_matrix_csv(std::cout, yhat);
  } else {
    std::ofstream f(g.out);
    write_matrix_csv(f, yhat);
  }
  emit(g, {{"command", "infer"}, {"T", s.T}, {"columns", s.l + 1}});
  return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& model_path, const std::string& data_path,
                 int experiment, long testset_size, int T, int reps, bool scv_strata) {
  ThreadPool pool(g.threads);
  const Net<float> net = load_checkpoint(model_path);

  if (experiment > 0) {
    const FeatureLayout layout = layout_for_model(net, 0, 0);
    ExperimentConfig cfg;
    cfg.testset_size = testset_size;
    cfg.T = T;
    cfg.l = layout.l;
    cfg.num_reps = reps;
    cfg.seed = g.seed;
    cfg.pool = &pool;
    const ExperimentResult result = run_experiment(experiment, net, layout, cfg);
    write_experiment_output(result, g.out.empty() ? "." : g.out);
    emit(g, result.summary);
    return 0;
  }

  DatasetManifest manifest;
  const auto records = read_dataset(data_path, &manifest);
  FeatureLayout layout;
  layout.n_arrival = manifest.n_arrival;
  layout.n_service = manifest.n_service;
  layout.l = manifest.l;
  const auto samples = evaluate_records(net, layout, records, true, scv_strata, &pool);
  const auto reports = metrics::aggregate(samples);

  ExperimentResult res;
  res.name = "evaluation";
  res.reports = reports;
  json strata = json::array();
  for (const auto& r : reports) {
    json j;
    j["stratum"] = r.stratum.empty() ? "all" : r.stratum;
    j["sae"] = r.sae_overall.mean;
    j["sae_ci_half"] = r.sae_overall.ci_half;
    j["rem"] = r.rem_overall.mean;
    if (r.fluid_rem_overall) j["fluid_rem"] = r.fluid_rem_overall->mean;
    strata.push_back(j);
  }
  res.summary = {{"command", "evaluate"}, {"count", manifest.count}, {"strata", strata}};
  write_experiment_output(res, g.out.empty() ? "." : g.out);
  emit(g, res.summary);
  return 0;
}

int cmd_moment_sweep(const GlobalOpts& g, const std::string& data_path, int n_max, int epochs,
                     int hidden, int layers) {
  DatasetManifest manifest;
  const auto records = read_dataset(data_path, &manifest);
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = g.seed;
  const auto sweep = moment_sweep(n_max, records, cfg, hidden, layers);
  json out = {{"command", "moment-sweep"}, {"val_sae_per_n", sweep}};
  if (!g.out.empty()) {
    std::ofstream f(g.out);
    f << out.dump(2) << "\n";
  }
  emit(g, out);
  return 0;
}

int cmd_optimize_capacity(const GlobalOpts& g, const std::string& problem_path,
                          const std::string& model_path, bool use_cke, int sim_reps) {
  ThreadPool pool(g.threads);
  std::ifstream in(problem_path);
  if (!in) throw std::runtime_error("cannot open problem file " + problem_path);
  const nlohmann::json pj = nlohmann::json::parse(in);

  CapacityProblem problem;
  problem.base = scenario_from_json(pj.at("scenario"));
  if (pj.contains("service_family"))
    problem.service_family = std::get<ParametricDist>(dist_from_json(pj.at("service_family")));
  problem.c1 = pj.value("c1", 0.05);
  problem.c2 = pj.value("c2", 10.0);
  problem.tail_level = pj.value("tail_level", 30);
  problem.tail_prob = pj.value("tail_prob", 0.001);
  if (pj.at("grid").is_array()) {
    const auto& arr = pj.at("grid");
    problem.rate_grid.resize(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) problem.rate_grid(i) = arr.at(i).get<double>();
  } else {
    const auto& grid = pj.at("grid");
    const double lo = grid.at("lo").get<double>();
    const double hi = grid.at("hi").get<double>();
    const int points = grid.at("points").get<int>();
    problem.rate_grid.setLinSpaced(points, lo, hi);
  }

  Predictor predictor;
  std::optional<Net<float>> net;
  if (use_cke) {
    predictor = [](const ScenarioSpec& s) { return cke_solve(s); };
  } else if (!model_path.empty()) {
    net = load_checkpoint(model_path);
    const FeatureLayout layout = layout_for_model(*net, 0, 0);
    predictor = [net = *net, layout](const ScenarioSpec& s) {
      const FeatureMatrix x = featurize(s, layout);
      return LabelMatrix(forward(net, Eigen::MatrixXf(x.cast<float>())).cast<double>());
    };
  } else {
    const std::uint64_t seed = g.seed;
    predictor = [seed, sim_reps](const ScenarioSpec& s) {
      SimConfig cfg;
      cfg.num_reps = sim_reps;
      cfg.seed = child_seed(seed, "capacity.sim");
      return simulate(s, cfg);
    };
  }

  const CapacityResult res = optimize_capacity(problem, predictor, &pool);
  json table = json::array();
  for (const auto& pt : res.table)
    table.push_back(
        {{"rate", pt.rate}, {"cost", pt.cost}, {"max_tail", pt.max_tail}, {"feasible", pt.feasible}});
  json out = {{"command", "optimize-capacity"},
              {"feasible", res.best_feasible.has_value()},
              {"table", table}};
  if (res.best_feasible) {
    out["best_rate"] = res.table[*res.best_feasible].rate;
    out["best_cost"] = res.table[*res.best_feasible].cost;
  } else {
    out["min_max_tail"] = res.min_max_tail;
  }
  out["unconstrained_rate"] = res.table[res.best_unconstrained].rate;
  out["unconstrained_cost"] = res.table[res.best_unconstrained].cost;
  if (!g.out.empty()) {
    std::ofstream f(g.out);
    f << out.dump(2) << "\n";
  }
  emit(g, out);
  return 0;
}

int cmd_estimate_inputs(const GlobalOpts& g, const std::string& log_path, int n_moments, int l) {
  const EventLog log = read_event_log(log_path);
  const EstimatedInputs est = estimate_inputs(log, n_moments, l);
  json out = {{"command", "estimate-inputs"},
              {"arrival_moments", std::vector<double>(est.arrival.data(), est.arrival.data() + est.arrival.size())},
              {"service_moments", std::vector<double>(est.service.data(), est.service.data() + est.service.size())},
              {"p0", std::vector<double>(est.p0.data(), est.p0.data() + est.p0.size())}};
  if (!g.out.empty()) {
    std::ofstream f(g.out);
    f << out.dump(2) << "\n";
  }
  emit(g, out);
  return 0;
}

int cmd_oracle_check(const GlobalOpts& g, int reps) {
  ThreadPool pool(g.threads);
  // M(t)/M/1, two segments (rate 2 then 0.2), horizon 20: the simulator must
  // track the Chapman-Kolmogorov solution row by row.
  bool ok = true;
  json cases = json::array();
  for (int variant = 0; variant < 2; ++variant) {
    ScenarioSpec s;
    s.T = 20;
    s.l = 50;
    s.rho_bar = 1.1;  // informational only here
    s.cycle_length = 0;
    s.arrival_dists = {Dist(ParametricDist(Family::Exponential, 1.0, 1.0))};
    s.segments = {{0, 10, 2.0, 0}, {10, 10, 0.2, 0}};
    s.service = Dist(ParametricDist(Family::Exponential, 1.0, 1.0));
    s.p0 = Eigen::VectorXd::Zero(51);
    if (variant == 0) {
      s.p0(0) = 1.0;
    } else {
      for (int i = 0; i <= 5; ++i) s.p0(i) = 1.0 / 6.0;
    }
    const LabelMatrix truth = cke_solve(s);
    SimConfig sim;
    sim.num_reps = reps;
    sim.seed = child_seed(g.seed, "oracle", variant);
    sim.pool = &pool;
    const LabelMatrix emp = simulate(s, sim);
    double worst = 0.0;
    for (int t = 0; t < s.T; ++t)
      worst = std::max(worst, metrics::sae(truth.row(t), emp.row(t)));
    const bool pass = worst <= 0.02;
    ok = ok && pass;
    cases.push_back({{"p0", variant == 0 ? "delta_0" : "uniform_0_5"},
                     {"max_row_sae", worst},
                     {"tolerance", 0.02},
                     {"pass", pass}});
    std::cerr << "oracle-check " << (variant == 0 ? "delta_0" : "uniform_0_5") << ": max row SAE "
              << worst << (pass ? " PASS" : " FAIL") << "\n";
  }
  emit(g, {{"command", "oracle-check"}, {"reps", reps}, {"pass", ok}, {"cases", cases}});
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient G(t)/GI/1 occupancy prediction toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts g;
  app.add_option("--seed", g.seed, "root seed")->envname("MBRNN_SEED");
  app.add_option("--threads", g.threads, "worker pool size")->envname("MBRNN_THREADS");
  app.add_flag("--deterministic", g.deterministic, "force single-threaded deterministic execution");
  app.add_flag("--json", g.json_out, "machine-readable JSON summary on stdout");
  app.add_option("--out", g.out, "output path or directory")->envname("MBRNN_OUT");

  // gen-data
  long n = 100;
  int T = 20, l = 50, k = 30, reps = 500;
  double rho_lo = 0.5, rho_hi = 1.0;
  bool no_features = false, binary_labels = false;
  int n_arrival = 4, n_service = 4;
  auto* gen = app.add_subcommand("gen-data", "generate a labeled scenario dataset");
  gen->add_option("--n", n, "number of scenarios")->required();
  gen->add_option("--T", T, "horizon in periods");
  gen->add_option("--l", l, "occupancy truncation");
  gen->add_option("--k", k, "max initial customers");
  gen->add_option("--reps", reps, "simulation replications per scenario");
  gen->add_option("--rho-lo", rho_lo, "cycle utilization lower bound");
  gen->add_option("--rho-hi", rho_hi, "cycle utilization upper bound");
  gen->add_option("--n-arrival", n_arrival, "arrival moments in cached features");
  gen->add_option("--n-service", n_service, "service moments in cached features");
  gen->add_flag("--no-features", no_features, "skip the cached feature block");
  gen->add_flag("--binary-labels", binary_labels, "labels to a raw float32 sidecar");

  // simulate
  std::string scenario_path;
  auto* sim = app.add_subcommand("simulate", "label one scenario by simulation");
  sim->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  sim->add_option("--reps", reps, "replications");
  sim->add_flag("--binary-labels", binary_labels, "write the raw float32 format");

  // featurize
  std::string data_path;
  auto* feat = app.add_subcommand("featurize", "compute model inputs");
  feat->add_option("--scenario", scenario_path, "scenario JSON file");
  feat->add_option("--data", data_path, "dataset to re-featurize");
  feat->add_option("--n-arrival", n_arrival, "arrival moments");
  feat->add_option("--n-service", n_service, "service moments");

  // train
  TrainConfig tcfg;
  double val_fraction = 0.1;
  int layers = 2, hidden = 64;
  std::string history_path;
  bool verbose = false;
  auto* tr = app.add_subcommand("train", "train the recurrent predictor");
  tr->add_option("--data", data_path, "training dataset (JSONL)")->required();
  tr->add_option("--val-fraction", val_fraction, "held-out validation share");
  tr->add_option("--epochs", tcfg.epochs, "training epochs");
  tr->add_option("--batch", tcfg.batch, "batch size");
  tr->add_option("--lr0", tcfg.lr0, "initial learning rate");
  tr->add_option("--lr-decay", tcfg.lr_decay, "per-epoch exponential decay factor");
  tr->add_option("--weight-decay", tcfg.weight_decay, "AdamW weight decay");
  tr->add_flag("--coupled-wd", tcfg.coupled_weight_decay, "couple weight decay into the loss gradient");
  tr->add_option("--layers", layers, "stacked recurrent layers");
  tr->add_option("--hidden", hidden, "hidden width");
  tr->add_option("--history", history_path, "write per-epoch history JSON here");
  tr->add_flag("--verbose", verbose, "log per-epoch progress to stderr");

  // hp-search
  int budget = 10, hp_epochs = 5;
  auto* hp = app.add_subcommand("hp-search", "random hyperparameter search");
  hp->add_option("--data", data_path, "training dataset (JSONL)")->required();
  hp->add_option("--budget", budget, "number of random configurations");
  hp->add_option("--epochs", hp_epochs, "epochs per trial");
  hp->add_option("--val-fraction", val_fraction, "held-out validation share");
  hp->add_flag("--verbose", verbose, "log trials to stderr");

  // infer
  std::string model_path;
  int inf_n_arrival = 0, inf_n_service = 0;
  auto* inf = app.add_subcommand("infer", "predict occupancy distributions for a scenario");
  inf->add_option("--model", model_path, "checkpoint file")->required();
  inf->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  inf->add_option("--n-arrival", inf_n_arrival, "arrival moments (default: from checkpoint)");
  inf->add_option("--n-service", inf_n_service, "service moments (default: from checkpoint)");

  // evaluate
  int experiment = 0;
  long testset_size = 150;
  int exp_T = 20, exp_reps = 2000;
  bool scv_strata = false;
  auto* ev = app.add_subcommand("evaluate", "metrics on a dataset or a canned experiment");
  ev->add_option("--model", model_path, "checkpoint file")->required();
  ev->add_option("--data", data_path, "labeled dataset (JSONL)");
  ev->add_option("--experiment", experiment, "experiment number 1..6 (builds its own test set)");
  ev->add_option("--testset-size", testset_size, "experiment test-set size");
  ev->add_option("--T", exp_T, "experiment horizon");
  ev->add_option("--reps", exp_reps, "experiment ground-truth replications");
  ev->add_flag("--scv-strata", scv_strata, "stratify by SCV pair instead of utilization");

  // moment-sweep
  int n_max = 4, sweep_epochs = 5;
  auto* ms = app.add_subcommand("moment-sweep", "validation SAE per moment count");
  ms->add_option("--data", data_path, "dataset (JSONL)")->required();
  ms->add_option("--n-max", n_max, "largest moment count (<= 6)");
  ms->add_option("--epochs", sweep_epochs, "epochs per point");
  ms->add_option("--hidden", hidden, "hidden width");
  ms->add_option("--layers", layers, "stacked layers");

  // optimize-capacity
  std::string problem_path;
  bool use_cke = false;
  int sim_reps = 2000;
  auto* oc = app.add_subcommand("optimize-capacity", "grid search for the cheapest feasible rate");
  oc->add_option("--problem", problem_path, "capacity problem JSON")->required();
  oc->add_option("--model", model_path, "checkpoint predictor");
  oc->add_flag("--oracle-cke", use_cke, "use the Chapman-Kolmogorov oracle predictor");
  oc->add_option("--sim-reps", sim_reps, "replications for the simulation predictor");

  // estimate-inputs
  std::string log_path;
  int n_moments = 4;
  auto* ei = app.add_subcommand("estimate-inputs", "moment and initial-state estimates from an event log");
  ei->add_option("--log", log_path, "event log CSV (kind,value)")->required();
  ei->add_option("--n-moments", n_moments, "moments to estimate");
  ei->add_option("--l", l, "initial-state truncation");

  // oracle-check
  auto* och = app.add_subcommand("oracle-check", "simulator vs Chapman-Kolmogorov tolerance suite");
  och->add_option("--reps", reps, "replications per case");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // Seeds are mandatory wherever data is generated.
  if ((gen->parsed() || sim->parsed()) && app.get_option("--seed")->count() == 0) {
    std::cerr << "error: --seed is required for generation subcommands\n";
    return 2;
  }

  if (g.deterministic) g.threads = 1;
  if (reps < 1 || tcfg.epochs < 0) {
    std::cerr << "error: nonpositive counts\n";
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen_data(g, n, T, l, k, reps, rho_lo, rho_hi, !no_features, binary_labels, n_arrival,
                          n_service);
    if (sim->parsed()) return cmd_simulate(g, scenario_path, reps, binary_labels);
    if (feat->parsed()) return cmd_featurize(g, scenario_path, data_path, n_arrival, n_service);
    if (tr->parsed())
      return cmd_train(g, data_path, val_fraction, tcfg, layers, hidden, history_path, verbose);
    if (hp->parsed()) return cmd_hp_search(g, data_path, val_fraction, budget, hp_epochs, verbose);
    if (inf->parsed()) return cmd_infer(g, model_path, scenario_path, inf_n_arrival, inf_n_service);
    if (ev->parsed())
      return cmd_evaluate(g, model_path, data_path, experiment, testset_size, exp_T, exp_reps, scv_strata);
    if (ms->parsed()) return cmd_moment_sweep(g, data_path, n_max, sweep_epochs, hidden, layers);
    if (oc->parsed()) return cmd_optimize_capacity(g, problem_path, model_path, use_cke, sim_reps);
    if (ei->parsed()) return cmd_estimate_inputs(g, log_path, n_moments, l);
    if (och->parsed()) return cmd_oracle_check(g, reps);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
