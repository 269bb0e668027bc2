#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "mbrnn/dataset.hpp"
#include "mbrnn/metrics.hpp"
#include "mbrnn/net.hpp"
#include "mbrnn/parallel.hpp"
#include "mbrnn/train.hpp"

namespace mbrnn {

// Desk-scale test-set recipe. Kind 1 draws everything from the random PH
// library; kind 2 sweeps the named-family grid {LN(0.25), LN(4), G(0.25),
// G(4), M} x same x rho in {0.5..1.0} (150 combinations), cycling through the
// grid until `size` is reached so larger sizes add pattern redraws per cell.
struct TestsetConfig {
  int kind = 1;
  long size = 300;
  int T = 20;
  int l = 50;
  int k = 30;
  int num_reps = 2000;
  std::uint64_t seed = 0;
  const ThreadPool* pool = nullptr;
};

std::vector<DatasetRecord> build_testset(const TestsetConfig& cfg);

// Utilization bucket label "[0.5,0.6)", ..., "[0.9,1.0]".
std::string rho_bucket(double rho_bar);

// Model predictions + ground truth for a set of records, ready for metrics.
std::vector<metrics::Sample> evaluate_records(const Net<float>& model, const FeatureLayout& layout,
                                              const std::vector<DatasetRecord>& records,
                                              bool with_fluid, bool stratify_by_scv,
                                              const ThreadPool* pool = nullptr);

struct ExperimentResult {
  std::string name;
  nlohmann::ordered_json summary;
  std::vector<metrics::MetricsReport> reports;
};

// The six experiment designs. 1/2: overall and per-period accuracy on a
// kind-1 set by utilization bucket, with the fluid baseline. 3/4: the same on
// the kind-2 named-family grid, stratified by SCV pair as well. 5: stationary
// single-process instances against the published diffusion reference
// constants. 6: accuracy beyond the training horizon, split into three
// period bands.
struct ExperimentConfig {
  long testset_size = 150;
  int T = 20;            // experiment 6 evaluates on 3T
  int l = 50;
  int num_reps = 2000;
  std::uint64_t seed = 0;
  const ThreadPool* pool = nullptr;
};

ExperimentResult run_experiment(int number, const Net<float>& model, const FeatureLayout& layout,
                                const ExperimentConfig& cfg);

// Writes summary.json, per-period series.csv, and the resolved spec echo under
// <out_dir>/experiment_<n>/.
void write_experiment_output(const ExperimentResult& result, const std::string& out_dir);

// Validation SAE per moment count n = 1..n_max, retraining the model with
// n_arrival = n_service = n under a fixed seed and config.
std::vector<double> moment_sweep(int n_max, const std::vector<DatasetRecord>& records,
                                 const TrainConfig& cfg, int hidden, int layers,
                                 double val_fraction = 0.1);

// Helper shared by training paths: featurize records and split train/validation.
void records_to_sets(const std::vector<DatasetRecord>& records, const FeatureLayout& layout,
                     double val_fraction, std::uint64_t seed, LabeledSet<float>& train_out,
                     LabeledSet<float>& val_out);

}  // namespace mbrnn
