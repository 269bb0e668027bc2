#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mbrnn/features.hpp"
#include "mbrnn/scenario.hpp"
#include "mbrnn/simulate.hpp"

namespace mbrnn {

inline constexpr const char* kGeneratorVersion = "mbrnn-0.1.0";

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One labeled training/evaluation instance.
struct DatasetRecord {
  long id = 0;
  std::uint64_t seed = 0;
  ScenarioSpec scenario;
  std::optional<FeatureMatrix> features;  // cached T x D rows
  LabelMatrix labels;                     // T x (l+1)
  int num_reps = 0;
  std::string generator_version = kGeneratorVersion;
};

struct DatasetManifest {
  int format_version = 1;
  int T = 0;
  int l = 0;
  int n_arrival = 4;
  int n_service = 4;
  long count = 0;
};

nlohmann::ordered_json dist_to_json(const Dist& d);
Dist dist_from_json(const nlohmann::json& j);

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& s);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

// JSON Lines, one record per line, with a sidecar manifest at
// path + ".manifest.json". With binary_labels, label matrices go to
// path + ".labels.bin" (one raw block per record, in order) and each line
// carries a block index instead of inline rows.
void write_dataset(const std::vector<DatasetRecord>& records, const std::string& path,
                   const DatasetManifest& manifest, bool binary_labels = false);
std::vector<DatasetRecord> read_dataset(const std::string& path, DatasetManifest* manifest_out = nullptr);

DatasetManifest read_manifest(const std::string& dataset_path);

}  // namespace mbrnn
