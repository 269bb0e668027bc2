#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mbrnn/dataset.hpp"

using namespace mbrnn;

namespace {

std::vector<DatasetRecord> sample_records(int n, std::uint64_t seed, int T = 8, int reps = 200) {
  std::vector<DatasetRecord> out;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t rec_seed = child_seed(seed, "gen", i);
    Rng rng(rec_seed);
    ScenarioConfig cfg;
    cfg.T = T;
    DatasetRecord rec;
    rec.id = i;
    rec.seed = rec_seed;
    rec.scenario = build_scenario(rng, cfg);
    rec.scenario.seed = rec_seed;
    SimConfig sim;
    sim.num_reps = reps;
    sim.seed = child_seed(rec_seed, "labels");
    rec.labels = simulate(rec.scenario, sim);
    rec.num_reps = reps;
    rec.features = featurize(rec.scenario);
    out.push_back(std::move(rec));
  }
  return out;
}

DatasetManifest manifest_for(const std::vector<DatasetRecord>& recs) {
  DatasetManifest m;
  m.T = recs[0].scenario.T;
  m.l = recs[0].scenario.l;
  m.count = static_cast<long>(recs.size());
  return m;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("phase-type JSON uses the alpha/subgen layout") {
  Eigen::VectorXd a(2);
  a << 0.25, 0.75;
  Eigen::MatrixXd s(2, 2);
  s << -2, 1, 0.5, -3;
  const auto j = dist_to_json(Dist(PhaseType(a, s)));
  CHECK(j.at("type") == "ph");
  CHECK(j.at("alpha").size() == 2);
  CHECK(j.at("alpha").at(1).get<double>() == 0.75);
  CHECK(j.at("subgen").at(0).at(1).get<double>() == 1.0);
  const Dist back = dist_from_json(j);
  CHECK(std::get<PhaseType>(back).subgen().isApprox(s, 0.0));
}

TEST_CASE("dataset round-trip preserves every numeric field") {
  const auto records = sample_records(20, 123);
  const auto manifest = manifest_for(records);
  const std::string path = temp_path("mbrnn_ds_test.jsonl");
  write_dataset(records, path, manifest);

  DatasetManifest back_manifest;
  const auto back = read_dataset(path, &back_manifest);
  REQUIRE(back.size() == records.size());
  CHECK(back_manifest.count == manifest.count);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].id == records[i].id);
    CHECK(back[i].seed == records[i].seed);
    CHECK(back[i].labels.isApprox(records[i].labels, 0.0));
    CHECK(back[i].features->isApprox(*records[i].features, 0.0));
    CHECK(back[i].scenario.rho_bar == records[i].scenario.rho_bar);
    CHECK(back[i].scenario.p0.isApprox(records[i].scenario.p0, 0.0));
    CHECK(scenario_to_json(back[i].scenario).dump() == scenario_to_json(records[i].scenario).dump());
  }
  // Round-trip again: byte-identical files.
  const std::string path2 = temp_path("mbrnn_ds_test2.jsonl");
  write_dataset(back, path2, back_manifest);
  std::ifstream f1(path), f2(path2);
  const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
  std::filesystem::remove(path + ".manifest.json");
  std::filesystem::remove(path2 + ".manifest.json");
}

TEST_CASE("manifest mismatches are rejected") {
  const auto records = sample_records(3, 9);
  auto manifest = manifest_for(records);
  const std::string path = temp_path("mbrnn_ds_bad.jsonl");

  SUBCASE("wrong truncation") {
    write_dataset(records, path, manifest);
    // Tamper with the manifest.
    DatasetManifest wrong = manifest;
    wrong.l = 40;
    nlohmann::ordered_json mj = {{"format_version", 1}, {"T", wrong.T}, {"l", wrong.l},
                                 {"n_arrival", 4},      {"n_service", 4}, {"count", wrong.count}};
    std::ofstream mout(path + ".manifest.json", std::ios::trunc);
    mout << mj.dump() << "\n";
    mout.close();
    CHECK_THROWS_AS(read_dataset(path), DatasetError);
  }
  SUBCASE("wrong count") {
    manifest.count = 5;
    CHECK_THROWS_AS(write_dataset(records, path, manifest), DatasetError);
  }
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".manifest.json");
}

TEST_CASE("malformed line errors name the line number") {
  const auto records = sample_records(2, 10);
  const auto manifest = manifest_for(records);
  const std::string path = temp_path("mbrnn_ds_malformed.jsonl");
  write_dataset(records, path, manifest);
  {
    std::ofstream f(path, std::ios::app);
    f << "{not json\n";
  }
  try {
    read_dataset(path);
    FAIL("expected DatasetError");
  } catch (const DatasetError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".manifest.json");
}

TEST_CASE("an empty dataset with count zero reads back empty") {
  const std::string path = temp_path("mbrnn_ds_empty.jsonl");
  write_dataset({}, path, DatasetManifest{1, 8, 50, 4, 4, 0});
  const auto back = read_dataset(path);
  CHECK(back.empty());
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".manifest.json");
}

TEST_CASE("binary label sidecar round-trips at float32 precision") {
  const auto records = sample_records(4, 11);
  const auto manifest = manifest_for(records);
  const std::string path = temp_path("mbrnn_ds_bin.jsonl");
  write_dataset(records, path, manifest, true);
  CHECK(std::filesystem::exists(path + ".labels.bin"));
  const auto back = read_dataset(path);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (Eigen::Index t = 0; t < records[i].labels.rows(); ++t)
      for (Eigen::Index k = 0; k < records[i].labels.cols(); ++k)
        CHECK(back[i].labels(t, k) ==
              doctest::Approx(records[i].labels(t, k)).epsilon(1e-6));
  }
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".labels.bin");
  std::filesystem::remove(path + ".manifest.json");
}
