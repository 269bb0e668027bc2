#include "mbrnn/dataset.hpp"

#include <fstream>

namespace mbrnn {

using json = nlohmann::ordered_json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.size();
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const auto cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw DatasetError("ragged matrix rows in JSON");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

}  // namespace

json dist_to_json(const Dist& d) {
  json out;
  if (const auto* ph = std::get_if<PhaseType>(&d)) {
    out["type"] = "ph";
    out["alpha"] = vector_to_json(ph->alpha());
    out["subgen"] = matrix_to_json(ph->subgen());
  } else {
    const auto& p = std::get<ParametricDist>(d);
    out["type"] = "family";
    out["family"] = family_name(p.family());
    out["mean"] = p.mean();
    out["scv"] = p.scv();
  }
  return out;
}

Dist dist_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "ph") {
    return PhaseType(vector_from_json(j.at("alpha")), matrix_from_json(j.at("subgen")));
  }
  if (type == "family") {
    return ParametricDist(family_from_name(j.at("family").get<std::string>()),
                          j.at("mean").get<double>(), j.at("scv").get<double>());
  }
  throw DatasetError("unknown distribution type: " + type);
}

json scenario_to_json(const ScenarioSpec& s) {
  json out;
  out["T"] = s.T;
  out["l"] = s.l;
  out["rho_bar"] = s.rho_bar;
  out["cycle_length"] = s.cycle_length;
  out["seed"] = s.seed;
  json dists = json::array();
  for (const auto& d : s.arrival_dists) dists.push_back(dist_to_json(d));
  out["arrival_dists"] = std::move(dists);
  json segs = json::array();
  for (const auto& seg : s.segments) {
    json sj;
    sj["start_period"] = seg.start_period;
    sj["length"] = seg.length;
    sj["rate"] = seg.rate;
    sj["dist"] = seg.dist;
    segs.push_back(std::move(sj));
  }
  out["segments"] = std::move(segs);
  out["service"] = dist_to_json(s.service);
  out["p0"] = vector_to_json(s.p0);
  return out;
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  s.T = j.at("T").get<int>();
  s.l = j.at("l").get<int>();
  s.rho_bar = j.at("rho_bar").get<double>();
  s.cycle_length = j.at("cycle_length").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& dj : j.at("arrival_dists")) s.arrival_dists.push_back(dist_from_json(dj));
  for (const auto& sj : j.at("segments")) {
    ArrivalSegment seg;
    seg.start_period = sj.at("start_period").get<int>();
    seg.length = sj.at("length").get<int>();
    seg.rate = sj.at("rate").get<double>();
    seg.dist = sj.at("dist").get<int>();
    s.segments.push_back(seg);
  }
  s.service = dist_from_json(j.at("service"));
  s.p0 = vector_from_json(j.at("p0"));
  return s;
}

void write_dataset(const std::vector<DatasetRecord>& records, const std::string& path,
                   const DatasetManifest& manifest, bool binary_labels) {
  if (manifest.count != static_cast<long>(records.size()))
    throw DatasetError("write_dataset: manifest count does not match record count");

  std::ofstream bin;
  if (binary_labels) {
    bin.open(path + ".labels.bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw DatasetError("write_dataset: cannot open " + path + ".labels.bin");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DatasetError("write_dataset: cannot open " + path);

  long bin_index = 0;
  for (const auto& rec : records) {
    if (rec.labels.rows() != manifest.T || rec.labels.cols() != manifest.l + 1)
      throw DatasetError("write_dataset: label shape does not match manifest");
    if (rec.features && rec.features->cols() != manifest.n_arrival + manifest.n_service + manifest.l + 1)
      throw DatasetError("write_dataset: feature width does not match manifest");
    json line;
    line["id"] = rec.id;
    line["seed"] = rec.seed;
    line["scenario"] = scenario_to_json(rec.scenario);
    line["features"] = rec.features ? matrix_to_json(*rec.features) : json(nullptr);
    if (binary_labels) {
      line["labels"] = nullptr;
      line["labels_ref"] = {{"index", bin_index}};
      const std::uint32_t dims[2] = {static_cast<std::uint32_t>(rec.labels.rows()),
                                     static_cast<std::uint32_t>(rec.labels.cols())};
      bin.write(reinterpret_cast<const char*>(dims), sizeof(dims));
      for (Eigen::Index t = 0; t < rec.labels.rows(); ++t)
        for (Eigen::Index k = 0; k < rec.labels.cols(); ++k) {
          const float v = static_cast<float>(rec.labels(t, k));
          bin.write(reinterpret_cast<const char*>(&v), sizeof(float));
        }
      ++bin_index;
    } else {
      line["labels"] = matrix_to_json(rec.labels);
    }
    line["provenance"] = {{"num_reps", rec.num_reps}, {"generator_version", rec.generator_version}};
    out << line.dump() << "\n";
  }

  json mj;
  mj["format_version"] = manifest.format_version;
  mj["T"] = manifest.T;
  mj["l"] = manifest.l;
  mj["n_arrival"] = manifest.n_arrival;
  mj["n_service"] = manifest.n_service;
  mj["count"] = manifest.count;
  std::ofstream mout(path + ".manifest.json", std::ios::trunc);
  if (!mout) throw DatasetError("write_dataset: cannot open manifest for " + path);
  mout << mj.dump(2) << "\n";
}

DatasetManifest read_manifest(const std::string& dataset_path) {
  std::ifstream in(dataset_path + ".manifest.json");
  if (!in) throw DatasetError("read_manifest: missing manifest for " + dataset_path);
  json mj = json::parse(in, nullptr, true);
  DatasetManifest m;
  m.format_version = mj.at("format_version").get<int>();
  if (m.format_version != 1) throw DatasetError("read_manifest: unsupported format version");
  m.T = mj.at("T").get<int>();
  m.l = mj.at("l").get<int>();
  m.n_arrival = mj.at("n_arrival").get<int>();
  m.n_service = mj.at("n_service").get<int>();
  m.count = mj.at("count").get<long>();
  return m;
}

std::vector<DatasetRecord> read_dataset(const std::string& path, DatasetManifest* manifest_out) {
  const DatasetManifest manifest = read_manifest(path);
  if (manifest_out != nullptr) *manifest_out = manifest;

  std::ifstream in(path);
  if (!in) throw DatasetError("read_dataset: cannot open " + path);
  std::ifstream bin;  // opened lazily on the first labels_ref

  std::vector<DatasetRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DatasetError("read_dataset: malformed JSON at line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      DatasetRecord rec;
      rec.id = j.at("id").get<long>();
      rec.seed = j.at("seed").get<std::uint64_t>();
      rec.scenario = scenario_from_json(j.at("scenario"));
      if (!j.at("features").is_null()) rec.features = matrix_from_json(j.at("features"));
      if (j.at("labels").is_null()) {
        if (!j.contains("labels_ref"))
          throw DatasetError("record has neither inline labels nor labels_ref");
        if (!bin.is_open()) {
          bin.open(path + ".labels.bin", std::ios::binary);
          if (!bin) throw DatasetError("missing labels sidecar " + path + ".labels.bin");
        }
        const long index = j.at("labels_ref").at("index").get<long>();
        const std::streamoff block =
            8 + static_cast<std::streamoff>(manifest.T) * (manifest.l + 1) * sizeof(float);
        bin.seekg(index * block);
        std::uint32_t dims[2];
        bin.read(reinterpret_cast<char*>(dims), sizeof(dims));
        if (!bin || dims[0] != static_cast<std::uint32_t>(manifest.T) ||
            dims[1] != static_cast<std::uint32_t>(manifest.l + 1))
          throw DatasetError("labels sidecar block mismatch");
        rec.labels.resize(dims[0], dims[1]);
        for (std::uint32_t t = 0; t < dims[0]; ++t)
          for (std::uint32_t k = 0; k < dims[1]; ++k) {
            float v;
            bin.read(reinterpret_cast<char*>(&v), sizeof(float));
            rec.labels(t, k) = v;
          }
        if (!bin) throw DatasetError("labels sidecar truncated");
      } else {
        rec.labels = matrix_from_json(j.at("labels"));
      }
      const auto& prov = j.at("provenance");
      rec.num_reps = prov.at("num_reps").get<int>();
      rec.generator_version = prov.at("generator_version").get<std::string>();

      if (rec.scenario.l != manifest.l || rec.scenario.T != manifest.T)
        throw DatasetError("record dimensions disagree with manifest");
      if (rec.labels.rows() != manifest.T || rec.labels.cols() != manifest.l + 1)
        throw DatasetError("label shape disagrees with manifest");
      if (rec.features && rec.features->cols() != manifest.n_arrival + manifest.n_service + manifest.l + 1)
        throw DatasetError("feature width disagrees with manifest");
      for (Eigen::Index t = 0; t < rec.labels.rows(); ++t) {
        const double s = rec.labels.row(t).sum();
        if (std::abs(s - 1.0) > 1e-6) throw DatasetError("label row does not sum to 1");
      }
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw DatasetError("read_dataset: bad record at line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DatasetError& e) {
      throw DatasetError("read_dataset: line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw DatasetError("read_dataset: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (static_cast<long>(records.size()) != manifest.count)
    throw DatasetError("read_dataset: record count disagrees with manifest");
  return records;
}

}  // namespace mbrnn
