#include "mbrnn/checkpoint.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <vector>

namespace mbrnn {

namespace {

using json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct NamedTensor {
  std::string name;
  const Eigen::MatrixXf* mat = nullptr;  // vectors are n x 1
};

std::vector<std::pair<std::string, Eigen::MatrixXf>> tensor_list(const Net<float>& net) {
  std::vector<std::pair<std::string, Eigen::MatrixXf>> out;
  for (int l = 0; l < net.num_layers(); ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    out.emplace_back(p + "w_ih", net.layers[l].w_ih);
    out.emplace_back(p + "w_hh", net.layers[l].w_hh);
    out.emplace_back(p + "b", net.layers[l].b);
  }
  out.emplace_back("head.w", net.head_w);
  out.emplace_back("head.b", net.head_b);
  return out;
}

}  // namespace

void save_checkpoint(const Net<float>& net, const std::string& path) {
  const auto tensors = tensor_list(net);
  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["endianness"] = "little";
  manifest["hyperparams"] = {{"input", net.input},
                             {"hidden", net.hidden},
                             {"layers", net.num_layers()},
                             {"output", net.output}};
  json tlist = json::array();
  for (const auto& [name, mat] : tensors) {
    json t;
    t["name"] = name;
    t["shape"] = {mat.rows(), mat.cols()};
    t["dtype"] = "f32";
    tlist.push_back(t);
  }
  manifest["tensors"] = tlist;
  const std::string mtext = manifest.dump();

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw CheckpointError("save_checkpoint: cannot open " + path);
  const std::uint64_t mlen = mtext.size();
  unsigned char header[8];
  for (int i = 0; i < 8; ++i) header[i] = static_cast<unsigned char>((mlen >> (8 * i)) & 0xFF);
  std::fwrite(header, 1, 8, f.get());
  std::fwrite(mtext.data(), 1, mtext.size(), f.get());
  for (const auto& [name, mat] : tensors) {
    for (Eigen::Index r = 0; r < mat.rows(); ++r)
      for (Eigen::Index c = 0; c < mat.cols(); ++c) {
        const float v = mat(r, c);
        std::fwrite(&v, sizeof(float), 1, f.get());
      }
  }
  if (std::ferror(f.get())) throw CheckpointError("save_checkpoint: write failed for " + path);
}

Net<float> load_checkpoint(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw CheckpointError("load_checkpoint: cannot open " + path);
  unsigned char header[8];
  if (std::fread(header, 1, 8, f.get()) != 8)
    throw CheckpointError("load_checkpoint: truncated manifest length");
  std::uint64_t mlen = 0;
  for (int i = 7; i >= 0; --i) mlen = (mlen << 8) | header[i];
  if (mlen == 0 || mlen > (1ull << 30)) throw CheckpointError("load_checkpoint: implausible manifest length");
  std::string mtext(mlen, '\0');
  if (std::fread(mtext.data(), 1, mlen, f.get()) != mlen)
    throw CheckpointError("load_checkpoint: truncated manifest");

  json manifest;
  try {
    manifest = json::parse(mtext);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("load_checkpoint: malformed manifest: ") + e.what());
  }
  if (manifest.value("format_version", -1) != kFormatVersion)
    throw CheckpointError("load_checkpoint: unsupported format version");
  if (manifest.value("endianness", "") != "little")
    throw CheckpointError("load_checkpoint: unsupported payload endianness '" +
                          manifest.value("endianness", "") + "'");

  const auto& hp = manifest.at("hyperparams");
  const int input = hp.at("input").get<int>();
  const int hidden = hp.at("hidden").get<int>();
  const int layers = hp.at("layers").get<int>();
  const int output = hp.at("output").get<int>();
  if (input < 1 || hidden < 1 || layers < 1 || output < 1)
    throw CheckpointError("load_checkpoint: invalid hyperparams");

  Net<float> net;
  net.input = input;
  net.hidden = hidden;
  net.output = output;
  net.layers.resize(layers);
  for (int l = 0; l < layers; ++l) {
    net.layers[l].w_ih.resize(4 * hidden, l == 0 ? input : hidden);
    net.layers[l].w_hh.resize(4 * hidden, hidden);
    net.layers[l].b.resize(4 * hidden);
  }
  net.head_w.resize(output, hidden);
  net.head_b.resize(output);

  const auto expected = tensor_list(net);
  const auto& tlist = manifest.at("tensors");
  if (!tlist.is_array() || tlist.size() != expected.size())
    throw CheckpointError("load_checkpoint: tensor list does not match hyperparams");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& t = tlist.at(i);
    if (t.at("name").get<std::string>() != expected[i].first)
      throw CheckpointError("load_checkpoint: unexpected tensor name " + t.at("name").get<std::string>());
    if (t.at("dtype").get<std::string>() != "f32")
      throw CheckpointError("load_checkpoint: unsupported dtype for " + expected[i].first);
    const auto shape = t.at("shape");
    if (shape.at(0).get<Eigen::Index>() != expected[i].second.rows() ||
        shape.at(1).get<Eigen::Index>() != expected[i].second.cols())
      throw CheckpointError("load_checkpoint: shape mismatch for " + expected[i].first);
  }

  auto read_tensor = [&](Eigen::Ref<Eigen::MatrixXf> m, const std::string& name) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        float v;
        if (std::fread(&v, sizeof(float), 1, f.get()) != 1)
          throw CheckpointError("load_checkpoint: payload length mismatch at tensor " + name);
        m(r, c) = v;
      }
  };
  for (int l = 0; l < layers; ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    read_tensor(net.layers[l].w_ih, p + "w_ih");
    read_tensor(net.layers[l].w_hh, p + "w_hh");
    read_tensor(net.layers[l].b, p + "b");
  }
  read_tensor(net.head_w, "head.w");
  read_tensor(net.head_b, "head.b");

  float extra;
  if (std::fread(&extra, sizeof(float), 1, f.get()) == 1)
    throw CheckpointError("load_checkpoint: trailing bytes after payload");
  return net;
}

}  // namespace mbrnn
