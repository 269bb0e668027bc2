#pragma once

#include <stdexcept>
#include <string>

#include "mbrnn/net.hpp"

namespace mbrnn {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checkpoint layout: 8-byte little-endian unsigned manifest length, UTF-8 JSON
// manifest (format version, hyperparams, ordered tensor list with name, shape,
// dtype "f32", endianness flag), then concatenated row-major little-endian
// float32 payloads in manifest order.
void save_checkpoint(const Net<float>& net, const std::string& path);
Net<float> load_checkpoint(const std::string& path);

}  // namespace mbrnn
