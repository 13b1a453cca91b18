#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphlab/numerics/parameters.hpp"
#include "morphlab/numerics/tensor.hpp"

namespace morph::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Versioned container of named tensors.
///
/// Layout (all integers little-endian):
///   8 bytes  magic "MORPHCK\0"
///   u32      format version
///   u64      manifest length, then the manifest as UTF-8 JSON
///   payload  concatenated tensor data, f64 little-endian, row-major
///
/// The manifest lists every tensor (name, dtype, shape, offset, byte count),
/// a CRC-32 of the payload, and a free-form "meta" object for callers.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::vector<NamedTensor> tensors;
  nlohmann::json meta = nlohmann::json::object();

  const Tensor& at(const std::string& name) const;

  std::string to_bytes() const;
  static Checkpoint from_bytes(const std::string& bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

Checkpoint checkpoint_from(const ParameterSet& params, nlohmann::json meta);
/// Copies tensors into matching parameters; names and shapes must agree.
void restore_parameters(const Checkpoint& ckpt, ParameterSet& params);

/// Hex CRC-32 of the serialized checkpoint, used as a reproducibility digest.
std::string digest(const Checkpoint& ckpt);

}  // namespace morph::nn
