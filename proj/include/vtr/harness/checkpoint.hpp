#pragma once

#include <filesystem>

#include "json.hpp"
#include "vtr/numerics/parameter_set.hpp"

namespace vtr::harness {

/// Binary layout, little-endian:
///   "VTRCKPT1" | u64 header length | header JSON |
///   u64 tensor count | per tensor: u32 name length, name, u32 rank,
///   u64 dims[rank], float32 values |
///   u64 FNV-1a-64 of every preceding byte.
struct Checkpoint {
  nlohmann::json header;
  numerics::ParameterSet<float> params;
};

class CorruptCheckpoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Values are stored as float32 whatever the training precision.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& header,
                     const numerics::ParameterSet<T>& params);

/// Throws CorruptCheckpoint on bad magic, truncation or checksum mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vtr::harness
