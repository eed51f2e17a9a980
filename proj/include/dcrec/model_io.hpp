#pragma once

// Model artifacts: a JSON manifest describing every tensor (name, shape,
// byte offset) plus one blob of little-endian float32 values in row-major
// order. The manifest also carries a format version and free-form metadata
// (hyperparameters, hashes, seed).

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace dcrec {

inline constexpr int kArtifactFormatVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

struct Archive {
  nlohmann::json meta;
  std::vector<NamedTensor> tensors;

  const NamedTensor& get(const std::string& name) const;
};

/// Writes `<manifest>` and the blob next to it (same stem, `.bin`).
void save_archive(const std::filesystem::path& manifest, const Archive& archive);
Archive load_archive(const std::filesystem::path& manifest);

}  // namespace dcrec
