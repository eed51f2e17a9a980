#include "dcrec/model_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include "dcrec/error.hpp"
#include "dcrec/text_file.hpp"

namespace dcrec {

using json = nlohmann::json;

const NamedTensor& Archive::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw IoError("artifact has no tensor named '" + name + "'");
}

void save_archive(const std::filesystem::path& manifest, const Archive& archive) {
  auto blob_path = manifest;
  blob_path.replace_extension(".bin");

  std::string blob;
  json tensors = json::array();
  for (const auto& t : archive.tensors) {
    std::size_t n = 1;
    for (auto d : t.shape) n *= d;
    if (n != t.values.size()) throw ShapeError("save_archive: shape does not match '" + t.name + "'");
    tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", blob.size()}});
    for (double v : t.values) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int b = 0; b < 4; ++b) blob += static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
  }
  json doc = {{"format_version", kArtifactFormatVersion},
              {"blob", blob_path.filename().string()},
              {"blob_bytes", blob.size()},
              {"dtype", "float32-le"},
              {"meta", archive.meta},
              {"tensors", tensors}};
  write_file(blob_path, blob);
  write_file(manifest, doc.dump(2) + "\n");
}

Archive load_archive(const std::filesystem::path& manifest) {
  json doc;
  try {
    doc = json::parse(read_file(manifest));
  } catch (const json::exception& e) {
    throw IoError("bad manifest " + manifest.string() + ": " + e.what());
  }
  if (doc.value("format_version", 0) != kArtifactFormatVersion)
    throw IoError("unsupported artifact format version in " + manifest.string());
  const auto blob = read_file(manifest.parent_path() / doc.at("blob").get<std::string>());
  Archive a;
  a.meta = doc.value("meta", json::object());
  for (const auto& t : doc.at("tensors")) {
    NamedTensor nt;
    nt.name = t.at("name").get<std::string>();
    nt.shape = t.at("shape").get<std::vector<std::size_t>>();
    const auto offset = t.at("offset").get<std::size_t>();
    std::size_t n = 1;
    for (auto d : nt.shape) n *= d;
    if (offset + 4 * n > blob.size()) throw IoError("tensor '" + nt.name + "' exceeds blob");
    nt.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[offset + 4 * i + b]))
                << (8 * b);
      nt.values[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    a.tensors.push_back(std::move(nt));
  }
  return a;
}

}  // namespace dcrec
