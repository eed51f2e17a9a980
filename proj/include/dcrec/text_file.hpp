#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dcrec {

/// Reads a tab-separated resource file. Blank lines and lines starting with
/// `#` are ignored; surrounding whitespace (including CR) is trimmed from
/// every field. Throws IoError if the file is unreadable or a line has fewer
/// than `min_fields` fields.
std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& path,
                                               std::size_t min_fields);

/// Writes `contents` to `path` atomically enough for a batch tool:
/// write to a sibling temporary and rename over the target.
void write_file(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace dcrec
