#ifndef SAMPLECNN_AUDIO_MANIFEST_HPP
#define SAMPLECNN_AUDIO_MANIFEST_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "samplecnn/core/error.hpp"

namespace samplecnn {

enum class Split { Train, Valid, Test };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(const std::string& s, std::size_t line_no) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  throw ParseError("manifest line " + std::to_string(line_no) + ": unknown split '" + s + "'");
}

struct ManifestEntry {
  std::string clip_path;
  Split split = Split::Train;
  std::vector<std::uint8_t> tags; // one bit per vocabulary entry
};

/// CSV with header `path,split,tags`; tags is a '0'/'1' string of the
/// vocabulary length.
inline void write_manifest(const std::vector<ManifestEntry>& entries,
                           const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("write_manifest: cannot open " + path);
  os << "path,split,tags\n";
  for (const auto& e : entries) {
    os << e.clip_path << ',' << split_name(e.split) << ',';
    for (auto b : e.tags) os << (b ? '1' : '0');
    os << '\n';
  }
  if (!os) throw DataError("write_manifest: write failed for " + path);
}

inline std::vector<ManifestEntry> read_manifest(const std::string& path,
                                                std::size_t n_tags) {
  std::ifstream in(path);
  if (!in) throw DataError("read_manifest: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("manifest line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "path,split,tags")
    throw ParseError("manifest line 1: expected header 'path,split,tags', got '" + line + "'");

  std::vector<ManifestEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ParseError("manifest line " + std::to_string(line_no) + ": expected 3 fields");
    ManifestEntry e;
    e.clip_path = line.substr(0, c1);
    e.split = parse_split(line.substr(c1 + 1, c2 - c1 - 1), line_no);
    const std::string bits = line.substr(c2 + 1);
    if (bits.size() != n_tags)
      throw ParseError("manifest line " + std::to_string(line_no) + ": tag string has " +
                       std::to_string(bits.size()) + " bits, expected " +
                       std::to_string(n_tags));
    e.tags.reserve(n_tags);
    for (char ch : bits) {
      if (ch != '0' && ch != '1')
        throw ParseError("manifest line " + std::to_string(line_no) +
                         ": tag string must be 0/1");
      e.tags.push_back(ch == '1' ? 1 : 0);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

} // namespace samplecnn

#endif
