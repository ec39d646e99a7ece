#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cpegraph/errors.hpp"

namespace cpegraph {

// One JSON document per line; blank lines skipped.
inline std::vector<json> read_jsonl(const std::string& path,
                                    const char* module = "io") {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::storage_io, module, "cannot open file: " + path);
  }
  std::vector<json> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(errc::feed_schema, module,
                  "invalid json at " + path + ":" + std::to_string(lineno));
    }
    docs.push_back(std::move(j));
  }
  return docs;
}

inline void write_jsonl(const std::string& path, const std::vector<json>& docs,
                        const char* module = "io") {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(errc::storage_io, module, "cannot write file: " + path);
  }
  for (const json& j : docs) {
    out << j.dump() << '\n';  // nlohmann orders keys, so output is byte-stable
  }
  if (!out) {
    throw Error(errc::storage_io, module, "short write: " + path);
  }
}

inline json read_json_file(const std::string& path,
                           const char* module = "io") {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::storage_io, module, "cannot open file: " + path);
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error(errc::feed_schema, module, "invalid json file: " + path);
  }
  return j;
}

inline void write_json_file(const std::string& path, const json& j,
                            const char* module = "io") {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(errc::storage_io, module, "cannot write file: " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(errc::storage_io, module, "short write: " + path);
  }
}

}  // namespace cpegraph
