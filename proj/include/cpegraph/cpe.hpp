#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpegraph/errors.hpp"

namespace cpegraph {

enum class Part { application, operating_system, hardware };

char part_letter(Part part);
std::optional<Part> part_from_letter(char c);
const char* part_name(Part part);

// A parsed CPE 2.3 formatted string.
//
// Attribute values are stored as canonical tokens: lowercase, with the
// minimal escaping the formatted-string grammar requires (characters outside
// [a-z0-9._-] and the wildcards * ? carry a backslash). The ANY wildcard is
// the bare token "*" and NA is the bare token "-"; an escaped "\-" is a
// literal hyphen value, distinct from NA.
struct CpeName {
  static constexpr std::size_t kAttributeCount = 11;
  static constexpr std::array<const char*, kAttributeCount> kAttributeNames = {
      "part",      "vendor",    "product",   "version",
      "update",    "edition",   "language",  "sw_edition",
      "target_sw", "target_hw", "other"};

  Part part = Part::application;
  std::string vendor = "*";
  std::string product = "*";
  std::string version = "*";
  std::string update = "*";
  std::string edition = "*";
  std::string language = "*";
  std::string sw_edition = "*";
  std::string target_sw = "*";
  std::string target_hw = "*";
  std::string other = "*";

  bool operator==(const CpeName&) const = default;

  static bool is_any(std::string_view token) { return token == "*"; }
  static bool is_na(std::string_view token) { return token == "-"; }
};

// Throws Error(errc::malformed_cpe) for anything that is not a well-formed
// `cpe:2.3:` formatted string: wrong field count, invalid part, characters
// the grammar does not allow unescaped, or a trailing escape.
CpeName parse_cpe(std::string_view s);

// Canonical lowercase formatted string; parse_cpe(format_cpe(c)) == c.
std::string format_cpe(const CpeName& c);

// Raw value <-> canonical token. escape_component lowercases and inserts the
// backslashes format_cpe expects; unescape_component strips them.
std::string escape_component(std::string_view raw);
std::string unescape_component(std::string_view token);

// Stable 64-bit FNV-1a, used for content-addressed ids throughout.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Canonical vendor/product/version/part unit of configuration. vendor and
// product are expected in normalized form (see normalize.hpp); the id is
// content-addressed so identical tuples always collide.
struct UcpeEntry {
  std::string id;
  std::string vendor;
  std::string product;
  std::string version;
  Part part = Part::application;

  bool operator==(const UcpeEntry&) const = default;

  static std::string make_id(std::string_view vendor, std::string_view product,
                             std::string_view version, Part part);
  static UcpeEntry make(std::string vendor, std::string product,
                        std::string version, Part part);

  json to_json() const;
  static UcpeEntry from_json(const json& j);
};

struct VersionBound {
  std::string version;
  bool inclusive = true;

  bool operator==(const VersionBound&) const = default;
};

// Mirrors the CPE match attributes: versionStartIncluding => inclusive lower,
// versionEndExcluding => exclusive upper, and so on. Exact("*") matches any
// version; Exact("-") matches only NA.
struct VersionConstraint {
  enum class Kind { exact, range, list };

  Kind kind = Kind::exact;
  std::string exact = "*";
  std::optional<VersionBound> lower;
  std::optional<VersionBound> upper;
  std::vector<std::string> explicit_versions;  // sorted, duplicate-free

  bool operator==(const VersionConstraint&) const = default;

  static VersionConstraint exact_version(std::string token);
  static VersionConstraint range(std::optional<VersionBound> lower,
                                 std::optional<VersionBound> upper);
  static VersionConstraint list(std::vector<std::string> versions);

  bool is_wildcard() const { return kind == Kind::exact && exact == "*"; }

  // cond(v): does a concrete version token satisfy this constraint?
  bool matches(std::string_view version) const;

  json to_json() const;
  static VersionConstraint from_json(const json& j);
};

}  // namespace cpegraph
