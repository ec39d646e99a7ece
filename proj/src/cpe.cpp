#include "cpegraph/cpe.hpp"

#include <algorithm>
#include <cctype>

#include "cpegraph/version.hpp"

namespace cpegraph {

namespace {

constexpr std::string_view kPrefix = "cpe:2.3:";

bool is_unreserved(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '.' || c == '-';
}

bool is_wildcard_char(char c) { return c == '*' || c == '?'; }

bool is_escapable(char c) {
  return std::isprint(static_cast<unsigned char>(c)) &&
         !std::isalnum(static_cast<unsigned char>(c));
}

[[noreturn]] void fail(const std::string& message, std::string_view input) {
  throw Error(errc::malformed_cpe, "cpe_model", message,
              json{{"input", std::string(input)}});
}

// Splits the 11 attribute tokens, honoring \: escapes, and canonicalizes
// each token (lowercase, escaping validated).
std::vector<std::string> split_attributes(std::string_view s,
                                          std::string_view whole) {
  std::vector<std::string> fields;
  std::string current;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\\') {
      if (i + 1 >= s.size()) fail("trailing escape character", whole);
      char next = s[i + 1];
      if (!is_escapable(next)) fail("illegal escaped character", whole);
      current.push_back('\\');
      current.push_back(next);
      ++i;
    } else if (c == ':') {
      fields.push_back(current);
      current.clear();
    } else {
      if (!is_unreserved(std::tolower(static_cast<unsigned char>(c))) &&
          !is_wildcard_char(c)) {
        fail("illegal unescaped character", whole);
      }
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  fields.push_back(current);
  return fields;
}

}  // namespace

char part_letter(Part part) {
  switch (part) {
    case Part::application: return 'a';
    case Part::operating_system: return 'o';
    case Part::hardware: return 'h';
  }
  return 'a';
}

std::optional<Part> part_from_letter(char c) {
  switch (c) {
    case 'a': return Part::application;
    case 'o': return Part::operating_system;
    case 'h': return Part::hardware;
    default: return std::nullopt;
  }
}

const char* part_name(Part part) {
  switch (part) {
    case Part::application: return "application";
    case Part::operating_system: return "operating_system";
    case Part::hardware: return "hardware";
  }
  return "application";
}

CpeName parse_cpe(std::string_view s) {
  if (s.substr(0, kPrefix.size()) != kPrefix) {
    fail("missing cpe:2.3: prefix", s);
  }
  auto fields = split_attributes(s.substr(kPrefix.size()), s);
  if (fields.size() != CpeName::kAttributeCount) {
    fail("expected 11 attribute fields, got " + std::to_string(fields.size()),
         s);
  }
  if (fields[0].size() != 1) fail("part must be a single letter", s);
  auto part = part_from_letter(fields[0][0]);
  if (!part) fail("part must be one of a/o/h", s);

  for (std::size_t i = 1; i < fields.size(); ++i) {
    if (fields[i].empty()) fail("empty attribute field", s);
  }

  CpeName name;
  name.part = *part;
  name.vendor = fields[1];
  name.product = fields[2];
  name.version = fields[3];
  name.update = fields[4];
  name.edition = fields[5];
  name.language = fields[6];
  name.sw_edition = fields[7];
  name.target_sw = fields[8];
  name.target_hw = fields[9];
  name.other = fields[10];
  return name;
}

std::string format_cpe(const CpeName& c) {
  std::string out{kPrefix};
  out.push_back(part_letter(c.part));
  for (const std::string* field :
       {&c.vendor, &c.product, &c.version, &c.update, &c.edition, &c.language,
        &c.sw_edition, &c.target_sw, &c.target_hw, &c.other}) {
    out.push_back(':');
    out += *field;
  }
  return out;
}

std::string escape_component(std::string_view raw) {
  if (raw == "*" || raw == "-") return std::string(raw);
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (is_unreserved(lc) || is_wildcard_char(lc)) {
      out.push_back(lc);
    } else if (is_escapable(c)) {
      out.push_back('\\');
      out.push_back(c);
    }
    // Non-printable bytes are dropped.
  }
  return out;
}

std::string unescape_component(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] == '\\' && i + 1 < token.size()) {
      out.push_back(token[i + 1]);
      ++i;
    } else {
      out.push_back(token[i]);
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fnv1a64_hex(std::string_view data) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string UcpeEntry::make_id(std::string_view vendor,
                               std::string_view product,
                               std::string_view version, Part part) {
  std::string key;
  key.reserve(vendor.size() + product.size() + version.size() + 4);
  key += vendor;
  key.push_back('\x1f');
  key += product;
  key.push_back('\x1f');
  key += version;
  key.push_back('\x1f');
  key.push_back(part_letter(part));
  return "u" + fnv1a64_hex(key);
}

UcpeEntry UcpeEntry::make(std::string vendor, std::string product,
                          std::string version, Part part) {
  UcpeEntry e;
  e.id = make_id(vendor, product, version, part);
  e.vendor = std::move(vendor);
  e.product = std::move(product);
  e.version = std::move(version);
  e.part = part;
  return e;
}

json UcpeEntry::to_json() const {
  return json{{"id", id},
              {"vendor", vendor},
              {"product", product},
              {"version", version},
              {"part", std::string(1, part_letter(part))}};
}

UcpeEntry UcpeEntry::from_json(const json& j) {
  UcpeEntry e;
  e.id = j.at("id").get<std::string>();
  e.vendor = j.at("vendor").get<std::string>();
  e.product = j.at("product").get<std::string>();
  e.version = j.at("version").get<std::string>();
  auto part = part_from_letter(j.at("part").get<std::string>().at(0));
  if (!part) {
    throw Error(errc::malformed_cpe, "cpe_model", "invalid part in ucpe json",
                j);
  }
  e.part = *part;
  return e;
}

VersionConstraint VersionConstraint::exact_version(std::string token) {
  VersionConstraint c;
  c.kind = Kind::exact;
  c.exact = std::move(token);
  return c;
}

VersionConstraint VersionConstraint::range(std::optional<VersionBound> lower,
                                           std::optional<VersionBound> upper) {
  VersionConstraint c;
  c.kind = Kind::range;
  c.exact.clear();
  c.lower = std::move(lower);
  c.upper = std::move(upper);
  return c;
}

VersionConstraint VersionConstraint::list(std::vector<std::string> versions) {
  VersionConstraint c;
  c.kind = Kind::list;
  c.exact.clear();
  sort_versions(versions);
  c.explicit_versions = std::move(versions);
  return c;
}

bool VersionConstraint::matches(std::string_view version) const {
  switch (kind) {
    case Kind::exact:
      if (exact == "*") return true;
      if (exact == "-") return version == "-";
      return version_eq(exact, version);
    case Kind::range: {
      if (lower) {
        auto c = compare_versions(version, lower->version);
        if (c == std::strong_ordering::less) return false;
        if (c == std::strong_ordering::equal && !lower->inclusive) return false;
      }
      if (upper) {
        auto c = compare_versions(version, upper->version);
        if (c == std::strong_ordering::greater) return false;
        if (c == std::strong_ordering::equal && !upper->inclusive) return false;
      }
      return true;
    }
    case Kind::list:
      return std::any_of(
          explicit_versions.begin(), explicit_versions.end(),
          [&](const std::string& v) { return version_eq(v, version); });
  }
  return false;
}

json VersionConstraint::to_json() const {
  json j;
  switch (kind) {
    case Kind::exact:
      j["kind"] = "exact";
      j["version"] = exact;
      break;
    case Kind::range: {
      j["kind"] = "range";
      if (lower) {
        j[lower->inclusive ? "start_including" : "start_excluding"] =
            lower->version;
      }
      if (upper) {
        j[upper->inclusive ? "end_including" : "end_excluding"] =
            upper->version;
      }
      break;
    }
    case Kind::list:
      j["kind"] = "list";
      j["versions"] = explicit_versions;
      break;
  }
  return j;
}

VersionConstraint VersionConstraint::from_json(const json& j) {
  const std::string kind = j.value("kind", "exact");
  if (kind == "exact") {
    return exact_version(j.value("version", "*"));
  }
  if (kind == "range") {
    std::optional<VersionBound> lower, upper;
    if (j.contains("start_including")) {
      lower = VersionBound{j.at("start_including").get<std::string>(), true};
    } else if (j.contains("start_excluding")) {
      lower = VersionBound{j.at("start_excluding").get<std::string>(), false};
    }
    if (j.contains("end_including")) {
      upper = VersionBound{j.at("end_including").get<std::string>(), true};
    } else if (j.contains("end_excluding")) {
      upper = VersionBound{j.at("end_excluding").get<std::string>(), false};
    }
    return range(std::move(lower), std::move(upper));
  }
  if (kind == "list") {
    return list(j.at("versions").get<std::vector<std::string>>());
  }
  throw Error(errc::feed_schema, "cpe_model",
              "unknown version constraint kind: " + kind, j);
}

}  // namespace cpegraph
