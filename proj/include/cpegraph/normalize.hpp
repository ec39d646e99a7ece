#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cpegraph {

// Normalized form of a vendor/product name: lowercase, runs of
// whitespace/'-'/'_'/'.' collapsed to a single space, other non-alphanumeric
// characters removed, leading/trailing separators stripped. Idempotent.
struct NormalizedName {
  std::string raw;
  std::string norm;

  bool operator==(const NormalizedName&) const = default;
};

NormalizedName normalize(std::string_view raw);
std::string normalize_str(std::string_view raw);

// Space-separated tokens of a normalized string.
std::vector<std::string> norm_tokens(std::string_view norm);

// Normalized form with spaces as underscores, the convention CPE attribute
// tokens use ("internet explorer" <-> "internet_explorer").
std::string norm_to_cpe_token(std::string_view norm);

}  // namespace cpegraph
