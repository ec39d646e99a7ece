#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cpegraph/heuristics.hpp"

namespace cpegraph {

// Standardized vendor -> product -> version hierarchy plus alias maps.
// Canonical names are normalized strings (fixed points of normalize()); the
// alias maps take raw or normalized spellings to the canonical form.
struct CanonicalDictionary {
  std::set<std::string> vendors;
  std::map<std::string, std::set<std::string>> products;  // by canonical vendor
  std::map<std::pair<std::string, std::string>, std::vector<std::string>>
      versions;  // (vendor, product) -> sorted release list
  std::map<std::string, std::string> vendor_aliases;   // raw -> canonical
  std::map<std::string, std::string> product_aliases;  // raw -> canonical
  std::map<std::string, long> vendor_cve_counts;  // canonical -> CVE count

  const std::vector<std::string>& releases_of(std::string_view vendor,
                                              std::string_view product) const;
  bool has_product(std::string_view vendor, std::string_view product) const;
  long cve_count(std::string_view vendor) const;

  json to_json() const;
  static CanonicalDictionary from_json(const json& j);
  void save(const std::string& path) const;
  static CanonicalDictionary load(const std::string& path);
};

// Builds the dictionary from the catalog and the Confirmed groups. Within a
// group the canonical is the member with the highest CVE count (raw-name
// keyed counts; ties break to the lexicographically smallest normalized
// form). Versions are unioned across all raw spellings that map to the same
// canonical pair. Throws ConflictingGroups when a raw name is confirmed into
// two groups that disagree on the canonical.
CanonicalDictionary build_canonical_dictionary(
    const std::vector<CatalogEntry>& catalog,
    const std::vector<InconsistencyGroup>& groups,
    const std::map<std::string, long>& cve_counts_by_raw_name);

// Maps a raw vendor name to its canonical form: exact alias hit first, then
// the nearest canonical name by edit similarity, accepted only at >= tau.
// NoMatch is nullopt.
std::optional<std::string> standardize(std::string_view name,
                                       const CanonicalDictionary& dict,
                                       double tau);

// Same lookup against one vendor's product set.
std::optional<std::string> standardize_product(std::string_view name,
                                               const CanonicalDictionary& dict,
                                               std::string_view canonical_vendor,
                                               double tau);

// Batch kernels used by the postprocess pipeline: one standardize() per input
// name. The OpenMP variant must agree with the serial reference exactly.
std::vector<std::optional<std::string>> standardize_batch_serial(
    const std::vector<std::string>& names, const CanonicalDictionary& dict,
    double tau);
std::vector<std::optional<std::string>> standardize_batch_parallel(
    const std::vector<std::string>& names, const CanonicalDictionary& dict,
    double tau, int threads);

}  // namespace cpegraph
