#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpegraph/catalog.hpp"
#include "cpegraph/cpe.hpp"

namespace cpegraph {

enum class ConfigOp { and_op, or_op };

const char* config_op_name(ConfigOp op);

struct CpeMatch {
  CpeName cpe;
  VersionConstraint constraint;
  bool vulnerable = true;

  bool operator==(const CpeMatch&) const = default;
};

// One node of an NVD configuration tree, operator plus matches and children.
// Empty nodes (no matches, no children) are rejected at ingest.
struct ConfigNodeRaw {
  ConfigOp op = ConfigOp::or_op;
  std::vector<CpeMatch> matches;
  std::vector<ConfigNodeRaw> children;

  bool operator==(const ConfigNodeRaw&) const = default;

  json to_json() const;
  static ConfigNodeRaw from_json(const json& j);
};

enum class CveStatus { active, rejected };

struct VulnerabilityRecord {
  std::string cve_id;
  std::string description;
  CveStatus status = CveStatus::active;
  std::optional<double> cvss_score;
  std::string cvss_vector;
  std::vector<ConfigNodeRaw> configurations;
  std::string last_modified;  // ISO timestamp, lexicographically comparable

  bool operator==(const VulnerabilityRecord&) const = default;

  json to_json() const;
  static VulnerabilityRecord from_json(const json& j);
};

struct QuarantinedCpe {
  std::string cve_id;  // empty for dictionary strings
  std::string raw;
  std::string reason;
};

struct FeedIngestResult {
  std::vector<VulnerabilityRecord> records;
  std::vector<QuarantinedCpe> quarantined;
};

// Parses an NVD JSON 1.1 feed: either the single-document form with
// "CVE_Items" or the JSON-lines fixture mirror (one item per line).
// Rejected entries are dropped, as are entries with lastModifiedDate older
// than `since`. Malformed CPE strings are quarantined with the owning CVE id;
// the entry itself is kept.
FeedIngestResult ingest_nvd_feed(const std::string& path,
                                 const std::optional<std::string>& since = {});

struct DictionaryIngestResult {
  std::vector<CatalogEntry> entries;  // one per (vendor, product)
  std::size_t total_strings = 0;
  std::vector<std::string> distinct_cpe_keys;  // vendor|product|version
  std::vector<QuarantinedCpe> quarantined;
};

// Official CPE dictionary XML, or the JSON-lines fixture of
// {"cpe23": "cpe:2.3:..."} documents.
DictionaryIngestResult ingest_cpe_dictionary(const std::string& path);

std::vector<CatalogEntry> ingest_external_catalog(const std::string& path);

struct CorpusStats {
  std::size_t total_cves = 0;
  std::size_t cves_with_valid_cpe = 0;
  double cpe_usage_fraction = 0.0;
  double unused_dictionary_fraction = 0.0;
  double config_specific_fraction = 0.0;
  // (vulnerable part, context part) -> Cartesian pair count
  std::map<std::pair<char, char>, std::size_t> runningon_pair_counts;
  double firmware_fraction = 0.0;
  double same_vendor_config_fraction = 0.0;

  json to_json() const;
  static CorpusStats from_json(const json& j);

  bool operator==(const CorpusStats&) const = default;
};

// Corpus statistics over the ingested feed and dictionary.
//
// Configuration-specific records are those whose trees hold a non-vulnerable
// match or nested structure. Running-On/With pairs are generated by Cartesian
// product inside each innermost node whose subtree carries both vulnerable
// and context matches. The firmware and same-vendor fractions are taken over
// those pair instances. A dictionary string counts as used when its
// (vendor, product, version) triple appears among the feed's CPE matches.
CorpusStats compute_corpus_stats(const std::vector<VulnerabilityRecord>& records,
                                 const DictionaryIngestResult& dictionary,
                                 int workers = 1);

}  // namespace cpegraph
