#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpegraph/dictionary.hpp"
#include "cpegraph/graph.hpp"

namespace cpegraph {

struct StoredVulnerability {
  VulnerabilityRecord record;
  std::vector<std::string> config_ids;
};

struct StoredConfig {
  ConfigGraph graph;
  std::string cve_id;
  // Operator metadata kept alongside the graph: the root operator and the
  // number of AND / OR groups below it.
  std::string root_operator;
  std::size_t and_groups = 0;
  std::size_t or_groups = 0;
};

struct WriteBatch {
  std::vector<UcpeEntry> ucpe;
  std::vector<StoredConfig> configurations;
  std::vector<StoredVulnerability> vulnerabilities;
};

struct ProductHit {
  std::string cve_id;
  std::string config_id;

  bool operator==(const ProductHit&) const = default;
  auto operator<=>(const ProductHit&) const = default;
};

// Three collections: uCPE, Configurations, Vulnerabilities. Persisted as a
// directory of JSON-lines files plus a meta document; the in-memory index is
// rebuilt on open. Batches validate referential integrity before any state
// changes, so a failed put leaves both memory and disk untouched. One writer
// at a time; readers see immutable snapshots (values are copied out).
class Store {
 public:
  Store() = default;

  // Opens (or initializes) a store directory.
  static Store open(const std::string& dir);

  // Validates and applies a batch, then persists. Content-addressed uCPE ids
  // dedup automatically; re-putting an identical document is a no-op.
  void put_batch(const WriteBatch& batch);

  std::optional<UcpeEntry> get_ucpe(const std::string& id) const;
  std::optional<StoredConfig> get_config(const std::string& config_id) const;

  // Query type 1: by CVE identifier, configs materialized. NotFound is
  // nullopt, not an error.
  struct CveResult {
    VulnerabilityRecord record;
    VulGraph graph;
  };
  std::optional<CveResult> query_by_cve(const std::string& cve_id) const;

  // Query type 2: by product and version. Names are standardized through the
  // dictionary first, so alias spellings and canonical spellings retrieve
  // identically. A version of "*" matches any leaf. Results sorted by cve_id.
  std::vector<ProductHit> query_by_product(const std::string& vendor,
                                           const std::string& product,
                                           const std::string& version,
                                           const CanonicalDictionary& dict,
                                           double tau) const;

  std::size_t ucpe_count() const { return ucpe_.size(); }
  std::size_t config_count() const { return configurations_.size(); }
  std::size_t vulnerability_count() const { return vulnerabilities_.size(); }
  std::uint64_t generation() const { return generation_; }
  const std::string& directory() const { return dir_; }

  const std::map<std::string, StoredVulnerability>& vulnerabilities() const {
    return vulnerabilities_;
  }
  const std::map<std::string, StoredConfig>& configurations() const {
    return configurations_;
  }

  // Every leaf id in every stored config resolves to a stored uCPE, and every
  // config_id referenced by a vulnerability exists.
  void check_integrity() const;

 private:
  void persist() const;
  void validate_batch(const WriteBatch& batch) const;

  std::string dir_;
  std::uint64_t generation_ = 0;
  std::map<std::string, UcpeEntry> ucpe_;
  std::map<std::string, StoredConfig> configurations_;
  std::map<std::string, StoredVulnerability> vulnerabilities_;
};

// Assembles the write batch for one record: resolve, build the graph, list
// the uCPE entries the graph references.
WriteBatch batch_for_record(const VulnerabilityRecord& record,
                            const CanonicalDictionary& dict, double tau,
                            std::vector<UnresolvedMatch>& unresolved,
                            ResolveCache* cache = nullptr);

}  // namespace cpegraph
