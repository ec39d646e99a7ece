#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cpegraph/store.hpp"

namespace cpegraph {

// Fast membership view over one asset's installed uCPEs: id lookup plus
// (vendor, product) -> installed versions for wildcard leaves.
class AssetIndex {
 public:
  explicit AssetIndex(const Asset& asset);

  // A leaf matches when some installed component shares vendor+product and
  // either side's version is the wildcard or the versions are equal. Exact
  // leaf ids short-circuit through the id set.
  bool matches_leaf_id(const std::string& ucpe_id, const Store& store) const;

  const std::string& asset_id() const { return asset_id_; }

 private:
  std::string asset_id_;
  std::set<std::string> ids_;
  std::map<std::pair<std::string, std::string>, std::set<std::string>>
      versions_;  // (vendor, product) -> installed versions
};

// Subset matching for operator-free configurations: every leaf
// present in the asset. Preconditions: no group nodes among `leaves`.
bool match_simple(const std::vector<ConfigNode>& leaves,
                  const AssetIndex& asset, const Store& store);

struct MatchTraceEntry {
  std::int32_t node = 0;  // preorder index within the config graph, root = 0
  bool matched = false;

  bool operator==(const MatchTraceEntry&) const = default;
};

// Recursive AND/OR evaluation: AND true iff all children, OR true iff any.
// Operator-free roots (a bare leaf) degrade to the subset rule. Appends one
// trace entry per node visited when `trace` is non-null.
bool match_logical(const ConfigNode& node, const AssetIndex& asset,
                   const Store& store,
                   std::vector<MatchTraceEntry>* trace = nullptr);

using ApplicableTuple =
    std::tuple<std::string, std::string, std::string>;  // cve, asset, config

struct TraceRecord {
  std::string cve_id;
  std::string asset_id;
  std::string config_id;
  bool matched = false;
  std::vector<MatchTraceEntry> entries;
};

struct ApplicabilityResult {
  std::set<ApplicableTuple> applicable;
  std::map<std::string, std::string> filtered_out;  // cve -> reason
  std::vector<TraceRecord> traces;
  std::uint64_t pair_evaluations = 0;

  json to_json() const;
};

// Algorithm: for every (vulnerability, asset) pair, evaluate each of the
// vulnerability's config graphs against the asset; any true evaluation makes
// the vulnerability applicable there. Vulnerabilities with no matching
// (asset, config) pair are filtered out with a reason. Serial reference and
// OpenMP kernel return identical results.
ApplicabilityResult filter_serial(const Store& store, const SysGraph& sys);
ApplicabilityResult filter_parallel(const Store& store, const SysGraph& sys,
                                    int threads);
ApplicabilityResult filter(const Store& store, const SysGraph& sys,
                           int workers = 1);

// Persisted incremental state: which (cve, asset) pairs have been evaluated
// against which store generation, and what matched.
struct FilterState {
  std::uint64_t store_generation = 0;
  std::set<std::string> evaluated_cves;
  std::set<std::string> evaluated_assets;
  std::set<std::pair<std::string, std::string>> evaluated_pairs;
  std::set<ApplicableTuple> applicable;

  json to_json() const;
  static FilterState from_json(const json& j);
  void save(const std::string& path) const;
  static FilterState load(const std::string& path);
};

// Seeds state from a full filter run.
FilterState make_filter_state(const Store& store,
                              const ApplicabilityResult& result,
                              const SysGraph& sys);

// Evaluates only pairs involving unseen vulnerabilities or assets, then
// returns the merged result (equal to a from-scratch filter over the union).
// Throws StaleState when the store generation moved under the state.
ApplicabilityResult incremental_add(FilterState& state, const Store& store,
                                    const SysGraph& sys, int workers = 1);

}  // namespace cpegraph
