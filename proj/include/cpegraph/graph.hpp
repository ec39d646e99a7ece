#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpegraph/feed.hpp"
#include "cpegraph/postprocess.hpp"

namespace cpegraph {

// One node of a configuration graph. A leaf holds the uCPE ids a single CPE
// match resolved to (several when a range expanded over releases; matching
// any of them satisfies the leaf). Groups combine children under AND / OR.
struct ConfigNode {
  enum class Type { leaf, group };

  Type type = Type::leaf;
  std::vector<std::string> ucpe_ids;  // leaf only, non-empty
  ConfigOp op = ConfigOp::or_op;      // group only
  std::vector<ConfigNode> children;   // group only

  bool operator==(const ConfigNode&) const = default;

  static ConfigNode leaf(std::vector<std::string> ids);
  static ConfigNode group(ConfigOp op, std::vector<ConfigNode> children);

  bool has_group() const;
  void collect_leaf_ids(std::vector<std::string>& out) const;

  json to_json() const;
  static ConfigNode from_json(const json& j);
};

// Single-rooted AND/OR graph over uCPE leaves; config_id is content-derived.
struct ConfigGraph {
  std::string config_id;
  ConfigNode root;

  bool operator==(const ConfigGraph&) const = default;

  json to_json() const;
  static ConfigGraph from_json(const json& j);
};

struct VulGraph {
  std::string cve_id;
  std::vector<ConfigGraph> configs;
};

// The uCPE entries one raw CPE match resolved to.
struct ResolvedMatch {
  std::vector<UcpeEntry> entries;
};

// Mirrors a ConfigNodeRaw tree with every match resolved.
struct ResolvedConfigNode {
  ConfigOp op = ConfigOp::or_op;
  std::vector<ResolvedMatch> matches;
  std::vector<ResolvedConfigNode> children;
};

// Maps raw trees 1:1 onto graph groups: each raw node becomes a group with
// one child per match (a leaf) plus one per raw child. A match that resolved
// to nothing raises DanglingUcpe, as does a record resolving to no leaves.
VulGraph build_vul_graph(const VulnerabilityRecord& record,
                         const std::vector<ResolvedConfigNode>& resolved);

// Resolves a raw tree against the dictionary (UnresolvableName entries are
// reported, not thrown). Every CPE match becomes a ResolvedMatch; unresolved
// ones come back empty with a reason in `unresolved`.
struct UnresolvedMatch {
  std::string cve_id;
  std::string cpe;
  std::string reason;
};

std::vector<ResolvedConfigNode> resolve_config_nodes(
    const VulnerabilityRecord& record, const CanonicalDictionary& dict,
    double tau, std::vector<UnresolvedMatch>& unresolved,
    ResolveCache* cache = nullptr);

// One inventory asset: an AND-bag of installed uCPEs.
struct Asset {
  std::string asset_id;
  std::vector<UcpeEntry> components;
};

struct SysGraph {
  std::vector<Asset> assets;

  json to_json() const;
};

struct UnresolvedComponent {
  std::string asset_id;
  std::string product;
  std::string reason;
};

// Inventory file: {"assets": [{"asset_id", "components": [{vendor?, product,
// version, part?}]}]}. Component names standardize through the dictionary;
// names missing from it are kept verbatim in normalized form so local
// software absent from any catalog still participates in matching.
SysGraph build_sys_graph(const json& inventory, const CanonicalDictionary& dict,
                         double tau,
                         std::vector<UnresolvedComponent>& unresolved);

}  // namespace cpegraph
