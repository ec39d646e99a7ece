#include "cpegraph/store.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "cpegraph/jsonl.hpp"
#include "cpegraph/normalize.hpp"

namespace fs = std::filesystem;

namespace cpegraph {

namespace {

constexpr const char* kUcpeFile = "ucpe.jsonl";
constexpr const char* kConfigFile = "configurations.jsonl";
constexpr const char* kVulnFile = "vulnerabilities.jsonl";
constexpr const char* kMetaFile = "meta.json";

void count_groups(const ConfigNode& node, std::size_t& and_groups,
                  std::size_t& or_groups) {
  if (node.type != ConfigNode::Type::group) return;
  (node.op == ConfigOp::and_op ? and_groups : or_groups)++;
  for (const auto& child : node.children) {
    count_groups(child, and_groups, or_groups);
  }
}

json stored_config_to_json(const StoredConfig& c) {
  return json{{"config_id", c.graph.config_id},
              {"cve_id", c.cve_id},
              {"root_operator", c.root_operator},
              {"and_groups", c.and_groups},
              {"or_groups", c.or_groups},
              {"root", c.graph.root.to_json()}};
}

StoredConfig stored_config_from_json(const json& j) {
  StoredConfig c;
  c.graph.config_id = j.at("config_id").get<std::string>();
  c.graph.root = ConfigNode::from_json(j.at("root"));
  c.cve_id = j.at("cve_id").get<std::string>();
  c.root_operator = j.value("root_operator", "OR");
  c.and_groups = j.value("and_groups", std::size_t{0});
  c.or_groups = j.value("or_groups", std::size_t{0});
  return c;
}

json stored_vuln_to_json(const StoredVulnerability& v) {
  json j = v.record.to_json();
  j["config_ids"] = v.config_ids;
  return j;
}

StoredVulnerability stored_vuln_from_json(const json& j) {
  StoredVulnerability v;
  v.record = VulnerabilityRecord::from_json(j);
  v.config_ids = j.value("config_ids", std::vector<std::string>{});
  return v;
}

// Atomic-enough persistence: write to a temp name, then rename.
void write_file_atomic(const fs::path& path, const std::vector<json>& docs) {
  const fs::path tmp = path.string() + ".tmp";
  write_jsonl(tmp.string(), docs, "config_graph");
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(errc::storage_io, "config_graph",
                "rename failed for " + path.string() + ": " + ec.message());
  }
}

}  // namespace

Store Store::open(const std::string& dir) {
  Store store;
  store.dir_ = dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(errc::storage_io, "config_graph",
                "cannot create store directory " + dir + ": " + ec.message());
  }

  const fs::path base(dir);
  if (fs::exists(base / kMetaFile)) {
    json meta = read_json_file((base / kMetaFile).string(), "config_graph");
    store.generation_ = meta.value("generation", std::uint64_t{0});
    for (const json& j : read_jsonl((base / kUcpeFile).string())) {
      UcpeEntry e = UcpeEntry::from_json(j);
      store.ucpe_[e.id] = std::move(e);
    }
    for (const json& j : read_jsonl((base / kConfigFile).string())) {
      StoredConfig c = stored_config_from_json(j);
      store.configurations_[c.graph.config_id] = std::move(c);
    }
    for (const json& j : read_jsonl((base / kVulnFile).string())) {
      StoredVulnerability v = stored_vuln_from_json(j);
      store.vulnerabilities_[v.record.cve_id] = std::move(v);
    }
    store.check_integrity();
  }
  return store;
}

void Store::validate_batch(const WriteBatch& batch) const {
  std::set<std::string> incoming_ucpe;
  for (const auto& e : batch.ucpe) {
    if (e.id != UcpeEntry::make_id(e.vendor, e.product, e.version, e.part)) {
      throw Error(errc::integrity_violation, "config_graph",
                  "ucpe id is not content-addressed: " + e.id);
    }
    incoming_ucpe.insert(e.id);
  }
  auto ucpe_known = [&](const std::string& id) {
    return incoming_ucpe.count(id) > 0 || ucpe_.count(id) > 0;
  };

  std::set<std::string> incoming_configs;
  for (const auto& c : batch.configurations) {
    std::vector<std::string> leaf_ids;
    c.graph.root.collect_leaf_ids(leaf_ids);
    if (leaf_ids.empty()) {
      throw Error(errc::integrity_violation, "config_graph",
                  "configuration without leaves: " + c.graph.config_id);
    }
    for (const auto& id : leaf_ids) {
      if (!ucpe_known(id)) {
        throw Error(errc::integrity_violation, "config_graph",
                    "config references missing ucpe id " + id,
                    json{{"config_id", c.graph.config_id}});
      }
    }
    incoming_configs.insert(c.graph.config_id);
  }
  auto config_known = [&](const std::string& id) {
    return incoming_configs.count(id) > 0 || configurations_.count(id) > 0;
  };

  for (const auto& v : batch.vulnerabilities) {
    for (const auto& id : v.config_ids) {
      if (!config_known(id)) {
        throw Error(errc::integrity_violation, "config_graph",
                    "vulnerability references missing config " + id,
                    json{{"cve_id", v.record.cve_id}});
      }
    }
  }
}

void Store::put_batch(const WriteBatch& batch) {
  validate_batch(batch);

  // Re-putting identical content is a no-op: the generation only moves when
  // state actually changes, so repeated ingests stay byte-stable on disk.
  bool changed = false;
  for (const auto& e : batch.ucpe) {
    auto it = ucpe_.find(e.id);
    if (it == ucpe_.end() || !(it->second == e)) {
      ucpe_[e.id] = e;
      changed = true;
    }
  }
  for (const auto& c : batch.configurations) {
    StoredConfig stored = c;
    stored.root_operator = c.graph.root.type == ConfigNode::Type::group
                               ? config_op_name(c.graph.root.op)
                               : "LEAF";
    stored.and_groups = 0;
    stored.or_groups = 0;
    count_groups(c.graph.root, stored.and_groups, stored.or_groups);
    auto it = configurations_.find(c.graph.config_id);
    if (it == configurations_.end() ||
        !(it->second.graph == stored.graph &&
          it->second.cve_id == stored.cve_id)) {
      configurations_[c.graph.config_id] = std::move(stored);
      changed = true;
    }
  }
  for (const auto& v : batch.vulnerabilities) {
    auto it = vulnerabilities_.find(v.record.cve_id);
    if (it == vulnerabilities_.end() ||
        !(it->second.record == v.record &&
          it->second.config_ids == v.config_ids)) {
      vulnerabilities_[v.record.cve_id] = v;
      changed = true;
    }
  }
  if (!changed) return;
  ++generation_;
  if (!dir_.empty()) persist();
}

void Store::persist() const {
  const fs::path base(dir_);
  std::vector<json> docs;

  docs.reserve(ucpe_.size());
  for (const auto& [_, e] : ucpe_) docs.push_back(e.to_json());
  write_file_atomic(base / kUcpeFile, docs);

  docs.clear();
  for (const auto& [_, c] : configurations_) {
    docs.push_back(stored_config_to_json(c));
  }
  write_file_atomic(base / kConfigFile, docs);

  docs.clear();
  for (const auto& [_, v] : vulnerabilities_) {
    docs.push_back(stored_vuln_to_json(v));
  }
  write_file_atomic(base / kVulnFile, docs);

  write_json_file((base / kMetaFile).string(),
                  json{{"generation", generation_}, {"format", 1}},
                  "config_graph");
}

std::optional<UcpeEntry> Store::get_ucpe(const std::string& id) const {
  auto it = ucpe_.find(id);
  if (it == ucpe_.end()) return std::nullopt;
  return it->second;
}

std::optional<StoredConfig> Store::get_config(
    const std::string& config_id) const {
  auto it = configurations_.find(config_id);
  if (it == configurations_.end()) return std::nullopt;
  return it->second;
}

std::optional<Store::CveResult> Store::query_by_cve(
    const std::string& cve_id) const {
  auto it = vulnerabilities_.find(cve_id);
  if (it == vulnerabilities_.end()) return std::nullopt;
  CveResult result;
  result.record = it->second.record;
  result.graph.cve_id = cve_id;
  for (const auto& config_id : it->second.config_ids) {
    auto config = configurations_.find(config_id);
    if (config == configurations_.end()) {
      throw Error(errc::storage_io, "config_graph",
                  "stored vulnerability references missing config " +
                      config_id);
    }
    result.graph.configs.push_back(config->second.graph);
  }
  return result;
}

std::vector<ProductHit> Store::query_by_product(
    const std::string& vendor, const std::string& product,
    const std::string& version, const CanonicalDictionary& dict,
    double tau) const {
  const std::string vendor_canon =
      standardize(vendor, dict, tau).value_or(normalize_str(vendor));
  std::string product_canon = normalize_str(product);
  if (dict.vendors.count(vendor_canon)) {
    product_canon = standardize_product(product, dict, vendor_canon, tau)
                        .value_or(product_canon);
  }

  std::set<ProductHit> hits;
  for (const auto& [config_id, stored] : configurations_) {
    std::vector<std::string> leaf_ids;
    stored.graph.root.collect_leaf_ids(leaf_ids);
    for (const auto& id : leaf_ids) {
      auto it = ucpe_.find(id);
      if (it == ucpe_.end()) continue;
      const UcpeEntry& entry = it->second;
      if (entry.vendor != vendor_canon || entry.product != product_canon) {
        continue;
      }
      const bool version_ok = version == "*" || entry.version == "*" ||
                              entry.version == version;
      if (version_ok) {
        hits.insert(ProductHit{stored.cve_id, config_id});
        break;
      }
    }
  }
  return {hits.begin(), hits.end()};
}

void Store::check_integrity() const {
  for (const auto& [config_id, stored] : configurations_) {
    std::vector<std::string> leaf_ids;
    stored.graph.root.collect_leaf_ids(leaf_ids);
    for (const auto& id : leaf_ids) {
      if (!ucpe_.count(id)) {
        throw Error(errc::integrity_violation, "config_graph",
                    "dangling ucpe id " + id + " in config " + config_id);
      }
    }
  }
  for (const auto& [cve_id, v] : vulnerabilities_) {
    for (const auto& config_id : v.config_ids) {
      if (!configurations_.count(config_id)) {
        throw Error(errc::integrity_violation, "config_graph",
                    "dangling config id " + config_id + " in " + cve_id);
      }
    }
  }
}

WriteBatch batch_for_record(const VulnerabilityRecord& record,
                            const CanonicalDictionary& dict, double tau,
                            std::vector<UnresolvedMatch>& unresolved,
                            ResolveCache* cache) {
  WriteBatch batch;
  std::vector<ResolvedConfigNode> resolved =
      resolve_config_nodes(record, dict, tau, unresolved, cache);

  // Matches that resolved to nothing cannot become leaves; drop them here and
  // prune nodes that end up empty. The unresolved report already names them.
  struct Pruner {
    static bool prune(ResolvedConfigNode& node) {
      node.matches.erase(
          std::remove_if(node.matches.begin(), node.matches.end(),
                         [](const ResolvedMatch& m) {
                           return m.entries.empty();
                         }),
          node.matches.end());
      node.children.erase(std::remove_if(node.children.begin(),
                                         node.children.end(),
                                         [](ResolvedConfigNode& child) {
                                           return prune(child);
                                         }),
                          node.children.end());
      return node.matches.empty() && node.children.empty();
    }
  };
  resolved.erase(std::remove_if(resolved.begin(), resolved.end(),
                                [](ResolvedConfigNode& node) {
                                  return Pruner::prune(node);
                                }),
                 resolved.end());
  if (resolved.empty()) return batch;

  VulGraph graph = build_vul_graph(record, resolved);

  std::set<std::string> seen;
  for (const auto& node : resolved) {
    struct Collector {
      static void collect(const ResolvedConfigNode& n,
                          std::set<std::string>& seen, WriteBatch& batch) {
        for (const auto& match : n.matches) {
          for (const auto& entry : match.entries) {
            if (seen.insert(entry.id).second) batch.ucpe.push_back(entry);
          }
        }
        for (const auto& child : n.children) collect(child, seen, batch);
      }
    };
    Collector::collect(node, seen, batch);
  }

  StoredVulnerability stored_vuln;
  stored_vuln.record = record;
  for (auto& config : graph.configs) {
    stored_vuln.config_ids.push_back(config.config_id);
    StoredConfig stored;
    stored.graph = std::move(config);
    stored.cve_id = record.cve_id;
    batch.configurations.push_back(std::move(stored));
  }
  batch.vulnerabilities.push_back(std::move(stored_vuln));
  return batch;
}

}  // namespace cpegraph
