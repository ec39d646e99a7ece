#include "cpegraph/graph.hpp"

#include <algorithm>
#include <set>

#include "cpegraph/normalize.hpp"

namespace cpegraph {

ConfigNode ConfigNode::leaf(std::vector<std::string> ids) {
  ConfigNode n;
  n.type = Type::leaf;
  n.ucpe_ids = std::move(ids);
  return n;
}

ConfigNode ConfigNode::group(ConfigOp op, std::vector<ConfigNode> children) {
  ConfigNode n;
  n.type = Type::group;
  n.op = op;
  n.children = std::move(children);
  return n;
}

bool ConfigNode::has_group() const {
  if (type == Type::group) return true;
  return false;
}

void ConfigNode::collect_leaf_ids(std::vector<std::string>& out) const {
  if (type == Type::leaf) {
    out.insert(out.end(), ucpe_ids.begin(), ucpe_ids.end());
    return;
  }
  for (const auto& child : children) child.collect_leaf_ids(out);
}

json ConfigNode::to_json() const {
  if (type == Type::leaf) {
    return json{{"leaf", ucpe_ids}};
  }
  json children_json = json::array();
  for (const auto& child : children) children_json.push_back(child.to_json());
  return json{{"operator", config_op_name(op)}, {"children", children_json}};
}

ConfigNode ConfigNode::from_json(const json& j) {
  if (j.contains("leaf")) {
    return leaf(j.at("leaf").get<std::vector<std::string>>());
  }
  std::vector<ConfigNode> children;
  for (const auto& child : j.at("children")) {
    children.push_back(from_json(child));
  }
  const ConfigOp op =
      j.value("operator", "OR") == "AND" ? ConfigOp::and_op : ConfigOp::or_op;
  return group(op, std::move(children));
}

namespace {

void canonical_serialize(const ConfigNode& node, std::string& out) {
  if (node.type == ConfigNode::Type::leaf) {
    out += "L(";
    for (const auto& id : node.ucpe_ids) {
      out += id;
      out.push_back(',');
    }
    out += ")";
    return;
  }
  out += node.op == ConfigOp::and_op ? "A(" : "O(";
  for (const auto& child : node.children) canonical_serialize(child, out);
  out += ")";
}

}  // namespace

json ConfigGraph::to_json() const {
  return json{{"config_id", config_id}, {"root", root.to_json()}};
}

ConfigGraph ConfigGraph::from_json(const json& j) {
  ConfigGraph g;
  g.config_id = j.at("config_id").get<std::string>();
  g.root = ConfigNode::from_json(j.at("root"));
  return g;
}

namespace {

ConfigNode build_node(const ResolvedConfigNode& raw, const std::string& cve_id) {
  ConfigNode group = ConfigNode::group(raw.op, {});
  for (const auto& match : raw.matches) {
    if (match.entries.empty()) {
      throw Error(errc::dangling_ucpe, "config_graph",
                  "match resolved to no uCPE entries in " + cve_id);
    }
    std::vector<std::string> ids;
    ids.reserve(match.entries.size());
    for (const auto& entry : match.entries) ids.push_back(entry.id);
    group.children.push_back(ConfigNode::leaf(std::move(ids)));
  }
  for (const auto& child : raw.children) {
    group.children.push_back(build_node(child, cve_id));
  }
  if (group.children.empty()) {
    throw Error(errc::dangling_ucpe, "config_graph",
                "configuration node with no content in " + cve_id);
  }
  return group;
}

}  // namespace

VulGraph build_vul_graph(const VulnerabilityRecord& record,
                         const std::vector<ResolvedConfigNode>& resolved) {
  if (resolved.empty()) {
    throw Error(errc::dangling_ucpe, "config_graph",
                "record resolved to no configurations: " + record.cve_id);
  }
  VulGraph graph;
  graph.cve_id = record.cve_id;
  std::size_t index = 0;
  for (const auto& node : resolved) {
    ConfigGraph config;
    config.root = build_node(node, record.cve_id);
    std::string key = record.cve_id + "#" + std::to_string(index++);
    std::string canon;
    canonical_serialize(config.root, canon);
    config.config_id = "c" + fnv1a64_hex(key + "|" + canon);
    graph.configs.push_back(std::move(config));
  }
  return graph;
}

namespace {

ResolvedConfigNode resolve_node(const ConfigNodeRaw& raw,
                                const VulnerabilityRecord& record,
                                const CanonicalDictionary& dict, double tau,
                                std::vector<UnresolvedMatch>& unresolved,
                                ResolveCache* cache) {
  ResolvedConfigNode out;
  out.op = raw.op;
  for (const auto& match : raw.matches) {
    RawEntry entry;
    entry.vendor = unescape_component(match.cpe.vendor);
    entry.product = unescape_component(match.cpe.product);
    entry.version_desc = match.constraint;
    entry.part = match.cpe.part;
    entry.source = EntrySource::cpe_match;

    ResolvedEntry resolved = resolve_entry(entry, dict, tau, cache);
    ResolvedMatch rm;
    if (resolved.unresolvable) {
      unresolved.push_back(
          {record.cve_id, format_cpe(match.cpe), resolved.reason});
    } else {
      rm.entries = std::move(resolved.ucpe);
    }
    out.matches.push_back(std::move(rm));
  }
  for (const auto& child : raw.children) {
    out.children.push_back(
        resolve_node(child, record, dict, tau, unresolved, cache));
  }
  return out;
}

}  // namespace

std::vector<ResolvedConfigNode> resolve_config_nodes(
    const VulnerabilityRecord& record, const CanonicalDictionary& dict,
    double tau, std::vector<UnresolvedMatch>& unresolved,
    ResolveCache* cache) {
  std::vector<ResolvedConfigNode> out;
  for (const auto& node : record.configurations) {
    out.push_back(resolve_node(node, record, dict, tau, unresolved, cache));
  }
  return out;
}

json SysGraph::to_json() const {
  json assets_json = json::array();
  for (const auto& asset : assets) {
    json comps = json::array();
    for (const auto& c : asset.components) comps.push_back(c.to_json());
    assets_json.push_back(
        json{{"asset_id", asset.asset_id}, {"components", comps}});
  }
  return json{{"assets", assets_json}};
}

SysGraph build_sys_graph(const json& inventory, const CanonicalDictionary& dict,
                         double tau,
                         std::vector<UnresolvedComponent>& unresolved) {
  if (!inventory.is_object() || !inventory.contains("assets") ||
      !inventory.at("assets").is_array()) {
    throw Error(errc::inventory_schema, "config_graph",
                "inventory must be an object with an assets array");
  }
  SysGraph graph;
  std::set<std::string> seen_ids;
  for (const json& asset_json : inventory.at("assets")) {
    if (!asset_json.contains("asset_id") ||
        !asset_json.contains("components")) {
      throw Error(errc::inventory_schema, "config_graph",
                  "asset requires asset_id and components", asset_json);
    }
    Asset asset;
    asset.asset_id = asset_json.at("asset_id").get<std::string>();
    if (!seen_ids.insert(asset.asset_id).second) {
      throw Error(errc::inventory_schema, "config_graph",
                  "duplicate asset_id: " + asset.asset_id);
    }
    for (const json& comp : asset_json.at("components")) {
      if (!comp.contains("product") || !comp.contains("version")) {
        throw Error(errc::inventory_schema, "config_graph",
                    "component requires product and version", comp);
      }
      const std::string product_raw = comp.at("product").get<std::string>();
      const std::string version = comp.at("version").get<std::string>();
      std::optional<Part> part;
      if (comp.contains("part")) {
        const std::string p = comp.at("part").get<std::string>();
        if (!p.empty()) part = part_from_letter(p[0]);
      }

      RawEntry entry;
      if (comp.contains("vendor")) {
        entry.vendor = comp.at("vendor").get<std::string>();
      }
      entry.product = product_raw;
      entry.part = part;

      std::string vendor_canon, product_canon;
      try {
        std::tie(vendor_canon, product_canon) =
            separate_vendor_product(entry, dict, tau);
      } catch (const Error& e) {
        if (e.code() != errc::unresolvable_name) throw;
        unresolved.push_back({asset.asset_id, product_raw, e.what()});
        // Known to the operator even if no catalog lists it: keep the
        // normalized spelling so graph matching can still hit exact names.
        vendor_canon = comp.contains("vendor")
                           ? normalize_str(comp.at("vendor").get<std::string>())
                           : "";
        product_canon = normalize_str(product_raw);
      }
      asset.components.push_back(
          UcpeEntry::make(vendor_canon, product_canon, version,
                          part.value_or(Part::application)));
    }
    graph.assets.push_back(std::move(asset));
  }
  return graph;
}

}  // namespace cpegraph
