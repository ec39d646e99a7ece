#include "cpegraph/feed.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "cpegraph/jsonl.hpp"
#include "cpegraph/normalize.hpp"

namespace cpegraph {

namespace {

constexpr std::string_view kRejectMarker = "** REJECT **";

VersionConstraint constraint_from_match(const json& match,
                                        const CpeName& cpe) {
  std::optional<VersionBound> lower, upper;
  if (match.contains("versionStartIncluding")) {
    lower = VersionBound{match.at("versionStartIncluding").get<std::string>(),
                         true};
  } else if (match.contains("versionStartExcluding")) {
    lower = VersionBound{match.at("versionStartExcluding").get<std::string>(),
                         false};
  }
  if (match.contains("versionEndIncluding")) {
    upper =
        VersionBound{match.at("versionEndIncluding").get<std::string>(), true};
  } else if (match.contains("versionEndExcluding")) {
    upper = VersionBound{match.at("versionEndExcluding").get<std::string>(),
                         false};
  }
  if (lower || upper) {
    return VersionConstraint::range(std::move(lower), std::move(upper));
  }
  return VersionConstraint::exact_version(unescape_component(cpe.version));
}

ConfigNodeRaw parse_config_node(const json& node, const std::string& cve_id,
                                std::vector<QuarantinedCpe>& quarantined) {
  ConfigNodeRaw out;
  const std::string op = node.value("operator", "OR");
  if (op == "AND") {
    out.op = ConfigOp::and_op;
  } else if (op == "OR") {
    out.op = ConfigOp::or_op;
  } else {
    throw Error(errc::feed_schema, "feed_ingest",
                "unknown configuration operator: " + op);
  }

  if (node.contains("cpe_match")) {
    for (const json& match : node.at("cpe_match")) {
      const std::string uri = match.value("cpe23Uri", "");
      try {
        CpeMatch m;
        m.cpe = parse_cpe(uri);
        m.constraint = constraint_from_match(match, m.cpe);
        m.vulnerable = match.value("vulnerable", true);
        out.matches.push_back(std::move(m));
      } catch (const Error& e) {
        if (e.code() != errc::malformed_cpe) throw;
        quarantined.push_back({cve_id, uri, e.what()});
      }
    }
  }
  if (node.contains("children")) {
    for (const json& child : node.at("children")) {
      out.children.push_back(parse_config_node(child, cve_id, quarantined));
    }
  }
  return out;
}

VulnerabilityRecord parse_feed_item(const json& item,
                                    std::vector<QuarantinedCpe>& quarantined) {
  VulnerabilityRecord rec;
  try {
    rec.cve_id = item.at("cve").at("CVE_data_meta").at("ID").get<std::string>();
  } catch (const json::exception&) {
    throw Error(errc::feed_schema, "feed_ingest",
                "feed item without cve.CVE_data_meta.ID");
  }
  if (rec.cve_id.rfind("CVE-", 0) != 0) {
    throw Error(errc::feed_schema, "feed_ingest",
                "identifier does not match the CVE pattern: " + rec.cve_id);
  }

  if (item.at("cve").contains("description")) {
    for (const json& d :
         item.at("cve").at("description").value("description_data",
                                                json::array())) {
      if (d.value("lang", "en") == "en") {
        rec.description = d.value("value", "");
        break;
      }
    }
  }
  rec.status = rec.description.rfind(kRejectMarker, 0) == 0
                   ? CveStatus::rejected
                   : CveStatus::active;

  if (item.contains("impact") && item.at("impact").contains("baseMetricV3")) {
    const json& cvss = item.at("impact").at("baseMetricV3").value(
        "cvssV3", json::object());
    if (cvss.contains("baseScore")) {
      rec.cvss_score = cvss.at("baseScore").get<double>();
    }
    rec.cvss_vector = cvss.value("vectorString", "");
  }
  rec.last_modified = item.value("lastModifiedDate", "");

  if (item.contains("configurations")) {
    for (const json& node :
         item.at("configurations").value("nodes", json::array())) {
      ConfigNodeRaw parsed = parse_config_node(node, rec.cve_id, quarantined);
      if (parsed.matches.empty() && parsed.children.empty()) continue;
      rec.configurations.push_back(std::move(parsed));
    }
  }
  return rec;
}

std::vector<json> load_feed_items(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::storage_io, "feed_ingest", "cannot open feed: " + path);
  }
  char first = 0;
  in >> first;
  in.seekg(0);
  if (first != '{' && first != 0) {
    throw Error(errc::feed_schema, "feed_ingest",
                "feed is neither an NVD JSON document nor JSON lines: " +
                    path);
  }

  // Single-document feeds carry CVE_Items; the fixture mirror is one item
  // per line. Distinguish by attempting whole-file parse first.
  json whole = json::parse(in, nullptr, false);
  if (!whole.is_discarded() && whole.is_object() &&
      whole.contains("CVE_Items")) {
    std::vector<json> items;
    for (json& item : whole.at("CVE_Items")) items.push_back(std::move(item));
    return items;
  }
  return read_jsonl(path, "feed_ingest");
}

}  // namespace

const char* config_op_name(ConfigOp op) {
  return op == ConfigOp::and_op ? "AND" : "OR";
}

json ConfigNodeRaw::to_json() const {
  json j{{"operator", config_op_name(op)}};
  if (!matches.empty()) {
    json arr = json::array();
    for (const auto& m : matches) {
      json match{{"vulnerable", m.vulnerable}, {"cpe23Uri", format_cpe(m.cpe)}};
      json c = m.constraint.to_json();
      if (c.value("kind", "") == "range") {
        for (const char* key : {"start_including", "start_excluding",
                                "end_including", "end_excluding"}) {
          if (!c.contains(key)) continue;
          static const std::map<std::string, std::string> rename = {
              {"start_including", "versionStartIncluding"},
              {"start_excluding", "versionStartExcluding"},
              {"end_including", "versionEndIncluding"},
              {"end_excluding", "versionEndExcluding"}};
          match[rename.at(key)] = c.at(key);
        }
      }
      arr.push_back(std::move(match));
    }
    j["cpe_match"] = std::move(arr);
  }
  if (!children.empty()) {
    json arr = json::array();
    for (const auto& child : children) arr.push_back(child.to_json());
    j["children"] = std::move(arr);
  }
  return j;
}

ConfigNodeRaw ConfigNodeRaw::from_json(const json& j) {
  std::vector<QuarantinedCpe> sink;
  ConfigNodeRaw node = parse_config_node(j, "", sink);
  if (!sink.empty()) {
    throw Error(errc::malformed_cpe, "feed_ingest", sink.front().reason);
  }
  return node;
}

json VulnerabilityRecord::to_json() const {
  json configs = json::array();
  for (const auto& node : configurations) configs.push_back(node.to_json());
  json j{{"cve", json{{"CVE_data_meta", json{{"ID", cve_id}}},
                      {"description",
                       json{{"description_data",
                             json::array({json{{"lang", "en"},
                                               {"value", description}}})}}}}},
         {"configurations", json{{"nodes", configs}}},
         {"lastModifiedDate", last_modified}};
  if (cvss_score) {
    j["impact"] = json{
        {"baseMetricV3",
         json{{"cvssV3", json{{"baseScore", *cvss_score},
                              {"vectorString", cvss_vector}}}}}};
  }
  return j;
}

VulnerabilityRecord VulnerabilityRecord::from_json(const json& j) {
  std::vector<QuarantinedCpe> sink;
  return parse_feed_item(j, sink);
}

FeedIngestResult ingest_nvd_feed(const std::string& path,
                                 const std::optional<std::string>& since) {
  FeedIngestResult result;
  for (const json& item : load_feed_items(path)) {
    VulnerabilityRecord rec = parse_feed_item(item, result.quarantined);
    if (rec.status == CveStatus::rejected) continue;
    if (since && !rec.last_modified.empty() && rec.last_modified < *since) {
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

namespace {

std::string vpv_key(const CpeName& cpe) {
  return cpe.vendor + "|" + cpe.product + "|" + cpe.version;
}

void ingest_dictionary_string(const std::string& uri,
                              DictionaryIngestResult& result,
                              std::map<std::pair<std::string, std::string>,
                                       std::set<std::string>>& versions,
                              std::set<std::string>& keys) {
  ++result.total_strings;
  try {
    CpeName cpe = parse_cpe(uri);
    const std::string vendor = unescape_component(cpe.vendor);
    const std::string product = unescape_component(cpe.product);
    auto& bucket = versions[{vendor, product}];
    if (!CpeName::is_any(cpe.version) && !CpeName::is_na(cpe.version)) {
      bucket.insert(unescape_component(cpe.version));
    }
    keys.insert(vpv_key(cpe));
  } catch (const Error& e) {
    if (e.code() != errc::malformed_cpe) throw;
    result.quarantined.push_back({"", uri, e.what()});
  }
}

}  // namespace

DictionaryIngestResult ingest_cpe_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::storage_io, "feed_ingest",
                "cannot open dictionary: " + path);
  }

  DictionaryIngestResult result;
  std::map<std::pair<std::string, std::string>, std::set<std::string>>
      versions;
  std::set<std::string> keys;

  std::string head(512, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  head.resize(got);
  in.clear();
  in.seekg(0);

  if (head.find('<') != std::string::npos &&
      head.find("cpe-list") != std::string::npos) {
    // Official dictionary XML. The format is regular enough that scanning
    // for cpe23-item name="..." attributes is exact; a full XML parser would
    // buy nothing here.
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    const std::string needle = "cpe23-item name=\"";
    std::size_t pos = 0;
    while ((pos = content.find(needle, pos)) != std::string::npos) {
      pos += needle.size();
      const std::size_t end = content.find('"', pos);
      if (end == std::string::npos) {
        throw Error(errc::feed_schema, "feed_ingest",
                    "unterminated cpe23-item attribute in " + path);
      }
      ingest_dictionary_string(content.substr(pos, end - pos), result,
                               versions, keys);
      pos = end;
    }
  } else {
    for (const json& doc : read_jsonl(path, "feed_ingest")) {
      if (!doc.contains("cpe23")) {
        throw Error(errc::feed_schema, "feed_ingest",
                    "dictionary line without cpe23 field", doc);
      }
      ingest_dictionary_string(doc.at("cpe23").get<std::string>(), result,
                               versions, keys);
    }
  }

  for (const auto& [key, vers] : versions) {
    CatalogEntry entry;
    entry.vendor = key.first;
    entry.product = key.second;
    entry.versions.assign(vers.begin(), vers.end());
    entry.source = CatalogSource::cpe_dictionary;
    result.entries.push_back(std::move(entry));
  }
  result.distinct_cpe_keys.assign(keys.begin(), keys.end());
  return result;
}

std::vector<CatalogEntry> ingest_external_catalog(const std::string& path) {
  std::vector<CatalogEntry> out;
  for (const json& j : read_jsonl(path, "feed_ingest")) {
    CatalogEntry e = CatalogEntry::from_json(j);
    e.source = CatalogSource::external_catalog;
    std::set<std::string> dedup(e.versions.begin(), e.versions.end());
    e.versions.assign(dedup.begin(), dedup.end());
    out.push_back(std::move(e));
  }
  return out;
}

json CorpusStats::to_json() const {
  json pairs = json::object();
  for (const auto& [key, count] : runningon_pair_counts) {
    pairs[std::string(1, key.first) + ":" + std::string(1, key.second)] =
        count;
  }
  return json{{"total_cves", total_cves},
              {"cves_with_valid_cpe", cves_with_valid_cpe},
              {"cpe_usage_fraction", cpe_usage_fraction},
              {"unused_dictionary_fraction", unused_dictionary_fraction},
              {"config_specific_fraction", config_specific_fraction},
              {"runningon_pair_counts", pairs},
              {"firmware_fraction", firmware_fraction},
              {"same_vendor_config_fraction", same_vendor_config_fraction}};
}

CorpusStats CorpusStats::from_json(const json& j) {
  CorpusStats s;
  s.total_cves = j.at("total_cves").get<std::size_t>();
  s.cves_with_valid_cpe = j.at("cves_with_valid_cpe").get<std::size_t>();
  s.cpe_usage_fraction = j.at("cpe_usage_fraction").get<double>();
  s.unused_dictionary_fraction =
      j.at("unused_dictionary_fraction").get<double>();
  s.config_specific_fraction = j.at("config_specific_fraction").get<double>();
  for (const auto& [key, count] : j.at("runningon_pair_counts").items()) {
    s.runningon_pair_counts[{key[0], key[2]}] = count.get<std::size_t>();
  }
  s.firmware_fraction = j.at("firmware_fraction").get<double>();
  s.same_vendor_config_fraction =
      j.at("same_vendor_config_fraction").get<double>();
  return s;
}

namespace {

struct PairStats {
  std::map<std::pair<char, char>, std::size_t> counts;
  std::size_t total = 0;
  std::size_t firmware = 0;
  std::size_t same_vendor = 0;

  void merge(const PairStats& other) {
    for (const auto& [key, count] : other.counts) counts[key] += count;
    total += other.total;
    firmware += other.firmware;
    same_vendor += other.same_vendor;
  }
};

struct SubtreeMatches {
  std::vector<const CpeMatch*> vulnerable;
  std::vector<const CpeMatch*> context;
  bool pair_node_below = false;
};

// Walks a configuration tree; at the innermost node whose subtree holds both
// vulnerable and context matches, emits the Cartesian product of the two
// sides. Ancestors of such a node do not emit again.
SubtreeMatches collect_pairs(const ConfigNodeRaw& node, PairStats& stats) {
  SubtreeMatches acc;
  for (const auto& match : node.matches) {
    (match.vulnerable ? acc.vulnerable : acc.context).push_back(&match);
  }
  for (const auto& child : node.children) {
    SubtreeMatches sub = collect_pairs(child, stats);
    acc.pair_node_below |= sub.pair_node_below;
    acc.vulnerable.insert(acc.vulnerable.end(), sub.vulnerable.begin(),
                          sub.vulnerable.end());
    acc.context.insert(acc.context.end(), sub.context.begin(),
                       sub.context.end());
  }
  if (!acc.pair_node_below && !acc.vulnerable.empty() &&
      !acc.context.empty()) {
    for (const CpeMatch* v : acc.vulnerable) {
      for (const CpeMatch* c : acc.context) {
        stats.counts[{part_letter(v->cpe.part), part_letter(c->cpe.part)}]++;
        stats.total++;
        if (unescape_component(v->cpe.product).find("firmware") !=
            std::string::npos) {
          stats.firmware++;
        }
        if (v->cpe.vendor == c->cpe.vendor) stats.same_vendor++;
      }
    }
    acc.pair_node_below = true;
  }
  return acc;
}

bool has_any_match(const ConfigNodeRaw& node) {
  if (!node.matches.empty()) return true;
  return std::any_of(node.children.begin(), node.children.end(),
                     has_any_match);
}

bool has_context_match(const ConfigNodeRaw& node) {
  for (const auto& m : node.matches) {
    if (!m.vulnerable) return true;
  }
  return std::any_of(node.children.begin(), node.children.end(),
                     has_context_match);
}

bool is_config_specific(const VulnerabilityRecord& rec) {
  for (const auto& node : rec.configurations) {
    if (has_context_match(node)) return true;
    if (!node.children.empty()) return true;  // depth > 1
  }
  return false;
}

void record_vpv_keys(const ConfigNodeRaw& node, std::set<std::string>& keys) {
  for (const auto& m : node.matches) keys.insert(vpv_key(m.cpe));
  for (const auto& child : node.children) record_vpv_keys(child, keys);
}

}  // namespace

CorpusStats compute_corpus_stats(
    const std::vector<VulnerabilityRecord>& records,
    const DictionaryIngestResult& dictionary, int workers) {
  if (workers < 1) workers = omp_get_max_threads();

  CorpusStats stats;
  stats.total_cves = records.size();

  std::vector<PairStats> local(static_cast<std::size_t>(workers));
  std::vector<std::size_t> local_valid(static_cast<std::size_t>(workers), 0);
  std::vector<std::size_t> local_specific(static_cast<std::size_t>(workers),
                                          0);
  std::vector<std::set<std::string>> local_keys(
      static_cast<std::size_t>(workers));

#pragma omp parallel num_threads(workers)
  {
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
#pragma omp for schedule(static)
    for (long long i = 0; i < static_cast<long long>(records.size()); ++i) {
      const auto& rec = records[static_cast<std::size_t>(i)];
      const bool has_cpe = std::any_of(rec.configurations.begin(),
                                       rec.configurations.end(),
                                       has_any_match);
      if (has_cpe) local_valid[tid]++;
      if (is_config_specific(rec)) local_specific[tid]++;
      for (const auto& node : rec.configurations) {
        collect_pairs(node, local[tid]);
        record_vpv_keys(node, local_keys[tid]);
      }
    }
  }

  PairStats pair_stats;
  std::set<std::string> used_keys;
  std::size_t valid = 0, specific = 0;
  for (std::size_t t = 0; t < local.size(); ++t) {
    pair_stats.merge(local[t]);
    valid += local_valid[t];
    specific += local_specific[t];
    used_keys.insert(local_keys[t].begin(), local_keys[t].end());
  }

  stats.cves_with_valid_cpe = valid;
  stats.cpe_usage_fraction =
      stats.total_cves == 0
          ? 0.0
          : static_cast<double>(valid) / static_cast<double>(stats.total_cves);
  stats.config_specific_fraction =
      stats.total_cves == 0 ? 0.0
                            : static_cast<double>(specific) /
                                  static_cast<double>(stats.total_cves);

  std::size_t unused = 0;
  for (const auto& key : dictionary.distinct_cpe_keys) {
    if (!used_keys.count(key)) ++unused;
  }
  stats.unused_dictionary_fraction =
      dictionary.distinct_cpe_keys.empty()
          ? 0.0
          : static_cast<double>(unused) /
                static_cast<double>(dictionary.distinct_cpe_keys.size());

  stats.runningon_pair_counts = pair_stats.counts;
  stats.firmware_fraction =
      pair_stats.total == 0 ? 0.0
                            : static_cast<double>(pair_stats.firmware) /
                                  static_cast<double>(pair_stats.total);
  stats.same_vendor_config_fraction =
      pair_stats.total == 0 ? 0.0
                            : static_cast<double>(pair_stats.same_vendor) /
                                  static_cast<double>(pair_stats.total);
  return stats;
}

}  // namespace cpegraph
