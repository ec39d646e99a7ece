#include "cpegraph/dictionary.hpp"

#include <omp.h>

#include <algorithm>

#include "cpegraph/jsonl.hpp"
#include "cpegraph/similarity.hpp"
#include "cpegraph/version.hpp"

namespace cpegraph {

namespace {

const std::vector<std::string> kNoVersions;

long count_for(const std::map<std::string, long>& counts,
               const std::string& raw) {
  auto it = counts.find(raw);
  if (it != counts.end()) return it->second;
  // Raw names are often spelled in CPE token form; fall back to the
  // normalized key so "Microsoft Corp" and "microsoft_corp" share counts.
  it = counts.find(normalize_str(raw));
  return it == counts.end() ? 0 : it->second;
}

std::string pick_canonical(const InconsistencyGroup& group,
                           const std::map<std::string, long>& counts) {
  const std::string* best = nullptr;
  long best_count = -1;
  std::string best_norm;
  for (const auto& member : group.members) {
    const long c = count_for(counts, member);
    const std::string n = normalize_str(member);
    if (!best || c > best_count || (c == best_count && n < best_norm)) {
      best = &member;
      best_count = c;
      best_norm = n;
    }
  }
  return best_norm;
}

}  // namespace

const std::vector<std::string>& CanonicalDictionary::releases_of(
    std::string_view vendor, std::string_view product) const {
  auto it = versions.find({std::string(vendor), std::string(product)});
  return it == versions.end() ? kNoVersions : it->second;
}

bool CanonicalDictionary::has_product(std::string_view vendor,
                                      std::string_view product) const {
  auto it = products.find(std::string(vendor));
  return it != products.end() && it->second.count(std::string(product)) > 0;
}

long CanonicalDictionary::cve_count(std::string_view vendor) const {
  auto it = vendor_cve_counts.find(std::string(vendor));
  return it == vendor_cve_counts.end() ? 0 : it->second;
}

json CanonicalDictionary::to_json() const {
  json jvendors = json::array();
  for (const auto& v : vendors) jvendors.push_back(v);

  json jproducts = json::object();
  for (const auto& [vendor, prods] : products) {
    jproducts[vendor] = json::array();
    for (const auto& p : prods) jproducts[vendor].push_back(p);
  }

  json jversions = json::array();
  for (const auto& [key, list] : versions) {
    jversions.push_back(json{
        {"vendor", key.first}, {"product", key.second}, {"versions", list}});
  }

  return json{{"vendors", jvendors},
              {"products", jproducts},
              {"versions", jversions},
              {"vendor_aliases", vendor_aliases},
              {"product_aliases", product_aliases},
              {"vendor_cve_counts", vendor_cve_counts}};
}

CanonicalDictionary CanonicalDictionary::from_json(const json& j) {
  CanonicalDictionary d;
  for (const auto& v : j.at("vendors")) d.vendors.insert(v.get<std::string>());
  for (const auto& [vendor, prods] : j.at("products").items()) {
    for (const auto& p : prods) d.products[vendor].insert(p.get<std::string>());
  }
  for (const auto& row : j.at("versions")) {
    d.versions[{row.at("vendor").get<std::string>(),
                row.at("product").get<std::string>()}] =
        row.at("versions").get<std::vector<std::string>>();
  }
  d.vendor_aliases =
      j.value("vendor_aliases", std::map<std::string, std::string>{});
  d.product_aliases =
      j.value("product_aliases", std::map<std::string, std::string>{});
  d.vendor_cve_counts =
      j.value("vendor_cve_counts", std::map<std::string, long>{});
  return d;
}

void CanonicalDictionary::save(const std::string& path) const {
  write_json_file(path, to_json(), "inconsistency");
}

CanonicalDictionary CanonicalDictionary::load(const std::string& path) {
  return from_json(read_json_file(path, "inconsistency"));
}

CanonicalDictionary build_canonical_dictionary(
    const std::vector<CatalogEntry>& catalog,
    const std::vector<InconsistencyGroup>& groups,
    const std::map<std::string, long>& cve_counts_by_raw_name) {
  // Resolve confirmed groups to canonical names first, vendor scope and
  // product scope separately.
  std::map<std::string, std::string> vendor_canon;   // raw -> canonical norm
  std::map<std::string, std::string> product_canon;  // raw -> canonical norm

  for (const auto& group : groups) {
    if (group.status != GroupStatus::confirmed) continue;
    const std::string canonical =
        pick_canonical(group, cve_counts_by_raw_name);
    auto& target =
        group.scope == GroupScope::vendor ? vendor_canon : product_canon;
    for (const auto& member : group.members) {
      auto [it, inserted] = target.emplace(member, canonical);
      if (!inserted && it->second != canonical) {
        throw Error(errc::conflicting_groups, "inconsistency",
                    "name confirmed into groups with different canonicals: " +
                        member,
                    json{{"name", member},
                         {"canonical_a", it->second},
                         {"canonical_b", canonical}});
      }
    }
  }

  auto canon_vendor = [&](const std::string& raw) {
    auto it = vendor_canon.find(raw);
    return it != vendor_canon.end() ? it->second : normalize_str(raw);
  };
  auto canon_product = [&](const std::string& raw) {
    auto it = product_canon.find(raw);
    return it != product_canon.end() ? it->second : normalize_str(raw);
  };

  CanonicalDictionary dict;
  for (const auto& entry : catalog) {
    const std::string vc = canon_vendor(entry.vendor);
    const std::string pc = canon_product(entry.product);
    if (vc.empty() || pc.empty()) continue;
    dict.vendors.insert(vc);
    dict.products[vc].insert(pc);
    auto& versions = dict.versions[{vc, pc}];
    versions.insert(versions.end(), entry.versions.begin(),
                    entry.versions.end());
  }
  for (auto& [key, list] : dict.versions) sort_versions(list);

  // Alias maps carry both the raw spelling and its normalized form.
  for (const auto& [raw, canonical] : vendor_canon) {
    dict.vendor_aliases[raw] = canonical;
    dict.vendor_aliases[normalize_str(raw)] = canonical;
  }
  for (const auto& [raw, canonical] : product_canon) {
    dict.product_aliases[raw] = canonical;
    dict.product_aliases[normalize_str(raw)] = canonical;
  }
  // Canonical names map to themselves; drop no-op alias entries.
  for (auto it = dict.vendor_aliases.begin();
       it != dict.vendor_aliases.end();) {
    it = it->first == it->second ? dict.vendor_aliases.erase(it)
                                 : std::next(it);
  }
  for (auto it = dict.product_aliases.begin();
       it != dict.product_aliases.end();) {
    it = it->first == it->second ? dict.product_aliases.erase(it)
                                 : std::next(it);
  }

  // CVE counts aggregate onto the canonical spelling.
  for (const auto& [raw, count] : cve_counts_by_raw_name) {
    dict.vendor_cve_counts[canon_vendor(raw)] += count;
  }

  return dict;
}

namespace {

std::optional<std::string> standardize_against(
    std::string_view name, const std::map<std::string, std::string>& aliases,
    const std::set<std::string>& canonical_names, double tau) {
  const std::string raw(name);
  if (auto it = aliases.find(raw); it != aliases.end()) return it->second;
  const NormalizedName norm = normalize(raw);
  if (auto it = aliases.find(norm.norm); it != aliases.end()) {
    return it->second;
  }
  if (canonical_names.count(norm.norm)) return norm.norm;

  // argmax of edit similarity over canonical names; lexicographic order
  // breaks ties because std::set iterates sorted.
  std::optional<std::string> best;
  double best_sim = -1.0;
  for (const auto& candidate : canonical_names) {
    const double sim = sim_edit(norm, NormalizedName{candidate, candidate});
    if (sim > best_sim) {
      best_sim = sim;
      best = candidate;
    }
  }
  if (best && best_sim >= tau) return best;
  return std::nullopt;
}

}  // namespace

std::optional<std::string> standardize(std::string_view name,
                                       const CanonicalDictionary& dict,
                                       double tau) {
  return standardize_against(name, dict.vendor_aliases, dict.vendors, tau);
}

std::optional<std::string> standardize_product(
    std::string_view name, const CanonicalDictionary& dict,
    std::string_view canonical_vendor, double tau) {
  auto it = dict.products.find(std::string(canonical_vendor));
  if (it == dict.products.end()) {
    throw Error(errc::unknown_vendor, "postprocess",
                "vendor not in dictionary: " + std::string(canonical_vendor));
  }
  return standardize_against(name, dict.product_aliases, it->second, tau);
}

std::vector<std::optional<std::string>> standardize_batch_serial(
    const std::vector<std::string>& names, const CanonicalDictionary& dict,
    double tau) {
  std::vector<std::optional<std::string>> out(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    out[i] = standardize(names[i], dict, tau);
  }
  return out;
}

std::vector<std::optional<std::string>> standardize_batch_parallel(
    const std::vector<std::string>& names, const CanonicalDictionary& dict,
    double tau, int threads) {
  std::vector<std::optional<std::string>> out(names.size());
  if (threads < 1) threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
  for (long long i = 0; i < static_cast<long long>(names.size()); ++i) {
    out[static_cast<std::size_t>(i)] =
        standardize(names[static_cast<std::size_t>(i)], dict, tau);
  }
  return out;
}

}  // namespace cpegraph
