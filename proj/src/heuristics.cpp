#include "cpegraph/heuristics.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "cpegraph/cpe.hpp"
#include "cpegraph/similarity.hpp"

namespace cpegraph {

namespace {

std::size_t intersection_size(const std::set<std::string>& a,
                              const std::set<std::string>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::size_t n = 0;
  for (const auto& item : small) n += large.count(item);
  return n;
}

bool is_strict_substring(std::string_view needle, std::string_view hay) {
  return needle.size() < hay.size() &&
         hay.find(needle) != std::string_view::npos;
}

std::string acronym_of(const std::string& norm) {
  std::string out;
  for (const auto& token : norm_tokens(norm)) out.push_back(token.front());
  return out;
}

// Union-find over member indices.
struct DisjointSet {
  std::vector<std::size_t> parent;

  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

void HeuristicConfig::validate() const {
  auto in_unit = [](double x) { return x > 0.0 && x <= 1.0; };
  if (!in_unit(tau_spelling) || !in_unit(theta_p) || !in_unit(theta_high) ||
      min_len_m < 1) {
    throw Error(errc::config_error, "inconsistency",
                "heuristic thresholds must lie in (0,1] and m >= 1");
  }
}

const char* heuristic_name(Heuristic h) {
  switch (h) {
    case Heuristic::format_variation: return "FormatVariation";
    case Heuristic::spelling_error: return "SpellingError";
    case Heuristic::acronym: return "Acronym";
    case Heuristic::substring_match: return "SubstringMatch";
    case Heuristic::product_as_vendor: return "ProductAsVendor";
    case Heuristic::shared_product_names: return "SharedProductNames";
  }
  return "?";
}

const char* group_status_name(GroupStatus s) {
  switch (s) {
    case GroupStatus::possible: return "Possible";
    case GroupStatus::confirmed: return "Confirmed";
    case GroupStatus::rejected_by_review: return "RejectedByReview";
  }
  return "?";
}

std::optional<GroupStatus> group_status_from_name(std::string_view name) {
  if (name == "Possible") return GroupStatus::possible;
  if (name == "Confirmed") return GroupStatus::confirmed;
  if (name == "RejectedByReview") return GroupStatus::rejected_by_review;
  return std::nullopt;
}

double shared_product_ratio(const ProductCatalog& catalog, std::string_view v1,
                            std::string_view v2, SprVariant variant) {
  const auto& p1 = catalog.products_of(v1);
  const auto& p2 = catalog.products_of(v2);
  const std::size_t inter = intersection_size(p1, p2);
  if (variant == SprVariant::jaccard) {
    const std::size_t uni = p1.size() + p2.size() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
  }
  const std::size_t denom = std::min(p1.size(), p2.size());
  if (denom == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(denom);
}

bool detect_format_variation(const ProductCatalog& catalog,
                             std::string_view v1, std::string_view v2,
                             const HeuristicConfig& cfg) {
  if (v1 == v2) {
    throw Error(errc::config_error, "inconsistency",
                "format variation requires two distinct raw names");
  }
  if (normalize_str(v1) != normalize_str(v2)) return false;
  return shared_product_ratio(catalog, v1, v2, SprVariant::jaccard) >=
         cfg.theta_p;
}

bool detect_format_variation_product(std::string_view vendor1,
                                     std::string_view product1,
                                     std::string_view vendor2,
                                     std::string_view product2) {
  if (product1 == product2) return false;
  if (normalize_str(product1) != normalize_str(product2)) return false;
  return normalize_str(vendor1) == normalize_str(vendor2);
}

bool detect_spelling_error(const ProductCatalog& catalog, std::string_view v1,
                           std::string_view v2, const HeuristicConfig& cfg) {
  const auto n1 = normalize(v1);
  const auto n2 = normalize(v2);
  if (n1.norm.empty() || n2.norm.empty()) return false;
  if (n1.norm.front() != n2.norm.front()) return false;
  if (n1.norm.size() < cfg.min_len_m || n2.norm.size() < cfg.min_len_m) {
    return false;
  }
  if (sim_edit(n1, n2) < cfg.tau_spelling) return false;
  return shared_product_ratio(catalog, v1, v2, SprVariant::jaccard) >=
         cfg.theta_p;
}

bool detect_substring_match(const ProductCatalog& catalog, std::string_view v1,
                            std::string_view v2, const HeuristicConfig& cfg) {
  const std::string n1 = normalize_str(v1);
  const std::string n2 = normalize_str(v2);
  if (n1.empty() || n2.empty()) return false;
  if (!is_strict_substring(n1, n2) && !is_strict_substring(n2, n1)) {
    return false;
  }
  return shared_product_ratio(catalog, v1, v2, SprVariant::jaccard) >=
         cfg.theta_p;
}

bool detect_acronym(const ProductCatalog& catalog, std::string_view v1,
                    std::string_view v2, const HeuristicConfig& cfg) {
  const std::string n1 = normalize_str(v1);
  const std::string n2 = normalize_str(v2);
  if (n1.empty() || n2.empty()) return false;
  const auto t1 = norm_tokens(n1);
  const auto t2 = norm_tokens(n2);
  bool hit = (t1.size() == 1 && t2.size() >= 2 && n1 == acronym_of(n2)) ||
             (t2.size() == 1 && t1.size() >= 2 && n2 == acronym_of(n1));
  if (!hit) return false;
  return shared_product_ratio(catalog, v1, v2, SprVariant::jaccard) >=
         cfg.theta_p;
}

bool detect_shared_product_names(const ProductCatalog& catalog,
                                 std::string_view v1, std::string_view v2,
                                 const HeuristicConfig& cfg) {
  if (v1 == v2) {
    throw Error(errc::config_error, "inconsistency",
                "shared product names requires two distinct raw names");
  }
  return shared_product_ratio(catalog, v1, v2, SprVariant::min_denominator) >=
         cfg.theta_high;
}

std::vector<ProductAsVendorWitness> detect_product_as_vendor(
    const ProductCatalog& catalog, std::string_view v) {
  const std::string norm_v = normalize_str(v);
  std::vector<ProductAsVendorWitness> out;
  if (norm_v.empty()) return out;
  for (const auto& other : catalog.vendors()) {
    if (other == v) continue;
    if (catalog.products_of(other).count(norm_v)) {
      out.push_back(ProductAsVendorWitness{other, norm_v});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Evaluates every heuristic for one ordered vendor pair. Hits keep the
// evidence used by the review step. Names with equal normalized forms belong
// to the format-variation category only; the semantic heuristics run on the
// remainder, mirroring how the categories are reported separately.
void evaluate_pair(const ProductCatalog& catalog,
                   const std::vector<std::string>& vendors, std::size_t i,
                   std::size_t j, const HeuristicConfig& cfg,
                   std::vector<DetectedPair>& out) {
  const std::string& v1 = vendors[i];
  const std::string& v2 = vendors[j];
  const auto n1 = normalize(v1);
  const auto n2 = normalize(v2);
  const double spr_j =
      shared_product_ratio(catalog, v1, v2, SprVariant::jaccard);
  const double spr_min =
      shared_product_ratio(catalog, v1, v2, SprVariant::min_denominator);
  const double sim = sim_edit(n1, n2);

  if (n1.norm == n2.norm && !n1.norm.empty()) {
    if (spr_j >= cfg.theta_p) {
      out.push_back({Heuristic::format_variation, i, j, {sim, spr_j}});
    }
    return;
  }

  if (detect_spelling_error(catalog, v1, v2, cfg)) {
    out.push_back({Heuristic::spelling_error, i, j, {sim, spr_j}});
  }
  if (detect_acronym(catalog, v1, v2, cfg)) {
    out.push_back({Heuristic::acronym, i, j, {sim, spr_j}});
  }
  if (detect_substring_match(catalog, v1, v2, cfg)) {
    out.push_back({Heuristic::substring_match, i, j, {sim, spr_j}});
  }
  if (detect_shared_product_names(catalog, v1, v2, cfg)) {
    out.push_back({Heuristic::shared_product_names, i, j, {sim, spr_min}});
  }
}

void append_product_as_vendor_pairs(const ProductCatalog& catalog,
                                    const std::vector<std::string>& vendors,
                                    std::vector<DetectedPair>& out) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vendors.size(); ++i) index[vendors[i]] = i;
  for (std::size_t i = 0; i < vendors.size(); ++i) {
    for (const auto& witness : detect_product_as_vendor(catalog, vendors[i])) {
      const std::size_t j = index.at(witness.owner_vendor);
      const auto lo = std::min(i, j);
      const auto hi = std::max(i, j);
      out.push_back({Heuristic::product_as_vendor, lo, hi,
                     {sim_edit_raw(vendors[lo], vendors[hi]), 0.0}});
    }
  }
}

void sort_pairs(std::vector<DetectedPair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.left, a.right, a.heuristic) <
           std::tie(b.left, b.right, b.heuristic);
  });
  pairs.erase(std::unique(pairs.begin(), pairs.end(),
                          [](const auto& a, const auto& b) {
                            return a.left == b.left && a.right == b.right &&
                                   a.heuristic == b.heuristic;
                          }),
              pairs.end());
}

}  // namespace

std::vector<DetectedPair> detect_pairs_serial(const ProductCatalog& catalog,
                                              const HeuristicConfig& cfg) {
  cfg.validate();
  const auto& vendors = catalog.vendors();
  std::vector<DetectedPair> out;
  for (std::size_t i = 0; i < vendors.size(); ++i) {
    for (std::size_t j = i + 1; j < vendors.size(); ++j) {
      evaluate_pair(catalog, vendors, i, j, cfg, out);
    }
  }
  append_product_as_vendor_pairs(catalog, vendors, out);
  sort_pairs(out);
  return out;
}

std::vector<DetectedPair> detect_pairs_parallel(const ProductCatalog& catalog,
                                                const HeuristicConfig& cfg,
                                                int threads) {
  cfg.validate();
  const auto& vendors = catalog.vendors();
  const std::size_t n = vendors.size();
  const std::size_t total = n < 2 ? 0 : n * (n - 1) / 2;

  if (threads < 1) threads = omp_get_max_threads();
  std::vector<std::vector<DetectedPair>> local(
      static_cast<std::size_t>(threads));

#pragma omp parallel num_threads(threads)
  {
    auto& mine = local[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 256)
    for (long long k = 0; k < static_cast<long long>(total); ++k) {
      // Unrank the linear index into the (i, j) upper triangle.
      std::size_t i = 0;
      std::size_t rem = static_cast<std::size_t>(k);
      std::size_t row = n - 1;
      while (rem >= row) {
        rem -= row;
        ++i;
        --row;
      }
      const std::size_t j = i + 1 + rem;
      evaluate_pair(catalog, vendors, i, j, cfg, mine);
    }
  }

  std::vector<DetectedPair> out;
  for (auto& chunk : local) {
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  append_product_as_vendor_pairs(catalog, vendors, out);
  sort_pairs(out);
  return out;
}

std::string InconsistencyGroup::group_id() const {
  std::string key = heuristic_name(heuristic);
  key += scope == GroupScope::vendor ? "|v|" : "|p|";
  key += vendor;
  for (const auto& m : members) {
    key.push_back('\x1f');
    key += m;
  }
  return std::string(heuristic_name(heuristic)) + ":" + fnv1a64_hex(key);
}

json InconsistencyGroup::to_json() const {
  json ev = json::array();
  for (const auto& [pair, e] : evidence) {
    ev.push_back(json{{"a", pair.first},
                      {"b", pair.second},
                      {"sim_edit", e.sim_edit},
                      {"spr", e.spr}});
  }
  json j{{"group_id", group_id()},
         {"heuristic", heuristic_name(heuristic)},
         {"scope", scope == GroupScope::vendor ? "vendor" : "product"},
         {"members", members},
         {"canonical", canonical},
         {"status", group_status_name(status)},
         {"evidence", ev}};
  if (scope == GroupScope::product) j["vendor"] = vendor;
  return j;
}

InconsistencyGroup InconsistencyGroup::from_json(const json& j) {
  InconsistencyGroup g;
  const std::string h = j.at("heuristic").get<std::string>();
  bool found = false;
  for (Heuristic cand :
       {Heuristic::format_variation, Heuristic::spelling_error,
        Heuristic::acronym, Heuristic::substring_match,
        Heuristic::product_as_vendor, Heuristic::shared_product_names}) {
    if (h == heuristic_name(cand)) {
      g.heuristic = cand;
      found = true;
      break;
    }
  }
  if (!found) {
    throw Error(errc::feed_schema, "inconsistency", "unknown heuristic: " + h);
  }
  g.scope = j.value("scope", "vendor") == "product" ? GroupScope::product
                                                    : GroupScope::vendor;
  g.vendor = j.value("vendor", "");
  g.members = j.at("members").get<std::vector<std::string>>();
  g.canonical = j.value("canonical", "");
  auto status = group_status_from_name(j.value("status", "Possible"));
  g.status = status.value_or(GroupStatus::possible);
  if (j.contains("evidence")) {
    for (const auto& e : j.at("evidence")) {
      g.evidence[{e.at("a").get<std::string>(), e.at("b").get<std::string>()}] =
          PairEvidence{e.value("sim_edit", 0.0), e.value("spr", 0.0)};
    }
  }
  return g;
}

namespace {

std::string provisional_canonical(const std::vector<std::string>& members) {
  // Smallest normalized form, raw string as tie-break.
  const std::string* best = &members.front();
  for (const auto& m : members) {
    auto mn = normalize_str(m);
    auto bn = normalize_str(*best);
    if (std::tie(mn, m) < std::tie(bn, *best)) best = &m;
  }
  return *best;
}

std::vector<InconsistencyGroup> groups_from_pairs(
    const std::vector<std::string>& vendors,
    const std::vector<DetectedPair>& pairs) {
  std::vector<InconsistencyGroup> groups;
  for (Heuristic h :
       {Heuristic::format_variation, Heuristic::spelling_error,
        Heuristic::acronym, Heuristic::substring_match,
        Heuristic::product_as_vendor, Heuristic::shared_product_names}) {
    DisjointSet ds(vendors.size());
    bool any = false;
    for (const auto& p : pairs) {
      if (p.heuristic != h) continue;
      ds.unite(p.left, p.right);
      any = true;
    }
    if (!any) continue;

    std::map<std::size_t, std::vector<std::size_t>> components;
    for (const auto& p : pairs) {
      if (p.heuristic != h) continue;
      for (std::size_t idx : {p.left, p.right}) {
        auto& comp = components[ds.find(idx)];
        if (std::find(comp.begin(), comp.end(), idx) == comp.end()) {
          comp.push_back(idx);
        }
      }
    }
    for (auto& [root, indices] : components) {
      InconsistencyGroup g;
      g.heuristic = h;
      for (std::size_t idx : indices) g.members.push_back(vendors[idx]);
      std::sort(g.members.begin(), g.members.end());
      g.canonical = provisional_canonical(g.members);
      g.status = GroupStatus::possible;
      for (const auto& p : pairs) {
        if (p.heuristic != h || ds.find(p.left) != root) continue;
        g.evidence[{vendors[p.left], vendors[p.right]}] = p.evidence;
      }
      groups.push_back(std::move(g));
    }
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    return std::tie(a.canonical, a.heuristic) <
           std::tie(b.canonical, b.heuristic);
  });
  return groups;
}

}  // namespace

std::vector<InconsistencyGroup> cluster_inconsistencies(
    const ProductCatalog& catalog, const HeuristicConfig& cfg, int workers) {
  const auto pairs = workers <= 1 ? detect_pairs_serial(catalog, cfg)
                                  : detect_pairs_parallel(catalog, cfg,
                                                          workers);
  return groups_from_pairs(catalog.vendors(), pairs);
}

std::vector<InconsistencyGroup> cluster_product_inconsistencies(
    const ProductCatalog& catalog, const HeuristicConfig& cfg) {
  cfg.validate();
  std::vector<InconsistencyGroup> groups;
  for (const auto& vendor : catalog.vendors()) {
    const auto products = catalog.raw_products_of(vendor);
    DisjointSet ds(products.size());
    std::vector<std::pair<std::size_t, std::size_t>> hits;
    for (std::size_t i = 0; i < products.size(); ++i) {
      for (std::size_t j = i + 1; j < products.size(); ++j) {
        if (detect_format_variation_product(vendor, products[i], vendor,
                                            products[j])) {
          ds.unite(i, j);
          hits.emplace_back(i, j);
        }
      }
    }
    std::map<std::size_t, std::vector<std::size_t>> components;
    for (const auto& [i, j] : hits) {
      for (std::size_t idx : {i, j}) {
        auto& comp = components[ds.find(idx)];
        if (std::find(comp.begin(), comp.end(), idx) == comp.end()) {
          comp.push_back(idx);
        }
      }
    }
    for (auto& [root, indices] : components) {
      InconsistencyGroup g;
      g.heuristic = Heuristic::format_variation;
      g.scope = GroupScope::product;
      g.vendor = vendor;
      for (std::size_t idx : indices) g.members.push_back(products[idx]);
      std::sort(g.members.begin(), g.members.end());
      g.canonical = provisional_canonical(g.members);
      for (const auto& [i, j] : hits) {
        if (ds.find(i) != root) continue;
        g.evidence[{products[std::min(i, j)], products[std::max(i, j)]}] =
            PairEvidence{sim_edit_raw(products[i], products[j]), 1.0};
      }
      groups.push_back(std::move(g));
    }
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    return std::tie(a.vendor, a.canonical) < std::tie(b.vendor, b.canonical);
  });
  return groups;
}

void apply_review(std::vector<InconsistencyGroup>& groups,
                  const std::vector<json>& review_lines) {
  std::map<std::string, GroupStatus> decisions;
  for (const json& line : review_lines) {
    auto status =
        group_status_from_name(line.value("status", std::string{}));
    if (!status) {
      throw Error(errc::feed_schema, "inconsistency",
                  "review status must be Possible/Confirmed/RejectedByReview",
                  line);
    }
    decisions[line.at("group_id").get<std::string>()] = *status;
  }
  for (auto& g : groups) {
    auto it = decisions.find(g.group_id());
    if (it != decisions.end()) g.status = it->second;
  }
}

namespace {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

std::string groups_to_csv(const std::vector<InconsistencyGroup>& groups) {
  std::ostringstream out;
  out << "group_id,heuristic,scope,members,canonical,status,evidence\n";
  for (const auto& g : groups) {
    std::string members;
    for (const auto& m : g.members) {
      if (!members.empty()) members += "|";
      members += m;
    }
    std::string evidence;
    for (const auto& [pair, e] : g.evidence) {
      if (!evidence.empty()) evidence += "; ";
      std::ostringstream ev;
      ev << pair.first << "~" << pair.second << " sim=" << e.sim_edit
         << " spr=" << e.spr;
      evidence += ev.str();
    }
    out << csv_escape(g.group_id()) << ',' << heuristic_name(g.heuristic)
        << ',' << (g.scope == GroupScope::vendor ? "vendor" : "product") << ','
        << csv_escape(members) << ',' << csv_escape(g.canonical) << ','
        << group_status_name(g.status) << ',' << csv_escape(evidence) << '\n';
  }
  return out.str();
}

}  // namespace cpegraph
