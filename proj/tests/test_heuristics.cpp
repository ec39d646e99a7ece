#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "cpegraph/heuristics.hpp"
#include "cpegraph/similarity.hpp"

using namespace cpegraph;

namespace {

ProductCatalog fixture_catalog() {
  return ProductCatalog(read_catalog_jsonl(
      std::string(CPEGRAPH_FIXTURE_DIR) + "/catalog.jsonl"));
}

ProductCatalog small_catalog(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& rows) {
  ProductCatalog catalog;
  for (const auto& [vendor, products] : rows) {
    for (const auto& product : products) {
      CatalogEntry e;
      e.vendor = vendor;
      e.product = product;
      catalog.add(e);
    }
  }
  return catalog;
}

}  // namespace

TEST_CASE("shared product ratio variants") {
  auto catalog = small_catalog({{"v1", {"a", "b", "c", "d"}}, {"v2", {"a", "b"}},
                                {"v3", {"a", "b", "c", "d"}},
                                {"v4", {"x", "y"}},
                                {"v5", {}}});
  CHECK(shared_product_ratio(catalog, "v1", "v3", SprVariant::jaccard) == 1.0);
  CHECK(shared_product_ratio(catalog, "v1", "v3",
                             SprVariant::min_denominator) == 1.0);
  CHECK(shared_product_ratio(catalog, "v1", "v2", SprVariant::jaccard) == 0.5);
  CHECK(shared_product_ratio(catalog, "v1", "v2",
                             SprVariant::min_denominator) == 1.0);
  CHECK(shared_product_ratio(catalog, "v1", "v4", SprVariant::jaccard) == 0.0);
  CHECK_THROWS_AS(
      shared_product_ratio(catalog, "v1", "nope", SprVariant::jaccard), Error);
}

TEST_CASE("jaccard spr never exceeds min-denominator spr") {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::string> p1, p2;
    std::uniform_int_distribution<int> n(1, 8), id(0, 11);
    for (int i = n(rng); i > 0; --i) p1.push_back("p" + std::to_string(id(rng)));
    for (int i = n(rng); i > 0; --i) p2.push_back("p" + std::to_string(id(rng)));
    auto catalog = small_catalog({{"a", p1}, {"b", p2}});
    CHECK(shared_product_ratio(catalog, "a", "b", SprVariant::jaccard) <=
          shared_product_ratio(catalog, "a", "b",
                               SprVariant::min_denominator) + 1e-12);
  }
}

TEST_CASE("format variation") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  CHECK(detect_format_variation(catalog, "Microsoft Corp", "microsoft-corp",
                                cfg));
  CHECK_FALSE(detect_format_variation(catalog, "Microsoft", "Microsfot", cfg));
  CHECK_THROWS_AS(
      detect_format_variation(catalog, "Microsoft", "Microsoft", cfg), Error);

  // product mode: same vendor replaces the SPR gate
  CHECK(detect_format_variation_product("Microsoft", "Windows 10", "Microsoft",
                                        "Windows-10"));
  CHECK_FALSE(detect_format_variation_product("Microsoft", "Windows 10",
                                              "Oracle", "Windows-10"));
  CHECK_FALSE(detect_format_variation_product("Microsoft", "Word", "Microsoft",
                                              "Office"));
}

TEST_CASE("spelling errors") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  CHECK(detect_spelling_error(catalog, "Microsoft", "Microsfot", cfg));
  CHECK(sim_edit_raw("Microsoft", "Microsfot") >= cfg.tau_spelling);
  // below the length floor
  auto tiny = small_catalog({{"abc", {"p"}}, {"abd", {"p"}}});
  CHECK_FALSE(detect_spelling_error(tiny, "abc", "abd", cfg));
  // first letters differ
  auto fl = small_catalog({{"oracle", {"p"}}, {"macle", {"p"}}});
  CHECK_FALSE(detect_spelling_error(fl, "oracle", "macle", cfg));
}

TEST_CASE("substring matches") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  CHECK(detect_substring_match(catalog, "Apache",
                               "Apache Software Foundation", cfg));
  CHECK_FALSE(detect_substring_match(catalog, "Apache", "Apache", cfg));
  // SPR gate: "son" embedded in "Ericsson" but no shared products
  auto gate = small_catalog({{"son", {"p1"}}, {"Ericsson", {"p2"}}});
  CHECK_FALSE(detect_substring_match(gate, "son", "Ericsson", cfg));
}

TEST_CASE("product as vendor") {
  auto catalog = fixture_catalog();
  auto witnesses = detect_product_as_vendor(catalog, "Windows");
  REQUIRE(!witnesses.empty());
  bool microsoft_witness = false;
  for (const auto& w : witnesses) {
    if (normalize_str(w.owner_vendor) == "microsoft" && w.product == "windows") {
      microsoft_witness = true;
    }
  }
  CHECK(microsoft_witness);
  CHECK(detect_product_as_vendor(catalog, "SAP").empty());

  // two owners when two vendors list the product
  auto two = small_catalog(
      {{"Chrome", {"ext"}}, {"Google", {"chrome"}}, {"forky", {"chrome"}}});
  CHECK(detect_product_as_vendor(two, "Chrome").size() == 2);
}

TEST_CASE("shared product names") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  CHECK(shared_product_ratio(catalog, "Sun Microsystems", "Oracle",
                             SprVariant::min_denominator) ==
        doctest::Approx(0.8));
  CHECK(detect_shared_product_names(catalog, "Sun Microsystems", "Oracle",
                                    cfg));
  auto disjoint = small_catalog({{"a", {"x"}}, {"b", {"y"}}});
  CHECK_FALSE(detect_shared_product_names(disjoint, "a", "b", cfg));
  auto contained = small_catalog({{"small", {"x", "y"}},
                                  {"big", {"x", "y", "z", "w", "q"}}});
  CHECK(detect_shared_product_names(contained, "small", "big", cfg));
}

TEST_CASE("acronym") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  CHECK(detect_acronym(catalog, "IBM", "International Business Machines", cfg));
  CHECK(detect_acronym(catalog, "International Business Machines", "IBM", cfg));
  CHECK_FALSE(detect_acronym(catalog, "Apache", "Oracle", cfg));
}

namespace {

// Brute-force oracle: evaluate every detector over every unordered pair,
// then union-find per heuristic.
std::map<Heuristic, std::vector<std::set<std::string>>> oracle_groups(
    const ProductCatalog& catalog, const HeuristicConfig& cfg) {
  const auto& vendors = catalog.vendors();
  std::map<Heuristic, std::vector<std::pair<std::string, std::string>>> hits;
  for (std::size_t i = 0; i < vendors.size(); ++i) {
    for (std::size_t j = i + 1; j < vendors.size(); ++j) {
      const auto& a = vendors[i];
      const auto& b = vendors[j];
      const bool norm_equal = normalize_str(a) == normalize_str(b);
      if (norm_equal) {
        if (!normalize_str(a).empty() && detect_format_variation(catalog, a, b, cfg)) {
          hits[Heuristic::format_variation].push_back({a, b});
        }
        continue;
      }
      if (detect_spelling_error(catalog, a, b, cfg)) {
        hits[Heuristic::spelling_error].push_back({a, b});
      }
      if (detect_acronym(catalog, a, b, cfg)) {
        hits[Heuristic::acronym].push_back({a, b});
      }
      if (detect_substring_match(catalog, a, b, cfg)) {
        hits[Heuristic::substring_match].push_back({a, b});
      }
      if (detect_shared_product_names(catalog, a, b, cfg)) {
        hits[Heuristic::shared_product_names].push_back({a, b});
      }
    }
  }
  for (const auto& v : vendors) {
    for (const auto& w : detect_product_as_vendor(catalog, v)) {
      hits[Heuristic::product_as_vendor].push_back({v, w.owner_vendor});
    }
  }

  std::map<Heuristic, std::vector<std::set<std::string>>> out;
  for (auto& [heuristic, pairs] : hits) {
    std::vector<std::set<std::string>> components;
    for (const auto& [a, b] : pairs) {
      std::vector<std::size_t> touching;
      for (std::size_t k = 0; k < components.size(); ++k) {
        if (components[k].count(a) || components[k].count(b)) {
          touching.push_back(k);
        }
      }
      if (touching.empty()) {
        components.push_back({a, b});
      } else {
        auto& target = components[touching.front()];
        target.insert(a);
        target.insert(b);
        for (std::size_t t = touching.size(); t-- > 1;) {
          target.insert(components[touching[t]].begin(),
                        components[touching[t]].end());
          components.erase(components.begin() +
                           static_cast<std::ptrdiff_t>(touching[t]));
        }
      }
    }
    out[heuristic] = std::move(components);
  }
  return out;
}

}  // namespace

TEST_CASE("clustering equals the brute-force union-find oracle") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  auto groups = cluster_inconsistencies(catalog, cfg);
  auto expected = oracle_groups(catalog, cfg);

  std::map<Heuristic, std::vector<std::set<std::string>>> got;
  for (const auto& g : groups) {
    CHECK(g.members.size() >= 2);
    CHECK(std::find(g.members.begin(), g.members.end(), g.canonical) !=
          g.members.end());
    CHECK(g.status == GroupStatus::possible);
    got[g.heuristic].push_back(
        std::set<std::string>(g.members.begin(), g.members.end()));
  }
  for (auto& [h, comps] : expected) {
    std::sort(comps.begin(), comps.end());
  }
  for (auto& [h, comps] : got) {
    std::sort(comps.begin(), comps.end());
  }
  CHECK(got == expected);
}

TEST_CASE("chained pairs collapse into one group") {
  // A~B and B~C by substring; A and C unrelated directly.
  auto catalog = small_catalog({{"core", {"p1", "p2"}},
                                {"core plus", {"p1", "p2", "p3"}},
                                {"core plus max", {"p1", "p2", "p3"}}});
  HeuristicConfig cfg;
  auto groups = cluster_inconsistencies(catalog, cfg);
  bool found = false;
  for (const auto& g : groups) {
    if (g.heuristic == Heuristic::substring_match && g.members.size() == 3) {
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("empty catalog produces no groups") {
  ProductCatalog catalog;
  HeuristicConfig cfg;
  CHECK(cluster_inconsistencies(catalog, cfg).empty());
}

TEST_CASE("heimdal family groups as in the naming study") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  auto groups = cluster_inconsistencies(catalog, cfg);
  bool found = false;
  for (const auto& g : groups) {
    if (g.heuristic != Heuristic::substring_match) continue;
    std::set<std::string> members(g.members.begin(), g.members.end());
    if (members == std::set<std::string>{"heimdal", "heimdal_project",
                                         "heimdalsecurity"}) {
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("product-scope format clustering") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  auto groups = cluster_product_inconsistencies(catalog, cfg);
  bool windows10 = false;
  for (const auto& g : groups) {
    if (g.vendor == "Microsoft" &&
        std::find(g.members.begin(), g.members.end(), "Windows-10") !=
            g.members.end()) {
      windows10 = true;
      CHECK(g.scope == GroupScope::product);
    }
  }
  CHECK(windows10);
}

TEST_CASE("review decisions apply by stable group id") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  auto groups = cluster_inconsistencies(catalog, cfg);
  REQUIRE(!groups.empty());
  const std::string id = groups.front().group_id();
  apply_review(groups, {json{{"group_id", id}, {"status", "Confirmed"}}});
  CHECK(groups.front().status == GroupStatus::confirmed);
  // unknown ids ignored, bad status rejected
  apply_review(groups, {json{{"group_id", "nope"}, {"status", "Confirmed"}}});
  CHECK_THROWS_AS(
      apply_review(groups, {json{{"group_id", id}, {"status", "Yes"}}}),
      Error);
  // ids survive re-clustering
  auto again = cluster_inconsistencies(catalog, cfg);
  CHECK(again.front().group_id() == id);
}

TEST_CASE("group json round trip") {
  auto catalog = fixture_catalog();
  HeuristicConfig cfg;
  for (const auto& g : cluster_inconsistencies(catalog, cfg)) {
    auto back = InconsistencyGroup::from_json(g.to_json());
    CHECK(back.members == g.members);
    CHECK(back.heuristic == g.heuristic);
    CHECK(back.group_id() == g.group_id());
  }
}
