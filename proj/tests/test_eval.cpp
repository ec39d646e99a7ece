#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cpegraph/eval.hpp"
#include "cpegraph/jsonl.hpp"

using namespace cpegraph;

namespace {

const std::string kFixtures = CPEGRAPH_FIXTURE_DIR;

CanonicalDictionary fixture_dictionary() {
  auto entries = read_catalog_jsonl(kFixtures + "/catalog.jsonl");
  auto dict_result = ingest_cpe_dictionary(kFixtures + "/cpe_dict.jsonl");
  entries.insert(entries.end(), dict_result.entries.begin(),
                 dict_result.entries.end());
  ProductCatalog catalog(entries);
  HeuristicConfig cfg;
  auto groups = cluster_inconsistencies(catalog, cfg);
  for (auto& g : groups) {
    if (g.heuristic == Heuristic::format_variation &&
        std::find(g.members.begin(), g.members.end(), "Microsoft Corp") !=
            g.members.end()) {
      g.status = GroupStatus::rejected_by_review;
    } else {
      g.status = GroupStatus::confirmed;
    }
  }
  return build_canonical_dictionary(entries, groups, {{"microsoft", 1200}});
}

struct RetrievalWorld {
  Store store;
  SysGraph sys;
  GroundTruth gt;
  CanonicalDictionary dict;
};

RetrievalWorld build_world() {
  RetrievalWorld world;
  world.dict = fixture_dictionary();
  auto feed = ingest_nvd_feed(kFixtures + "/retrieval_feed.jsonl");
  ResolveCache cache;
  std::vector<UnresolvedMatch> unresolved;
  for (const auto& rec : feed.records) {
    auto batch = batch_for_record(rec, world.dict, 0.8, unresolved, &cache);
    if (!batch.vulnerabilities.empty()) world.store.put_batch(batch);
  }
  std::vector<UnresolvedComponent> unresolved_components;
  world.sys = build_sys_graph(read_json_file(kFixtures + "/inventory.json"),
                              world.dict, 0.8, unresolved_components);
  world.gt = load_ground_truth(kFixtures + "/ground_truth.json");
  return world;
}

}  // namespace

TEST_CASE("score is plain set arithmetic") {
  auto m = score({"A", "B", "C"}, {"B", "C", "D"});
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.precision == doctest::Approx(2.0 / 3.0));
  CHECK(m.coverage == doctest::Approx(2.0 / 3.0));
  CHECK(m.precision_defined);
  CHECK(m.coverage_defined);

  auto perfect = score({"A"}, {"A"});
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.coverage == 1.0);

  auto nothing = score({}, {"A", "B"});
  CHECK(nothing.tp == 0);
  CHECK(nothing.fp == 0);
  CHECK(nothing.fn == 2);
  CHECK_FALSE(nothing.precision_defined);  // undefined-zero
  CHECK(nothing.precision == 0.0);
  CHECK(nothing.coverage == 0.0);
  CHECK(nothing.coverage_defined);
}

TEST_CASE("score invariants") {
  auto m = score({"A", "B", "X", "Y"}, {"A", "B", "C"});
  CHECK(m.tp + m.fn == 3);
  CHECK(m.tp + m.fp == 4);
  CHECK(m.precision >= 0.0);
  CHECK(m.precision <= 1.0);
  CHECK(m.coverage >= 0.0);
  CHECK(m.coverage <= 1.0);

  // permutation invariance: relabeling ids does not change the counts
  auto relabeled = score({"K1", "K2", "K8", "K9"}, {"K1", "K2", "K3"});
  CHECK(relabeled.tp == m.tp);
  CHECK(relabeled.fp == m.fp);
  CHECK(relabeled.fn == m.fn);
}

TEST_CASE("graph-filtered retrieval dominates on the adversarial fixture") {
  auto world = build_world();
  auto table = run_comparison(world.store, world.sys, world.gt,
                              {Strategy::keyword_match, Strategy::cpe_query,
                               Strategy::ucpe_graph_filtered},
                              world.dict, 0.8);

  const auto* graph_avg = table.find(Strategy::ucpe_graph_filtered, "average");
  const auto* cpe_avg = table.find(Strategy::cpe_query, "average");
  const auto* kw_avg = table.find(Strategy::keyword_match, "average");
  REQUIRE(graph_avg);
  REQUIRE(cpe_avg);
  REQUIRE(kw_avg);

  CHECK(graph_avg->precision == 1.0);
  CHECK(graph_avg->coverage == 1.0);
  CHECK(kw_avg->precision < 1.0);
  CHECK(graph_avg->precision >= cpe_avg->precision);
  CHECK(cpe_avg->precision >= kw_avg->precision);

  // per-asset graph rows are perfect too: the ground truth was constructed
  // from actual applicability
  for (const auto& asset : world.sys.assets) {
    const auto* row = table.find(Strategy::ucpe_graph_filtered, asset.asset_id);
    REQUIRE(row);
    CHECK(row->precision == 1.0);
    CHECK(row->coverage == 1.0);
  }
}

TEST_CASE("averages are the arithmetic mean of per-asset rows") {
  auto world = build_world();
  auto table = run_comparison(world.store, world.sys, world.gt,
                              {Strategy::keyword_match}, world.dict, 0.8);
  double precision_sum = 0, coverage_sum = 0;
  std::size_t count = 0;
  for (const auto& row : table.rows) {
    if (row.asset_id == "average") continue;
    precision_sum += row.metrics.precision;
    coverage_sum += row.metrics.coverage;
    ++count;
  }
  const auto* avg = table.find(Strategy::keyword_match, "average");
  REQUIRE(avg);
  CHECK(avg->precision ==
        doctest::Approx(precision_sum / static_cast<double>(count)));
  CHECK(avg->coverage ==
        doctest::Approx(coverage_sum / static_cast<double>(count)));
}

TEST_CASE("single strategy yields per-asset rows plus one average") {
  auto world = build_world();
  auto table = run_comparison(world.store, world.sys, world.gt,
                              {Strategy::cpe_query}, world.dict, 0.8);
  CHECK(table.rows.size() == world.sys.assets.size() + 1);
}

TEST_CASE("missing ground truth is an error") {
  auto world = build_world();
  GroundTruth incomplete;
  incomplete["linux-vm-1"] = {"CVE-2011-0001"};
  CHECK_THROWS_AS(run_comparison(world.store, world.sys, incomplete,
                                 {Strategy::cpe_query}, world.dict, 0.8),
                  Error);
  CHECK_THROWS_AS(load_ground_truth("/nonexistent/gt.json"), Error);
}

TEST_CASE("csv and json outputs carry every row") {
  auto world = build_world();
  auto table = run_comparison(world.store, world.sys, world.gt,
                              {Strategy::keyword_match, Strategy::cpe_query},
                              world.dict, 0.8);
  auto csv = table.to_csv();
  CHECK(csv.find("keyword-match,linux-vm-1") != std::string::npos);
  CHECK(csv.find("cpe-query,average") != std::string::npos);
  auto j = table.to_json();
  CHECK(j.at("rows").size() == table.rows.size());
}
