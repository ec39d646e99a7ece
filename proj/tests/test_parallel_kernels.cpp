// The OpenMP kernels must agree with their serial references exactly, for
// any thread count.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "cpegraph/eval.hpp"
#include "cpegraph/jsonl.hpp"

using namespace cpegraph;

namespace {

const std::string kFixtures = CPEGRAPH_FIXTURE_DIR;

std::vector<CatalogEntry> combined_entries() {
  auto entries = read_catalog_jsonl(kFixtures + "/catalog.jsonl");
  auto dict_result = ingest_cpe_dictionary(kFixtures + "/cpe_dict.jsonl");
  entries.insert(entries.end(), dict_result.entries.begin(),
                 dict_result.entries.end());
  return entries;
}

}  // namespace

TEST_CASE("all-pairs detection: serial == parallel") {
  ProductCatalog catalog(combined_entries());
  HeuristicConfig cfg;
  auto serial = detect_pairs_serial(catalog, cfg);
  for (int threads : {1, 2, 3, 8}) {
    auto parallel = detect_pairs_parallel(catalog, cfg, threads);
    CHECK(parallel == serial);
  }
  // the clustering built on top is identical as well
  auto groups_serial = cluster_inconsistencies(catalog, cfg, 1);
  auto groups_parallel = cluster_inconsistencies(catalog, cfg, 4);
  REQUIRE(groups_serial.size() == groups_parallel.size());
  for (std::size_t i = 0; i < groups_serial.size(); ++i) {
    CHECK(groups_serial[i].members == groups_parallel[i].members);
    CHECK(groups_serial[i].heuristic == groups_parallel[i].heuristic);
  }
}

TEST_CASE("standardize batch: serial == parallel") {
  auto entries = combined_entries();
  auto dict = build_canonical_dictionary(entries, {}, {});
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
  std::vector<std::string> names;
  for (int i = 0; i < 500; ++i) {
    std::string name = entries[pick(rng)].vendor;
    if (i % 3 == 0) name += "x";
    if (i % 7 == 0) name = "zz" + name;
    names.push_back(name);
  }
  auto serial = standardize_batch_serial(names, dict, 0.8);
  for (int threads : {2, 4}) {
    CHECK(standardize_batch_parallel(names, dict, 0.8, threads) == serial);
  }
}

TEST_CASE("corpus stats: serial == parallel") {
  auto feed = ingest_nvd_feed(kFixtures + "/feed_200.jsonl");
  auto dict = ingest_cpe_dictionary(kFixtures + "/cpe_dict.jsonl");
  auto serial = compute_corpus_stats(feed.records, dict, 1);
  for (int workers : {2, 4}) {
    auto parallel = compute_corpus_stats(feed.records, dict, workers);
    CHECK(parallel == serial);
  }
}

TEST_CASE("filter: serial == parallel on the retrieval fixture") {
  auto entries = combined_entries();
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
  auto dict = build_canonical_dictionary(entries, groups, {{"microsoft", 1200}});
  Store store;
  ResolveCache cache;
  std::vector<UnresolvedMatch> unresolved;
  for (const auto& rec :
       ingest_nvd_feed(kFixtures + "/retrieval_feed.jsonl").records) {
    auto batch = batch_for_record(rec, dict, 0.8, unresolved, &cache);
    if (!batch.vulnerabilities.empty()) store.put_batch(batch);
  }
  std::vector<UnresolvedComponent> unresolved_components;
  auto sys = build_sys_graph(read_json_file(kFixtures + "/inventory.json"),
                             dict, 0.8, unresolved_components);

  auto serial = filter_serial(store, sys);
  for (int threads : {2, 4}) {
    auto parallel = filter_parallel(store, sys, threads);
    CHECK(parallel.applicable == serial.applicable);
    CHECK(parallel.filtered_out == serial.filtered_out);
    CHECK(parallel.pair_evaluations == serial.pair_evaluations);
    CHECK(parallel.traces.size() == serial.traces.size());
  }
}
