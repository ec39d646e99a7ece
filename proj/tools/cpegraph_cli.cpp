// cpegraph — configuration-aware vulnerability ingestion, normalization and
// retrieval pipeline. Subcommands mirror the pipeline stages; every command
// exits 0 on success and prints a machine-readable error document on stderr
// otherwise.

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cpegraph/eval.hpp"
#include "cpegraph/extraction.hpp"
#include "cpegraph/jsonl.hpp"

using namespace cpegraph;

namespace {

struct GlobalOptions {
  std::string config_path;
  int workers = 0;  // 0: available parallelism
  double tau = 0.8;
  HeuristicConfig heuristics;
  std::string spr_variant = "jaccard";
  unsigned long seed = 42;
  json config = json::object();

  void load_config() {
    if (config_path.empty()) return;
    config = read_json_file(config_path, "cli");
    if (config.contains("tau")) tau = config.at("tau").get<double>();
    if (config.contains("workers")) workers = config.at("workers").get<int>();
    if (config.contains("tau_spelling")) {
      heuristics.tau_spelling = config.at("tau_spelling").get<double>();
    }
    if (config.contains("min_len_m")) {
      heuristics.min_len_m = config.at("min_len_m").get<std::size_t>();
    }
    if (config.contains("theta_p")) {
      heuristics.theta_p = config.at("theta_p").get<double>();
    }
    if (config.contains("theta_high")) {
      heuristics.theta_high = config.at("theta_high").get<double>();
    }
    if (config.contains("spr_variant")) {
      spr_variant = config.at("spr_variant").get<std::string>();
    }
  }

  // Flags override the config file; the config file fills unset paths.
  std::string path_or(const std::string& flag_value, const char* key) const {
    if (!flag_value.empty()) return flag_value;
    if (config.contains(key)) return config.at(key).get<std::string>();
    return flag_value;
  }

  int effective_workers() const {
    return workers <= 0 ? omp_get_max_threads() : workers;
  }
};

// The store directory may be overridden by environment, the one env knob.
std::string store_dir_override(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("CPEGRAPH_STORE_DIR")) return env;
  return flag_value;
}

void require_path(const std::string& value, const char* what) {
  if (value.empty()) {
    throw Error(errc::config_error, "cli",
                std::string("missing required path: ") + what);
  }
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(errc::storage_io, "cli", "cannot write " + path);
  }
  out << content;
}

std::map<std::string, long> cve_counts_by_vendor(
    const std::vector<VulnerabilityRecord>& records) {
  // Count distinct CVEs per raw vendor token as it appears in CPE strings.
  std::map<std::string, std::set<std::string>> cves;
  struct Walk {
    static void node(const ConfigNodeRaw& n, const std::string& cve,
                     std::map<std::string, std::set<std::string>>& acc) {
      for (const auto& m : n.matches) {
        acc[unescape_component(m.cpe.vendor)].insert(cve);
      }
      for (const auto& c : n.children) node(c, cve, acc);
    }
  };
  for (const auto& rec : records) {
    for (const auto& n : rec.configurations) Walk::node(n, rec.cve_id, cves);
  }
  std::map<std::string, long> counts;
  for (const auto& [vendor, ids] : cves) {
    counts[vendor] = static_cast<long>(ids.size());
  }
  return counts;
}

std::vector<CatalogEntry> load_combined_catalog(const GlobalOptions& opts,
                                                const std::string& cpe_dict,
                                                const std::string& catalog) {
  std::vector<CatalogEntry> entries;
  if (!cpe_dict.empty()) {
    auto dict_result = ingest_cpe_dictionary(cpe_dict);
    entries.insert(entries.end(), dict_result.entries.begin(),
                   dict_result.entries.end());
  }
  if (!catalog.empty()) {
    auto external = ingest_external_catalog(catalog);
    entries.insert(entries.end(), external.begin(), external.end());
  }
  if (entries.empty()) {
    throw Error(errc::config_error, "cli",
                "need at least one of --cpe-dict / --catalog");
  }
  (void)opts;
  return entries;
}

int run(int argc, char** argv) {
  CLI::App app{"configuration-aware vulnerability normalization and retrieval"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path,
                 "pipeline config file (single JSON document)");
  app.add_option("--workers", opts.workers,
                 "worker threads (default: available parallelism)");
  app.add_option("--tau", opts.tau, "similarity threshold (default 0.8)");
  app.add_option("--tau-spelling", opts.heuristics.tau_spelling,
                 "spelling-error similarity threshold");
  app.add_option("--min-len", opts.heuristics.min_len_m,
                 "minimum name length for the spelling heuristic");
  app.add_option("--theta-p", opts.heuristics.theta_p,
                 "shared-product ratio gate");
  app.add_option("--theta-high", opts.heuristics.theta_high,
                 "shared-product-names threshold");
  app.add_option("--spr-variant", opts.spr_variant,
                 "jaccard | min_denominator");
  app.add_option("--seed", opts.seed,
                 "seed for randomized test-data generation");

  // ingest ------------------------------------------------------------
  std::string feed_path, cpe_dict_path, catalog_path, out_dir, since;
  auto* ingest = app.add_subcommand(
      "ingest", "parse feeds and catalogs into normalized records");
  ingest->add_option("--feed", feed_path, "NVD JSON feed or JSONL fixture");
  ingest->add_option("--cpe-dict", cpe_dict_path, "CPE dictionary (XML/JSONL)");
  ingest->add_option("--catalog", catalog_path, "external catalog JSONL");
  ingest->add_option("--since", since, "drop entries modified before this");
  ingest->add_option("--out-dir", out_dir, "output directory")->required();

  // stats --------------------------------------------------------------
  std::string stats_out;
  auto* stats = app.add_subcommand("stats", "corpus statistics over a feed");
  stats->add_option("--feed", feed_path, "NVD JSON feed or JSONL fixture");
  stats->add_option("--cpe-dict", cpe_dict_path, "CPE dictionary");
  stats->add_option("--since", since, "drop entries modified before this");
  stats->add_option("--out", stats_out, "write stats JSON here");

  // inconsistencies ------------------------------------------------------
  std::string groups_out, report_out;
  bool include_products = false;
  auto* inconsistencies = app.add_subcommand(
      "inconsistencies", "detect naming inconsistency groups");
  inconsistencies->add_option("--cpe-dict", cpe_dict_path, "CPE dictionary");
  inconsistencies->add_option("--catalog", catalog_path, "external catalog");
  inconsistencies->add_option("--groups-out", groups_out,
                              "write groups JSONL here");
  inconsistencies->add_option("--report-out", report_out,
                              "write CSV report here");
  inconsistencies->add_flag("--products", include_products,
                            "also cluster product-name format variations");

  // build-dict -----------------------------------------------------------
  std::string groups_path, review_path, dict_out;
  auto* build_dict = app.add_subcommand(
      "build-dict", "build the canonical dictionary from confirmed groups");
  build_dict->add_option("--cpe-dict", cpe_dict_path, "CPE dictionary");
  build_dict->add_option("--catalog", catalog_path, "external catalog");
  build_dict->add_option("--feed", feed_path,
                         "feed used for CVE-count canonical selection");
  build_dict->add_option("--groups", groups_path, "groups JSONL");
  build_dict->add_option("--review", review_path,
                         "review decisions JSONL ({group_id, status})");
  build_dict->add_option("--out", dict_out, "dictionary output path")
      ->required();

  // extract ---------------------------------------------------------------
  std::string sentences_path, gazetteer_path, bio_out, pairs_out;
  auto* extract = app.add_subcommand(
      "extract", "entity and relation extraction over description text");
  extract->add_option("--sentences", sentences_path,
                      "text file, one sentence per line")
      ->required();
  extract->add_option("--gazetteer", gazetteer_path, "gazetteer JSON")
      ->required();
  extract->add_option("--bio-out", bio_out, "BIO output path");
  extract->add_option("--pairs-out", pairs_out, "pairs JSONL output path");

  // build-db ---------------------------------------------------------------
  std::string dict_path, store_dir, unresolved_out;
  auto* build_db = app.add_subcommand(
      "build-db", "resolve a feed against the dictionary into the store");
  build_db->add_option("--feed", feed_path, "NVD JSON feed or JSONL fixture");
  build_db->add_option("--dict", dict_path, "canonical dictionary JSON");
  build_db->add_option("--store", store_dir, "store directory");
  build_db->add_option("--since", since, "drop entries modified before this");
  build_db->add_option("--unresolved-out", unresolved_out,
                       "write unresolved-entry report here");

  // query -------------------------------------------------------------------
  auto* query = app.add_subcommand("query", "query the store");
  query->require_subcommand(1);
  std::string query_cve_id;
  auto* query_cve = query->add_subcommand("cve", "look up one CVE id");
  query_cve->add_option("--id", query_cve_id, "CVE identifier")->required();
  query_cve->add_option("--store", store_dir, "store directory");

  std::string q_vendor, q_product, q_version = "*";
  auto* query_product =
      query->add_subcommand("product", "find CVEs for a product/version");
  query_product->add_option("--vendor", q_vendor, "vendor name")->required();
  query_product->add_option("--product", q_product, "product name")
      ->required();
  query_product->add_option("--version", q_version,
                            "version token (default any)");
  query_product->add_option("--store", store_dir, "store directory");
  query_product->add_option("--dict", dict_path, "canonical dictionary JSON");

  // filter --------------------------------------------------------------------
  std::string inventory_path, filter_out, state_path;
  auto* filter_cmd = app.add_subcommand(
      "filter", "graph-based applicability filtering for an inventory");
  filter_cmd->add_option("--store", store_dir, "store directory");
  filter_cmd->add_option("--inventory", inventory_path, "inventory JSON");
  filter_cmd->add_option("--dict", dict_path, "canonical dictionary JSON");
  filter_cmd->add_option("--out", filter_out, "report output path");
  filter_cmd->add_option("--state", state_path,
                         "filter state file for incremental runs");

  // eval ------------------------------------------------------------------------
  std::string gt_path, eval_csv, eval_json;
  auto* eval_cmd = app.add_subcommand(
      "eval", "comparative retrieval metrics against ground truth");
  eval_cmd->add_option("--store", store_dir, "store directory");
  eval_cmd->add_option("--inventory", inventory_path, "inventory JSON");
  eval_cmd->add_option("--dict", dict_path, "canonical dictionary JSON");
  eval_cmd->add_option("--ground-truth", gt_path, "ground truth JSON");
  eval_cmd->add_option("--csv-out", eval_csv, "metrics CSV path");
  eval_cmd->add_option("--json-out", eval_json, "metrics JSON path");

  CLI11_PARSE(app, argc, argv);
  opts.load_config();
  opts.heuristics.validate();

  feed_path = opts.path_or(feed_path, "feed");
  cpe_dict_path = opts.path_or(cpe_dict_path, "cpe_dict");
  catalog_path = opts.path_or(catalog_path, "catalog");
  dict_path = opts.path_or(dict_path, "dict");
  review_path = opts.path_or(review_path, "review");
  inventory_path = opts.path_or(inventory_path, "inventory");
  gt_path = opts.path_or(gt_path, "ground_truth");
  store_dir = store_dir_override(opts.path_or(store_dir, "store"));

  std::optional<std::string> since_opt;
  if (!since.empty()) since_opt = since;

  if (ingest->parsed()) {
    require_path(out_dir, "--out-dir");
    std::filesystem::create_directories(out_dir);
    json summary;
    if (!feed_path.empty()) {
      auto result = ingest_nvd_feed(feed_path, since_opt);
      std::vector<json> docs;
      for (const auto& rec : result.records) docs.push_back(rec.to_json());
      write_jsonl(out_dir + "/records.jsonl", docs);
      std::vector<json> quarantine;
      for (const auto& q : result.quarantined) {
        quarantine.push_back(json{
            {"cve_id", q.cve_id}, {"cpe", q.raw}, {"reason", q.reason}});
      }
      write_jsonl(out_dir + "/quarantine.jsonl", quarantine);
      summary["records"] = result.records.size();
      summary["quarantined"] = result.quarantined.size();
    }
    std::vector<CatalogEntry> entries;
    if (!cpe_dict_path.empty() || !catalog_path.empty()) {
      entries = load_combined_catalog(opts, cpe_dict_path, catalog_path);
      write_catalog_jsonl(out_dir + "/catalog.jsonl", entries);
      summary["catalog_entries"] = entries.size();
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
  }

  if (stats->parsed()) {
    require_path(feed_path, "--feed");
    auto feed = ingest_nvd_feed(feed_path, since_opt);
    DictionaryIngestResult dict_result;
    if (!cpe_dict_path.empty()) {
      dict_result = ingest_cpe_dictionary(cpe_dict_path);
    }
    CorpusStats s = compute_corpus_stats(feed.records, dict_result,
                                         opts.effective_workers());
    const json out = s.to_json();
    if (!stats_out.empty()) write_json_file(stats_out, out);
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (inconsistencies->parsed()) {
    auto entries = load_combined_catalog(opts, cpe_dict_path, catalog_path);
    ProductCatalog catalog(entries);
    auto groups = cluster_inconsistencies(catalog, opts.heuristics,
                                          opts.effective_workers());
    if (include_products) {
      auto product_groups =
          cluster_product_inconsistencies(catalog, opts.heuristics);
      groups.insert(groups.end(), product_groups.begin(),
                    product_groups.end());
    }
    if (!groups_out.empty()) {
      std::vector<json> docs;
      for (const auto& g : groups) docs.push_back(g.to_json());
      write_jsonl(groups_out, docs);
    }
    if (!report_out.empty()) write_text(report_out, groups_to_csv(groups));
    std::cout << json{{"groups", groups.size()}}.dump(2) << "\n";
    return 0;
  }

  if (build_dict->parsed()) {
    auto entries = load_combined_catalog(opts, cpe_dict_path, catalog_path);
    std::vector<InconsistencyGroup> groups;
    if (!groups_path.empty()) {
      for (const json& j : read_jsonl(groups_path, "cli")) {
        groups.push_back(InconsistencyGroup::from_json(j));
      }
    } else {
      ProductCatalog catalog(entries);
      groups = cluster_inconsistencies(catalog, opts.heuristics,
                                       opts.effective_workers());
    }
    if (!review_path.empty()) {
      apply_review(groups, read_jsonl(review_path, "cli"));
    }
    std::map<std::string, long> counts;
    if (!feed_path.empty()) {
      counts = cve_counts_by_vendor(ingest_nvd_feed(feed_path, since_opt)
                                        .records);
    }
    CanonicalDictionary dict =
        build_canonical_dictionary(entries, groups, counts);
    dict.save(dict_out);
    std::cout << json{{"vendors", dict.vendors.size()},
                      {"vendor_aliases", dict.vendor_aliases.size()},
                      {"product_aliases", dict.product_aliases.size()}}
                     .dump(2)
              << "\n";
    return 0;
  }

  if (extract->parsed()) {
    Gazetteer gazetteer = Gazetteer::load(gazetteer_path);
    std::ifstream in(sentences_path);
    if (!in) {
      throw Error(errc::storage_io, "cli",
                  "cannot open sentences: " + sentences_path);
    }
    std::vector<std::vector<TokenLabel>> labeled;
    std::vector<json> pair_docs;
    std::string line;
    std::size_t sentence_id = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto labels = extract_entities(line, gazetteer);
      auto entities = entities_from_labels(labels);
      auto candidates = generate_candidate_pairs(entities);
      classify_pairs(candidates);
      for (const auto& pair : candidates) {
        pair_docs.push_back(json{
            {"sentence_id", sentence_id},
            {"product", pair.product.text},
            {"product_span",
             json::array({pair.product.begin, pair.product.end})},
            {"mod_v", pair.mod_v.text()},
            {"mod_v_span",
             json::array({pair.mod_v.begin(), pair.mod_v.end()})},
            {"label", pair.valid.value_or(false) ? "Y" : "N"}});
      }
      labeled.push_back(std::move(labels));
      ++sentence_id;
    }
    if (!bio_out.empty()) write_text(bio_out, to_bio(labeled));
    if (!pairs_out.empty()) write_jsonl(pairs_out, pair_docs);
    std::cout << json{{"sentences", labeled.size()},
                      {"pairs", pair_docs.size()}}
                     .dump(2)
              << "\n";
    return 0;
  }

  if (build_db->parsed()) {
    require_path(feed_path, "--feed");
    require_path(dict_path, "--dict");
    require_path(store_dir, "--store");
    CanonicalDictionary dict = CanonicalDictionary::load(dict_path);
    auto feed = ingest_nvd_feed(feed_path, since_opt);
    Store store = Store::open(store_dir);
    ResolveCache cache;
    std::vector<UnresolvedMatch> unresolved;
    std::size_t stored = 0;
    for (const auto& record : feed.records) {
      WriteBatch batch =
          batch_for_record(record, dict, opts.tau, unresolved, &cache);
      if (batch.vulnerabilities.empty()) continue;
      store.put_batch(batch);
      ++stored;
    }
    if (!unresolved_out.empty()) {
      std::vector<json> docs;
      for (const auto& u : unresolved) {
        docs.push_back(json{{"cve_id", u.cve_id},
                            {"cpe", u.cpe},
                            {"reason", u.reason}});
      }
      write_jsonl(unresolved_out, docs);
    }
    std::cout << json{{"stored", stored},
                      {"ucpe", store.ucpe_count()},
                      {"configs", store.config_count()},
                      {"unresolved", unresolved.size()}}
                     .dump(2)
              << "\n";
    return 0;
  }

  if (query_cve->parsed()) {
    require_path(store_dir, "--store");
    Store store = Store::open(store_dir);
    auto result = store.query_by_cve(query_cve_id);
    if (!result) {
      std::cout << json{{"found", false}, {"cve_id", query_cve_id}}.dump(2)
                << "\n";
      return 0;
    }
    json configs = json::array();
    for (const auto& c : result->graph.configs) configs.push_back(c.to_json());
    std::cout << json{{"found", true},
                      {"record", result->record.to_json()},
                      {"configs", configs}}
                     .dump(2)
              << "\n";
    return 0;
  }

  if (query_product->parsed()) {
    require_path(store_dir, "--store");
    require_path(dict_path, "--dict");
    Store store = Store::open(store_dir);
    CanonicalDictionary dict = CanonicalDictionary::load(dict_path);
    auto hits =
        store.query_by_product(q_vendor, q_product, q_version, dict, opts.tau);
    json out = json::array();
    for (const auto& hit : hits) {
      out.push_back(
          json{{"cve_id", hit.cve_id}, {"config_id", hit.config_id}});
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (filter_cmd->parsed()) {
    require_path(store_dir, "--store");
    require_path(inventory_path, "--inventory");
    require_path(dict_path, "--dict");
    Store store = Store::open(store_dir);
    CanonicalDictionary dict = CanonicalDictionary::load(dict_path);
    std::vector<UnresolvedComponent> unresolved;
    SysGraph sys = build_sys_graph(read_json_file(inventory_path, "cli"), dict,
                                   opts.tau, unresolved);
    ApplicabilityResult result;
    if (!state_path.empty() && std::filesystem::exists(state_path)) {
      FilterState state = FilterState::load(state_path);
      result = incremental_add(state, store, sys, opts.effective_workers());
      state.save(state_path);
    } else {
      result = filter(store, sys, opts.effective_workers());
      if (!state_path.empty()) {
        make_filter_state(store, result, sys).save(state_path);
      }
    }
    if (!filter_out.empty()) write_json_file(filter_out, result.to_json());

    // human-readable table alongside the JSON report
    std::map<std::string, std::vector<std::string>> by_asset;
    for (const auto& [cve, asset, config] : result.applicable) {
      auto& cves = by_asset[asset];
      if (cves.empty() || cves.back() != cve) cves.push_back(cve);
    }
    std::cout << "asset              applicable\n";
    std::cout << "-----------------  ----------\n";
    for (const auto& asset : sys.assets) {
      const auto& cves = by_asset[asset.asset_id];
      std::string joined;
      for (const auto& cve : cves) {
        if (!joined.empty()) joined += ", ";
        joined += cve;
      }
      std::cout << asset.asset_id;
      for (std::size_t pad = asset.asset_id.size(); pad < 19; ++pad) {
        std::cout << ' ';
      }
      std::cout << (joined.empty() ? "-" : joined) << "\n";
    }
    std::cout << result.filtered_out.size()
              << " vulnerabilities filtered out\n";

    json summary{{"applicable", result.applicable.size()},
                 {"filtered_out", result.filtered_out.size()},
                 {"pair_evaluations", result.pair_evaluations},
                 {"unresolved_components", unresolved.size()}};
    std::cout << summary.dump(2) << "\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    require_path(store_dir, "--store");
    require_path(inventory_path, "--inventory");
    require_path(dict_path, "--dict");
    require_path(gt_path, "--ground-truth");
    Store store = Store::open(store_dir);
    CanonicalDictionary dict = CanonicalDictionary::load(dict_path);
    std::vector<UnresolvedComponent> unresolved;
    SysGraph sys = build_sys_graph(read_json_file(inventory_path, "cli"), dict,
                                   opts.tau, unresolved);
    GroundTruth gt = load_ground_truth(gt_path);
    ComparisonTable table = run_comparison(
        store, sys, gt,
        {Strategy::keyword_match, Strategy::cpe_query,
         Strategy::ucpe_graph_filtered},
        dict, opts.tau, opts.effective_workers());
    if (!eval_csv.empty()) write_text(eval_csv, table.to_csv());
    if (!eval_json.empty()) write_json_file(eval_json, table.to_json());
    std::cout << table.to_csv();
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << e.to_json().dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"code", "InternalError"},
                      {"module", "cli"},
                      {"message", e.what()},
                      {"context", json::object()}}
                     .dump()
              << "\n";
    return 2;
  }
}
