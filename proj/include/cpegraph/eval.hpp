#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpegraph/fp_filter.hpp"

namespace cpegraph {

struct RetrievalMetrics {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double precision = 0.0;  // tp/(tp+fp); 0/0 reported as undefined-zero
  double coverage = 0.0;   // tp/(tp+fn)
  bool precision_defined = false;
  bool coverage_defined = false;

  json to_json() const;
};

// Set arithmetic over retrieved vs ground-truth CVE ids.
RetrievalMetrics score(const std::set<std::string>& retrieved,
                       const std::set<std::string>& ground_truth);

enum class Strategy { keyword_match, cpe_query, ucpe_graph_filtered };

const char* strategy_name(Strategy s);

// Ground truth: {"<asset_id>": ["CVE-...", ...], ...}.
using GroundTruth = std::map<std::string, std::set<std::string>>;

GroundTruth load_ground_truth(const std::string& path);

struct ComparisonRow {
  Strategy strategy;
  std::string asset_id;  // "average" for the mean row
  RetrievalMetrics metrics;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  const RetrievalMetrics* find(Strategy s, const std::string& asset_id) const;
  std::string to_csv() const;
  json to_json() const;
};

// Per-asset retrieval under each strategy, scored against ground truth, plus
// an unweighted average row per strategy.
//
// keyword-match simulates keyword retrieval locally: a CVE is retrieved for
// an asset when its description contains any installed product name.
// cpe-query retrieves through query_by_product per component, context-blind.
// ucpe-graph-filtered is the graph filter's applicable set.
ComparisonTable run_comparison(const Store& store, const SysGraph& sys,
                               const GroundTruth& ground_truth,
                               const std::vector<Strategy>& strategies,
                               const CanonicalDictionary& dict, double tau,
                               int workers = 1);

// Retrieval sets per strategy, exposed for tests and the eval command.
std::map<std::string, std::set<std::string>> retrieve_keyword(
    const Store& store, const SysGraph& sys);
std::map<std::string, std::set<std::string>> retrieve_cpe_query(
    const Store& store, const SysGraph& sys, const CanonicalDictionary& dict,
    double tau);
std::map<std::string, std::set<std::string>> retrieve_graph_filtered(
    const Store& store, const SysGraph& sys, int workers);

}  // namespace cpegraph
