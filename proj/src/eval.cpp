#include "cpegraph/eval.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "cpegraph/jsonl.hpp"
#include "cpegraph/normalize.hpp"

namespace cpegraph {

json RetrievalMetrics::to_json() const {
  return json{{"tp", tp},
              {"fp", fp},
              {"fn", fn},
              {"precision", precision},
              {"coverage", coverage},
              {"precision_defined", precision_defined},
              {"coverage_defined", coverage_defined}};
}

RetrievalMetrics score(const std::set<std::string>& retrieved,
                       const std::set<std::string>& ground_truth) {
  RetrievalMetrics m;
  for (const auto& cve : retrieved) {
    if (ground_truth.count(cve)) {
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  for (const auto& cve : ground_truth) {
    if (!retrieved.count(cve)) ++m.fn;
  }
  if (m.tp + m.fp > 0) {
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    m.precision_defined = true;
  }
  if (m.tp + m.fn > 0) {
    m.coverage = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    m.coverage_defined = true;
  }
  return m;
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::keyword_match: return "keyword-match";
    case Strategy::cpe_query: return "cpe-query";
    case Strategy::ucpe_graph_filtered: return "ucpe-graph-filtered";
  }
  return "?";
}

GroundTruth load_ground_truth(const std::string& path) {
  json j;
  try {
    j = read_json_file(path, "eval_harness");
  } catch (const Error& e) {
    throw Error(errc::ground_truth_missing, "eval_harness",
                "ground truth unavailable: " + std::string(e.what()));
  }
  GroundTruth gt;
  for (const auto& [asset_id, cves] : j.items()) {
    for (const auto& cve : cves) {
      gt[asset_id].insert(cve.get<std::string>());
    }
  }
  return gt;
}

const RetrievalMetrics* ComparisonTable::find(
    Strategy s, const std::string& asset_id) const {
  for (const auto& row : rows) {
    if (row.strategy == s && row.asset_id == asset_id) return &row.metrics;
  }
  return nullptr;
}

std::string ComparisonTable::to_csv() const {
  std::ostringstream out;
  out << "strategy,asset,tp,fp,fn,precision,coverage\n";
  for (const auto& row : rows) {
    out << strategy_name(row.strategy) << ',' << row.asset_id << ','
        << row.metrics.tp << ',' << row.metrics.fp << ',' << row.metrics.fn
        << ',' << row.metrics.precision << ',' << row.metrics.coverage << '\n';
  }
  return out.str();
}

json ComparisonTable::to_json() const {
  json rows_json = json::array();
  for (const auto& row : rows) {
    json r = row.metrics.to_json();
    r["strategy"] = strategy_name(row.strategy);
    r["asset"] = row.asset_id;
    rows_json.push_back(std::move(r));
  }
  return json{{"rows", rows_json}};
}

namespace {

std::string lowercase(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

}  // namespace

std::map<std::string, std::set<std::string>> retrieve_keyword(
    const Store& store, const SysGraph& sys) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& asset : sys.assets) {
    auto& hits = out[asset.asset_id];
    std::set<std::string> keywords;
    for (const auto& component : asset.components) {
      if (!component.product.empty()) keywords.insert(component.product);
    }
    for (const auto& [cve_id, vuln] : store.vulnerabilities()) {
      const std::string description = lowercase(vuln.record.description);
      for (const auto& keyword : keywords) {
        if (description.find(keyword) != std::string::npos) {
          hits.insert(cve_id);
          break;
        }
      }
    }
  }
  return out;
}

std::map<std::string, std::set<std::string>> retrieve_cpe_query(
    const Store& store, const SysGraph& sys, const CanonicalDictionary& dict,
    double tau) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& asset : sys.assets) {
    auto& hits = out[asset.asset_id];
    for (const auto& component : asset.components) {
      for (const auto& hit : store.query_by_product(
               component.vendor, component.product, component.version, dict,
               tau)) {
        hits.insert(hit.cve_id);
      }
    }
  }
  return out;
}

std::map<std::string, std::set<std::string>> retrieve_graph_filtered(
    const Store& store, const SysGraph& sys, int workers) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& asset : sys.assets) out[asset.asset_id];
  const ApplicabilityResult result = filter(store, sys, workers);
  for (const auto& [cve, asset, config] : result.applicable) {
    out[asset].insert(cve);
  }
  return out;
}

ComparisonTable run_comparison(const Store& store, const SysGraph& sys,
                               const GroundTruth& ground_truth,
                               const std::vector<Strategy>& strategies,
                               const CanonicalDictionary& dict, double tau,
                               int workers) {
  for (const auto& asset : sys.assets) {
    if (!ground_truth.count(asset.asset_id)) {
      throw Error(errc::ground_truth_missing, "eval_harness",
                  "no ground truth for asset " + asset.asset_id);
    }
  }

  ComparisonTable table;
  for (Strategy strategy : strategies) {
    std::map<std::string, std::set<std::string>> retrieved;
    switch (strategy) {
      case Strategy::keyword_match:
        retrieved = retrieve_keyword(store, sys);
        break;
      case Strategy::cpe_query:
        retrieved = retrieve_cpe_query(store, sys, dict, tau);
        break;
      case Strategy::ucpe_graph_filtered:
        retrieved = retrieve_graph_filtered(store, sys, workers);
        break;
    }

    RetrievalMetrics sum;
    double precision_total = 0.0, coverage_total = 0.0;
    std::size_t count = 0;
    for (const auto& asset : sys.assets) {
      RetrievalMetrics m =
          score(retrieved[asset.asset_id], ground_truth.at(asset.asset_id));
      precision_total += m.precision;
      coverage_total += m.coverage;
      sum.tp += m.tp;
      sum.fp += m.fp;
      sum.fn += m.fn;
      ++count;
      table.rows.push_back(ComparisonRow{strategy, asset.asset_id, m});
    }
    if (count > 0) {
      RetrievalMetrics avg;
      avg.tp = sum.tp;
      avg.fp = sum.fp;
      avg.fn = sum.fn;
      avg.precision = precision_total / static_cast<double>(count);
      avg.coverage = coverage_total / static_cast<double>(count);
      avg.precision_defined = true;
      avg.coverage_defined = true;
      table.rows.push_back(ComparisonRow{strategy, "average", avg});
    }
  }
  return table;
}

}  // namespace cpegraph
