#include "cpegraph/fp_filter.hpp"

#include <omp.h>

#include <algorithm>

#include "cpegraph/jsonl.hpp"

namespace cpegraph {

AssetIndex::AssetIndex(const Asset& asset) : asset_id_(asset.asset_id) {
  for (const auto& component : asset.components) {
    ids_.insert(component.id);
    versions_[{component.vendor, component.product}].insert(component.version);
  }
}

bool AssetIndex::matches_leaf_id(const std::string& ucpe_id,
                                 const Store& store) const {
  if (ids_.count(ucpe_id)) return true;
  auto entry = store.get_ucpe(ucpe_id);
  if (!entry) return false;
  auto it = versions_.find({entry->vendor, entry->product});
  if (it == versions_.end()) return false;
  if (entry->version == "*") return true;
  if (it->second.count(entry->version)) return true;
  return it->second.count("*") > 0;
}

namespace {

bool leaf_matches(const ConfigNode& leaf, const AssetIndex& asset,
                  const Store& store) {
  return std::any_of(leaf.ucpe_ids.begin(), leaf.ucpe_ids.end(),
                     [&](const std::string& id) {
                       return asset.matches_leaf_id(id, store);
                     });
}

}  // namespace

bool match_simple(const std::vector<ConfigNode>& leaves,
                  const AssetIndex& asset, const Store& store) {
  for (const auto& leaf : leaves) {
    if (leaf.type != ConfigNode::Type::leaf) {
      throw Error(errc::config_error, "fp_filter",
                  "match_simple requires an operator-free configuration");
    }
    if (!leaf_matches(leaf, asset, store)) return false;
  }
  return true;
}

namespace {

bool match_logical_at(const ConfigNode& node, const AssetIndex& asset,
                      const Store& store,
                      std::vector<MatchTraceEntry>* trace,
                      std::int32_t& next_index) {
  const std::int32_t my_index = next_index++;
  bool result;
  if (node.type == ConfigNode::Type::leaf) {
    result = leaf_matches(node, asset, store);
  } else if (node.op == ConfigOp::and_op) {
    result = true;
    for (const auto& child : node.children) {
      result &= match_logical_at(child, asset, store, trace, next_index);
    }
  } else {
    result = false;
    for (const auto& child : node.children) {
      result |= match_logical_at(child, asset, store, trace, next_index);
    }
  }
  if (trace) trace->push_back(MatchTraceEntry{my_index, result});
  return result;
}

}  // namespace

bool match_logical(const ConfigNode& node, const AssetIndex& asset,
                   const Store& store, std::vector<MatchTraceEntry>* trace) {
  std::int32_t next_index = 0;
  return match_logical_at(node, asset, store, trace, next_index);
}

json ApplicabilityResult::to_json() const {
  json applicable_json = json::array();
  for (const auto& [cve, asset, config] : applicable) {
    applicable_json.push_back(
        json{{"cve_id", cve}, {"asset_id", asset}, {"config_id", config}});
  }
  json traces_json = json::array();
  for (const auto& t : traces) {
    json entries = json::array();
    for (const auto& e : t.entries) {
      entries.push_back(json{{"node", e.node}, {"matched", e.matched}});
    }
    traces_json.push_back(json{{"cve_id", t.cve_id},
                               {"asset_id", t.asset_id},
                               {"config_id", t.config_id},
                               {"matched", t.matched},
                               {"trace", entries}});
  }
  return json{{"applicable", applicable_json},
              {"filtered_out", filtered_out},
              {"traces", traces_json},
              {"pair_evaluations", pair_evaluations}};
}

namespace {

struct PairOutcome {
  std::set<ApplicableTuple> applicable;
  std::vector<TraceRecord> traces;
};

// Evaluates one (vulnerability, asset) pair across all of the
// vulnerability's configurations.
PairOutcome evaluate_pair(const Store& store, const StoredVulnerability& vuln,
                          const AssetIndex& asset) {
  PairOutcome out;
  for (const auto& config_id : vuln.config_ids) {
    auto it = store.configurations().find(config_id);
    if (it == store.configurations().end()) continue;
    const StoredConfig& config = it->second;
    TraceRecord trace;
    trace.cve_id = vuln.record.cve_id;
    trace.asset_id = asset.asset_id();
    trace.config_id = config_id;
    trace.matched =
        match_logical(config.graph.root, asset, store, &trace.entries);
    if (trace.matched) {
      out.applicable.insert(
          {vuln.record.cve_id, asset.asset_id(), config_id});
    }
    out.traces.push_back(std::move(trace));
  }
  return out;
}

void finalize(ApplicabilityResult& result, const Store& store) {
  std::set<std::string> applicable_cves;
  for (const auto& [cve, asset, config] : result.applicable) {
    applicable_cves.insert(cve);
  }
  for (const auto& [cve_id, _] : store.vulnerabilities()) {
    if (!applicable_cves.count(cve_id)) {
      result.filtered_out[cve_id] =
          "no configuration matched any asset";
    }
  }
}

}  // namespace

ApplicabilityResult filter_serial(const Store& store, const SysGraph& sys) {
  ApplicabilityResult result;
  std::vector<AssetIndex> assets;
  assets.reserve(sys.assets.size());
  for (const auto& asset : sys.assets) assets.emplace_back(asset);

  for (const auto& [cve_id, vuln] : store.vulnerabilities()) {
    for (const auto& asset : assets) {
      PairOutcome outcome = evaluate_pair(store, vuln, asset);
      result.applicable.insert(outcome.applicable.begin(),
                               outcome.applicable.end());
      result.traces.insert(result.traces.end(),
                           std::make_move_iterator(outcome.traces.begin()),
                           std::make_move_iterator(outcome.traces.end()));
      ++result.pair_evaluations;
    }
  }
  finalize(result, store);
  return result;
}

ApplicabilityResult filter_parallel(const Store& store, const SysGraph& sys,
                                    int threads) {
  if (threads < 1) threads = omp_get_max_threads();

  std::vector<const StoredVulnerability*> vulns;
  vulns.reserve(store.vulnerabilities().size());
  for (const auto& [_, vuln] : store.vulnerabilities()) {
    vulns.push_back(&vuln);
  }
  std::vector<AssetIndex> assets;
  assets.reserve(sys.assets.size());
  for (const auto& asset : sys.assets) assets.emplace_back(asset);

  const std::size_t total = vulns.size() * assets.size();
  std::vector<PairOutcome> outcomes(total);

#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (long long k = 0; k < static_cast<long long>(total); ++k) {
    const std::size_t v = static_cast<std::size_t>(k) / assets.size();
    const std::size_t a = static_cast<std::size_t>(k) % assets.size();
    outcomes[static_cast<std::size_t>(k)] =
        evaluate_pair(store, *vulns[v], assets[a]);
  }

  ApplicabilityResult result;
  result.pair_evaluations = total;
  for (auto& outcome : outcomes) {  // deterministic merge order
    result.applicable.insert(outcome.applicable.begin(),
                             outcome.applicable.end());
    result.traces.insert(result.traces.end(),
                         std::make_move_iterator(outcome.traces.begin()),
                         std::make_move_iterator(outcome.traces.end()));
  }
  finalize(result, store);
  return result;
}

ApplicabilityResult filter(const Store& store, const SysGraph& sys,
                           int workers) {
  return workers <= 1 ? filter_serial(store, sys)
                      : filter_parallel(store, sys, workers);
}

json FilterState::to_json() const {
  json pairs = json::array();
  for (const auto& [cve, asset] : evaluated_pairs) {
    pairs.push_back(json::array({cve, asset}));
  }
  json applicable_json = json::array();
  for (const auto& [cve, asset, config] : applicable) {
    applicable_json.push_back(json::array({cve, asset, config}));
  }
  return json{{"store_generation", store_generation},
              {"evaluated_cves", evaluated_cves},
              {"evaluated_assets", evaluated_assets},
              {"evaluated_pairs", pairs},
              {"applicable", applicable_json}};
}

FilterState FilterState::from_json(const json& j) {
  FilterState s;
  s.store_generation = j.at("store_generation").get<std::uint64_t>();
  for (const auto& c : j.at("evaluated_cves")) {
    s.evaluated_cves.insert(c.get<std::string>());
  }
  for (const auto& a : j.at("evaluated_assets")) {
    s.evaluated_assets.insert(a.get<std::string>());
  }
  for (const auto& p : j.at("evaluated_pairs")) {
    s.evaluated_pairs.insert({p.at(0).get<std::string>(),
                              p.at(1).get<std::string>()});
  }
  for (const auto& t : j.at("applicable")) {
    s.applicable.insert({t.at(0).get<std::string>(),
                         t.at(1).get<std::string>(),
                         t.at(2).get<std::string>()});
  }
  return s;
}

void FilterState::save(const std::string& path) const {
  write_json_file(path, to_json(), "fp_filter");
}

FilterState FilterState::load(const std::string& path) {
  return from_json(read_json_file(path, "fp_filter"));
}

FilterState make_filter_state(const Store& store,
                              const ApplicabilityResult& result,
                              const SysGraph& sys) {
  FilterState state;
  state.store_generation = store.generation();
  for (const auto& [cve_id, _] : store.vulnerabilities()) {
    state.evaluated_cves.insert(cve_id);
    for (const auto& asset : sys.assets) {
      state.evaluated_pairs.insert({cve_id, asset.asset_id});
    }
  }
  for (const auto& asset : sys.assets) {
    state.evaluated_assets.insert(asset.asset_id);
  }
  state.applicable = result.applicable;
  return state;
}

ApplicabilityResult incremental_add(FilterState& state, const Store& store,
                                    const SysGraph& sys, int workers) {
  // Batches only ever append (uCPE ids are content-addressed), so a store
  // that moved forward is fine: the unexplored pairs get evaluated below. A
  // state claiming a generation the store never reached belongs to a
  // different or rolled-back store.
  if (state.store_generation > store.generation()) {
    throw Error(errc::stale_state, "fp_filter",
                "filter state was built against store generation " +
                    std::to_string(state.store_generation) + ", store is at " +
                    std::to_string(store.generation()));
  }
  state.store_generation = store.generation();
  if (workers < 1) workers = omp_get_max_threads();

  std::vector<AssetIndex> assets;
  assets.reserve(sys.assets.size());
  for (const auto& asset : sys.assets) assets.emplace_back(asset);

  // Only pairs not seen before: new vulnerabilities against everything, old
  // vulnerabilities against new assets.
  std::vector<std::pair<const StoredVulnerability*, const AssetIndex*>> work;
  for (const auto& [cve_id, vuln] : store.vulnerabilities()) {
    for (const auto& asset : assets) {
      if (!state.evaluated_pairs.count({cve_id, asset.asset_id()})) {
        work.emplace_back(&vuln, &asset);
      }
    }
  }

  std::vector<PairOutcome> outcomes(work.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(workers) if (workers > 1)
  for (long long k = 0; k < static_cast<long long>(work.size()); ++k) {
    outcomes[static_cast<std::size_t>(k)] = evaluate_pair(
        store, *work[static_cast<std::size_t>(k)].first,
        *work[static_cast<std::size_t>(k)].second);
  }

  ApplicabilityResult result;
  result.pair_evaluations = work.size();
  for (auto& outcome : outcomes) {
    state.applicable.insert(outcome.applicable.begin(),
                            outcome.applicable.end());
    result.traces.insert(result.traces.end(),
                         std::make_move_iterator(outcome.traces.begin()),
                         std::make_move_iterator(outcome.traces.end()));
  }
  for (const auto& [vuln, asset] : work) {
    state.evaluated_pairs.insert({vuln->record.cve_id, asset->asset_id()});
  }
  for (const auto& [cve_id, _] : store.vulnerabilities()) {
    state.evaluated_cves.insert(cve_id);
  }
  for (const auto& asset : sys.assets) {
    state.evaluated_assets.insert(asset.asset_id);
  }

  result.applicable = state.applicable;
  finalize(result, store);
  return result;
}

}  // namespace cpegraph
