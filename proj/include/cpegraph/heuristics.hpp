#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cpegraph/catalog.hpp"

namespace cpegraph {

struct HeuristicConfig {
  double tau_spelling = 0.8;  // edit-similarity threshold
  std::size_t min_len_m = 5;  // minimum normalized length for spelling checks
  double theta_p = 0.5;       // shared-product gate for pairwise heuristics
  double theta_high = 0.8;    // shared-product-names threshold

  void validate() const;  // thresholds in (0,1], min_len_m >= 1
};

enum class Heuristic {
  format_variation,
  spelling_error,
  acronym,
  substring_match,
  product_as_vendor,
  shared_product_names,
};

const char* heuristic_name(Heuristic h);

enum class SprVariant { jaccard, min_denominator };

// Shared Product Ratio between two vendors' normalized product sets.
// Jaccard: |I|/|U|. MinDenominator: |I|/min(|P1|,|P2|), the variant that
// catches a small acquired vendor inside a larger one. Two productless
// vendors score 0.
double shared_product_ratio(const ProductCatalog& catalog,
                            std::string_view v1, std::string_view v2,
                            SprVariant variant);

// Pairwise detectors over raw vendor names. All of them gate on product
// overlap so that coincidental name similarity between unrelated vendors is
// not flagged.
bool detect_format_variation(const ProductCatalog& catalog,
                             std::string_view v1, std::string_view v2,
                             const HeuristicConfig& cfg);
bool detect_spelling_error(const ProductCatalog& catalog, std::string_view v1,
                           std::string_view v2, const HeuristicConfig& cfg);
bool detect_substring_match(const ProductCatalog& catalog, std::string_view v1,
                            std::string_view v2, const HeuristicConfig& cfg);
bool detect_acronym(const ProductCatalog& catalog, std::string_view v1,
                    std::string_view v2, const HeuristicConfig& cfg);
bool detect_shared_product_names(const ProductCatalog& catalog,
                                 std::string_view v1, std::string_view v2,
                                 const HeuristicConfig& cfg);

// Product-name mode of the format-variation rule: the product-overlap gate is
// replaced by same-vendor equality.
bool detect_format_variation_product(std::string_view vendor1,
                                     std::string_view product1,
                                     std::string_view vendor2,
                                     std::string_view product2);

struct ProductAsVendorWitness {
  std::string owner_vendor;  // raw catalog vendor owning the product
  std::string product;       // normalized product equal to norm(v)

  bool operator==(const ProductAsVendorWitness&) const = default;
  auto operator<=>(const ProductAsVendorWitness&) const = default;
};

// All (V', product) pairs where norm(v) names a product of another vendor V'.
std::vector<ProductAsVendorWitness> detect_product_as_vendor(
    const ProductCatalog& catalog, std::string_view v);

enum class GroupStatus { possible, confirmed, rejected_by_review };

const char* group_status_name(GroupStatus s);
std::optional<GroupStatus> group_status_from_name(std::string_view name);

struct PairEvidence {
  double sim_edit = 0.0;
  double spr = 0.0;

  bool operator==(const PairEvidence&) const = default;
};

enum class GroupScope { vendor, product };

struct InconsistencyGroup {
  Heuristic heuristic = Heuristic::format_variation;
  GroupScope scope = GroupScope::vendor;
  std::string vendor;  // canonical scope for product groups, empty otherwise
  std::vector<std::string> members;  // raw names, sorted
  std::string canonical;             // provisional: member with smallest norm
  GroupStatus status = GroupStatus::possible;
  std::map<std::pair<std::string, std::string>, PairEvidence> evidence;

  // Stable content-derived id, so review files survive re-clustering.
  std::string group_id() const;

  json to_json() const;
  static InconsistencyGroup from_json(const json& j);
};

// A single pairwise hit, the unit the detection kernels emit.
struct DetectedPair {
  Heuristic heuristic;
  std::size_t left;  // indices into catalog.vendors()
  std::size_t right;
  PairEvidence evidence;

  bool operator==(const DetectedPair&) const = default;
};

// All-pairs detection kernels. The serial version is the reference; the
// OpenMP version partitions the pair space across threads. Both return the
// same pairs in the same (left, right, heuristic) order.
std::vector<DetectedPair> detect_pairs_serial(const ProductCatalog& catalog,
                                              const HeuristicConfig& cfg);
std::vector<DetectedPair> detect_pairs_parallel(const ProductCatalog& catalog,
                                                const HeuristicConfig& cfg,
                                                int threads);

// Groups pairwise hits into connected components, one closure per heuristic,
// emitted in deterministic order. workers <= 1 selects the serial kernel.
std::vector<InconsistencyGroup> cluster_inconsistencies(
    const ProductCatalog& catalog, const HeuristicConfig& cfg,
    int workers = 1);

// Format-variation clustering over product names, vendor by vendor.
std::vector<InconsistencyGroup> cluster_product_inconsistencies(
    const ProductCatalog& catalog, const HeuristicConfig& cfg);

// Applies operator review decisions (JSON-lines of {group_id, status}).
// Unreviewed groups stay Possible; unknown ids are ignored.
void apply_review(std::vector<InconsistencyGroup>& groups,
                  const std::vector<json>& review_lines);

// CSV report: heuristic, scope, members, canonical, status, evidence.
std::string groups_to_csv(const std::vector<InconsistencyGroup>& groups);

}  // namespace cpegraph
