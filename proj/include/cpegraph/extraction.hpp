#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cpegraph/cpe.hpp"

namespace cpegraph {

struct Token {
  std::string text;
  std::size_t offset = 0;  // byte offset into the sentence

  bool operator==(const Token&) const = default;
};

// Whitespace/punctuation tokenizer that keeps version-shaped tokens
// (8.0.552.237, 2017-02-12, v1.0.2-alpha) intact. Offsets let callers
// reconstruct the sentence with its original separators.
std::vector<Token> tokenize(std::string_view sentence);

// True for tokens the labeler treats as versions: dotted or dashed numeric
// forms, v-prefixed releases, date builds.
bool is_version_shaped(std::string_view token);
bool is_year_token(std::string_view token);
bool is_service_pack_token(std::string_view token);

struct TokenLabel {
  std::string token;
  std::string label;  // BIO tag: B-PN-APP, I-PN-OS, B-MOD, B-V, O, ...

  bool operator==(const TokenLabel&) const = default;
};

// All labels the schema admits.
const std::set<std::string>& bio_label_set();

// Valid BIO sequence: an I-x tag only ever follows B-x or I-x of the same x.
bool is_valid_bio(const std::vector<TokenLabel>& labels);

// Product phrases with part tags, vendor names, and known version tokens per
// product, stored normalized.
class Gazetteer {
 public:
  void add_product(std::string_view name, Part part);
  void add_vendor(std::string_view name);
  void add_versions(std::string_view product, std::vector<std::string> versions);

  // Longest product phrase starting at token index `start`, if any.
  // Token texts must be pre-normalized.
  std::optional<std::pair<std::size_t, Part>> longest_product_match(
      const std::vector<std::string>& norm_tokens, std::size_t start) const;

  bool has_vendor(std::string_view norm_name) const;
  const std::vector<std::string>& versions_of(std::string_view norm_product)
      const;

  std::size_t product_count() const { return products_.size(); }

  json to_json() const;
  static Gazetteer from_json(const json& j);
  static Gazetteer load(const std::string& path);

 private:
  std::map<std::vector<std::string>, Part> products_;  // normalized token seq
  std::set<std::string> vendors_;
  std::map<std::string, std::vector<std::string>> versions_;
  std::size_t max_product_tokens_ = 0;
};

// Deterministic rule/gazetteer labeler. Longest-match product spans with part
// tags, a fixed modifier lexicon, version-shaped tokens, year+service-pack
// reclassification, and the "for <platform>" demotion.
std::vector<TokenLabel> extract_entities(std::string_view sentence,
                                         const Gazetteer& gazetteer);

// The modifier lexicon, normalized multi-token phrases, longest match first.
const std::vector<std::vector<std::string>>& modifier_lexicon();

enum class EntityKind { product, modifier, version };

struct ExtractedEntity {
  EntityKind kind = EntityKind::product;
  std::string text;       // surface form, tokens joined by single spaces
  std::size_t begin = 0;  // token span [begin, end)
  std::size_t end = 0;
  std::optional<Part> part;  // products only

  bool operator==(const ExtractedEntity&) const = default;
};

std::vector<ExtractedEntity> entities_from_labels(
    const std::vector<TokenLabel>& labels);

// A modifier grouped with its version span: "before 8.0.552.237", or the
// post-positioned "1.4 and earlier" where the modifier trails the version.
struct ModVGroup {
  std::optional<ExtractedEntity> modifier;
  ExtractedEntity version;

  std::size_t begin() const {
    return modifier ? std::min(modifier->begin, version.begin) : version.begin;
  }
  std::size_t end() const {
    return modifier ? std::max(modifier->end, version.end) : version.end;
  }
  std::string text() const {
    if (!modifier) return version.text;
    return modifier->begin < version.begin ? modifier->text + " " + version.text
                                           : version.text + " " + modifier->text;
  }

  bool operator==(const ModVGroup&) const = default;
};

std::vector<ModVGroup> group_mod_v(const std::vector<ExtractedEntity>& entities);

struct RelationPair {
  ExtractedEntity product;
  ModVGroup mod_v;
  std::optional<bool> valid;  // unset until classify_pairs

  bool operator==(const RelationPair&) const = default;
};

// Cartesian product of product entities and MOD_V groups, in span order.
std::vector<RelationPair> generate_candidate_pairs(
    const std::vector<ExtractedEntity>& entities);

// Marks each candidate Y/N: a pair is valid when the product is the nearest
// product entity to the MOD_V group (token-gap distance, the preceding
// product winning ties). Guarantees at least one valid pair whenever the
// sentence has a product and a version.
void classify_pairs(std::vector<RelationPair>& candidates);

// BIO corpus I/O: token TAB label lines, blank line between sentences.
std::string to_bio(const std::vector<std::vector<TokenLabel>>& sentences);
std::vector<std::vector<TokenLabel>> parse_bio(std::string_view content);

}  // namespace cpegraph
