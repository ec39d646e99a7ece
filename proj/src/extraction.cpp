#include "cpegraph/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "cpegraph/jsonl.hpp"
#include "cpegraph/normalize.hpp"

namespace cpegraph {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
         c == '-' || c == '_' || c == '+';
}

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

bool all_of_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c);
  });
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view sentence) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    if (!is_word_char(sentence[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < sentence.size() && is_word_char(sentence[i])) ++i;
    std::string_view word = sentence.substr(start, i - start);
    // Trailing sentence punctuation sticks to the word run; peel it off so
    // "8.0.552.237." yields the version token, not the dotted form.
    while (!word.empty() && (word.back() == '.' || word.back() == '-')) {
      word.remove_suffix(1);
    }
    while (!word.empty() && (word.front() == '.' || word.front() == '-')) {
      word.remove_prefix(1);
      ++start;
    }
    if (!word.empty()) {
      tokens.push_back(Token{std::string(word), start});
    }
  }
  return tokens;
}

bool is_version_shaped(std::string_view token) {
  if (token.empty()) return false;
  std::string_view body = token;
  if ((body.front() == 'v' || body.front() == 'V') && body.size() > 1 &&
      std::isdigit(static_cast<unsigned char>(body[1]))) {
    body.remove_prefix(1);
  }
  if (!std::isdigit(static_cast<unsigned char>(body.front()))) return false;
  // Multi-segment numeric forms: 1.4, 8.0.552.237, 2017-02-12, 1.0.2-alpha.
  bool has_sep = false;
  for (char c : body) {
    if (c == '.' || c == '-' || c == '_') {
      has_sep = true;
    } else if (!std::isalnum(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  if (has_sep && has_digit(body)) return true;
  // Single-segment forms ("1.4" handled above): bare numbers are versions
  // only in modifier context; the labeler decides that.
  return false;
}

bool is_year_token(std::string_view token) {
  if (token.size() != 4 || !all_of_digits(token)) return false;
  return token[0] == '1' || token[0] == '2';
}

bool is_service_pack_token(std::string_view token) {
  if (token.size() < 3) return false;
  const std::string low = lower(token);
  return low.rfind("sp", 0) == 0 && all_of_digits(low.substr(2));
}

const std::set<std::string>& bio_label_set() {
  static const std::set<std::string> labels = {
      "B-PN-APP", "I-PN-APP", "B-PN-OS", "I-PN-OS", "B-PN-HW", "I-PN-HW",
      "B-MOD",    "I-MOD",    "B-V",     "I-V",     "O"};
  return labels;
}

bool is_valid_bio(const std::vector<TokenLabel>& labels) {
  std::string prev = "O";
  for (const auto& [token, label] : labels) {
    if (!bio_label_set().count(label)) return false;
    if (label.rfind("I-", 0) == 0) {
      const std::string body = label.substr(2);
      if (prev != "B-" + body && prev != "I-" + body) return false;
    }
    prev = label;
  }
  return true;
}

void Gazetteer::add_product(std::string_view name, Part part) {
  auto tokens = norm_tokens(normalize_str(name));
  if (tokens.empty()) return;
  max_product_tokens_ = std::max(max_product_tokens_, tokens.size());
  products_[std::move(tokens)] = part;
}

void Gazetteer::add_vendor(std::string_view name) {
  vendors_.insert(normalize_str(name));
}

void Gazetteer::add_versions(std::string_view product,
                             std::vector<std::string> versions) {
  versions_[normalize_str(product)] = std::move(versions);
}

std::optional<std::pair<std::size_t, Part>> Gazetteer::longest_product_match(
    const std::vector<std::string>& norm_tokens, std::size_t start) const {
  std::optional<std::pair<std::size_t, Part>> best;
  std::vector<std::string> window;
  const std::size_t limit =
      std::min(norm_tokens.size() - start, max_product_tokens_);
  for (std::size_t len = 1; len <= limit; ++len) {
    window.push_back(norm_tokens[start + len - 1]);
    auto it = products_.find(window);
    if (it != products_.end()) best = {len, it->second};
  }
  return best;
}

bool Gazetteer::has_vendor(std::string_view norm_name) const {
  return vendors_.count(std::string(norm_name)) > 0;
}

const std::vector<std::string>& Gazetteer::versions_of(
    std::string_view norm_product) const {
  static const std::vector<std::string> none;
  auto it = versions_.find(std::string(norm_product));
  return it == versions_.end() ? none : it->second;
}

json Gazetteer::to_json() const {
  json jproducts = json::array();
  for (const auto& [tokens, part] : products_) {
    std::string name;
    for (const auto& t : tokens) {
      if (!name.empty()) name += " ";
      name += t;
    }
    jproducts.push_back(
        json{{"name", name}, {"part", std::string(1, part_letter(part))}});
  }
  json jvendors = json::array();
  for (const auto& v : vendors_) jvendors.push_back(v);
  return json{{"products", jproducts},
              {"vendors", jvendors},
              {"versions", versions_}};
}

Gazetteer Gazetteer::from_json(const json& j) {
  Gazetteer g;
  for (const auto& p : j.value("products", json::array())) {
    const std::string part_str = p.value("part", "a");
    auto part = part_from_letter(part_str.empty() ? 'a' : part_str[0]);
    g.add_product(p.at("name").get<std::string>(),
                  part.value_or(Part::application));
  }
  for (const auto& v : j.value("vendors", json::array())) {
    g.add_vendor(v.get<std::string>());
  }
  if (j.contains("versions")) {
    for (const auto& [product, versions] : j.at("versions").items()) {
      g.add_versions(product, versions.get<std::vector<std::string>>());
    }
  }
  return g;
}

Gazetteer Gazetteer::load(const std::string& path) {
  return from_json(read_json_file(path, "extraction"));
}

const std::vector<std::vector<std::string>>& modifier_lexicon() {
  // Longest phrases first so greedy matching prefers them.
  static const std::vector<std::vector<std::string>> lexicon = {
      {"up", "to", "and", "including"},
      {"prior", "to"},
      {"up", "to"},
      {"and", "earlier"},
      {"and", "prior"},
      {"and", "later"},
      {"earlier", "than"},
      {"fixed", "in"},
      {"before"},
      {"after"},
      {"through"},
      {"versions"},
      {"version"},
  };
  return lexicon;
}

namespace {

std::string part_suffix(Part part) {
  switch (part) {
    case Part::application: return "APP";
    case Part::operating_system: return "OS";
    case Part::hardware: return "HW";
  }
  return "APP";
}

}  // namespace

std::vector<TokenLabel> extract_entities(std::string_view sentence,
                                         const Gazetteer& gazetteer) {
  const std::vector<Token> tokens = tokenize(sentence);
  const std::size_t n = tokens.size();
  std::vector<std::string> norm(n);
  for (std::size_t i = 0; i < n; ++i) norm[i] = lower(tokens[i].text);

  std::vector<std::string> labels(n, "O");

  // Pass 1: longest-match gazetteer product spans. Adjacent fragments that
  // jointly match one entry are covered by taking the longest window.
  std::size_t i = 0;
  while (i < n) {
    auto hit = gazetteer.longest_product_match(norm, i);
    if (!hit) {
      ++i;
      continue;
    }
    const auto [len, part] = *hit;
    // Platform mentions after "for" are context, not products.
    if (i > 0 && norm[i - 1] == "for") {
      for (std::size_t k = 0; k < len; ++k) labels[i + k] = "O";
      i += len;
      continue;
    }
    labels[i] = "B-PN-" + part_suffix(part);
    for (std::size_t k = 1; k < len; ++k) {
      labels[i + k] = "I-PN-" + part_suffix(part);
    }
    i += len;
  }

  // Pass 2: modifier lexicon, longest phrase first, over unlabeled tokens.
  i = 0;
  while (i < n) {
    if (labels[i] != "O") {
      ++i;
      continue;
    }
    bool matched = false;
    for (const auto& phrase : modifier_lexicon()) {
      if (i + phrase.size() > n) continue;
      bool ok = true;
      for (std::size_t k = 0; k < phrase.size(); ++k) {
        if (labels[i + k] != "O" || norm[i + k] != phrase[k]) {
          ok = false;
          break;
        }
      }
      if (ok) {
        // Contiguous modifier words form one span: "before version 1.4"
        // carries a single MOD entity "before version".
        const bool continues =
            i > 0 && (labels[i - 1] == "B-MOD" || labels[i - 1] == "I-MOD");
        labels[i] = continues ? "I-MOD" : "B-MOD";
        for (std::size_t k = 1; k < phrase.size(); ++k) labels[i + k] = "I-MOD";
        i += phrase.size();
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }

  // Pass 3: version tokens. Bare numbers read as versions directly after a
  // modifier ("before 10") or a product span ("Internet Explorer 9").
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k] != "O") continue;
    if (is_version_shaped(norm[k])) {
      labels[k] = "B-V";
    } else if (all_of_digits(norm[k]) && k > 0 &&
               (labels[k - 1] == "B-MOD" || labels[k - 1] == "I-MOD" ||
                labels[k - 1].rfind("B-PN", 0) == 0 ||
                labels[k - 1].rfind("I-PN", 0) == 0)) {
      labels[k] = "B-V";
    }
  }

  // Year identifiers followed by service-pack tokens are versions, the
  // "Word 2007 SP3" shape. Skipped when it would orphan a continuing span.
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (is_year_token(norm[k]) && is_service_pack_token(norm[k + 1]) &&
        (k + 2 >= n || labels[k + 2].rfind("I-", 0) != 0)) {
      labels[k] = "B-V";
      labels[k + 1] = "I-V";
    }
  }

  std::vector<TokenLabel> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(TokenLabel{tokens[k].text, labels[k]});
  }
  if (!is_valid_bio(out)) {
    throw Error(errc::config_error, "extraction",
                "internal: labeler produced an invalid BIO sequence");
  }
  return out;
}

std::vector<ExtractedEntity> entities_from_labels(
    const std::vector<TokenLabel>& labels) {
  std::vector<ExtractedEntity> out;
  std::size_t i = 0;
  while (i < labels.size()) {
    const std::string& label = labels[i].label;
    if (label.rfind("B-", 0) != 0) {
      ++i;
      continue;
    }
    const std::string body = label.substr(2);
    std::size_t j = i + 1;
    while (j < labels.size() && labels[j].label == "I-" + body) ++j;

    ExtractedEntity e;
    e.begin = i;
    e.end = j;
    for (std::size_t k = i; k < j; ++k) {
      if (!e.text.empty()) e.text += " ";
      e.text += labels[k].token;
    }
    if (body == "MOD") {
      e.kind = EntityKind::modifier;
    } else if (body == "V") {
      e.kind = EntityKind::version;
    } else {
      e.kind = EntityKind::product;
      if (body == "PN-APP") e.part = Part::application;
      else if (body == "PN-OS") e.part = Part::operating_system;
      else if (body == "PN-HW") e.part = Part::hardware;
    }
    out.push_back(std::move(e));
    i = j;
  }
  return out;
}

namespace {

bool is_generic_modifier(const ExtractedEntity& e) {
  const std::string norm = normalize_str(e.text);
  return norm == "version" || norm == "versions";
}

}  // namespace

std::vector<ModVGroup> group_mod_v(
    const std::vector<ExtractedEntity>& entities) {
  std::vector<ModVGroup> groups;
  std::vector<const ExtractedEntity*> ordered;
  for (const auto& e : entities) {
    if (e.kind != EntityKind::product) ordered.push_back(&e);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->begin < b->begin; });

  std::vector<bool> used(ordered.size(), false);
  auto bind = [&](std::size_t mod, std::size_t ver) {
    groups.push_back(ModVGroup{*ordered[mod], *ordered[ver]});
    used[mod] = used[ver] = true;
  };

  // Comparator modifiers bind first: the version that immediately follows
  // ("before 1.4"), else the one just before ("1.4 and earlier"). Generic
  // "version(s)" prefixes only claim what is left, so the comparator keeps
  // the span in "version 1.4 and earlier".
  for (int phase = 0; phase < 2; ++phase) {
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      if (used[i] || ordered[i]->kind != EntityKind::modifier) continue;
      if ((phase == 0) == is_generic_modifier(*ordered[i])) continue;
      if (i + 1 < ordered.size() && !used[i + 1] &&
          ordered[i + 1]->kind == EntityKind::version &&
          ordered[i + 1]->begin == ordered[i]->end) {
        bind(i, i + 1);
        continue;
      }
      if (phase == 0 && i > 0 && !used[i - 1] &&
          ordered[i - 1]->kind == EntityKind::version &&
          ordered[i]->begin == ordered[i - 1]->end) {
        bind(i, i - 1);
      }
    }
  }
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (!used[i] && ordered[i]->kind == EntityKind::version) {
      groups.push_back(ModVGroup{std::nullopt, *ordered[i]});
    }
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    return a.begin() < b.begin();
  });
  return groups;
}

std::vector<RelationPair> generate_candidate_pairs(
    const std::vector<ExtractedEntity>& entities) {
  std::vector<RelationPair> out;
  const auto groups = group_mod_v(entities);
  for (const auto& e : entities) {
    if (e.kind != EntityKind::product) continue;
    for (const auto& g : groups) {
      out.push_back(RelationPair{e, g, std::nullopt});
    }
  }
  return out;
}

void classify_pairs(std::vector<RelationPair>& candidates) {
  // Collect the distinct product spans.
  std::vector<ExtractedEntity> products;
  for (const auto& c : candidates) {
    if (std::find(products.begin(), products.end(), c.product) ==
        products.end()) {
      products.push_back(c.product);
    }
  }

  auto gap = [](const ExtractedEntity& p, const ModVGroup& g) {
    if (p.end <= g.begin()) return g.begin() - p.end;
    if (g.end() <= p.begin) return p.begin - g.end();
    return std::size_t{0};
  };

  for (auto& c : candidates) {
    const std::size_t own = gap(c.product, c.mod_v);
    bool nearest = true;
    for (const auto& other : products) {
      if (other == c.product) continue;
      const std::size_t d = gap(other, c.mod_v);
      if (d < own) {
        nearest = false;
        break;
      }
      if (d == own) {
        // Tie: the preceding product wins; then the earlier span.
        const bool own_precedes = c.product.end <= c.mod_v.begin();
        const bool other_precedes = other.end <= c.mod_v.begin();
        if (other_precedes && !own_precedes) {
          nearest = false;
          break;
        }
        if (other_precedes == own_precedes && other.begin < c.product.begin) {
          nearest = false;
          break;
        }
      }
    }
    c.valid = nearest;
  }
}

std::string to_bio(const std::vector<std::vector<TokenLabel>>& sentences) {
  std::ostringstream out;
  bool first = true;
  for (const auto& sentence : sentences) {
    if (!first) out << '\n';
    first = false;
    for (const auto& [token, label] : sentence) {
      out << token << '\t' << label << '\n';
    }
  }
  return out.str();
}

std::vector<std::vector<TokenLabel>> parse_bio(std::string_view content) {
  std::vector<std::vector<TokenLabel>> sentences;
  std::vector<TokenLabel> current;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t eol = content.find('\n', start);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(start, eol - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (!current.empty()) {
        sentences.push_back(std::move(current));
        current.clear();
      }
    } else {
      const std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos) {
        throw Error(errc::feed_schema, "extraction",
                    "bio line without tab: " + std::string(line));
      }
      current.push_back(TokenLabel{std::string(line.substr(0, tab)),
                                   std::string(line.substr(tab + 1))});
    }
    if (eol == content.size()) break;
    start = eol + 1;
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

}  // namespace cpegraph
