#include "cpegraph/postprocess.hpp"

#include <algorithm>
#include <sstream>

#include "cpegraph/similarity.hpp"
#include "cpegraph/version.hpp"

namespace cpegraph {

const char* entry_source_name(EntrySource s) {
  return s == EntrySource::extracted_re ? "extracted_re" : "cpe_match";
}

namespace {

struct SeparationCandidate {
  std::string vendor;
  std::string product;
  double sim = -1.0;
};

// Higher similarity wins; then the vendor with more CVEs; then lexicographic
// (vendor, product).
bool better(const SeparationCandidate& a, const SeparationCandidate& b,
            const CanonicalDictionary& dict) {
  if (a.sim != b.sim) return a.sim > b.sim;
  const long ca = dict.cve_count(a.vendor);
  const long cb = dict.cve_count(b.vendor);
  if (ca != cb) return ca > cb;
  return std::tie(a.vendor, a.product) < std::tie(b.vendor, b.product);
}

double best_product_sim(const CanonicalDictionary& dict,
                        const std::string& vendor, const NormalizedName& name,
                        std::string& best_product) {
  double best = -1.0;
  auto it = dict.products.find(vendor);
  if (it == dict.products.end()) return best;
  for (const auto& product : it->second) {
    const double sim = sim_edit(name, NormalizedName{product, product});
    if (sim > best) {
      best = sim;
      best_product = product;
    }
  }
  return best;
}

}  // namespace

std::pair<std::string, std::string> separate_vendor_product(
    const RawEntry& entry, const CanonicalDictionary& dict, double tau) {
  if (entry.product.empty()) {
    throw Error(errc::unresolvable_name, "postprocess",
                "entry without a product name");
  }

  if (entry.vendor && !entry.vendor->empty()) {
    auto vendor = standardize(*entry.vendor, dict, tau);
    if (!vendor) {
      throw Error(errc::unresolvable_name, "postprocess",
                  "vendor did not standardize: " + *entry.vendor,
                  json{{"vendor", *entry.vendor}});
    }
    auto product = standardize_product(entry.product, dict, *vendor, tau);
    if (!product) {
      throw Error(errc::unresolvable_name, "postprocess",
                  "product did not standardize under vendor " + *vendor +
                      ": " + entry.product,
                  json{{"vendor", *vendor}, {"product", entry.product}});
    }
    return {*vendor, *product};
  }

  // No vendor: search all vendors, considering the full string as a product
  // name as well as canonical-vendor prefixes of it ("google chrome").
  const NormalizedName whole = normalize(entry.product);
  SeparationCandidate best;
  for (const auto& vendor : dict.vendors) {
    std::string product;
    double sim = best_product_sim(dict, vendor, whole, product);
    if (sim >= 0) {
      SeparationCandidate cand{vendor, product, sim};
      if (better(cand, best, dict)) best = cand;
    }
    // Prefix split: "<vendor> <residual>".
    if (whole.norm.size() > vendor.size() + 1 &&
        whole.norm.compare(0, vendor.size(), vendor) == 0 &&
        whole.norm[vendor.size()] == ' ') {
      const std::string residual = whole.norm.substr(vendor.size() + 1);
      std::string res_product;
      double res_sim = best_product_sim(
          dict, vendor, NormalizedName{residual, residual}, res_product);
      if (res_sim >= 0) {
        SeparationCandidate cand{vendor, res_product, res_sim};
        if (better(cand, best, dict)) best = cand;
      }
    }
  }

  // Alias spellings of an embedded vendor prefix also resolve ("MS Office"
  // when "ms" aliases microsoft).
  for (const auto& [alias, vendor] : dict.vendor_aliases) {
    const std::string alias_norm = normalize_str(alias);
    if (alias_norm.empty()) continue;
    if (whole.norm.size() > alias_norm.size() + 1 &&
        whole.norm.compare(0, alias_norm.size(), alias_norm) == 0 &&
        whole.norm[alias_norm.size()] == ' ') {
      const std::string residual = whole.norm.substr(alias_norm.size() + 1);
      std::string res_product;
      double res_sim = best_product_sim(
          dict, vendor, NormalizedName{residual, residual}, res_product);
      if (res_sim >= 0) {
        SeparationCandidate cand{vendor, res_product, res_sim};
        if (better(cand, best, dict)) best = cand;
      }
    }
  }

  if (best.sim < tau) {
    throw Error(errc::unresolvable_name, "postprocess",
                "no (vendor, product) candidate reached tau for: " +
                    entry.product,
                json{{"product", entry.product}, {"best_sim", best.sim}});
  }
  return {best.vendor, best.product};
}

namespace {

std::string join_tokens(const std::vector<std::string>& tokens,
                        std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out += " ";
    out += tokens[i];
  }
  return out;
}

// Parses a textual descriptor into a constraint. Tokens "version"/"versions"
// are filler and ignored.
VersionConstraint parse_descriptor(const std::string& text) {
  std::vector<std::string> tokens;
  {
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
      std::string low;
      for (char c : tok) {
        low.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
      if (low == "version" || low == "versions") continue;
      tokens.push_back(low);
    }
  }

  auto fail = [&]() -> VersionConstraint {
    throw Error(errc::unrecognized_descriptor, "postprocess",
                "descriptor matched no pattern: " + text,
                json{{"descriptor", text}});
  };

  if (tokens.empty()) return fail();
  if (tokens.size() == 1) {
    if (tokens[0] == "*" || tokens[0] == "any" || tokens[0] == "all") {
      return VersionConstraint::exact_version("*");
    }
    return VersionConstraint::exact_version(tokens[0]);
  }

  const std::string first = tokens[0];
  const std::string rest = join_tokens(tokens, 1, tokens.size());
  const std::string last = tokens.back();

  // "not affected before X" flips the comparison: affected strictly after X.
  if (tokens.size() >= 3 && tokens[0] == "not" && tokens[1] == "affected") {
    std::vector<std::string> inner(tokens.begin() + 2, tokens.end());
    if (inner.size() >= 2 && (inner[0] == "before" || inner[0] == "below")) {
      return VersionConstraint::range(
          VersionBound{join_tokens(inner, 1, inner.size()), false},
          std::nullopt);
    }
    return fail();
  }

  if (first == "before" || first == "below") {
    return VersionConstraint::range(std::nullopt, VersionBound{rest, false});
  }
  if (first == "after") {
    return VersionConstraint::range(VersionBound{rest, false}, std::nullopt);
  }
  if (first == "through") {
    return VersionConstraint::range(std::nullopt, VersionBound{rest, true});
  }
  if (tokens.size() >= 3 && tokens[0] == "prior" && tokens[1] == "to") {
    return VersionConstraint::range(
        std::nullopt, VersionBound{join_tokens(tokens, 2, tokens.size()),
                                   false});
  }
  if (tokens.size() >= 3 && tokens[0] == "earlier" && tokens[1] == "than") {
    return VersionConstraint::range(
        std::nullopt, VersionBound{join_tokens(tokens, 2, tokens.size()),
                                   false});
  }
  if (tokens.size() >= 5 && tokens[0] == "up" && tokens[1] == "to" &&
      tokens[2] == "and" && tokens[3] == "including") {
    return VersionConstraint::range(
        std::nullopt, VersionBound{join_tokens(tokens, 4, tokens.size()),
                                   true});
  }
  if (tokens.size() >= 3 && tokens[0] == "up" && tokens[1] == "to") {
    return VersionConstraint::range(
        std::nullopt, VersionBound{join_tokens(tokens, 2, tokens.size()),
                                   true});
  }
  if (tokens.size() >= 3 && tokens[0] == "fixed" && tokens[1] == "in") {
    return VersionConstraint::range(
        std::nullopt, VersionBound{join_tokens(tokens, 2, tokens.size()),
                                   false});
  }
  if (tokens.size() >= 3 && tokens[tokens.size() - 2] == "and" &&
      (last == "earlier" || last == "prior" || last == "below")) {
    return VersionConstraint::range(
        std::nullopt,
        VersionBound{join_tokens(tokens, 0, tokens.size() - 2), true});
  }
  if (tokens.size() >= 3 && tokens[tokens.size() - 2] == "and" &&
      last == "later") {
    return VersionConstraint::range(
        VersionBound{join_tokens(tokens, 0, tokens.size() - 2), true},
        std::nullopt);
  }
  return fail();
}

}  // namespace

ConvertedVersions convert_version(
    const std::variant<std::string, VersionConstraint>& desc,
    const std::vector<std::string>& releases) {
  VersionConstraint constraint;
  if (std::holds_alternative<VersionConstraint>(desc)) {
    constraint = std::get<VersionConstraint>(desc);
  } else {
    constraint = parse_descriptor(std::get<std::string>(desc));
  }

  ConvertedVersions out;
  for (const auto& release : releases) {
    if (constraint.matches(release)) out.versions.push_back(release);
  }
  sort_versions(out.versions);

  // Exact or listed versions missing from the release catalog are kept and
  // flagged; a feed referencing a version nobody catalogued is still a claim
  // about that version.
  auto known = [&](const std::string& token) {
    return std::any_of(releases.begin(), releases.end(),
                       [&](const std::string& r) {
                         return version_eq(r, token);
                       });
  };
  if (constraint.kind == VersionConstraint::Kind::exact &&
      constraint.exact != "*" && constraint.exact != "-" &&
      !known(constraint.exact)) {
    out.unlisted.push_back(constraint.exact);
    out.versions.push_back(constraint.exact);
    sort_versions(out.versions);
  }
  if (constraint.kind == VersionConstraint::Kind::list) {
    for (const auto& token : constraint.explicit_versions) {
      if (!known(token)) {
        out.unlisted.push_back(token);
        out.versions.push_back(token);
      }
    }
    sort_versions(out.versions);
  }
  return out;
}

json ResolvedEntry::to_json() const {
  json entries = json::array();
  for (const auto& u : ucpe) entries.push_back(u.to_json());
  return json{{"ucpe", entries},
              {"source", entry_source_name(source)},
              {"original_desc", original_desc},
              {"vendor", vendor},
              {"product", product},
              {"unresolvable", unresolvable},
              {"reason", reason}};
}

std::optional<ConvertedVersions> ResolveCache::get(
    const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(key);
  if (it == cache_.end()) return std::nullopt;
  return it->second;
}

void ResolveCache::put(const std::string& key, ConvertedVersions value) {
  std::lock_guard<std::mutex> lock(mutex_);
  cache_[key] = std::move(value);
}

std::size_t ResolveCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

namespace {

std::string describe(const std::variant<std::string, VersionConstraint>& d) {
  if (std::holds_alternative<std::string>(d)) return std::get<std::string>(d);
  return std::get<VersionConstraint>(d).to_json().dump();
}

ResolvedEntry resolve_with_cache(const RawEntry& entry,
                                 const CanonicalDictionary& dict, double tau,
                                 ResolveCache* cache) {
  ResolvedEntry out;
  out.source = entry.source;
  out.original_desc = describe(entry.version_desc);
  try {
    auto [vendor, product] = separate_vendor_product(entry, dict, tau);
    out.vendor = vendor;
    out.product = product;

    // A wildcard version stays a single "*" entry: it must match asset
    // versions no catalog has listed, so expanding over known releases would
    // narrow it.
    if (std::holds_alternative<VersionConstraint>(entry.version_desc) &&
        std::get<VersionConstraint>(entry.version_desc).is_wildcard()) {
      const Part part = entry.part.value_or(Part::application);
      out.ucpe.push_back(UcpeEntry::make(vendor, product, "*", part));
      return out;
    }

    const std::string key = vendor + "\x1f" + product + "\x1f" +
                            out.original_desc;
    ConvertedVersions converted;
    bool from_cache = false;
    if (cache) {
      if (auto hit = cache->get(key)) {
        converted = *hit;
        from_cache = true;
      }
    }
    if (!from_cache) {
      converted = convert_version(entry.version_desc,
                                  dict.releases_of(vendor, product));
      if (cache) cache->put(key, converted);
    }

    if (converted.versions.empty()) {
      out.unresolvable = true;
      out.reason = "descriptor selected no versions";
      return out;
    }
    const Part part = entry.part.value_or(Part::application);
    for (const auto& version : converted.versions) {
      out.ucpe.push_back(UcpeEntry::make(vendor, product, version, part));
    }
  } catch (const Error& e) {
    if (e.code() != errc::unresolvable_name &&
        e.code() != errc::unrecognized_descriptor) {
      throw;
    }
    out.unresolvable = true;
    out.reason = e.what();
  }
  return out;
}

}  // namespace

ResolvedEntry resolve_entry(const RawEntry& entry,
                            const CanonicalDictionary& dict, double tau,
                            ResolveCache* cache) {
  return resolve_with_cache(entry, dict, tau, cache);
}

std::vector<ResolvedEntry> merge_entries(
    const std::vector<RawEntry>& re_entries,
    const std::vector<RawEntry>& cpe_entries, const CanonicalDictionary& dict,
    double tau, ResolveCache* cache) {
  std::vector<ResolvedEntry> out;
  if (re_entries.empty() && cpe_entries.empty()) return out;

  std::vector<ResolvedEntry> cpe_resolved;
  cpe_resolved.reserve(cpe_entries.size());
  for (const auto& entry : cpe_entries) {
    cpe_resolved.push_back(resolve_with_cache(entry, dict, tau, cache));
  }

  std::vector<bool> re_aligned(re_entries.size(), false);
  std::vector<ResolvedEntry> re_resolved;
  re_resolved.reserve(re_entries.size());
  for (const auto& entry : re_entries) {
    re_resolved.push_back(resolve_with_cache(entry, dict, tau, cache));
  }

  // Alignment: same canonical pair and overlapping version lists. The CPE
  // side is authoritative for versions, so the aligned RE entry is dropped.
  for (std::size_t i = 0; i < re_resolved.size(); ++i) {
    const auto& re = re_resolved[i];
    if (re.unresolvable) continue;
    for (const auto& cpe : cpe_resolved) {
      if (cpe.unresolvable) continue;
      if (re.vendor != cpe.vendor || re.product != cpe.product) continue;
      const bool overlap = std::any_of(
          re.ucpe.begin(), re.ucpe.end(), [&](const UcpeEntry& u) {
            return std::any_of(cpe.ucpe.begin(), cpe.ucpe.end(),
                               [&](const UcpeEntry& c) {
                                 return c.version == u.version;
                               });
          });
      if (overlap) {
        re_aligned[i] = true;
        break;
      }
    }
  }

  for (auto& resolved : cpe_resolved) out.push_back(std::move(resolved));
  for (std::size_t i = 0; i < re_resolved.size(); ++i) {
    if (!re_aligned[i]) out.push_back(std::move(re_resolved[i]));
  }
  return out;
}

}  // namespace cpegraph
