#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cpegraph/cpe.hpp"
#include "cpegraph/dictionary.hpp"

namespace cpegraph {

enum class EntrySource { extracted_re, cpe_match };

const char* entry_source_name(EntrySource s);

// One extracted or CPE-derived (vendor, product, version descriptor) unit
// awaiting standardization.
struct RawEntry {
  std::optional<std::string> vendor;
  std::string product;  // non-empty
  std::variant<std::string, VersionConstraint> version_desc;
  std::optional<Part> part;
  EntrySource source = EntrySource::extracted_re;
};

// separate_vendor_product: canonicalizes the vendor (when given) and matches
// the product inside that vendor; without a vendor, searches every
// (vendor, product) pair for the best product-similarity hit, trying both the
// whole string and vendor-prefix splits ("Google Chrome" -> google / chrome).
// Ties break toward the vendor with more CVEs, then lexicographically.
// Throws UnresolvableName when nothing reaches tau.
std::pair<std::string, std::string> separate_vendor_product(
    const RawEntry& entry, const CanonicalDictionary& dict, double tau);

struct ConvertedVersions {
  std::vector<std::string> versions;  // subset of releases, sorted
  std::vector<std::string> unlisted;  // exact/list tokens missing from releases
};

// The version converter: maps a textual descriptor or a VersionConstraint to
// the discrete release list {v in releases | cond(v)}.
//
// Recognized textual patterns (case-insensitive, "version"/"versions" filler
// ignored): "before X", "prior to X", "earlier than X", "X and earlier",
// "X and prior", "up to X", "up to and including X", "through X",
// "after X", "X and later", "not affected before X" (=> v > X),
// "fixed in X" (=> v < X), bare "X" (exact), "*" (everything).
// Unknown text throws UnrecognizedDescriptor. Exact versions absent from the
// release list are kept, flagged via `unlisted`.
ConvertedVersions convert_version(
    const std::variant<std::string, VersionConstraint>& desc,
    const std::vector<std::string>& releases);

struct ResolvedEntry {
  std::vector<UcpeEntry> ucpe;  // one per concrete version
  EntrySource source = EntrySource::extracted_re;
  std::string original_desc;
  std::string vendor;   // canonical
  std::string product;  // canonical
  bool unresolvable = false;
  std::string reason;  // set when unresolvable

  json to_json() const;
};

class ResolveCache;

// Resolves one entry end to end: separate names, convert the descriptor over
// the dictionary's release list, mint uCPE entries.
ResolvedEntry resolve_entry(const RawEntry& entry,
                            const CanonicalDictionary& dict, double tau,
                            ResolveCache* cache = nullptr);

// Memo for resolve results, keyed by (vendor, product, descriptor).
// Writes are idempotent, so last-writer-wins under concurrency is safe.
class ResolveCache {
 public:
  std::optional<ConvertedVersions> get(const std::string& key) const;
  void put(const std::string& key, ConvertedVersions value);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ConvertedVersions> cache_;
};

// Merges extracted and CPE-derived entries. Entries that standardize to the
// same canonical (vendor, product) with overlapping version lists align, and
// the CPE side's version data wins; everything else resolves independently.
std::vector<ResolvedEntry> merge_entries(const std::vector<RawEntry>& re_entries,
                                         const std::vector<RawEntry>& cpe_entries,
                                         const CanonicalDictionary& dict,
                                         double tau,
                                         ResolveCache* cache = nullptr);

}  // namespace cpegraph
