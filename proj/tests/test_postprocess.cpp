#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <functional>
#include <random>

#include "cpegraph/feed.hpp"
#include "cpegraph/postprocess.hpp"
#include "cpegraph/version.hpp"

using namespace cpegraph;

namespace {

const std::string kFixtures = CPEGRAPH_FIXTURE_DIR;

CanonicalDictionary fixture_dictionary() {
  auto entries = read_catalog_jsonl(kFixtures + "/catalog.jsonl");
  auto dict_result = ingest_cpe_dictionary(kFixtures + "/cpe_dict.jsonl");
  entries.insert(entries.end(), dict_result.entries.begin(),
                 dict_result.entries.end());
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
  return build_canonical_dictionary(entries, groups,
                                    {{"microsoft", 1200}, {"google", 30},
                                     {"apache", 40}});
}

RawEntry entry_of(std::optional<std::string> vendor, std::string product,
                  std::string desc) {
  RawEntry e;
  e.vendor = std::move(vendor);
  e.product = std::move(product);
  e.version_desc = std::move(desc);
  e.part = Part::application;
  return e;
}

}  // namespace

TEST_CASE("separate vendor and product") {
  auto dict = fixture_dictionary();
  auto [v1, p1] = separate_vendor_product(
      entry_of(std::string("Google"), "Chrome", "1.0"), dict, 0.8);
  CHECK(v1 == "google");
  CHECK(p1 == "chrome");

  // exact canonical inputs pass through
  auto [v2, p2] = separate_vendor_product(
      entry_of(std::string("google"), "chrome", "1.0"), dict, 0.8);
  CHECK(v2 == "google");
  CHECK(p2 == "chrome");

  // vendor absent: unique owner lookup
  auto [v3, p3] = separate_vendor_product(
      entry_of(std::nullopt, "Internet Explorer", "9"), dict, 0.8);
  CHECK(v3 == "microsoft");
  CHECK(p3 == "internet explorer");

  // vendor absent with vendor-prefixed product
  auto [v4, p4] = separate_vendor_product(
      entry_of(std::nullopt, "Google Chrome", "1.0"), dict, 0.8);
  CHECK(v4 == "google");
  CHECK(p4 == "chrome");

  // aliased vendor spellings resolve
  auto [v5, p5] = separate_vendor_product(
      entry_of(std::string("microsoft-corp"), "Word", "2016"), dict, 0.8);
  CHECK(v5 == "microsoft");
  CHECK(p5 == "word");

  CHECK_THROWS_AS(separate_vendor_product(
                      entry_of(std::nullopt, "zzqx wobble", "1"), dict, 0.8),
                  Error);
}

namespace {

// Independent linear-scan oracle used to pin convert_version outputs.
std::vector<std::string> oracle_filter(
    const std::vector<std::string>& releases,
    const std::function<bool(const std::string&)>& cond) {
  std::vector<std::string> out;
  for (const auto& r : releases) {
    if (cond(r)) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("descriptor patterns against a small release list") {
  const std::vector<std::string> releases = {"1.0", "1.4", "2.0"};
  auto conv = [&](const std::string& desc) {
    return convert_version(desc, releases).versions;
  };
  CHECK(conv("version 1.4 and earlier") ==
        std::vector<std::string>{"1.0", "1.4"});
  CHECK(conv("before 1.4") == std::vector<std::string>{"1.0"});
  CHECK(conv("prior to 2.0") == std::vector<std::string>{"1.0", "1.4"});
  CHECK(conv("up to 1.4") == std::vector<std::string>{"1.0", "1.4"});
  CHECK(conv("up to and including 1.4") ==
        std::vector<std::string>{"1.0", "1.4"});
  CHECK(conv("through 1.4") == std::vector<std::string>{"1.0", "1.4"});
  CHECK(conv("after 1.0") == std::vector<std::string>{"1.4", "2.0"});
  CHECK(conv("1.4 and later") == std::vector<std::string>{"1.4", "2.0"});
  CHECK(conv("not affected before 1.4") == std::vector<std::string>{"2.0"});
  CHECK(conv("fixed in 2.0") == std::vector<std::string>{"1.0", "1.4"});
  CHECK(conv("earlier than 1.4") == std::vector<std::string>{"1.0"});
  CHECK(conv("1.4") == std::vector<std::string>{"1.4"});
  CHECK(conv("*") == releases);
  CHECK_THROWS_AS(conv("sometime around lunch"), Error);
}

TEST_CASE("unlisted exact versions are kept and flagged") {
  auto result = convert_version(std::string("9.9"), {"1.0", "2.0"});
  CHECK(result.versions == std::vector<std::string>{"9.9"});
  CHECK(result.unlisted == std::vector<std::string>{"9.9"});

  auto listed = convert_version(std::string("2.0"), {"1.0", "2.0"});
  CHECK(listed.versions == std::vector<std::string>{"2.0"});
  CHECK(listed.unlisted.empty());
}

TEST_CASE("wildcard and empty constraints") {
  VersionConstraint any = VersionConstraint::exact_version("*");
  auto result = convert_version(any, {"1.0", "2.0", "3.0"});
  CHECK(result.versions == std::vector<std::string>{"1.0", "2.0", "3.0"});
}

TEST_CASE("chrome release-range conversion over the bundled fixture") {
  auto dict = fixture_dictionary();
  const auto& releases = dict.releases_of("google", "chrome");
  REQUIRE(!releases.empty());
  auto converted = convert_version(std::string("before 8.0.552.344"), releases);
  REQUIRE(!converted.versions.empty());
  CHECK(converted.versions.front() == "0.1.38.1");
  CHECK(converted.versions[1] == "0.1.38.2");
  CHECK(converted.versions.back() == "8.0.552.235");
  // the independent oracle agrees
  auto expected = oracle_filter(releases, [](const std::string& v) {
    return version_less(v, "8.0.552.344");
  });
  CHECK(converted.versions == expected);
}

namespace {

std::string random_version(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> seg(1, 3), num(0, 20);
  std::string out = std::to_string(num(rng));
  for (int i = seg(rng); i > 0; --i) {
    out += "." + std::to_string(num(rng));
  }
  return out;
}

}  // namespace

TEST_CASE("oracle equivalence on randomized descriptor/release cases") {
  std::mt19937_64 rng(20240831);
  const std::array<std::string, 7> kinds = {
      "before", "after", "through", "up to", "prior to", "and earlier",
      "exact"};
  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<std::string> releases;
    std::uniform_int_distribution<int> n(0, 12);
    for (int i = n(rng); i > 0; --i) releases.push_back(random_version(rng));
    sort_versions(releases);

    const std::string pivot = random_version(rng);
    const std::string& kind = kinds[iter % kinds.size()];
    std::string desc;
    std::function<bool(const std::string&)> cond;
    if (kind == "before") {
      desc = "before " + pivot;
      cond = [&](const std::string& v) { return version_less(v, pivot); };
    } else if (kind == "after") {
      desc = "after " + pivot;
      cond = [&](const std::string& v) { return version_less(pivot, v); };
    } else if (kind == "through") {
      desc = "through " + pivot;
      cond = [&](const std::string& v) { return !version_less(pivot, v); };
    } else if (kind == "up to") {
      desc = "up to " + pivot;
      cond = [&](const std::string& v) { return !version_less(pivot, v); };
    } else if (kind == "prior to") {
      desc = "prior to " + pivot;
      cond = [&](const std::string& v) { return version_less(v, pivot); };
    } else if (kind == "and earlier") {
      desc = pivot + " and earlier";
      cond = [&](const std::string& v) { return !version_less(pivot, v); };
    } else {
      desc = pivot;
      cond = [&](const std::string& v) { return version_eq(v, pivot); };
    }

    auto got = convert_version(desc, releases).versions;
    auto expected = oracle_filter(releases, cond);
    if (kind == "exact" && expected.empty()) {
      expected.push_back(pivot);  // unlisted exact kept, flagged
    }
    CHECK(got == expected);
  }
}

TEST_CASE("convert output is a sorted subset of releases") {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::string> releases;
    std::uniform_int_distribution<int> n(1, 10);
    for (int i = n(rng); i > 0; --i) releases.push_back(random_version(rng));
    sort_versions(releases);
    auto got = convert_version("before " + random_version(rng), releases);
    CHECK(std::is_sorted(got.versions.begin(), got.versions.end(),
                         [](const std::string& a, const std::string& b) {
                           return version_less(a, b);
                         }));
    for (const auto& v : got.versions) {
      CHECK(std::find(releases.begin(), releases.end(), v) != releases.end());
    }
  }
}

TEST_CASE("merge aligns matching pairs and prefers CPE versions") {
  auto dict = fixture_dictionary();
  std::vector<RawEntry> re = {
      entry_of(std::nullopt, "Google Chrome", "before 8.0.552.344")};
  RawEntry cpe;
  cpe.vendor = "google";
  cpe.product = "chrome";
  cpe.version_desc = VersionConstraint::range(
      std::nullopt, VersionBound{"8.0.552.344", false});
  cpe.part = Part::application;
  cpe.source = EntrySource::cpe_match;
  std::vector<RawEntry> cpes = {cpe};

  auto merged = merge_entries(re, cpes, dict, 0.8);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].source == EntrySource::cpe_match);
  CHECK(!merged[0].ucpe.empty());

  // only RE entries: all RE-sourced
  auto only_re = merge_entries(re, {}, dict, 0.8);
  REQUIRE(only_re.size() == 1);
  CHECK(only_re[0].source == EntrySource::extracted_re);

  // both empty
  CHECK(merge_entries({}, {}, dict, 0.8).empty());
}

TEST_CASE("merge is idempotent in effect and cache is invisible") {
  auto dict = fixture_dictionary();
  std::vector<RawEntry> re = {
      entry_of(std::nullopt, "Google Chrome", "before 8.0.552.344"),
      entry_of(std::string("OpenSSL"), "OpenSSL", "before 1.0.2")};
  RawEntry cpe;
  cpe.vendor = "google";
  cpe.product = "chrome";
  cpe.version_desc = VersionConstraint::range(
      std::nullopt, VersionBound{"8.0.552.344", false});
  cpe.source = EntrySource::cpe_match;
  std::vector<RawEntry> cpes = {cpe};

  ResolveCache cache;
  auto with_cache = merge_entries(re, cpes, dict, 0.8, &cache);
  auto without_cache = merge_entries(re, cpes, dict, 0.8);
  REQUIRE(with_cache.size() == without_cache.size());
  for (std::size_t i = 0; i < with_cache.size(); ++i) {
    CHECK(with_cache[i].ucpe == without_cache[i].ucpe);
    CHECK(with_cache[i].source == without_cache[i].source);
  }
  CHECK(cache.size() > 0);

  // run again through the warm cache: identical output
  auto warm = merge_entries(re, cpes, dict, 0.8, &cache);
  REQUIRE(warm.size() == with_cache.size());
  for (std::size_t i = 0; i < warm.size(); ++i) {
    CHECK(warm[i].ucpe == with_cache[i].ucpe);
  }
}

TEST_CASE("resolve routes failures to the unresolved report") {
  auto dict = fixture_dictionary();
  auto resolved =
      resolve_entry(entry_of(std::nullopt, "zzqx wobble", "1.0"), dict, 0.8);
  CHECK(resolved.unresolvable);
  CHECK(!resolved.reason.empty());
  CHECK(resolved.ucpe.empty());
}
