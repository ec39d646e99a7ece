#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "cpegraph/cpe.hpp"

using namespace cpegraph;

TEST_CASE("parses the standard formatted string") {
  auto c = parse_cpe("cpe:2.3:o:cisco:ios_xe:3.13.2as:*:*:*:*:*:*:*");
  CHECK(c.part == Part::operating_system);
  CHECK(c.vendor == "cisco");
  CHECK(c.product == "ios_xe");
  CHECK(c.version == "3.13.2as");
  CHECK(CpeName::is_any(c.update));
}

TEST_CASE("all-wildcard application") {
  auto c = parse_cpe("cpe:2.3:a:*:*:*:*:*:*:*:*:*:*");
  CHECK(c.part == Part::application);
  for (const std::string* f :
       {&c.vendor, &c.product, &c.version, &c.update, &c.edition, &c.language,
        &c.sw_edition, &c.target_sw, &c.target_hw, &c.other}) {
    CHECK(CpeName::is_any(*f));
  }
}

TEST_CASE("rejects malformed input") {
  CHECK_THROWS_AS(parse_cpe("cpe:2.3:x:v:p:1:*:*:*:*:*:*:*"), Error);
  CHECK_THROWS_AS(parse_cpe("cpe:2.3:a:v:p:1:*:*:*:*:*:*"), Error);  // 10 fields
  CHECK_THROWS_AS(parse_cpe("cpe:2.3:a:v:p:1:*:*:*:*:*:*:*:*"), Error);
  CHECK_THROWS_AS(parse_cpe("cpe:/a:v:p:1"), Error);  // URI binding
  CHECK_THROWS_AS(parse_cpe("cpe:2.3:a:bad!char:p:1:*:*:*:*:*:*:*"), Error);
  CHECK_THROWS_AS(parse_cpe("cpe:2.3:a:trailing\\"), Error);
  CHECK_THROWS_AS(parse_cpe(""), Error);
  try {
    parse_cpe("cpe:2.3:x:v:p:1:*:*:*:*:*:*:*");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::malformed_cpe);
  }
}

TEST_CASE("format emits canonical lowercase form") {
  CpeName c;
  c.part = Part::operating_system;
  c.vendor = "cisco";
  c.product = "ios_xe";
  c.version = "3.13.2as";
  CHECK(format_cpe(c) == "cpe:2.3:o:cisco:ios_xe:3.13.2as:*:*:*:*:*:*:*");

  CHECK(format_cpe(CpeName{}) == "cpe:2.3:a:*:*:*:*:*:*:*:*:*:*");

  auto parsed = parse_cpe("cpe:2.3:A:Cisco:IOS_XE:3.13.2AS:*:*:*:*:*:*:*");
  CHECK(format_cpe(parsed) == "cpe:2.3:a:cisco:ios_xe:3.13.2as:*:*:*:*:*:*:*");
}

TEST_CASE("escaped colon round-trips") {
  CpeName c;
  c.vendor = escape_component("acme:corp");
  CHECK(c.vendor == "acme\\:corp");
  const std::string s = format_cpe(c);
  CHECK(s.find("acme\\:corp") != std::string::npos);
  auto back = parse_cpe(s);
  CHECK(back == c);
  CHECK(unescape_component(back.vendor) == "acme:corp");
}

TEST_CASE("NA and literal hyphen stay distinct") {
  CpeName c;
  c.update = "-";                       // NA
  c.edition = escape_component("-x");   // literal
  const std::string s = format_cpe(c);
  auto back = parse_cpe(s);
  CHECK(CpeName::is_na(back.update));
  CHECK_FALSE(CpeName::is_na(back.edition));
}

namespace {

std::string random_raw_value(std::mt19937_64& rng) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyz0123456789._-:!/\\#$%+";
  std::uniform_int_distribution<std::size_t> len(1, 12);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string out;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[pick(rng)]);
  return out;
}

}  // namespace

TEST_CASE("round trip over randomized field contents") {
  std::mt19937_64 rng(20240810);
  const std::array<Part, 3> parts = {Part::application,
                                     Part::operating_system, Part::hardware};
  for (int iter = 0; iter < 10000; ++iter) {
    CpeName c;
    c.part = parts[iter % 3];
    std::string* fields[] = {&c.vendor,     &c.product,   &c.version,
                             &c.update,     &c.edition,   &c.language,
                             &c.sw_edition, &c.target_sw, &c.target_hw,
                             &c.other};
    for (auto* f : fields) {
      switch (iter % 5 == 0 ? rng() % 3 : 2) {
        case 0: *f = "*"; break;
        case 1: *f = "-"; break;
        default: *f = escape_component(random_raw_value(rng));
      }
      if (f->empty()) *f = "*";
    }
    const std::string s = format_cpe(c);
    CpeName back = parse_cpe(s);
    CHECK(back == c);
    CHECK(format_cpe(back) == s);  // canonical fixed point
  }
}

TEST_CASE("ucpe ids are content-addressed") {
  auto a = UcpeEntry::make("google", "chrome", "8.0.552.200",
                           Part::application);
  auto b = UcpeEntry::make("google", "chrome", "8.0.552.200",
                           Part::application);
  auto c = UcpeEntry::make("google", "chrome", "8.0.552.215",
                           Part::application);
  auto d = UcpeEntry::make("google", "chrome", "8.0.552.200",
                           Part::operating_system);
  CHECK(a.id == b.id);
  CHECK(a.id != c.id);
  CHECK(a.id != d.id);
  CHECK(a == b);

  // JSON round trip
  CHECK(UcpeEntry::from_json(a.to_json()) == a);
}

TEST_CASE("version constraints mirror CPE match attributes") {
  auto range = VersionConstraint::range(VersionBound{"1.2", true},
                                        VersionBound{"2.0", false});
  CHECK(range.matches("1.2"));
  CHECK(range.matches("1.9"));
  CHECK_FALSE(range.matches("2.0"));
  CHECK_FALSE(range.matches("1.1"));

  auto exact = VersionConstraint::exact_version("1.4");
  CHECK(exact.matches("1.4"));
  CHECK_FALSE(exact.matches("1.4.0"));

  auto any = VersionConstraint::exact_version("*");
  CHECK(any.matches("9.9.9"));
  CHECK(any.is_wildcard());

  auto list = VersionConstraint::list({"2.0", "1.0", "2.0"});
  CHECK(list.explicit_versions ==
        std::vector<std::string>{"1.0", "2.0"});  // sorted, dedup
  CHECK(list.matches("1.0"));
  CHECK_FALSE(list.matches("1.5"));

  CHECK(VersionConstraint::from_json(range.to_json()) == range);
  CHECK(VersionConstraint::from_json(list.to_json()) == list);
}
