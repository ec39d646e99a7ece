#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "cpegraph/version.hpp"

using namespace cpegraph;

TEST_CASE("numeric segments compare numerically") {
  CHECK(version_less("8.0.552.235", "8.0.552.344"));
  CHECK(compare_versions("1.4", "1.4") == std::strong_ordering::equal);
  CHECK(version_less("1.4", "1.4.1"));
  CHECK(version_less("2", "2a"));
  CHECK(version_less("1.9", "1.10"));
}

TEST_CASE("alphanumeric suffixes compare after numeric prefix") {
  CHECK(version_less("3.13.2as", "3.13.2b"));  // suffix "as" < "b"
  CHECK(version_less("3.13.2", "3.13.2as"));
  CHECK(version_less("1.0.2-alpha", "1.0.2-beta"));
}

TEST_CASE("date-shaped versions compare chronologically") {
  CHECK(compare_versions("2017-02-12", "2017-01-01") ==
        std::strong_ordering::greater);
  CHECK(version_less("2016-12-31", "2017-01-01"));
  CHECK(is_date_version("2017-02-12"));
  CHECK_FALSE(is_date_version("8.0.552.237"));
  // chronological oracle: day-count comparison
  auto day_number = [](int y, int m, int d) { return y * 372 + m * 31 + d; };
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> year(1999, 2026), month(1, 12), day(1, 28);
  for (int i = 0; i < 500; ++i) {
    int y1 = year(rng), m1 = month(rng), d1 = day(rng);
    int y2 = year(rng), m2 = month(rng), d2 = day(rng);
    char a[16], b[16];
    std::snprintf(a, sizeof a, "%04d-%02d-%02d", y1, m1, d1);
    std::snprintf(b, sizeof b, "%04d-%02d-%02d", y2, m2, d2);
    auto expected = day_number(y1, m1, d1) <=> day_number(y2, m2, d2);
    auto got = compare_versions(a, b);
    CHECK((expected < 0) == (got == std::strong_ordering::less));
    CHECK((expected == 0) == (got == std::strong_ordering::equal));
  }
}

namespace {

std::string random_token(std::mt19937_64& rng) {
  static const char* alphabet = "0123456789abz.-";
  std::uniform_int_distribution<std::size_t> len(1, 10);
  std::uniform_int_distribution<std::size_t> pick(0, 14);
  std::string out;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[pick(rng)]);
  return out;
}

}  // namespace

TEST_CASE("total order properties over random tokens") {
  std::mt19937_64 rng(42);
  std::vector<std::string> tokens;
  for (int i = 0; i < 60; ++i) tokens.push_back(random_token(rng));
  for (const auto& a : tokens) {
    CHECK(compare_versions(a, a) == std::strong_ordering::equal);
    for (const auto& b : tokens) {
      auto ab = compare_versions(a, b);
      auto ba = compare_versions(b, a);
      // antisymmetry: equality only for identical strings
      if (ab == std::strong_ordering::equal) {
        CHECK(a == b);
      } else {
        CHECK(((ab == std::strong_ordering::less) ==
               (ba == std::strong_ordering::greater)));
      }
      for (const auto& c : tokens) {
        if (compare_versions(a, b) != std::strong_ordering::greater &&
            compare_versions(b, c) != std::strong_ordering::greater) {
          CHECK(compare_versions(a, c) != std::strong_ordering::greater);
        }
      }
    }
  }
}

TEST_CASE("sort_versions sorts ascending and dedups") {
  std::vector<std::string> v = {"2.0", "1.10", "1.9", "2.0", "1.9"};
  sort_versions(v);
  CHECK(v == std::vector<std::string>{"1.9", "1.10", "2.0"});
}
