#include "cpegraph/version.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

namespace cpegraph {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

struct SegmentPart {
  std::uint64_t num = 0;
  bool has_num = false;
  std::string_view suffix;
};

// "2as" -> (2, "as"); "beta" -> (-, "beta"); "552" -> (552, "").
SegmentPart split_segment(std::string_view seg) {
  SegmentPart part;
  std::size_t i = 0;
  while (i < seg.size() && std::isdigit(static_cast<unsigned char>(seg[i])) &&
         i < 18) {
    part.num = part.num * 10 + static_cast<std::uint64_t>(seg[i] - '0');
    part.has_num = true;
    ++i;
  }
  part.suffix = seg.substr(i);
  return part;
}

std::strong_ordering compare_segments(std::string_view a, std::string_view b) {
  SegmentPart pa = split_segment(a);
  SegmentPart pb = split_segment(b);
  if (pa.has_num != pb.has_num) {
    // Numeric segments sort before purely alphabetic ones.
    return pa.has_num ? std::strong_ordering::less
                      : std::strong_ordering::greater;
  }
  if (pa.has_num && pa.num != pb.num) {
    return pa.num <=> pb.num;
  }
  return pa.suffix <=> pb.suffix;
}

std::vector<std::string_view> dot_segments(std::string_view token) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= token.size(); ++i) {
    if (i == token.size() || token[i] == '.') {
      out.push_back(token.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

struct DateParts {
  int year = 0, month = 0, day = 0;
};

bool parse_date(std::string_view token, DateParts& out) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= token.size(); ++i) {
    if (i == token.size() || token[i] == '-') {
      parts.push_back(token.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() != 3) return false;
  if (parts[0].size() != 4 || !all_digits(parts[0])) return false;
  if (parts[1].empty() || parts[1].size() > 2 || !all_digits(parts[1]))
    return false;
  if (parts[2].empty() || parts[2].size() > 2 || !all_digits(parts[2]))
    return false;
  auto to_int = [](std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
  };
  out.year = to_int(parts[0]);
  out.month = to_int(parts[1]);
  out.day = to_int(parts[2]);
  return out.month >= 1 && out.month <= 12 && out.day >= 1 && out.day <= 31;
}

}  // namespace

bool is_date_version(std::string_view token) {
  DateParts d;
  return parse_date(token, d);
}

std::strong_ordering compare_versions(std::string_view a, std::string_view b) {
  if (a == b) return std::strong_ordering::equal;

  DateParts da, db;
  if (parse_date(a, da) && parse_date(b, db)) {
    if (da.year != db.year) return da.year <=> db.year;
    if (da.month != db.month) return da.month <=> db.month;
    if (da.day != db.day) return da.day <=> db.day;
    return a <=> b;  // equal dates, different spellings
  }

  auto sa = dot_segments(a);
  auto sb = dot_segments(b);
  std::size_t n = std::min(sa.size(), sb.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto c = compare_segments(sa[i], sb[i]);
    if (c != std::strong_ordering::equal) return c;
  }
  if (sa.size() != sb.size()) return sa.size() <=> sb.size();
  return a <=> b;  // structurally equal ("1.04" vs "1.4"): textual tie-break
}

bool version_less(std::string_view a, std::string_view b) {
  return compare_versions(a, b) == std::strong_ordering::less;
}

bool version_eq(std::string_view a, std::string_view b) {
  return compare_versions(a, b) == std::strong_ordering::equal;
}

void sort_versions(std::vector<std::string>& versions) {
  std::sort(versions.begin(), versions.end(),
            [](const std::string& a, const std::string& b) {
              return version_less(a, b);
            });
  versions.erase(std::unique(versions.begin(), versions.end()),
                 versions.end());
}

}  // namespace cpegraph
