#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace cpegraph {

// Total order over version tokens.
//
// Dot-separated segments are compared pairwise: the numeric prefix of each
// segment numerically, the remaining suffix lexicographically. Missing
// segments sort before present ones ("1.4" < "1.4.1", "2" < "2a").
// Date-shaped tokens (YYYY-MM-DD) are compared chronologically. Structurally
// equal but textually different tokens ("1.04" vs "1.4") fall back to a
// lexicographic tie-break so the order stays antisymmetric.
std::strong_ordering compare_versions(std::string_view a, std::string_view b);

bool version_less(std::string_view a, std::string_view b);
bool version_eq(std::string_view a, std::string_view b);

// True for tokens of the form YYYY-M[M]-D[D].
bool is_date_version(std::string_view token);

// Sorts ascending under compare_versions and drops duplicates.
void sort_versions(std::vector<std::string>& versions);

}  // namespace cpegraph
