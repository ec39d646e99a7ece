#pragma once

#include <cstddef>
#include <string_view>

#include "cpegraph/normalize.hpp"

namespace cpegraph {

// Edit distance with adjacent transposition counted as one edit
// (optimal string alignment). "microsoft" vs "microsfot" is 1, not 2.
std::size_t edit_distance(std::string_view a, std::string_view b);

// 1 - d(a.norm, b.norm) / max(|a.norm|, |b.norm|); both empty -> 1.
double sim_edit(const NormalizedName& a, const NormalizedName& b);

// Convenience: normalizes both raw strings first.
double sim_edit_raw(std::string_view raw_a, std::string_view raw_b);

}  // namespace cpegraph
