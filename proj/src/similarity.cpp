#include "cpegraph/similarity.hpp"

#include <algorithm>
#include <vector>

namespace cpegraph {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (m == 0) return n;
  if (n == 0) return m;

  // Three rolling rows: transpositions look two rows back.
  std::vector<std::size_t> prev2(n + 1), prev(n + 1), curr(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = j;

  for (std::size_t i = 1; i <= m; ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      std::size_t substitution = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      std::size_t deletion = prev[j] + 1;
      std::size_t insertion = curr[j - 1] + 1;
      std::size_t cost = std::min({substitution, deletion, insertion});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        cost = std::min(cost, prev2[j - 2] + 1);
      }
      curr[j] = cost;
    }
    std::swap(prev2, prev);
    std::swap(prev, curr);
  }
  return prev[n];
}

double sim_edit(const NormalizedName& a, const NormalizedName& b) {
  const std::size_t max_len = std::max(a.norm.size(), b.norm.size());
  if (max_len == 0) return 1.0;
  const std::size_t d = edit_distance(a.norm, b.norm);
  return 1.0 - static_cast<double>(d) / static_cast<double>(max_len);
}

double sim_edit_raw(std::string_view raw_a, std::string_view raw_b) {
  return sim_edit(normalize(raw_a), normalize(raw_b));
}

}  // namespace cpegraph
