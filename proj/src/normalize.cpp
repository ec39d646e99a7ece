#include "cpegraph/normalize.hpp"

#include <cctype>

namespace cpegraph {

namespace {

bool is_separator(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '-' ||
         c == '_' || c == '.';
}

}  // namespace

std::string normalize_str(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_sep = false;
  for (char c : raw) {
    if (is_separator(c)) {
      pending_sep = !out.empty();
      continue;
    }
    if (!std::isalnum(static_cast<unsigned char>(c))) {
      continue;  // specials dropped entirely
    }
    if (pending_sep) {
      out.push_back(' ');
      pending_sep = false;
    }
    out.push_back(
        static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

NormalizedName normalize(std::string_view raw) {
  return NormalizedName{std::string(raw), normalize_str(raw)};
}

std::vector<std::string> norm_tokens(std::string_view norm) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : norm) {
    if (c == ' ') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string norm_to_cpe_token(std::string_view norm) {
  std::string out(norm);
  for (char& c : out) {
    if (c == ' ') c = '_';
  }
  return out;
}

}  // namespace cpegraph
