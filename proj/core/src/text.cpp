#include "copilot/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace copilot::text {

namespace {

bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_name_separator(char c) noexcept {
  switch (c) {
    case '-': case '/': case ',': case '&': case '(': case ')': case ':': case ';':
      return true;
    default:
      return is_space(c);
  }
}

}  // namespace

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string fold_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool is_word_char(char c) noexcept {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::optional<std::size_t> find_word(std::string_view haystack, std::string_view term,
                                     std::size_t from) noexcept {
  if (term.empty()) return std::nullopt;
  while (from <= haystack.size()) {
    const auto pos = haystack.find(term, from);
    if (pos == std::string_view::npos) return std::nullopt;
    const auto end = pos + term.size();
    const bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]) || !is_word_char(term.front());
    const bool right_ok =
        end == haystack.size() || !is_word_char(haystack[end]) || !is_word_char(term.back());
    if (left_ok && right_ok) return pos;
    from = pos + 1;
  }
  return std::nullopt;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const auto start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) words.emplace_back(s.substr(start, i - start));
  }
  return words;
}

std::vector<std::string> name_tokens(std::string_view name) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < name.size()) {
    while (i < name.size() && is_name_separator(name[i])) ++i;
    const auto start = i;
    while (i < name.size() && !is_name_separator(name[i])) ++i;
    auto token = name.substr(start, i - start);
    auto keep = [](char c) { return is_word_char(c) || c == '+' || c == '#'; };
    while (!token.empty() && !keep(token.front())) token.remove_prefix(1);
    while (!token.empty() && !keep(token.back())) token.remove_suffix(1);
    if (token.empty()) continue;
    auto folded = fold_case(token);
    if (std::find(tokens.begin(), tokens.end(), folded) == tokens.end()) {
      tokens.push_back(std::move(folded));
    }
  }
  return tokens;
}

std::string leading_words(std::string_view s, std::size_t n) {
  const auto words = split_whitespace(s);
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < n; ++i) {
    if (i > 0) out.push_back(' ');
    out += words[i];
  }
  while (!out.empty() && std::string_view(".,;:!?").find(out.back()) != std::string_view::npos) {
    out.pop_back();
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace copilot::text
