#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small ASCII text helpers shared by the mock provider, dedup keys and the
// question templates.
namespace copilot::text {

std::string_view trim(std::string_view s) noexcept;
std::string fold_case(std::string_view s);

// Case-folded, whitespace runs collapsed to one space, trimmed.
std::string normalize(std::string_view s);

bool is_word_char(char c) noexcept;

// Position of the first occurrence of `term` in `haystack` at or after `from`
// that sits on word boundaries. Both arguments are expected to be case-folded.
std::optional<std::size_t> find_word(std::string_view haystack, std::string_view term,
                                     std::size_t from = 0) noexcept;

std::vector<std::string> split_whitespace(std::string_view s);

// Case-folded tokens of a skill name: split on whitespace and the separators
// - / , & ( ) : ; with surrounding punctuation other than + and # stripped.
std::vector<std::string> name_tokens(std::string_view name);

// First `n` whitespace-separated words joined by single spaces, with trailing
// sentence punctuation removed.
std::string leading_words(std::string_view s, std::size_t n);

std::uint64_t fnv1a64(std::string_view s) noexcept;
std::string hex64(std::uint64_t v);

}  // namespace copilot::text
