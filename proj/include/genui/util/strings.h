#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace genui {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);
bool iends_with(std::string_view s, std::string_view suffix);
// Case-insensitive search; returns npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle,
                  std::size_t from = 0);

std::string_view trim(std::string_view s);
std::string_view trim_left(std::string_view s);
std::string_view trim_right(std::string_view s);
bool is_blank(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

// Replaces every occurrence of `from` in `s`. Returns the number replaced.
std::size_t replace_all(std::string& s, std::string_view from,
                        std::string_view to);

// 64-bit FNV-1a. Used for fixture keys and mock payload derivation, never
// for anything that needs collision resistance.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

// SplitMix64 step, handy for deriving independent streams from one seed.
std::uint64_t splitmix64(std::uint64_t x);

// Percent-encodes everything except RFC 3986 unreserved characters.
std::string url_encode(std::string_view s);

// Decodes %XX escapes (and '+' as space when `plus_as_space`). Returns
// nullopt on a truncated or non-hex escape or when the result is not UTF-8.
std::optional<std::string> url_decode(std::string_view s,
                                      bool plus_as_space = true);

bool is_valid_utf8(std::string_view s);

// Splits a raw query string ("a=1&b=2") into undecoded key/value pairs.
std::vector<std::pair<std::string_view, std::string_view>> split_query(
    std::string_view query);

std::string random_token(std::size_t bytes = 12);

// Escapes & < > " ' for use in HTML text or quoted attribute values.
std::string html_escape(std::string_view s);

}  // namespace genui
