#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rtbert {

namespace detail {

inline bool is_ascii_word(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace detail

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = detail::ascii_lower(c);
  return out;
}

/// Lowercased word tokens: maximal runs of ASCII word characters, '#', or
/// non-ASCII bytes (so UTF-8 words stay intact). Everything else separates.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (detail::is_ascii_word(c) || c == '#' || c >= 0x80) {
      cur.push_back(detail::ascii_lower(ch));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

/// Hashtags in `text`, lowercased and without the leading '#'. A tag is '#'
/// followed by ASCII word characters; it must not be glued to a preceding word
/// character, and it ends at the first non-word byte.
inline std::vector<std::string> extract_hashtags(std::string_view text) {
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '#') continue;
    if (i > 0 && detail::is_ascii_word(static_cast<unsigned char>(text[i - 1]))) continue;
    std::size_t j = i + 1;
    while (j < text.size() && detail::is_ascii_word(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i + 1) tags.push_back(to_lower_ascii(text.substr(i + 1, j - i - 1)));
    i = j - 1;
  }
  return tags;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace rtbert

#include <cstdio>

namespace rtbert {

/// Shortest-ish round-trippable decimal form of `x` ("%.17g").
inline std::string format_real(double x, int precision = 17) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

}  // namespace rtbert
