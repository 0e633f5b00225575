#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace xlemb {

// Views into `s`, split on ASCII whitespace; empty fields are skipped.
std::vector<std::string_view> split_whitespace(std::string_view s);

// Views into `s`, split on `sep`; empty fields are kept.
std::vector<std::string_view> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

// Unicode-aware lowercase of UTF-8 text (simple case mapping per code point).
std::string to_lower_utf8(std::string_view s);

// Locale-independent fixed-point formatting appended to `out`.
void append_fixed(std::string& out, double value, int decimals);

// Shortest round-trippable representation.
void append_exact(std::string& out, double value);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);

}  // namespace xlemb
