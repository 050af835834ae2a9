#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bemflow::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Trim plus collapse internal whitespace runs to single spaces,
/// preserving case.
std::string collapse_whitespace(std::string_view s);

/// Case-insensitive comparison after trimming and collapsing internal
/// whitespace runs to single spaces. This is the equality used for class
/// names and object names throughout.
std::string normalize_key(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

std::vector<std::string> split_lines(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Levenshtein distance, used for "did you mean" suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// FNV-1a 64-bit over a byte sequence.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);
std::string to_hex(std::uint64_t v);

/// Shortest decimal representation that round-trips the double.
std::string format_double(double v);

/// Minimal unified diff of two texts (line-based). Context of 2 lines.
std::string unified_diff(const std::string& before, const std::string& after,
                         const std::string& before_label = "before",
                         const std::string& after_label = "after");

}  // namespace bemflow::text
