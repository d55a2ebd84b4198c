#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parachute {

/// SQL LIKE: '%' matches any sequence, '_' exactly one UTF-8 character.
/// No escape character.
bool like_match(std::string_view value, std::string_view pattern);

/// ASCII case-insensitive LIKE.
bool ilike_match(std::string_view value, std::string_view pattern);

std::string ascii_lowercase(std::string_view s);

inline constexpr size_t kRegexEnumerationCap = 1024;

/// Finite language of a regex made of literals, '\'-escaped literals,
/// alternation, grouping and '?'. The pattern is matched against the whole
/// value. Returns nullopt for unsupported constructs (star, plus, classes,
/// '.', repetition braces) or when the language exceeds `cap` strings.
std::optional<std::vector<std::string>> enumerate_regex(std::string_view pattern, size_t cap = kRegexEnumerationCap);

} // namespace parachute
