#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace semag::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::string rtrim(std::string_view s);

// Splits on '\n'; a trailing newline does not produce an empty final line.
std::vector<std::string> split_lines(std::string_view s);

// Lowercase alphanumeric runs.
std::vector<std::string> tokenize(std::string_view s);
std::set<std::string> token_set(std::string_view s);

// |a ∩ b| / |a ∪ b|; 0 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replaces every "{{key}}" occurrence.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

std::string sha256_hex(std::string_view data);

} // namespace semag::text
