#pragma once

// Parsing of structured blocks out of free-form model responses.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace semag {

enum class BlockKind { code, plan, verdict, suggestion, score_list, log, summary, keywords, proposal };

enum class PlanVerdict { accept, revise };

using ScoreList = std::vector<std::pair<std::string, double>>;
using ExtractedBlock = std::variant<std::string, PlanVerdict, ScoreList>;

// Throws ExtractionError (carrying the raw response) when no block of `kind` exists.
ExtractedBlock extract_block(std::string_view response, BlockKind kind);

std::string extract_code(std::string_view response);
std::string extract_text_block(std::string_view response, BlockKind kind);
PlanVerdict extract_verdict(std::string_view response);
ScoreList extract_scores(std::string_view response);

// Interior of the first closed fence tagged `tag`.
std::optional<std::string> find_fenced(std::string_view response, std::string_view tag);

// Value of the first "KEY: value" line, case-insensitive on KEY.
std::optional<std::string> find_field(std::string_view text, std::string_view key);

// "1. foo" / "2) bar" / "- baz" lines with the markers removed; blank lines dropped.
std::vector<std::string> parse_steps(std::string_view plan_text);

} // namespace semag
