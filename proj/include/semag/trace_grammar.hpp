#pragma once

// Wire grammar for runtime variable-state events on a candidate's stderr:
//
//   SEMAG_TRACE|line=<int>|<identifier>=<value-literal>
//
// One event per line. Inside value-literal '|' is written as "\p", a newline
// as "\n" and a backslash as "\\". Unknown escapes decode verbatim.

#include <optional>
#include <string>
#include <string_view>

namespace semag {

inline constexpr std::string_view kTracePrefix = "SEMAG_TRACE|";

struct TraceEvent {
    int line_no = 1;
    std::string var_name;
    std::string value_repr;

    bool operator==(const TraceEvent&) const = default;
};

std::string escape_trace_value(std::string_view raw);
std::string unescape_trace_value(std::string_view escaped);

// nullopt for lines that do not match the grammar exactly.
std::optional<TraceEvent> parse_trace_line(std::string_view line);

std::string format_trace_line(const TraceEvent& event);

} // namespace semag
