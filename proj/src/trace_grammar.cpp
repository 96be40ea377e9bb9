#include "semag/trace_grammar.hpp"

#include <cctype>
#include <charconv>

namespace semag {

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = static_cast<unsigned char>(s[0]);
    if (!(std::isalpha(head) || head == '_')) return false;
    for (unsigned char c : s.substr(1)) {
        if (!(std::isalnum(c) || c == '_')) return false;
    }
    return true;
}

} // namespace

std::string escape_trace_value(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '|': out += "\\p"; break;
        case '\n': out += "\\n"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_trace_value(std::string_view escaped) {
    std::string out;
    out.reserve(escaped.size());
    for (std::size_t i = 0; i < escaped.size(); ++i) {
        const char c = escaped[i];
        if (c != '\\' || i + 1 == escaped.size()) {
            out.push_back(c);
            continue;
        }
        const char n = escaped[i + 1];
        if (n == 'p') {
            out.push_back('|');
        } else if (n == 'n') {
            out.push_back('\n');
        } else if (n == '\\') {
            out.push_back('\\');
        } else {
            out.push_back(c);
            out.push_back(n);
        }
        ++i;
    }
    return out;
}

std::optional<TraceEvent> parse_trace_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.starts_with(kTracePrefix)) return std::nullopt;
    auto rest = line.substr(kTracePrefix.size());
    constexpr std::string_view line_key = "line=";
    if (!rest.starts_with(line_key)) return std::nullopt;
    rest.remove_prefix(line_key.size());
    const auto bar = rest.find('|');
    if (bar == std::string_view::npos || bar == 0) return std::nullopt;
    const auto num = rest.substr(0, bar);
    int line_no = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), line_no);
    if (ec != std::errc{} || ptr != num.data() + num.size() || line_no < 1) return std::nullopt;
    rest.remove_prefix(bar + 1);
    const auto eq = rest.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    const auto name = rest.substr(0, eq);
    if (!is_identifier(name)) return std::nullopt;
    const auto value = rest.substr(eq + 1);
    if (value.find('|') != std::string_view::npos) return std::nullopt;
    return TraceEvent{line_no, std::string(name), unescape_trace_value(value)};
}

std::string format_trace_line(const TraceEvent& event) {
    return std::string(kTracePrefix) + "line=" + std::to_string(event.line_no) + "|" + event.var_name + "=" +
           escape_trace_value(event.value_repr);
}

} // namespace semag
