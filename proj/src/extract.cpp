#include "semag/extract.hpp"

#include "semag/errors.hpp"
#include "semag/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>

namespace semag {

namespace {

struct Fence {
    std::string tag;
    std::string body;
};

std::vector<Fence> fences(std::string_view response) {
    std::vector<Fence> out;
    const auto lines = text::split_lines(response);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto head = text::trim(lines[i]);
        if (!head.starts_with("```")) continue;
        Fence f{text::to_lower(text::trim(std::string_view(head).substr(3))), {}};
        std::size_t j = i + 1;
        std::vector<std::string> body;
        bool closed = false;
        for (; j < lines.size(); ++j) {
            if (text::trim(lines[j]) == "```") {
                closed = true;
                break;
            }
            body.push_back(lines[j]);
        }
        if (!closed) break;
        f.body = text::join(body, "\n");
        out.push_back(std::move(f));
        i = j;
    }
    return out;
}

constexpr std::array<std::string_view, 9> kReservedTags = {
    "plan", "log", "suggestion", "scores", "summary", "keywords", "proposal", "directive", "verdict"};

bool is_reserved(const std::string& tag) {
    return std::find(kReservedTags.begin(), kReservedTags.end(), tag) != kReservedTags.end();
}

std::string_view tag_for(BlockKind kind) {
    switch (kind) {
    case BlockKind::plan: return "plan";
    case BlockKind::suggestion: return "suggestion";
    case BlockKind::score_list: return "scores";
    case BlockKind::log: return "log";
    case BlockKind::summary: return "summary";
    case BlockKind::keywords: return "keywords";
    case BlockKind::proposal: return "proposal";
    default: return "";
    }
}

std::string_view kind_name(BlockKind kind) {
    switch (kind) {
    case BlockKind::code: return "code";
    case BlockKind::verdict: return "verdict";
    case BlockKind::score_list: return "score-list";
    default: return tag_for(kind);
    }
}

[[noreturn]] void fail(BlockKind kind, std::string_view response) {
    throw ExtractionError("no " + std::string(kind_name(kind)) + " block in response", std::string(response));
}

std::optional<std::string> strip_step_marker(std::string_view line) {
    auto t = text::trim(line);
    if (t.empty()) return std::nullopt;
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) return text::trim(std::string_view(t).substr(i + 1));
    if (t[0] == '-' || t[0] == '*') return text::trim(std::string_view(t).substr(1));
    return std::nullopt;
}

} // namespace

std::optional<std::string> find_fenced(std::string_view response, std::string_view tag) {
    for (auto& f : fences(response)) {
        if (f.tag == tag) return std::move(f.body);
    }
    return std::nullopt;
}

std::optional<std::string> find_field(std::string_view source, std::string_view key) {
    const auto want = text::to_lower(key);
    for (const auto& line : text::split_lines(source)) {
        auto t = text::trim(line);
        const auto colon = t.find(':');
        if (colon == std::string::npos) continue;
        if (text::to_lower(text::trim(std::string_view(t).substr(0, colon))) == want) {
            return text::trim(std::string_view(t).substr(colon + 1));
        }
    }
    return std::nullopt;
}

std::vector<std::string> parse_steps(std::string_view plan_text) {
    std::vector<std::string> steps;
    bool any_marker = false;
    for (const auto& line : text::split_lines(plan_text)) {
        if (auto s = strip_step_marker(line)) {
            any_marker = true;
            if (!s->empty()) steps.push_back(*s);
        }
    }
    if (!any_marker) {
        for (const auto& line : text::split_lines(plan_text)) {
            auto t = text::trim(line);
            if (!t.empty()) steps.push_back(t);
        }
    }
    return steps;
}

std::string extract_code(std::string_view response) {
    for (auto& f : fences(response)) {
        if (!is_reserved(f.tag)) return std::move(f.body);
    }
    fail(BlockKind::code, response);
}

std::string extract_text_block(std::string_view response, BlockKind kind) {
    if (kind == BlockKind::code) return extract_code(response);
    if (kind == BlockKind::verdict || kind == BlockKind::score_list) {
        throw PreconditionError("extract_text_block does not handle structured kinds");
    }
    if (auto body = find_fenced(response, tag_for(kind))) return *body;
    if (kind == BlockKind::plan) {
        std::vector<std::string> numbered;
        for (const auto& line : text::split_lines(response)) {
            auto t = text::trim(line);
            if (!t.empty() && std::isdigit(static_cast<unsigned char>(t[0])) && strip_step_marker(t)) {
                numbered.push_back(t);
            }
        }
        if (!numbered.empty()) return text::join(numbered, "\n");
    }
    if (kind == BlockKind::suggestion) {
        if (auto v = find_field(response, "SUGGESTION"); v && !v->empty()) return *v;
    }
    fail(kind, response);
}

PlanVerdict extract_verdict(std::string_view response) {
    auto v = find_field(response, "VERDICT");
    if (v) {
        const auto toks = text::tokenize(*v);
        if (!toks.empty()) {
            const auto& w = toks.front();
            if (w == "accept" || w == "accepted" || w == "1" || w == "yes" || w == "pass") return PlanVerdict::accept;
            if (w == "revise" || w == "reject" || w == "rejected" || w == "0" || w == "no" || w == "fail") {
                return PlanVerdict::revise;
            }
        }
    }
    fail(BlockKind::verdict, response);
}

ScoreList extract_scores(std::string_view response) {
    const auto fenced = find_fenced(response, "scores");
    const std::string source = fenced ? *fenced : std::string(response);
    ScoreList scores;
    for (const auto& line : text::split_lines(source)) {
        auto t = text::trim(line);
        if (t.starts_with("- ") || t.starts_with("* ")) t = text::trim(std::string_view(t).substr(2));
        auto sep = t.rfind(':');
        if (sep == std::string::npos) sep = t.rfind('=');
        if (sep == std::string::npos || sep == 0) continue;
        const auto name = text::trim(std::string_view(t).substr(0, sep));
        const auto num = text::trim(std::string_view(t).substr(sep + 1));
        if (name.empty() || num.empty()) continue;
        char* end = nullptr;
        const double value = std::strtod(num.c_str(), &end);
        if (end != num.c_str() + num.size()) continue;
        scores.emplace_back(name, value);
    }
    if (scores.empty()) fail(BlockKind::score_list, response);
    return scores;
}

ExtractedBlock extract_block(std::string_view response, BlockKind kind) {
    switch (kind) {
    case BlockKind::verdict: return extract_verdict(response);
    case BlockKind::score_list: return extract_scores(response);
    default: return extract_text_block(response, kind);
    }
}

} // namespace semag
