#include "semag/task.hpp"

#include "semag/errors.hpp"
#include "semag/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace semag {

namespace {

std::string strip_trailing_newlines(std::string_view s) {
    std::size_t e = s.size();
    while (e > 0 && (s[e - 1] == '\n' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(0, e));
}

std::optional<double> parse_number(const std::string& tok) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE) return std::nullopt;
    return v;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

const nlohmann::json& require(const nlohmann::json& rec, const char* field) {
    auto it = rec.find(field);
    if (it == rec.end() || it->is_null()) {
        throw ParseError(std::string("missing field '") + field + "'");
    }
    return *it;
}

std::string require_string(const nlohmann::json& rec, const char* field) {
    const auto& v = require(rec, field);
    if (!v.is_string()) throw ParseError(std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& rec, const char* field) {
    auto it = rec.find(field);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ParseError(std::string("field '") + field + "' must be a string");
    return it->get<std::string>();
}

IOExample parse_example(const nlohmann::json& j, const std::string& field) {
    if (!j.is_object()) throw ParseError("field '" + field + "' must contain objects");
    IOExample ex;
    auto in = j.find("input");
    auto out = j.find("output");
    if (in == j.end()) throw ParseError("missing field '" + field + ".input'");
    if (out == j.end()) throw ParseError("missing field '" + field + ".output'");
    if (!in->is_string()) throw ParseError("field '" + field + ".input' must be a string");
    if (!out->is_string()) throw ParseError("field '" + field + ".output' must be a string");
    ex.input = in->get<std::string>();
    ex.expected_output = out->get<std::string>();
    if (auto m = j.find("mode"); m != j.end()) {
        if (!m->is_string()) throw ParseError("field '" + field + ".mode' must be a string");
        const auto mode = m->get<std::string>();
        if (mode == "exact") {
            ex.mode = CompareMode::exact;
        } else if (mode == "normalized" || mode == "whitespace-normalized") {
            ex.mode = CompareMode::whitespace_normalized;
        } else if (mode == "numeric" || mode == "numeric-tolerance") {
            ex.mode = CompareMode::numeric_tolerance;
            auto eps = j.find("epsilon");
            ex.epsilon = (eps != j.end() && eps->is_number()) ? eps->get<double>() : 1e-6;
            if (!(ex.epsilon > 0.0)) throw ParseError("field '" + field + ".epsilon' must be > 0");
        } else {
            throw ParseError("field '" + field + ".mode' has unknown value '" + mode + "'");
        }
    }
    return ex;
}

std::vector<IOExample> parse_examples(const nlohmann::json& rec, const char* field, bool required) {
    auto it = rec.find(field);
    if (it == rec.end() || it->is_null()) {
        if (required) throw ParseError(std::string("missing field '") + field + "'");
        return {};
    }
    if (!it->is_array()) throw ParseError(std::string("field '") + field + "' must be an array");
    std::vector<IOExample> out;
    for (const auto& e : *it) out.push_back(parse_example(e, field));
    return out;
}

bool same_pair(const IOExample& a, const IOExample& b) {
    return a.input == b.input && a.expected_output == b.expected_output;
}

} // namespace

std::string normalize_whitespace(std::string_view s) {
    auto lines = text::split_lines(s);
    for (auto& l : lines) l = text::rtrim(l);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return text::join(lines, "\n");
}

bool outputs_match(const IOExample& example, std::string_view actual) {
    switch (example.mode) {
    case CompareMode::exact:
        return strip_trailing_newlines(actual) == strip_trailing_newlines(example.expected_output);
    case CompareMode::whitespace_normalized:
        return normalize_whitespace(actual) == normalize_whitespace(example.expected_output);
    case CompareMode::numeric_tolerance: {
        const auto got = whitespace_tokens(actual);
        const auto want = whitespace_tokens(example.expected_output);
        if (got.size() != want.size()) return false;
        for (std::size_t i = 0; i < got.size(); ++i) {
            auto a = parse_number(got[i]);
            auto b = parse_number(want[i]);
            if (a && b) {
                if (!(std::fabs(*a - *b) <= example.epsilon)) return false;
            } else if (got[i] != want[i]) {
                return false;
            }
        }
        return true;
    }
    }
    return false;
}

std::string_view to_string(ProducedBy p) {
    switch (p) {
    case ProducedBy::level1: return "level1";
    case ProducedBy::level2: return "level2";
    case ProducedBy::debug: return "debug";
    case ProducedBy::debate_refine: return "debate-refine";
    }
    return "unknown";
}

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::wrong_output: return "wrong-output";
    case Verdict::runtime_error: return "runtime-error";
    case Verdict::timeout: return "timeout";
    }
    return "unknown";
}

Program Program::initial(std::string source, std::string language, ProducedBy by) {
    return Program{std::move(source), std::move(language), 0, by, std::nullopt};
}

Program Program::revise(std::string new_source, ProducedBy by) const {
    return Program{std::move(new_source), language_tag, revision + 1, by, revision};
}

std::size_t TestReport::passed_count() const {
    return static_cast<std::size_t>(std::count_if(per_example.begin(), per_example.end(),
                                                  [](const auto& e) { return e.verdict == Verdict::pass; }));
}

DatasetSchema parse_schema_name(std::string_view name) {
    if (name == "humaneval" || name == "humaneval-style") return DatasetSchema::humaneval;
    if (name == "generic") return DatasetSchema::generic;
    throw ParseError("unknown dataset schema '" + std::string(name) + "'");
}

std::string_view to_string(DatasetSchema s) {
    return s == DatasetSchema::humaneval ? "humaneval" : "generic";
}

double estimate_complexity(const Task& task, const ComplexityModel& m) {
    const double len_part = std::min(static_cast<double>(task.statement.size()) / m.length_scale, 1.0);
    const double ex_part = std::min(static_cast<double>(task.visible_examples.size()) / m.example_scale, 1.0);
    const bool hard = std::any_of(task.tags.begin(), task.tags.end(), [&](const std::string& t) {
        return m.hard_tags.count(text::to_lower(t)) > 0;
    });
    const double raw = m.length_weight * len_part + m.example_weight * ex_part + m.tag_weight * (hard ? 1.0 : 0.0);
    return std::clamp(raw, 0.0, 1.0);
}

std::size_t promoted_index(std::string_view task_id, std::size_t hidden_count, std::uint64_t seed) {
    if (hidden_count == 0) throw PreconditionError("no hidden tests to promote");
    std::mt19937_64 rng(seed ^ fnv1a(task_id));
    return static_cast<std::size_t>(rng() % hidden_count);
}

Task parse_task(const nlohmann::json& record, DatasetSchema schema, const IngestOptions& options) {
    if (!record.is_object()) throw ParseError("record must be an object");
    Task task;
    if (schema == DatasetSchema::humaneval) {
        task.id = require_string(record, "task_id");
        task.statement = require_string(record, "prompt");
        task.entry_point = require_string(record, "entry_point");
        task.hidden_tests = parse_examples(record, "tests", true);
        task.visible_examples = parse_examples(record, "examples", false);
    } else {
        task.id = require_string(record, "id");
        task.statement = require_string(record, "statement");
        task.hidden_tests = parse_examples(record, "hidden", true);
        task.visible_examples = parse_examples(record, "visible", false);
        task.entry_point = optional_string(record, "entry_point");
        if (auto it = record.find("tags"); it != record.end() && !it->is_null()) {
            if (!it->is_array()) throw ParseError("field 'tags' must be an array");
            for (const auto& t : *it) {
                if (!t.is_string()) throw ParseError("field 'tags' must contain strings");
                task.tags.push_back(t.get<std::string>());
            }
        }
    }
    if (auto lang = optional_string(record, "language")) task.language = *lang;

    if (task.hidden_tests.empty()) {
        throw ValidationError("task '" + task.id + "' has no hidden tests");
    }

    // Hidden tests are never shown to agents.
    const auto before = task.hidden_tests.size();
    std::erase_if(task.hidden_tests, [&](const IOExample& h) {
        return std::any_of(task.visible_examples.begin(), task.visible_examples.end(),
                           [&](const IOExample& v) { return same_pair(v, h); });
    });
    if (task.hidden_tests.size() != before) {
        spdlog::debug("task {}: dropped {} hidden tests duplicating visible examples", task.id,
                      before - task.hidden_tests.size());
    }

    if (task.visible_examples.empty() && options.promote_visible) {
        if (task.hidden_tests.size() < 2) {
            throw ValidationError("task '" + task.id + "' needs at least 2 hidden tests to promote one");
        }
        const auto idx = promoted_index(task.id, task.hidden_tests.size(), options.seed);
        task.visible_examples.push_back(task.hidden_tests[idx]);
        task.hidden_tests.erase(task.hidden_tests.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    if (task.hidden_tests.empty()) {
        throw ValidationError("task '" + task.id + "' has no hidden tests");
    }

    if (auto it = record.find("complexity"); it != record.end() && !it->is_null()) {
        if (!it->is_number()) throw ParseError("field 'complexity' must be a number");
        task.complexity = it->get<double>();
        if (task.complexity < 0.0 || task.complexity > 1.0) {
            throw ParseError("field 'complexity' must lie in [0,1]");
        }
    } else {
        task.complexity = estimate_complexity(task, options.complexity);
    }
    return task;
}

std::vector<Task> load_dataset(const std::filesystem::path& path, DatasetSchema schema,
                               const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
    std::vector<Task> tasks;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            tasks.push_back(parse_task(nlohmann::json::parse(line), schema, options));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return tasks;
}

} // namespace semag
