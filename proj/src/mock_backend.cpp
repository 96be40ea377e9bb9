#include "semag/mock_backend.hpp"

#include "semag/extract.hpp"
#include "semag/text.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

namespace semag {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string get(const Context& ctx, const std::string& key, std::string fallback = {}) {
    auto it = ctx.find(key);
    return it == ctx.end() ? fallback : it->second;
}

int get_int(const Context& ctx, const std::string& key, int fallback) {
    auto it = ctx.find(key);
    if (it == ctx.end()) return fallback;
    try {
        return std::stoi(it->second);
    } catch (...) {
        return fallback;
    }
}

std::string fenced(std::string_view tag, std::string_view body) {
    std::string out = "```";
    out += tag;
    out += '\n';
    out += body;
    if (!body.empty() && body.back() != '\n') out += '\n';
    out += "```\n";
    return out;
}

std::string normalize_id(std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return 0;
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

// Registry blocks are rendered as "- <id> (aliases: a, b)" lines.
std::vector<std::string> registry_ids(const std::string& registry) {
    std::vector<std::string> ids;
    for (const auto& line : text::split_lines(registry)) {
        auto t = text::trim(line);
        if (!t.starts_with("- ")) continue;
        t = text::trim(std::string_view(t).substr(2));
        const auto sp = t.find(' ');
        ids.push_back(sp == std::string::npos ? t : t.substr(0, sp));
    }
    return ids;
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words{"with", "that", "this", "from", "into", "the", "and", "for", "which",
                                             "what", "best", "task", "tasks", "about", "their", "they", "have"};
    return words;
}

bool brackets_open(std::string_view line, int& depth) {
    for (char c : line) {
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') depth = std::max(0, depth - 1);
    }
    return depth > 0;
}

std::vector<std::string> split_names(const std::string& names) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : names) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            cur.push_back(c);
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string instrument_python(std::string_view source) {
    static const std::regex assign(R"(^(\s*)([A-Za-z_]\w*(?:\s*,\s*[A-Za-z_]\w*)*)\s*(?:\+|-|\*|/|//|%|\*\*)?=(?!=).*$)");
    static const std::regex loop(R"(^(\s*)for\s+\(?([A-Za-z_]\w*(?:\s*,\s*[A-Za-z_]\w*)*)\)?\s+in\s+.*:\s*(#.*)?$)");
    std::string out =
        "import sys as _semag_sys\n"
        "def _semag_trace(line, name, value):\n"
        "    text = repr(value).replace('\\\\', '\\\\\\\\').replace('|', '\\\\p').replace('\\n', '\\\\n')\n"
        "    print('SEMAG_TRACE|line=%d|%s=%s' % (line, name, text), file=_semag_sys.stderr)\n";
    const auto lines = text::split_lines(source);
    int depth = 0;
    std::vector<std::string> pending_names;
    std::string pending_indent;
    int pending_line = 0;
    std::vector<std::string> loop_names;
    int loop_line = 0;
    auto emit = [&](const std::string& indent, int line, const std::vector<std::string>& names) {
        for (const auto& n : names) {
            out += indent + "_semag_trace(" + std::to_string(line) + ", '" + n + "', " + n + ")\n";
        }
    };
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        const int line_no = static_cast<int>(i + 1);
        const bool continuing = depth > 0;
        if (!continuing && !loop_names.empty() && !text::trim(line).empty()) {
            const auto indent = line.substr(0, line.find_first_not_of(" \t"));
            emit(indent, loop_line, loop_names);
            loop_names.clear();
        }
        out += line + "\n";
        std::smatch m;
        const bool open = brackets_open(line, depth);
        if (continuing) {
            if (!open && !pending_names.empty()) {
                emit(pending_indent, pending_line, pending_names);
                pending_names.clear();
            }
            continue;
        }
        if (std::regex_match(line, m, loop)) {
            loop_names = split_names(m[2].str());
            loop_line = line_no;
        } else if (std::regex_match(line, m, assign) && text::rtrim(line).back() != ':' &&
                   text::rtrim(line).back() != '\\') {
            auto names = split_names(m[2].str());
            if (open) {
                pending_names = std::move(names);
                pending_indent = m[1].str();
                pending_line = line_no;
            } else {
                emit(m[1].str(), line_no, names);
            }
        }
    }
    return out;
}

std::string instrument_sh(std::string_view source) {
    static const std::regex assign(R"(^(\s*)([A-Za-z_]\w*)=\S*.*$)");
    static const std::regex read_cmd(R"(^(\s*)read\s+(?:-r\s+)?([A-Za-z_]\w*(?:\s+[A-Za-z_]\w*)*)\s*$)");
    std::string out = "_semag_trace() { printf 'SEMAG_TRACE|line=%s|%s=%s\\n' \"$1\" \"$2\" \"$3\" >&2; }\n";
    const auto lines = text::split_lines(source);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        out += line + "\n";
        std::smatch m;
        std::vector<std::string> names;
        if (std::regex_match(line, m, read_cmd)) {
            names = split_names(m[2].str());
        } else if (std::regex_match(line, m, assign) && line.find(';') == std::string::npos) {
            names = {m[2].str()};
        }
        for (const auto& n : names) {
            out += m[1].str() + "_semag_trace " + std::to_string(i + 1) + " " + n + " \"$" + n + "\"\n";
        }
    }
    return out;
}

std::string with_attempt_marker(std::string source, std::string_view language, int attempt) {
    if (!source.empty() && source.back() != '\n') source += '\n';
    if (language == "sh") {
        source += "_semag_attempt=" + std::to_string(attempt) + "\n";
    } else {
        source += "_semag_attempt = " + std::to_string(attempt) + "\n";
    }
    return source;
}

} // namespace

std::string default_wrong_solution(std::string_view language) {
    if (language == "sh") return "read x\necho wrong\n";
    return "x = input()\nprint('wrong')\n";
}

std::string auto_instrument(std::string_view source, std::string_view language) {
    if (language == "sh") return instrument_sh(source);
    return instrument_python(source);
}

// --- ScriptedBackend ----------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<std::string> shared, std::map<AgentRole, std::vector<std::string>> by_role)
    : shared_(shared.begin(), shared.end()) {
    for (auto& [role, queue] : by_role) by_role_[role] = std::deque<std::string>(queue.begin(), queue.end());
}

ChatReply ScriptedBackend::send(const ChatRequest& request) {
    std::lock_guard lock(mu_);
    if (auto it = by_role_.find(request.role); it != by_role_.end() && !it->second.empty()) {
        std::string r = std::move(it->second.front());
        it->second.pop_front();
        return ChatReply{std::move(r), std::nullopt, false};
    }
    if (shared_.empty()) {
        throw BackendError("mock script exhausted at role '" + std::string(to_string(request.role)) + "'");
    }
    std::string r = std::move(shared_.front());
    shared_.pop_front();
    return ChatReply{std::move(r), std::nullopt, false};
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mu_);
    std::size_t n = shared_.size();
    for (const auto& [_, q] : by_role_) n += q.size();
    return n;
}

// --- ScenarioBackend ----------------------------------------------------

ScenarioTask scenario_task_from_json(const nlohmann::json& r) {
    ScenarioTask t;
    t.reference_solution = r.value("reference_solution", std::string{});
    if (t.reference_solution.empty() && r.contains("canonical_solution")) {
        // HumanEval ships the body only; the prompt carries the signature.
        const auto body = r["canonical_solution"].get<std::string>();
        const auto prompt = r.value("prompt", std::string{});
        t.reference_solution = body.find("def ") != std::string::npos || prompt.empty() ? body : prompt + body;
    }
    t.wrong_solution = r.value("wrong_solution", std::string{});
    t.solve_level = r.value("mock_solve_level", 1);
    t.debug_fix_at = r.value("mock_debug_fix_at", 1);
    t.verify_accept_at = r.value("mock_verify_accept_at", 1);
    t.vary_traces = r.value("mock_vary_traces", false);
    if (auto it = r.find("mock_solvable_by"); it != r.end() && it->is_array()) {
        for (const auto& m : *it) t.solvable_by.insert(m.get<std::string>());
    }
    return t;
}

ScenarioBook load_scenario_book(const std::filesystem::path& dataset) {
    std::ifstream in(dataset);
    if (!in) throw Error("cannot open scenario dataset '" + dataset.string() + "'");
    ScenarioBook book;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        const auto r = nlohmann::json::parse(line);
        if (!r.contains("reference_solution") && !r.contains("canonical_solution")) continue;
        const std::string id = r.contains("id") ? r["id"].get<std::string>() : r.value("task_id", std::string{});
        book.tasks[id] = scenario_task_from_json(r);
    }
    return book;
}

ScenarioBackend::ScenarioBackend(ScenarioBook book, std::uint64_t seed, Mode mode)
    : book_(std::move(book)), seed_(seed), mode_(mode) {}

ChatReply ScenarioBackend::send(const ChatRequest& request) {
    return ChatReply{respond(request), std::nullopt, false};
}

const ScenarioTask* ScenarioBackend::lookup(const Context& ctx) const {
    auto it = book_.tasks.find(get(ctx, "task_id"));
    return it == book_.tasks.end() ? nullptr : &it->second;
}

std::string ScenarioBackend::respond(const ChatRequest& req) const {
    const Context& ctx = req.context;
    const std::string language = get(ctx, "language", "python");
    const ScenarioTask* task = lookup(ctx);
    const std::string wrong =
        task && !task->wrong_solution.empty() ? task->wrong_solution : default_wrong_solution(language);

    auto solves_at = [&](int level) {
        if (!task || mode_ == Mode::broken) return false;
        if (mode_ == Mode::oracle) return true;
        if (!task->solvable_by.empty()) return level == 1 && task->solvable_by.count(req.backend.model_id) > 0;
        return task->solve_level == level;
    };
    auto code = [&](const std::string& src) { return fenced(language, src); };

    switch (req.role) {
    case AgentRole::coder: {
        int level = 1;
        if (ctx.count("directive")) {
            level = 4;
        } else if (ctx.count("plan")) {
            level = 2;
        }
        return "Here is the program.\n" + code(solves_at(level) ? task->reference_solution : wrong);
    }
    case AgentRole::planner:
        return "Plan:\n" + fenced("plan", "1. Parse the input.\n2. Compute the required value.\n3. Print the result.");
    case AgentRole::plan_verifier: {
        const int iter = get_int(ctx, "iteration", 1);
        const bool accept = task && task->verify_accept_at > 0 && iter >= task->verify_accept_at;
        return std::string("VERDICT: ") + (accept ? "accept" : "revise") + "\n" +
               fenced("plan", get(ctx, "plan") + (accept ? "" : "\n" + std::to_string(iter + 3) +
                                                                 ". Re-check the edge cases.")) +
               fenced("log", accept ? "All examples simulate correctly." : "Example 1 simulates incorrectly.");
    }
    case AgentRole::embed_trace:
        return code(auto_instrument(get(ctx, "code"), language));
    case AgentRole::explainer:
        return "The program reads the input, computes a value and prints it.";
    case AgentRole::suggestor:
        return fenced("suggestion", "Recheck the arithmetic that produces the printed value.");
    case AgentRole::debugger: {
        const int iter = get_int(ctx, "iteration", 1);
        if (solves_at(3) && iter >= task->debug_fix_at) return code(task->reference_solution);
        if (task && task->vary_traces) return code(with_attempt_marker(wrong, language, iter));
        return code(wrong);
    }
    case AgentRole::debater: {
        const int idx = get_int(ctx, "debater_index", 1);
        static const char* strategies[] = {"rewrite the computation step by step from the statement",
                                           "rewrite the computation and validate against every example",
                                           "simulate the examples by hand and rewrite the output logic"};
        const std::string strategy = strategies[(idx - 1) % 3];
        return fenced("proposal", "STRATEGY: " + strategy + "\nPARAMS: handle empty input; use integers\nSCORE: " +
                                      std::to_string(0.5 + 0.1 * ((idx - 1) % 3)).substr(0, 3));
    }
    case AgentRole::decider:
        return fenced("suggestion", "Implement: " + get(ctx, "chosen_strategy") + " (" + get(ctx, "chosen_params") + ")");
    case AgentRole::keyword_gen: {
        std::vector<std::string> kws;
        for (const auto& tok : text::tokenize(get(ctx, "profile"))) {
            if (tok.size() < 4 || stopwords().count(tok)) continue;
            if (std::find(kws.begin(), kws.end(), tok) == kws.end()) kws.push_back(tok);
            if (kws.size() == 6) break;
        }
        return fenced("keywords", text::join(kws, "\n"));
    }
    case AgentRole::link_selector: {
        std::string body;
        for (const auto& line : text::split_lines(get(ctx, "links"))) {
            auto t = text::trim(line);
            if (t.starts_with("- ")) body += t.substr(2) + ": 0.5\n";
        }
        return fenced("scores", body);
    }
    case AgentRole::summarizer:
        return fenced("summary", get(ctx, "title") + ": " + get(ctx, "content"));
    case AgentRole::llm_selector: {
        const auto ids = registry_ids(get(ctx, "registry"));
        const auto evidence = text::to_lower(get(ctx, "evidence"));
        std::size_t best = 0;
        std::vector<std::string> tied;
        for (const auto& id : ids) {
            const auto n = count_occurrences(evidence, text::to_lower(id));
            if (n > best) {
                best = n;
                tied = {id};
            } else if (n == best && n > 0) {
                tied.push_back(id);
            }
        }
        if (tied.empty()) tied = ids;
        if (tied.empty()) return "MODEL: none\nRATIONALE: no candidates";
        const auto pick = tied[mix(seed_ ^ fnv1a(evidence)) % tied.size()];
        return "MODEL: " + pick + "\nRATIONALE: mentioned " + std::to_string(best) + " times in the evidence";
    }
    case AgentRole::llm_decider: {
        std::string body;
        for (const auto& line : text::split_lines(get(ctx, "proposals"))) {
            if (auto m = find_field(line, "- MODEL")) body += *m + ": 1\n";
        }
        return fenced("scores", body.empty() ? "none: 0" : body);
    }
    case AgentRole::model_matcher: {
        const auto name = normalize_id(get(ctx, "name"));
        for (const auto& id : registry_ids(get(ctx, "registry"))) {
            const auto nid = normalize_id(id);
            if (!nid.empty() && !name.empty() && (name.starts_with(nid) || nid.starts_with(name))) {
                return "MODEL: " + id;
            }
        }
        return "MODEL: none";
    }
    }
    return "unsupported role";
}

bool is_mock_model(std::string_view model_id) {
    return model_id == kMockScenario || model_id == kMockOracle || model_id == kMockBroken;
}

void register_mock_backends(Gateway& gateway, const ScenarioBook& book, std::uint64_t seed) {
    gateway.register_backend(kMockScenario, std::make_shared<ScenarioBackend>(book, seed, ScenarioBackend::Mode::scripted));
    gateway.register_backend(kMockOracle, std::make_shared<ScenarioBackend>(book, seed, ScenarioBackend::Mode::oracle));
    gateway.register_backend(kMockBroken, std::make_shared<ScenarioBackend>(book, seed, ScenarioBackend::Mode::broken));
}

void register_scenario_model(Gateway& gateway, const std::string& model_id, const ScenarioBook& book,
                             std::uint64_t seed) {
    gateway.register_backend(model_id, std::make_shared<ScenarioBackend>(book, seed, ScenarioBackend::Mode::scripted));
}

} // namespace semag
