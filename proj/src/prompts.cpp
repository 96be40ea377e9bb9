#include "semag/prompts.hpp"

#include "semag/errors.hpp"

#include <algorithm>

namespace semag {

namespace {

struct Template {
    AgentRole role;
    std::string_view system;
    std::string_view user;
    std::vector<std::string> required;
};

const std::vector<Template>& templates() {
    static const std::vector<Template> table = {
        {AgentRole::planner,
         "You are a planning agent for programming problems. You write concise solution plans that can be "
         "checked by hand. You never write code.",
         "Problem:\n{{statement}}\n\n"
         "Visible input/output examples:\n{{examples}}\n\n"
         "Write a numbered, step-by-step plan that solves the problem. Every step must be concrete enough to "
         "simulate by hand on the examples.\n"
         "Reply with the plan inside a ```plan fenced block, one numbered step per line.",
         {"statement", "examples"}},
        {AgentRole::plan_verifier,
         "You verify solution plans by simulating them by hand on input/output examples.",
         "Problem:\n{{statement}}\n\n"
         "Visible input/output examples:\n{{examples}}\n\n"
         "Current plan:\n{{plan}}\n\n"
         "Simulate the plan step by step on every example and compare with the expected output.\n"
         "Reply with one line `VERDICT: accept` if every simulated output matches, otherwise `VERDICT: revise`.\n"
         "Then give the refined plan in a ```plan fenced block (repeat it unchanged when accepting) and your "
         "simulation notes in a ```log fenced block.",
         {"statement", "examples", "plan"}},
        {AgentRole::coder,
         "You are a coding agent. You write complete, runnable {{language}} programs that read standard input "
         "and write standard output.",
         "Problem:\n{{statement}}\n\n"
         "Visible input/output examples:\n{{examples}}\n"
         "{{#entry_point}}\nImplement the function `{{entry_point}}`. It is called with each example input as "
         "its argument list and its return value is printed with repr().\n{{/entry_point}}"
         "{{#plan}}\nFollow this plan:\n{{plan}}\n{{/plan}}"
         "{{#directive}}\nApply this decision from the design review:\n{{directive}}\n{{/directive}}"
         "\nReply with the complete program in a single fenced code block.",
         {"statement", "examples", "language"}},
        {AgentRole::embed_trace,
         "You add tracing statements to programs without changing their observable behaviour.",
         "Program ({{language}}):\n```{{language}}\n{{code}}\n```\n\n"
         "Insert a trace statement after every variable assignment and at the head of every loop iteration. "
         "Each trace statement writes exactly one line to standard error:\n"
         "SEMAG_TRACE|line=<original line number>|<variable name>=<repr of the value>\n"
         "Inside the value write a backslash as \\\\, '|' as \\p and a newline as \\n. "
         "Do not change anything the program writes to standard output.\n"
         "Reply with the instrumented program in a single fenced code block.",
         {"code", "language"}},
        {AgentRole::explainer,
         "You explain programs precisely, relating each part to the problem it is meant to solve.",
         "Problem:\n{{statement}}\n\n"
         "Program:\n```\n{{code}}\n```\n\n"
         "Explain what the program does, block by block, and point out where its behaviour may differ from "
         "what the problem asks for.",
         {"code", "statement"}},
        {AgentRole::suggestor,
         "You turn runtime evidence into targeted repair suggestions for a failing program.",
         "Runtime trace of the failing program (line | variable = value):\n{{trace}}\n\n"
         "Logs:\n{{logs}}\n\n"
         "Explanation of the program:\n{{explanation}}\n\n"
         "Find where the runtime values first diverge from what the problem requires and propose targeted "
         "modifications.\n"
         "Reply with the modifications inside a ```suggestion fenced block.",
         {"trace", "logs", "explanation"}},
        {AgentRole::debugger,
         "You are a debugging agent. You apply repair suggestions to {{language}} programs.",
         "Program:\n```{{language}}\n{{code}}\n```\n\n"
         "Suggested modifications:\n{{suggestion}}\n"
         "{{#test_feedback}}\nFailing tests:\n{{test_feedback}}\n{{/test_feedback}}"
         "\nReply with the complete corrected program in a single fenced code block.",
         {"code", "suggestion", "language"}},
        {AgentRole::debater,
         "You are debater {{debater_index}} in a design review of a failing solution.",
         "Problem:\n{{statement}}\n\n"
         "Current program:\n```\n{{code}}\n```\n\n"
         "Runtime trace:\n{{trace}}\n\n"
         "{{#history}}Proposals so far, in order:\n{{history}}\n\n{{/history}}"
         "{{^history}}No proposals have been made yet.\n\n{{/history}}"
         "Propose a strategy for a corrected solution. Build on or challenge the earlier proposals.\n"
         "Reply with a ```proposal fenced block containing exactly three lines:\n"
         "STRATEGY: <approach>\nPARAMS: <concrete parameters, data structures and edge cases>\n"
         "SCORE: <your confidence between 0 and 1>",
         {"statement", "code", "trace", "debater_index"}},
        {AgentRole::decider,
         "You are the discriminating agent. You turn a review discussion into one concrete directive.",
         "Problem:\n{{statement}}\n\n"
         "Proposals:\n{{proposals}}\n\n"
         "Selected strategy: {{chosen_strategy}}\n"
         "Selected parameters: {{chosen_params}}\n\n"
         "Write the implementation directive the coding agent must follow.\n"
         "Reply with the directive inside a ```suggestion fenced block.",
         {"statement", "proposals", "chosen_strategy", "chosen_params"}},
        {AgentRole::keyword_gen,
         "You generate web search keywords for finding recent evidence about language models.",
         "Task profile:\n{{profile}}\n"
         "{{#context}}\nAdditional context:\n{{context}}\n{{/context}}"
         "\nList 3 to 8 search keywords that would surface recent benchmark results of models for this task.\n"
         "Reply with a ```keywords fenced block, one keyword per line.",
         {"profile"}},
        {AgentRole::link_selector,
         "You rank search results by their usefulness for choosing a model.",
         "Task profile:\n{{profile}}\n\n"
         "Search results:\n{{links}}\n\n"
         "Score each result between 0 and 1.\n"
         "Reply with a ```scores fenced block of `<url>: <score>` lines.",
         {"profile", "links"}},
        {AgentRole::summarizer,
         "You summarize documents, keeping only evidence about model capability.",
         "Source: {{url}}\nTitle: {{title}}\n\n"
         "Content:\n{{content}}\n\n"
         "Summarize the evidence about which models perform best and on what.\n"
         "Reply with a ```summary fenced block.",
         {"url", "title", "content"}},
        {AgentRole::llm_selector,
         "You select the backbone model best suited to a task from evidence and measured performance.",
         "Evidence:\n{{evidence}}\n\n"
         "Measured performance on sampled tasks:\n{{performance}}\n\n"
         "Known models:\n{{registry}}\n\n"
         "Reply with exactly two lines:\nMODEL: <model id>\nRATIONALE: <one sentence>",
         {"evidence", "performance", "registry"}},
        {AgentRole::llm_decider,
         "You reconcile several model proposals into a ranking.",
         "Proposals:\n{{proposals}}\n\n"
         "Reply with a ```scores fenced block of `<model id>: <score>` lines, best first.",
         {"proposals"}},
        {AgentRole::model_matcher,
         "You map model names found in the wild onto a fixed model registry.",
         "Name: {{name}}\n\n"
         "Registry:\n{{registry}}\n\n"
         "Reply with one line `MODEL: <registry id>`, or `MODEL: none` if nothing matches.",
         {"name", "registry"}},
    };
    return table;
}

const Template& find_template(AgentRole role) {
    const auto& table = templates();
    auto it = std::find_if(table.begin(), table.end(), [&](const Template& t) { return t.role == role; });
    if (it == table.end()) throw TemplateError("no template for role '" + std::string(to_string(role)) + "'");
    return *it;
}

bool has_value(const Context& ctx, const std::string& key) {
    auto it = ctx.find(key);
    return it != ctx.end() && !it->second.empty();
}

// Minimal mustache subset: {{key}}, {{#key}}..{{/key}} (present), {{^key}}..{{/key}} (absent).
// Substituted values are inserted verbatim and never re-scanned.
std::string render(std::string_view tpl, const Context& ctx) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        const auto open = tpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        out.append(tpl.substr(pos, open - pos));
        const auto close = tpl.find("}}", open + 2);
        if (close == std::string_view::npos) throw TemplateError("unterminated placeholder in template");
        const std::string tag(tpl.substr(open + 2, close - open - 2));
        pos = close + 2;
        if (!tag.empty() && (tag[0] == '#' || tag[0] == '^')) {
            const std::string key = tag.substr(1);
            const std::string end_tag = "{{/" + key + "}}";
            const auto end = tpl.find(end_tag, pos);
            if (end == std::string_view::npos) throw TemplateError("unterminated section '" + key + "'");
            const bool present = has_value(ctx, key);
            if ((tag[0] == '#') == present) out += render(tpl.substr(pos, end - pos), ctx);
            pos = end + end_tag.size();
        } else {
            auto it = ctx.find(tag);
            if (it != ctx.end()) out += it->second;
        }
    }
    return out;
}

} // namespace

std::vector<std::string> required_slots(AgentRole role) { return find_template(role).required; }

std::vector<Message> render_prompt(AgentRole role, const Context& context) {
    const auto& t = find_template(role);
    std::vector<std::string> missing;
    for (const auto& key : t.required) {
        if (!context.count(key)) missing.push_back(key);
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
        throw TemplateError("role '" + std::string(to_string(role)) + "' is missing context keys: " + list);
    }
    return {Message{Speaker::system, render(t.system, context)}, Message{Speaker::user, render(t.user, context)}};
}

std::vector<Message> render_prompt(std::string_view role_name, const Context& context) {
    return render_prompt(parse_role(role_name), context);
}

void check_templates() {
    for (AgentRole role : kAllRoles) {
        const auto& t = find_template(role);
        if (t.user.empty()) throw TemplateError("empty template for role '" + std::string(to_string(role)) + "'");
        Context probe;
        for (const auto& key : t.required) probe[key] = "x";
        render_prompt(role, probe);
    }
    if (templates().size() != kAllRoles.size()) throw TemplateError("template table has duplicate roles");
}

} // namespace semag
