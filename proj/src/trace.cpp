#include "semag/trace.hpp"

#include "semag/errors.hpp"
#include "semag/extract.hpp"
#include "semag/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace semag {

ParsedTrace parse_trace_text(std::string_view stderr_text, int revision) {
    ParsedTrace out;
    out.trace.source_revision = revision;
    for (const auto& line : text::split_lines(stderr_text)) {
        if (!std::string_view(line).starts_with(kTracePrefix)) continue;
        if (auto ev = parse_trace_line(line)) {
            out.trace.events.push_back(std::move(*ev));
        } else {
            ++out.skipped;
        }
    }
    return out;
}

ParsedTrace parse_trace(const ExecutionResult& result, int revision) {
    return parse_trace_text(result.stderr_text, revision);
}

std::size_t edit_distance(std::span<const TraceEvent> a, std::span<const TraceEvent> b) {
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double similarity(const Trace& a, const Trace& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    const auto d = edit_distance(a.events, b.events);
    const auto longest = std::max(a.size(), b.size());
    return 1.0 - static_cast<double>(d) / static_cast<double>(longest);
}

void TransitionParams::validate() const {
    if (!(delta0 > 0.0 && delta0 <= 1.0)) throw PreconditionError("delta0 must lie in (0,1]");
    if (!(lambda >= 0.0)) throw PreconditionError("lambda must be non-negative");
    if (t_max < 1) throw PreconditionError("t_max must be at least 1");
}

double threshold(int t, const TransitionParams& params, double complexity) {
    params.validate();
    if (t < 1 || t > params.t_max) {
        throw PreconditionError("iteration " + std::to_string(t) + " outside [1, " + std::to_string(params.t_max) + "]");
    }
    if (!(complexity >= 0.0 && complexity <= 1.0)) throw PreconditionError("complexity must lie in [0,1]");
    return params.delta0 *
           std::exp(-params.lambda * (static_cast<double>(t) / static_cast<double>(params.t_max)) * complexity);
}

bool should_transition(const Trace& current, const Trace* previous, int t, const TransitionParams& params,
                       double complexity) {
    if (t < 1) throw PreconditionError("iteration must be at least 1");
    if (previous == nullptr) return false;
    return similarity(current, *previous) > threshold(t, params, complexity);
}

InstrumentOutcome instrument(const Program& program, AgentSession& agents, const Executor& executor,
                             std::span<const IOExample> examples, const ResourceLimits& limits,
                             std::span<const ExecutionResult> baseline,
                             const std::optional<std::string>& entry_point) {
    if (examples.empty()) throw PreconditionError("instrument needs at least one example to validate against");

    InstrumentOutcome fallback{program, Trace{{}, program.revision}, true, 0};

    const auto& ex = agents.call(AgentRole::embed_trace, {{"code", program.source}, {"language", program.language_tag}});
    std::string source;
    try {
        source = extract_code(ex.response);
    } catch (const ExtractionError&) {
        spdlog::info("embed-trace returned no code block; continuing without a trace");
        return fallback;
    }
    Program traced = program.revise(std::move(source), ProducedBy::debug);

    std::vector<ExecutionResult> reference;
    if (baseline.size() != examples.size()) {
        reference = executor.run_examples(program, examples, limits, entry_point).second;
        baseline = reference;
    }
    auto runs = executor.run_examples(traced, examples, limits, entry_point).second;

    InstrumentOutcome out{traced, Trace{{}, traced.revision}, false, 0};
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].stdout_text != baseline[i].stdout_text) {
            spdlog::info("instrumented revision changed stdout on example {}; falling back", i);
            return fallback;
        }
        auto parsed = parse_trace(runs[i], traced.revision);
        out.skipped += parsed.skipped;
        for (auto& e : parsed.trace.events) out.trace.events.push_back(std::move(e));
    }
    return out;
}

} // namespace semag
