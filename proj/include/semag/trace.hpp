#pragma once

// Execution traces: parsing, similarity between consecutive traces, the
// adaptive stagnation threshold and the level-transition predicate.

#include "semag/executor.hpp"
#include "semag/gateway.hpp"
#include "semag/trace_grammar.hpp"

#include <optional>
#include <span>
#include <vector>

namespace semag {

struct Trace {
    std::vector<TraceEvent> events;
    int source_revision = 0;

    std::size_t size() const noexcept { return events.size(); }
    bool empty() const noexcept { return events.empty(); }
};

struct ParsedTrace {
    Trace trace;
    std::size_t skipped = 0; ///< lines carrying the trace prefix that failed the grammar
};

ParsedTrace parse_trace(const ExecutionResult& result, int revision);
ParsedTrace parse_trace_text(std::string_view stderr_text, int revision);

// Event-level Levenshtein distance; events are equal when all fields are equal.
std::size_t edit_distance(std::span<const TraceEvent> a, std::span<const TraceEvent> b);

// 1 - d / max(|a|, |b|). Two empty traces are identical (1); one empty trace scores 0.
double similarity(const Trace& a, const Trace& b);

struct TransitionParams {
    double delta0 = 0.85;
    double lambda = 0.5;
    int t_max = 4;

    void validate() const;
};

// delta0 * exp(-lambda * t / t_max * complexity), for 1 <= t <= t_max.
double threshold(int t, const TransitionParams& params, double complexity);

// True iff similarity(current, previous) > threshold(t). Always false without a previous trace.
bool should_transition(const Trace& current, const Trace* previous, int t, const TransitionParams& params,
                       double complexity);

struct InstrumentOutcome {
    Program program;  ///< instrumented revision, or the original on fallback
    Trace trace;      ///< events from the validation runs, concatenated in example order
    bool fell_back = false;
    std::size_t skipped = 0;
};

// Asks the embed-trace agent for an instrumented revision and validates it by
// re-running the examples: any stdout difference from `baseline` (the original
// program's runs, recomputed when empty) falls back to the original with an
// empty trace.
InstrumentOutcome instrument(const Program& program, AgentSession& agents, const Executor& executor,
                             std::span<const IOExample> examples, const ResourceLimits& limits,
                             std::span<const ExecutionResult> baseline = {},
                             const std::optional<std::string>& entry_point = std::nullopt);

} // namespace semag
