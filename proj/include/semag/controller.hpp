#pragma once

// The four-level controller: direct generation, plan-and-verify, trace-guided
// debugging with stagnation detection, and debate-driven refinement.

#include "semag/consensus.hpp"
#include "semag/executor.hpp"
#include "semag/gateway.hpp"
#include "semag/task.hpp"
#include "semag/trace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semag {

struct Plan {
    std::vector<std::string> steps;
    int revision = 0;
    bool verified = false;
    std::vector<std::string> logs; ///< one verification log per verifier call

    std::string render() const; ///< numbered steps
};

enum class Level { L1, L2, L3, L4, done, exhausted };

std::string_view to_string(Level level);

struct Counters {
    int plan_iters = 0;
    int try_iters = 0;
    int debug_iters = 0;   ///< cumulative over all tries
    int debate_rounds = 0; ///< one per debater call, cumulative over all tries
};

struct SessionEvent {
    std::string task_id;
    std::string event;
    int level = 0;
    int iter = 0;
    std::int64_t tokens = 0; ///< cumulative total at the time of the event
};

struct RewardEvent {
    int debater_index = 1;
    double reward = 0.0;
};

struct SessionState {
    std::string task_id;
    Level level = Level::L1;
    std::optional<Plan> plan;
    std::vector<Program> program_history;
    std::optional<Trace> trace_prev;
    Counters counters;
    TokenUsage token_ledger;
    std::vector<double> debater_performance;
    int final_level = 0; ///< 1..4 once terminal
    std::vector<SessionEvent> events;
    std::vector<ChatExchange> exchanges;
    std::vector<RewardEvent> rewards;
    std::vector<ConsensusDecision> decisions;
};

struct ControllerConfig {
    int m_plan = 3;
    int m_try = 5;
    int m_debug = 4;
    int n_debater = 3;
    double tau_w = 1.0;
    double performance_beta = 0.3;
    int k_pass = 1;
    TransitionParams transition{};

    void validate() const;
};

enum class DebugOutcome { passed, stagnated, exhausted };

std::string_view to_string(DebugOutcome outcome);

struct DebugResult {
    Program program;
    DebugOutcome outcome = DebugOutcome::exhausted;
    int iterations = 0;
};

struct SolveResult {
    Program program;
    SessionState state;
    bool passed_visible = false;
};

class Controller;

// Runs one task. Holds the per-task session; not shared between workers.
class TaskSolver {
public:
    TaskSolver(const Controller& controller, const Task& task, std::vector<double> debater_performance = {});

    Program level1();
    Plan plan_and_verify();
    Program level2(const Plan& plan);
    DebugResult debug_cycle(Program program);
    DebateProposal debate_round(const Program& program, const Trace& trace, std::span<const DebateProposal> history,
                                int debater_index);
    Program level4_refine(const Program& program, const ConsensusDecision& decision,
                          std::span<const DebateProposal> proposals);

    // Runs the visible examples; failure details feed the next debugger call.
    bool test(const Program& program);

    SolveResult run();

    const SessionState& state() const noexcept { return state_; }
    const AgentSession& agents() const noexcept { return agents_; }

private:
    void emit(std::string event, int level, int iter);
    void record(const Program& program);
    Context base_context() const;
    std::string examples_text() const;
    std::string feedback_text() const;
    SolveResult finish(const Program& program, bool passed, int level);

    const Controller* controller_;
    const Task* task_;
    AgentSession agents_;
    SessionState state_;
    std::vector<ExecutionResult> last_runs_;
    TestReport last_report_;
};

class Controller {
public:
    Controller(ControllerConfig config, Gateway& gateway, BackendDescriptor backend, const Executor& executor,
               ResourceLimits limits = {});

    // Throws PreconditionError when the task has no visible examples.
    SolveResult solve(const Task& task, std::vector<double> debater_performance = {}) const;

    const ControllerConfig& config() const noexcept { return config_; }
    Gateway& gateway() const noexcept { return *gateway_; }
    const BackendDescriptor& backend() const noexcept { return backend_; }
    const Executor& executor() const noexcept { return *executor_; }
    const ResourceLimits& limits() const noexcept { return limits_; }

private:
    ControllerConfig config_;
    Gateway* gateway_;
    BackendDescriptor backend_;
    const Executor* executor_;
    ResourceLimits limits_;
};

// Parses a debater response; anything malformed yields an empty strategy with self-score 0.
DebateProposal parse_proposal(std::string_view response, int debater_index);

// Prompt rendering helpers shared with the tests.
std::string format_trace(const Trace& trace, std::size_t max_events = 200);
std::string format_proposals(std::span<const DebateProposal> proposals);

} // namespace semag
