#include "semag/controller.hpp"

#include "semag/errors.hpp"
#include "semag/extract.hpp"
#include "semag/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <sstream>

namespace semag {

std::string Plan::render() const {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out += std::to_string(i + 1) + ". " + steps[i] + "\n";
    }
    return out;
}

std::string_view to_string(Level level) {
    switch (level) {
    case Level::L1: return "L1";
    case Level::L2: return "L2";
    case Level::L3: return "L3";
    case Level::L4: return "L4";
    case Level::done: return "done";
    case Level::exhausted: return "exhausted";
    }
    return "?";
}

std::string_view to_string(DebugOutcome outcome) {
    switch (outcome) {
    case DebugOutcome::passed: return "passed";
    case DebugOutcome::stagnated: return "stagnated";
    case DebugOutcome::exhausted: return "exhausted";
    }
    return "?";
}

void ControllerConfig::validate() const {
    if (m_plan < 1 || m_try < 1 || m_debug < 1 || n_debater < 1) {
        throw PreconditionError("iteration budgets must all be at least 1");
    }
    if (!(tau_w > 0.0)) throw PreconditionError("tau_w must be positive");
    if (!(performance_beta > 0.0 && performance_beta <= 1.0)) {
        throw PreconditionError("performance_beta must lie in (0,1]");
    }
    if (k_pass < 1) throw PreconditionError("k_pass must be at least 1");
    transition.validate();
    if (transition.t_max < m_debug) throw PreconditionError("transition t_max must be at least m_debug");
}

DebateProposal parse_proposal(std::string_view response, int debater_index) {
    DebateProposal p;
    p.debater_index = debater_index;
    auto block = find_fenced(response, "proposal");
    if (!block) return p;
    auto strategy = find_field(*block, "STRATEGY");
    if (!strategy || text::trim(*strategy).empty()) return p;
    p.strategy_text = text::trim(*strategy);
    if (auto params = find_field(*block, "PARAMS")) p.param_text = text::trim(*params);
    if (auto score = find_field(*block, "SCORE")) {
        try {
            p.self_score = std::clamp(std::stod(text::trim(*score)), 0.0, 1.0);
        } catch (const std::exception&) {
            p.self_score = 0.0;
        }
    }
    return p;
}

std::string format_trace(const Trace& trace, std::size_t max_events) {
    if (trace.empty()) return "(no trace events)";
    std::string out;
    const auto n = std::min(max_events, trace.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = trace.events[i];
        out += "line " + std::to_string(e.line_no) + ": " + e.var_name + " = " + e.value_repr + "\n";
    }
    if (n < trace.size()) out += "... " + std::to_string(trace.size() - n) + " more events\n";
    return out;
}

std::string format_proposals(std::span<const DebateProposal> proposals) {
    std::string out;
    for (const auto& p : proposals) {
        out += "Debater " + std::to_string(p.debater_index) + ":\n";
        out += "STRATEGY: " + (p.strategy_text.empty() ? std::string("(none)") : p.strategy_text) + "\n";
        out += "PARAMS: " + p.param_text + "\n";
        std::ostringstream score;
        score << p.self_score;
        out += "SCORE: " + score.str() + "\n\n";
    }
    return out;
}

TaskSolver::TaskSolver(const Controller& controller, const Task& task, std::vector<double> debater_performance)
    : controller_(&controller), task_(&task), agents_(controller.gateway(), controller.backend(), task.id) {
    state_.task_id = task.id;
    debater_performance.resize(static_cast<std::size_t>(controller.config().n_debater), 0.0);
    state_.debater_performance = std::move(debater_performance);
}

void TaskSolver::emit(std::string event, int level, int iter) {
    state_.events.push_back(SessionEvent{task_->id, std::move(event), level, iter, agents_.ledger().total});
}

void TaskSolver::record(const Program& program) { state_.program_history.push_back(program); }

Context TaskSolver::base_context() const {
    Context ctx{{"statement", task_->statement}, {"examples", examples_text()}, {"language", task_->language}};
    if (task_->entry_point) ctx["entry_point"] = *task_->entry_point;
    return ctx;
}

std::string TaskSolver::examples_text() const {
    std::string out;
    for (std::size_t i = 0; i < task_->visible_examples.size(); ++i) {
        const auto& ex = task_->visible_examples[i];
        out += "Example " + std::to_string(i + 1) + "\nInput:\n" + ex.input + "\nExpected output:\n" +
               ex.expected_output + "\n";
    }
    return out;
}

std::string TaskSolver::feedback_text() const {
    std::string out;
    for (const auto& v : last_report_.per_example) {
        if (v.verdict == Verdict::pass) continue;
        const auto& ex = task_->visible_examples[v.index];
        out += "Example " + std::to_string(v.index + 1) + ": " + std::string(to_string(v.verdict)) + "\nInput:\n" +
               ex.input + "\nExpected:\n" + ex.expected_output + "\nActual:\n" + v.actual_output + "\n";
        if (!v.stderr_text.empty()) out += "Stderr:\n" + v.stderr_text.substr(0, 2000) + "\n";
    }
    return out.empty() ? "All visible examples pass." : out;
}

bool TaskSolver::test(const Program& program) {
    const auto& c = *controller_;
    bool passed = true;
    for (int k = 0; k < c.config().k_pass && passed; ++k) {
        auto [report, runs] =
            c.executor().run_examples(program, task_->visible_examples, c.limits(), task_->entry_point);
        passed = report.all_passed;
        last_report_ = std::move(report);
        last_runs_ = std::move(runs);
    }
    return passed;
}

Program TaskSolver::level1() {
    emit("level_enter", 1, 0);
    state_.level = Level::L1;
    auto ctx = base_context();
    const auto& ex = agents_.call(AgentRole::coder, std::move(ctx));
    std::string source;
    try {
        source = extract_code(ex.response);
    } catch (const ExtractionError&) {
        spdlog::debug("{}: level-1 response carried no code block", task_->id);
    }
    Program y = Program::initial(std::move(source), task_->language, ProducedBy::level1);
    record(y);
    return y;
}

Plan TaskSolver::plan_and_verify() {
    const auto& cfg = controller_->config();
    Plan plan;
    {
        const auto& ex = agents_.call(AgentRole::planner, base_context());
        std::string body;
        try {
            body = extract_text_block(ex.response, BlockKind::plan);
        } catch (const ExtractionError&) {
            body = ex.response;
        }
        plan.steps = parse_steps(body);
    }
    for (int i = 1; i <= cfg.m_plan; ++i) {
        ++state_.counters.plan_iters;
        auto ctx = base_context();
        ctx["plan"] = plan.render();
        ctx["iteration"] = std::to_string(i);
        const auto& ex = agents_.call(AgentRole::plan_verifier, std::move(ctx));
        PlanVerdict verdict = PlanVerdict::revise;
        try {
            verdict = extract_verdict(ex.response);
        } catch (const ExtractionError&) {
        }
        if (auto refined = find_fenced(ex.response, "plan")) {
            auto steps = parse_steps(*refined);
            if (!steps.empty() && steps != plan.steps) {
                plan.steps = std::move(steps);
                ++plan.revision;
            }
        }
        plan.logs.push_back(find_fenced(ex.response, "log").value_or(""));
        emit("plan_iter", 2, i);
        if (verdict == PlanVerdict::accept) {
            plan.verified = true;
            break;
        }
    }
    if (plan.verified) emit("plan_verified", 2, state_.counters.plan_iters);
    state_.plan = plan;
    return plan;
}

Program TaskSolver::level2(const Plan& plan) {
    auto ctx = base_context();
    ctx["plan"] = plan.render();
    const auto& ex = agents_.call(AgentRole::coder, std::move(ctx));
    std::string source;
    try {
        source = extract_code(ex.response);
    } catch (const ExtractionError&) {
    }
    Program y = state_.program_history.back().revise(std::move(source), ProducedBy::level2);
    record(y);
    return y;
}

DebugResult TaskSolver::debug_cycle(Program y) {
    const auto& c = *controller_;
    const auto& cfg = c.config();
    state_.level = Level::L3;
    state_.trace_prev.reset();
    DebugResult out;
    for (int d = 1; d <= cfg.m_debug; ++d) {
        ++state_.counters.debug_iters;
        out.iterations = d;
        emit("debug_iter", 3, state_.counters.debug_iters);

        auto inst = instrument(y, agents_, c.executor(), task_->visible_examples, c.limits(), last_runs_,
                               task_->entry_point);
        Trace tau = std::move(inst.trace);
        tau.source_revision = y.revision;

        const auto& explanation =
            agents_.call(AgentRole::explainer, Context{{"code", y.source}, {"statement", task_->statement}}).response;
        std::string logs;
        if (state_.plan) {
            logs += "Plan verification log:\n";
            for (const auto& l : state_.plan->logs) logs += l + "\n";
        }
        logs += "Execution log:\n" + feedback_text();
        const auto& sug = agents_.call(AgentRole::suggestor, Context{{"trace", format_trace(tau)},
                                                                    {"logs", logs},
                                                                    {"explanation", explanation}});
        std::string suggestion;
        try {
            suggestion = extract_text_block(sug.response, BlockKind::suggestion);
        } catch (const ExtractionError&) {
            suggestion = text::trim(sug.response);
        }

        Context dctx{{"code", y.source},
                     {"suggestion", suggestion},
                     {"language", task_->language},
                     {"test_feedback", feedback_text()},
                     {"iteration", std::to_string(state_.counters.debug_iters)}};
        const auto& fix = agents_.call(AgentRole::debugger, std::move(dctx));
        std::string source = y.source;
        try {
            source = extract_code(fix.response);
        } catch (const ExtractionError&) {
            spdlog::debug("{}: debugger response carried no code block", task_->id);
        }
        y = y.revise(std::move(source), ProducedBy::debug);
        record(y);

        if (test(y)) {
            emit("test_pass", 3, state_.counters.debug_iters);
            out.program = std::move(y);
            out.outcome = DebugOutcome::passed;
            return out;
        }
        const Trace* prev = state_.trace_prev ? &*state_.trace_prev : nullptr;
        if (should_transition(tau, prev, d, cfg.transition, task_->complexity)) {
            emit("stagnation", 3, state_.counters.debug_iters);
            state_.trace_prev = std::move(tau);
            out.program = std::move(y);
            out.outcome = DebugOutcome::stagnated;
            return out;
        }
        state_.trace_prev = std::move(tau);
    }
    emit("debug_exhausted", 3, state_.counters.debug_iters);
    out.program = std::move(y);
    out.outcome = DebugOutcome::exhausted;
    return out;
}

DebateProposal TaskSolver::debate_round(const Program& program, const Trace& trace,
                                        std::span<const DebateProposal> history, int debater_index) {
    ++state_.counters.debate_rounds;
    Context ctx{{"statement", task_->statement},
                {"code", program.source},
                {"trace", format_trace(trace)},
                {"debater_index", std::to_string(debater_index)}};
    if (!history.empty()) ctx["history"] = format_proposals(history);
    const auto& ex = agents_.call(AgentRole::debater, std::move(ctx));
    emit("debate_round", 4, state_.counters.debate_rounds);
    return parse_proposal(ex.response, debater_index);
}

Program TaskSolver::level4_refine(const Program& program, const ConsensusDecision& decision,
                                  std::span<const DebateProposal> proposals) {
    const auto& dec = agents_.call(AgentRole::decider, Context{{"statement", task_->statement},
                                                              {"proposals", format_proposals(proposals)},
                                                              {"chosen_strategy", decision.strategy},
                                                              {"chosen_params", decision.params}});
    std::string directive;
    try {
        directive = extract_text_block(dec.response, BlockKind::suggestion);
    } catch (const ExtractionError&) {
        directive = decision.strategy + "; " + decision.params;
    }
    auto ctx = base_context();
    ctx["directive"] = directive;
    const auto& ex = agents_.call(AgentRole::coder, std::move(ctx));
    std::string source = program.source;
    try {
        source = extract_code(ex.response);
    } catch (const ExtractionError&) {
    }
    Program y = program.revise(std::move(source), ProducedBy::debate_refine);
    record(y);
    return y;
}

SolveResult TaskSolver::finish(const Program& program, bool passed, int level) {
    state_.level = passed ? Level::done : Level::exhausted;
    state_.final_level = level;
    state_.token_ledger = agents_.ledger();
    state_.exchanges = agents_.exchanges();
    emit(passed ? "done" : "exhausted", level, 0);
    return SolveResult{program, state_, passed};
}

SolveResult TaskSolver::run() {
    const auto& cfg = controller_->config();

    Program y = level1();
    if (test(y)) {
        emit("test_pass", 1, 0);
        return finish(y, true, 1);
    }
    emit("test_fail", 1, 0);

    state_.level = Level::L2;
    emit("level_enter", 2, 0);
    Plan plan = plan_and_verify();
    y = level2(plan);
    if (test(y)) {
        emit("test_pass", 2, 0);
        return finish(y, true, 2);
    }
    emit("test_fail", 2, 0);

    for (int t = 1; t <= cfg.m_try; ++t) {
        ++state_.counters.try_iters;
        emit("level_enter", 3, t);
        auto dbg = debug_cycle(y);
        y = dbg.program;
        if (dbg.outcome == DebugOutcome::passed) return finish(y, true, 3);

        state_.level = Level::L4;
        emit("level_enter", 4, t);
        const Trace trace = state_.trace_prev.value_or(Trace{});
        std::vector<DebateProposal> proposals;
        for (int j = 1; j <= cfg.n_debater; ++j) {
            proposals.push_back(debate_round(y, trace, proposals, j));
        }
        auto decision = consensus(proposals, state_.debater_performance, cfg.tau_w);
        y = level4_refine(y, decision, proposals);
        const bool passed = test(y);
        // The adopted proposal's debater receives the reward.
        const double reward = passed ? 1.0 : 0.0;
        const int chosen = proposals[decision.chosen].debater_index;
        state_.debater_performance =
            update_performance(std::move(state_.debater_performance), chosen, reward, cfg.performance_beta);
        state_.rewards.push_back(RewardEvent{chosen, reward});
        state_.decisions.push_back(std::move(decision));
        if (passed) {
            emit("test_pass", 4, t);
            return finish(y, true, 4);
        }
        emit("test_fail", 4, t);
    }
    return finish(y, false, 4);
}

Controller::Controller(ControllerConfig config, Gateway& gateway, BackendDescriptor backend,
                       const Executor& executor, ResourceLimits limits)
    : config_(std::move(config)), gateway_(&gateway), backend_(std::move(backend)), executor_(&executor),
      limits_(limits) {
    config_.validate();
    backend_.validate();
    limits_.validate();
}

SolveResult Controller::solve(const Task& task, std::vector<double> debater_performance) const {
    if (task.visible_examples.empty()) {
        throw PreconditionError("task " + task.id + " has no visible examples");
    }
    TaskSolver solver(*this, task, std::move(debater_performance));
    return solver.run();
}

} // namespace semag
