#pragma once

// Deterministic offline backends. Every response is a pure function of the
// request (plus a fixed script or seed), so transcripts are reproducible.

#include "semag/gateway.hpp"

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace semag {

// Pops scripted responses: the role's own queue first, then the shared queue.
class ScriptedBackend : public ChatBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> shared = {},
                             std::map<AgentRole, std::vector<std::string>> by_role = {});

    ChatReply send(const ChatRequest& request) override;
    std::size_t remaining() const;

private:
    mutable std::mutex mu_;
    std::deque<std::string> shared_;
    std::map<AgentRole, std::deque<std::string>> by_role_;
};

class FunctionBackend : public ChatBackend {
public:
    using Handler = std::function<std::string(const ChatRequest&)>;
    explicit FunctionBackend(Handler handler) : handler_(std::move(handler)) {}
    ChatReply send(const ChatRequest& request) override { return ChatReply{handler_(request), std::nullopt, false}; }

private:
    Handler handler_;
};

struct ScenarioTask {
    std::string reference_solution;
    std::string wrong_solution; ///< a default failing program is used when empty
    int solve_level = 1;        ///< 1..4 is the level whose coder/debugger lands the fix; other values never do
    int debug_fix_at = 1;       ///< debug iteration (cumulative within the task) that lands a level-3 fix
    int verify_accept_at = 1;   ///< verifier iteration that accepts; 0 never accepts
    bool vary_traces = false;   ///< failing repairs differ on every iteration, defeating stagnation
    std::set<std::string> solvable_by; ///< when non-empty, level-1 success depends only on the model id
};

struct ScenarioBook {
    std::map<std::string, ScenarioTask> tasks;
};

// Reads "reference_solution", "wrong_solution" and "mock_*" fields from dataset records
// (keyed by "id" or "task_id"); records without a reference solution are skipped.
ScenarioBook load_scenario_book(const std::filesystem::path& dataset);
ScenarioTask scenario_task_from_json(const nlohmann::json& record);

// Plays every agent role against a book of tasks with known solutions.
class ScenarioBackend : public ChatBackend {
public:
    enum class Mode { scripted, oracle, broken };

    explicit ScenarioBackend(ScenarioBook book, std::uint64_t seed = 0, Mode mode = Mode::scripted);

    ChatReply send(const ChatRequest& request) override;

private:
    std::string respond(const ChatRequest& request) const;
    const ScenarioTask* lookup(const Context& ctx) const;

    ScenarioBook book_;
    std::uint64_t seed_;
    Mode mode_;
};

// Line-based tracer used by the mock embed-trace agent. Adds trace statements after
// simple assignments, read targets (sh) and for-loop heads (python).
std::string auto_instrument(std::string_view source, std::string_view language);

std::string default_wrong_solution(std::string_view language);

// Model ids served offline: "mock-scenario" follows the book, "mock-oracle"
// always answers with the reference solution, "mock-broken" never does.
inline constexpr const char* kMockScenario = "mock-scenario";
inline constexpr const char* kMockOracle = "mock-oracle";
inline constexpr const char* kMockBroken = "mock-broken";

bool is_mock_model(std::string_view model_id);
void register_mock_backends(Gateway& gateway, const ScenarioBook& book, std::uint64_t seed = 0);

// Registers a scripted scenario backend under `model_id` (registry entries with a mock:// endpoint).
void register_scenario_model(Gateway& gateway, const std::string& model_id, const ScenarioBook& book,
                             std::uint64_t seed = 0);

} // namespace semag
