#pragma once

// Runs candidate programs as external subprocesses under resource limits.
// Candidate code never executes in-process. Each run owns a fresh temporary
// working directory, and the child's process group is hard-killed on
// timeout or when its output exceeds the byte budget.

#include "semag/task.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semag {

struct ResourceLimits {
    std::int64_t wall_time_ms = 10000;
    std::int64_t max_output_bytes = 1 << 20;
    int max_processes = 1;

    void validate() const;
};

enum class ExecStatus { ok, nonzero_exit, timeout, output_limit, spawn_failure };

std::string_view to_string(ExecStatus s);

struct ExecutionResult {
    std::string stdout_text;
    std::string stderr_text;
    bool output_truncated = false;
    ExecStatus status = ExecStatus::ok;
    int exit_code = 0; ///< 128 + signal number when the child was killed
    std::int64_t wall_time_ms = 0;
    std::vector<std::string> trace_lines;
};

struct InterpreterSpec {
    // Whitespace-separated argv; "{file}" expands to the program path.
    std::string command;
    std::string file_name = "main.txt";
    // Appended to the source when the task names an entry point; "{entry_point}" expands.
    std::string call_harness;
};

struct ExecutorConfig {
    std::map<std::string, InterpreterSpec> interpreters;
    int max_parallel_executions = 4;
    std::filesystem::path temp_root;

    // python -> "python3 {file}", sh -> "sh {file}".
    static ExecutorConfig defaults();
};

// Worst-case lateness of the hard kill relative to wall_time_ms.
inline constexpr std::int64_t kSchedulingSlackMs = 250;

class Executor {
public:
    explicit Executor(ExecutorConfig config = ExecutorConfig::defaults());
    ~Executor();

    Executor(const Executor&) = delete;
    Executor& operator=(const Executor&) = delete;

    // Throws InfrastructureError when the interpreter cannot be started.
    // Every other outcome is encoded in the returned status.
    ExecutionResult run(const Program& program, std::string_view stdin_text, const ResourceLimits& limits,
                        const std::optional<std::string>& entry_point = std::nullopt) const;

    std::pair<TestReport, std::vector<ExecutionResult>>
    run_examples(const Program& program, std::span<const IOExample> examples, const ResourceLimits& limits,
                 const std::optional<std::string>& entry_point = std::nullopt) const;

    const ExecutorConfig& config() const noexcept { return config_; }

private:
    ExecutorConfig config_;
    std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

Verdict verdict_for(const IOExample& example, const ExecutionResult& result);

} // namespace semag
