#pragma once

// Batch runner: solves every task, judges the final program on hidden tests,
// and reports Pass@1, level distribution and token usage.

#include "semag/config.hpp"
#include "semag/controller.hpp"
#include "semag/task.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace semag {

inline constexpr int kMetricsSchemaVersion = 1;

struct TaskRow {
    std::string task_id;
    bool passed = false;
    int final_level = 0; ///< 0 for errored tasks
    std::int64_t tokens = 0;
    std::int64_t wall_ms = 0;
    bool visible_passed = false;
    bool errored = false;
    std::string error;
};

struct Metrics {
    double pass_at_1 = 0.0;
    std::map<int, int> per_level_counts;
    std::int64_t tokens_total = 0;
    double tokens_per_task_avg = 0.0;
    double latency_per_task_avg = 0.0;
    int errored = 0;
    bool strict_infra = false;
    std::vector<TaskRow> rows;

    // Timing fields go to a separate document so that mock runs stay byte-identical.
    nlohmann::json to_json() const;
    nlohmann::json timing_json() const;
    static Metrics from_json(const nlohmann::json& doc, const nlohmann::json* timing = nullptr);
};

// Fills pass_at_1, counts and averages from the rows.
Metrics compute_metrics(std::vector<TaskRow> rows, bool strict_infra);

struct DatasetInfo {
    std::string path;
    std::string schema;
    std::string sha256;
};

struct RunManifest {
    std::string run_id;
    DatasetInfo dataset;
    nlohmann::json config;
    nlohmann::json backends;
    std::uint64_t seed = 0;
    int parallelism = 1;
    bool strict_infra = false;
    std::size_t task_count = 0;
    std::string started_at;
    std::string finished_at;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& doc);
};

struct BenchmarkOptions {
    int parallelism = 1;
    std::uint64_t seed = 0;
    bool strict_infra = false;
};

struct BenchmarkResult {
    Metrics metrics;
    RunManifest manifest;
    std::vector<SessionEvent> events;
    std::vector<nlohmann::json> transcript;
    std::vector<double> debater_performance; ///< after the last task
};

BenchmarkResult run_benchmark(const std::vector<Task>& tasks, const DatasetInfo& dataset, const EngineConfig& config,
                              Gateway& gateway, const BackendDescriptor& backend, const Executor& executor,
                              const BenchmarkOptions& options = {});

// manifest.json, metrics.json, timing.json, events.jsonl, transcript.jsonl.
void write_run(const std::filesystem::path& dir, const BenchmarkResult& result);
Metrics load_run_metrics(const std::filesystem::path& dir);

nlohmann::json event_json(const SessionEvent& event);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0; ///< population
};

std::map<std::string, MetricSummary> aggregate_runs(const std::vector<Metrics>& runs);

enum class ReportFormat { table, csv, json };

ReportFormat parse_report_format(std::string_view name);

// csv columns: task_id,passed,final_level,tokens,wall_ms
std::string report(const Metrics& metrics, ReportFormat format);

} // namespace semag
