#include "semag/bench.hpp"

#include "semag/errors.hpp"
#include "semag/text.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <set>

namespace semag {

namespace {

using nlohmann::json;

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct TaskOutcome {
    TaskRow row;
    std::vector<SessionEvent> events;
    std::vector<json> transcript;
    std::vector<RewardEvent> rewards;
};

TaskOutcome solve_one(const Controller& controller, const Task& task, std::vector<double> eta) {
    TaskOutcome out;
    out.row.task_id = task.id;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto res = controller.solve(task, std::move(eta));
        out.row.final_level = res.state.final_level;
        out.row.visible_passed = res.passed_visible;
        out.row.tokens = res.state.token_ledger.total;
        out.events = std::move(res.state.events);
        out.rewards = std::move(res.state.rewards);
        for (const auto& ex : res.state.exchanges) out.transcript.push_back(transcript_record(ex, task.id));
        const auto hidden =
            run_tests(res.program, task.hidden_tests, controller.executor(), controller.limits(), task.entry_point);
        out.row.passed = hidden.all_passed;
    } catch (const Error& e) {
        spdlog::error("task {} errored: {}", task.id, e.what());
        out.row = TaskRow{};
        out.row.task_id = task.id;
        out.row.errored = true;
        out.row.error = e.what();
        out.events.clear();
        out.transcript.clear();
        out.rewards.clear();
        out.events.push_back(SessionEvent{task.id, "errored", 0, 0, 0});
    }
    out.row.wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

} // namespace

json event_json(const SessionEvent& e) {
    return {{"task_id", e.task_id}, {"event", e.event}, {"level", e.level}, {"iter", e.iter}, {"tokens", e.tokens}};
}

Metrics compute_metrics(std::vector<TaskRow> rows, bool strict_infra) {
    Metrics m;
    m.strict_infra = strict_infra;
    m.rows = std::move(rows);
    std::size_t passed = 0;
    std::int64_t wall = 0;
    for (const auto& r : m.rows) {
        ++m.per_level_counts[r.final_level];
        if (r.errored) ++m.errored;
        if (r.passed) ++passed;
        m.tokens_total += r.tokens;
        wall += r.wall_ms;
    }
    const auto n = m.rows.size();
    const auto denom = strict_infra ? n - static_cast<std::size_t>(m.errored) : n;
    m.pass_at_1 = denom == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(denom);
    m.tokens_per_task_avg = n == 0 ? 0.0 : static_cast<double>(m.tokens_total) / static_cast<double>(n);
    m.latency_per_task_avg = n == 0 ? 0.0 : static_cast<double>(wall) / static_cast<double>(n);
    return m;
}

json Metrics::to_json() const {
    json levels = json::object();
    for (const auto& [lvl, count] : per_level_counts) levels[std::to_string(lvl)] = count;
    json tasks = json::array();
    for (const auto& r : rows) {
        json t{{"task_id", r.task_id},
               {"passed", r.passed},
               {"final_level", r.final_level},
               {"tokens", r.tokens},
               {"visible_passed", r.visible_passed},
               {"errored", r.errored}};
        if (r.errored) t["error"] = r.error;
        tasks.push_back(std::move(t));
    }
    return {{"schema_version", kMetricsSchemaVersion},
            {"task_count", rows.size()},
            {"pass_at_1", pass_at_1},
            {"per_level_counts", std::move(levels)},
            {"tokens_total", tokens_total},
            {"tokens_per_task_avg", tokens_per_task_avg},
            {"errored", errored},
            {"strict_infra", strict_infra},
            {"tasks", std::move(tasks)}};
}

json Metrics::timing_json() const {
    json tasks = json::array();
    for (const auto& r : rows) tasks.push_back({{"task_id", r.task_id}, {"wall_ms", r.wall_ms}});
    return {{"schema_version", kMetricsSchemaVersion},
            {"latency_per_task_avg", latency_per_task_avg},
            {"tasks", std::move(tasks)}};
}

Metrics Metrics::from_json(const json& doc, const json* timing) {
    try {
        if (doc.at("schema_version").get<int>() != kMetricsSchemaVersion) {
            throw ParseError("unsupported metrics schema version");
        }
        Metrics m;
        m.pass_at_1 = doc.at("pass_at_1").get<double>();
        for (const auto& [k, v] : doc.at("per_level_counts").items()) m.per_level_counts[std::stoi(k)] = v.get<int>();
        m.tokens_total = doc.at("tokens_total").get<std::int64_t>();
        m.tokens_per_task_avg = doc.at("tokens_per_task_avg").get<double>();
        m.errored = doc.at("errored").get<int>();
        m.strict_infra = doc.at("strict_infra").get<bool>();
        std::map<std::string, std::int64_t> wall;
        if (timing) {
            m.latency_per_task_avg = timing->at("latency_per_task_avg").get<double>();
            for (const auto& t : timing->at("tasks")) wall[t.at("task_id").get<std::string>()] = t.at("wall_ms").get<std::int64_t>();
        }
        for (const auto& t : doc.at("tasks")) {
            TaskRow r;
            r.task_id = t.at("task_id").get<std::string>();
            r.passed = t.at("passed").get<bool>();
            r.final_level = t.at("final_level").get<int>();
            r.tokens = t.at("tokens").get<std::int64_t>();
            r.visible_passed = t.value("visible_passed", false);
            r.errored = t.value("errored", false);
            r.error = t.value("error", std::string{});
            if (auto it = wall.find(r.task_id); it != wall.end()) r.wall_ms = it->second;
            m.rows.push_back(std::move(r));
        }
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed metrics document: ") + e.what());
    }
}

json RunManifest::to_json() const {
    return {{"run_id", run_id},
            {"dataset", {{"path", dataset.path}, {"schema", dataset.schema}, {"sha256", dataset.sha256}}},
            {"config", config},
            {"backends", backends},
            {"seed", seed},
            {"parallelism", parallelism},
            {"strict_infra", strict_infra},
            {"task_count", task_count},
            {"started_at", started_at},
            {"finished_at", finished_at}};
}

RunManifest RunManifest::from_json(const json& doc) {
    try {
        RunManifest m;
        m.run_id = doc.at("run_id").get<std::string>();
        const auto& d = doc.at("dataset");
        m.dataset = {d.at("path").get<std::string>(), d.at("schema").get<std::string>(), d.value("sha256", "")};
        m.config = doc.at("config");
        m.backends = doc.at("backends");
        m.seed = doc.at("seed").get<std::uint64_t>();
        m.parallelism = doc.at("parallelism").get<int>();
        m.strict_infra = doc.at("strict_infra").get<bool>();
        m.task_count = doc.at("task_count").get<std::size_t>();
        m.started_at = doc.at("started_at").get<std::string>();
        m.finished_at = doc.at("finished_at").get<std::string>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed manifest: ") + e.what());
    }
}

BenchmarkResult run_benchmark(const std::vector<Task>& tasks, const DatasetInfo& dataset, const EngineConfig& config,
                              Gateway& gateway, const BackendDescriptor& backend, const Executor& executor,
                              const BenchmarkOptions& options) {
    if (tasks.empty()) throw PreconditionError("dataset is empty");
    if (options.parallelism < 1) throw PreconditionError("parallelism must be at least 1");
    config.validate();

    BenchmarkResult result;
    auto& man = result.manifest;
    man.dataset = dataset;
    man.config = config.to_json();
    man.backends = json::array({{{"model_id", backend.model_id},
                                 {"endpoint", backend.endpoint},
                                 {"auth_env_var", backend.auth_env_var},
                                 {"temperature", backend.temperature},
                                 {"max_output_tokens", backend.max_output_tokens}}});
    man.seed = options.seed;
    man.parallelism = options.parallelism;
    man.strict_infra = options.strict_infra;
    man.task_count = tasks.size();
    const auto fingerprint = dataset.sha256 + man.config.dump() + man.backends.dump() + std::to_string(options.seed) +
                             std::to_string(options.parallelism) + (options.strict_infra ? "1" : "0");
    man.run_id = "run-" + text::sha256_hex(fingerprint).substr(0, 12);
    man.started_at = utc_now();

    const Controller controller(config.controller, gateway, backend, executor, config.limits);
    std::vector<double> eta(static_cast<std::size_t>(config.controller.n_debater), 0.0);
    std::vector<TaskRow> rows;
    const auto p = static_cast<std::size_t>(options.parallelism);

    // Tasks run in chunks of `parallelism`; each starts from the performance
    // snapshot taken at the chunk boundary and rewards merge in task order.
    for (std::size_t start = 0; start < tasks.size(); start += p) {
        const auto end = std::min(tasks.size(), start + p);
        std::vector<TaskOutcome> outcomes;
        if (p == 1) {
            outcomes.push_back(solve_one(controller, tasks[start], eta));
        } else {
            std::vector<std::future<TaskOutcome>> futures;
            for (auto i = start; i < end; ++i) {
                futures.push_back(std::async(std::launch::async, solve_one, std::cref(controller),
                                             std::cref(tasks[i]), eta));
            }
            for (auto& f : futures) outcomes.push_back(f.get());
        }
        for (auto& o : outcomes) {
            for (const auto& r : o.rewards) {
                eta = update_performance(std::move(eta), r.debater_index, r.reward, config.controller.performance_beta);
            }
            rows.push_back(std::move(o.row));
            std::move(o.events.begin(), o.events.end(), std::back_inserter(result.events));
            std::move(o.transcript.begin(), o.transcript.end(), std::back_inserter(result.transcript));
        }
    }

    result.metrics = compute_metrics(std::move(rows), options.strict_infra);
    result.debater_performance = std::move(eta);
    man.finished_at = utc_now();
    return result;
}

void write_run(const std::filesystem::path& dir, const BenchmarkResult& result) {
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::string& body) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw InfrastructureError("cannot write " + (dir / name).string());
        out << body;
    };
    write("manifest.json", result.manifest.to_json().dump(2) + "\n");
    write("metrics.json", result.metrics.to_json().dump(2) + "\n");
    write("timing.json", result.metrics.timing_json().dump(2) + "\n");
    std::string events;
    for (const auto& e : result.events) events += event_json(e).dump() + "\n";
    write("events.jsonl", events);
    std::string transcript;
    for (const auto& t : result.transcript) transcript += t.dump() + "\n";
    write("transcript.jsonl", transcript);
}

Metrics load_run_metrics(const std::filesystem::path& dir) {
    auto read = [&](const char* name) -> std::optional<json> {
        std::ifstream in(dir / name);
        if (!in) return std::nullopt;
        try {
            return json::parse(in);
        } catch (const json::exception& e) {
            throw ParseError((dir / name).string() + ": " + e.what());
        }
    };
    auto metrics = read("metrics.json");
    if (!metrics) throw ParseError("no metrics.json in " + dir.string());
    auto timing = read("timing.json");
    return Metrics::from_json(*metrics, timing ? &*timing : nullptr);
}

std::map<std::string, MetricSummary> aggregate_runs(const std::vector<Metrics>& runs) {
    if (runs.size() < 2) throw PreconditionError("aggregation needs at least two runs");
    auto ids = [](const Metrics& m) {
        std::vector<std::string> v;
        for (const auto& r : m.rows) v.push_back(r.task_id);
        std::sort(v.begin(), v.end());
        return v;
    };
    const auto reference = ids(runs.front());
    for (const auto& m : runs) {
        if (ids(m) != reference) throw ValidationError("runs cover different task sets");
    }
    std::set<int> levels;
    for (const auto& m : runs) {
        for (const auto& [lvl, _] : m.per_level_counts) levels.insert(lvl);
    }
    std::map<std::string, std::vector<double>> values;
    for (const auto& m : runs) {
        values["pass_at_1"].push_back(m.pass_at_1);
        values["tokens_total"].push_back(static_cast<double>(m.tokens_total));
        values["tokens_per_task_avg"].push_back(m.tokens_per_task_avg);
        values["latency_per_task_avg"].push_back(m.latency_per_task_avg);
        for (int lvl : levels) {
            auto it = m.per_level_counts.find(lvl);
            values["level_" + std::to_string(lvl)].push_back(it == m.per_level_counts.end() ? 0.0 : it->second);
        }
    }
    std::map<std::string, MetricSummary> out;
    for (const auto& [name, xs] : values) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(xs.size());
        out[name] = MetricSummary{mean, std::sqrt(var)};
    }
    return out;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "table") return ReportFormat::table;
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw ValidationError("unknown report format '" + std::string(name) + "'");
}

std::string report(const Metrics& m, ReportFormat format) {
    switch (format) {
    case ReportFormat::json:
        return m.to_json().dump(2) + "\n";
    case ReportFormat::csv: {
        std::string out = "task_id,passed,final_level,tokens,wall_ms\n";
        for (const auto& r : m.rows) {
            out += fmt::format("{},{},{},{},{}\n", r.task_id, r.passed ? 1 : 0, r.final_level, r.tokens, r.wall_ms);
        }
        return out;
    }
    case ReportFormat::table: {
        const auto n = m.rows.size();
        std::string out = fmt::format("{:<10} {:>8} {:>8}\n", "Level", "Tasks", "Share");
        for (int lvl = 1; lvl <= 4; ++lvl) {
            const auto it = m.per_level_counts.find(lvl);
            const int c = it == m.per_level_counts.end() ? 0 : it->second;
            out += fmt::format("{:<10} {:>8} {:>7.1f}%\n", fmt::format("Level {}", lvl), c,
                               n == 0 ? 0.0 : 100.0 * c / static_cast<double>(n));
        }
        if (m.errored > 0) out += fmt::format("{:<10} {:>8}\n", "Errored", m.errored);
        out += fmt::format("{:<10} {:>8}\n", "Total", n);
        out += fmt::format("Pass@1: {:.4f}\n", m.pass_at_1);
        out += fmt::format("Tokens: {} total, {:.1f} per task\n", m.tokens_total, m.tokens_per_task_avg);
        out += fmt::format("Latency: {:.1f} ms per task\n", m.latency_per_task_avg);
        return out;
    }
    }
    return {};
}

} // namespace semag
