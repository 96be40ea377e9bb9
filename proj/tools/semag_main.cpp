// semag command-line entry point: solve, select-backbone, report, aggregate.

#include "semag/bench.hpp"
#include "semag/runner.hpp"
#include "semag/errors.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfra = 2;

int run_solve(const semag::SolveRequest& req, const std::string& out) {
    const auto result = semag::solve_dataset(req);
    semag::write_run(out, result);
    std::cout << semag::report(result.metrics, semag::ReportFormat::table);
    std::cout << "run " << result.manifest.run_id << " written to " << out << "\n";
    return result.metrics.errored > 0 ? kExitInfra : kExitOk;
}

int run_select(const semag::SelectRequest& req, const std::string& out) {
    const auto rep = semag::select_from_files(req);
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "selection.json") << rep.to_json().dump(2) << "\n";
    std::cout << "selected " << rep.model_id << (rep.fell_back ? " (registry default)" : "") << "\n";
    for (const auto& [id, score] : rep.tally.ranked) std::cout << "  " << id << " " << score << "\n";
    std::cout << "tokens " << rep.tokens_total << ", latency " << rep.latency_ms << " ms\n";
    return kExitOk;
}

int run_report(const std::string& dir, const std::string& format) {
    const auto metrics = semag::load_run_metrics(dir);
    std::cout << semag::report(metrics, semag::parse_report_format(format));
    return kExitOk;
}

int run_aggregate(const std::vector<std::string>& dirs) {
    std::vector<semag::Metrics> runs;
    for (const auto& d : dirs) runs.push_back(semag::load_run_metrics(d));
    const auto summary = semag::aggregate_runs(runs);
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, s] : summary) out[name] = {{"mean", s.mean}, {"std", s.stddev}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semag: multi-level agentic code generation"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    semag::SolveRequest solve;
    std::string solve_out;
    auto* s = app.add_subcommand("solve", "Run the controller over a dataset");
    s->add_option("--dataset", solve.dataset, "JSONL dataset")->required()->check(CLI::ExistingFile);
    s->add_option("--schema", solve.schema, "humaneval or generic");
    s->add_option("--config", solve.config, "Engine config JSON")->check(CLI::ExistingFile);
    s->add_option("--backend", solve.backend, "Model id (mock-scenario, mock-oracle, mock-broken or a real model)");
    s->add_option("--endpoint", solve.endpoint, "Chat-completion endpoint for a real model");
    s->add_option("--auth-env", solve.auth_env, "Env var holding the API key");
    s->add_option("--registry", solve.registry, "Model registry used to resolve --backend")->check(CLI::ExistingFile);
    s->add_option("--parallel", solve.parallel, "Tasks solved concurrently")->check(CLI::PositiveNumber);
    s->add_option("--seed", solve.seed, "RNG seed");
    s->add_option("--out", solve_out, "Run directory")->required();
    s->add_flag("--strict-infra", solve.strict_infra, "Exclude errored tasks from the Pass@1 denominator");

    semag::SelectRequest sel;
    std::string sel_out;
    auto* b = app.add_subcommand("select-backbone", "Pick a backbone model from search evidence");
    b->add_option("--profile", sel.profile_path, "Task profile text file")->required()->check(CLI::ExistingFile);
    b->add_option("--registry", sel.registry, "Model registry JSON")->required()->check(CLI::ExistingFile);
    b->add_option("--fixture", sel.fixture, "Search fixture JSON, or 'live'")->required();
    b->add_option("--search-endpoint", sel.search_endpoint, "Live search URL with a {query} placeholder");
    b->add_option("--search-auth-env", sel.search_auth_env, "Env var holding the search API key");
    b->add_option("--config", sel.config, "Engine config JSON")->check(CLI::ExistingFile);
    b->add_option("--selector-backend", sel.selector_backend, "Model serving the selection agents");
    b->add_option("--sample", sel.sample, "Dataset for performance sampling")->check(CLI::ExistingFile);
    b->add_option("--sample-schema", sel.sample_schema, "Schema of the sample dataset");
    b->add_option("--seed", sel.seed, "RNG seed");
    b->add_option("--out", sel_out, "Output directory")->required();

    std::string run_dir;
    std::string format = "table";
    auto* r = app.add_subcommand("report", "Render a finished run");
    r->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
    r->add_option("--format", format, "table, csv or json")->check(CLI::IsMember({"table", "csv", "json"}));

    std::vector<std::string> agg_dirs;
    auto* g = app.add_subcommand("aggregate", "Mean and std over repeated runs");
    g->add_option("--runs", agg_dirs, "Run directories")->required()->expected(2, -1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    try {
        if (*s) return run_solve(solve, solve_out);
        if (*b) return run_select(sel, sel_out);
        if (*r) return run_report(run_dir, format);
        if (*g) return run_aggregate(agg_dirs);
    } catch (const semag::InfrastructureError& e) {
        spdlog::error("{}", e.what());
        return kExitInfra;
    } catch (const semag::BackendError& e) {
        spdlog::error("{}", e.what());
        return kExitInfra;
    } catch (const semag::Error& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitInfra;
    }
    return kExitUsage;
}
