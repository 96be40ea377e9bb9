#include "semag/runner.hpp"

#include "semag/errors.hpp"
#include "semag/mock_backend.hpp"
#include "semag/text.hpp"

#include <fstream>
#include <sstream>

namespace semag {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

EngineConfig load_config_or_default(const std::string& path) {
    return path.empty() ? EngineConfig{} : EngineConfig::load(path);
}

BenchmarkResult solve_dataset(const SolveRequest& a) {
    const auto cfg = load_config_or_default(a.config);
    IngestOptions ingest;
    ingest.seed = a.seed;
    const auto tasks = load_dataset(a.dataset, parse_schema_name(a.schema), ingest);

    Gateway gateway(cfg.retry);
    BackendDescriptor backend;
    if (is_mock_model(a.backend)) {
        register_mock_backends(gateway, load_scenario_book(a.dataset), a.seed);
        backend = cfg.backend(a.backend, "mock://local");
    } else if (!a.registry.empty()) {
        const auto registry = ModelRegistry::load(a.registry);
        const auto* entry = registry.find(a.backend);
        if (!entry) throw ValidationError("backend '" + a.backend + "' is not in the registry");
        backend = cfg.backend(entry->model_id, entry->endpoint, entry->auth_env_var);
    } else if (!a.endpoint.empty()) {
        backend = cfg.backend(a.backend, a.endpoint, a.auth_env);
    } else {
        throw ValidationError("backend '" + a.backend + "' needs an endpoint or a registry");
    }

    ExecutorConfig exec_cfg = ExecutorConfig::defaults();
    exec_cfg.max_parallel_executions = cfg.max_parallel_executions;
    const Executor executor(exec_cfg);

    DatasetInfo info{a.dataset, a.schema, text::sha256_hex(read_file(a.dataset))};
    BenchmarkOptions opts{a.parallel, a.seed, a.strict_infra};
    return run_benchmark(tasks, info, cfg, gateway, backend, executor, opts);
}

SelectionReport select_from_files(const SelectRequest& a) {
    auto cfg = load_config_or_default(a.config);
    if (a.n_links > 0) cfg.selection.n_links = a.n_links;
    cfg.selection.validate();
    const auto registry = ModelRegistry::load(a.registry);
    if (registry.empty()) throw ValidationError("registry is empty");
    const std::string profile = text::trim(read_file(a.profile_path));

    std::vector<Task> sample;
    ScenarioBook book;
    if (!a.sample.empty()) {
        IngestOptions ingest;
        ingest.seed = a.seed;
        sample = load_dataset(a.sample, parse_schema_name(a.sample_schema), ingest);
        book = load_scenario_book(a.sample);
    }

    Gateway gateway(cfg.retry);
    for (const auto& e : registry.entries()) {
        if (e.endpoint.starts_with("mock://")) register_scenario_model(gateway, e.model_id, book, a.seed);
    }
    BackendDescriptor selector;
    if (a.selector_backend.empty() || a.selector_backend == registry.default_entry().model_id) {
        const auto& d = registry.default_entry();
        selector = cfg.backend(d.model_id, d.endpoint, d.auth_env_var);
    } else if (is_mock_model(a.selector_backend)) {
        register_mock_backends(gateway, book, a.seed);
        selector = cfg.backend(a.selector_backend, "mock://local");
    } else {
        const auto* e = registry.find(a.selector_backend);
        if (!e) throw ValidationError("selector backend '" + a.selector_backend + "' is not in the registry");
        selector = cfg.backend(e->model_id, e->endpoint, e->auth_env_var);
    }

    std::unique_ptr<SearchClient> client;
    if (a.fixture == "live") {
        if (a.search_endpoint.empty()) throw ValidationError("live search needs a search endpoint");
        client = std::make_unique<HttpSearchClient>(a.search_endpoint, a.search_auth_env, cfg.retry);
    } else {
        client = std::make_unique<FixtureSearchClient>(FixtureSearchClient::load(a.fixture));
    }

    const Executor executor;
    SelectionInputs in;
    in.config = cfg.selection;
    in.task_profile = profile;
    in.registry = &registry;
    in.selector_backend = selector;
    in.sample_tasks = sample;
    in.search_client = client.get();
    return select_backbone(in, gateway, executor, cfg.limits);
}

} // namespace semag
