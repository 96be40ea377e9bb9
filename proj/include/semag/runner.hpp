#pragma once

// File-driven entry points shared by the CLI and the Python module.

#include "semag/bench.hpp"
#include "semag/selfevolve.hpp"

#include <string>

namespace semag {

struct SolveRequest {
    std::string dataset;
    std::string schema = "generic";
    std::string config; ///< empty: built-in defaults
    std::string backend = "mock-scenario";
    std::string endpoint;
    std::string auth_env;
    std::string registry;
    int parallel = 1;
    std::uint64_t seed = 0;
    bool strict_infra = false;
};

// Mock model ids are served from the dataset's scenario fields; anything else
// is resolved through the registry or an explicit endpoint.
BenchmarkResult solve_dataset(const SolveRequest& request);

struct SelectRequest {
    std::string profile_path;
    std::string registry;
    std::string fixture; ///< corpus JSON, or "live"
    std::string search_endpoint;
    std::string search_auth_env;
    std::string config;
    std::string selector_backend; ///< empty: registry default
    std::string sample;
    std::string sample_schema = "generic";
    std::uint64_t seed = 0;
    int n_links = 0; ///< 0: take it from the config
};

SelectionReport select_from_files(const SelectRequest& request);

EngineConfig load_config_or_default(const std::string& path);

} // namespace semag
