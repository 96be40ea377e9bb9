#pragma once

// Engine configuration file: controller budgets, backend sampling, selection,
// resource limits and retry policy, with every key optional.

#include "semag/controller.hpp"
#include "semag/executor.hpp"
#include "semag/gateway.hpp"
#include "semag/selfevolve.hpp"

#include <json.hpp>

#include <filesystem>

namespace semag {

struct EngineConfig {
    ControllerConfig controller;
    double temperature = 0.1;
    int max_output_tokens = 2048;
    SelectionConfig selection;
    ResourceLimits limits;
    int max_parallel_executions = 4;
    RetryPolicy retry;

    // Unknown keys are rejected so that typos do not silently fall back to defaults.
    static EngineConfig from_json(const nlohmann::json& doc);
    static EngineConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    BackendDescriptor backend(const std::string& model_id, const std::string& endpoint = {},
                              const std::string& auth_env_var = {}) const;
    void validate() const;
};

} // namespace semag
