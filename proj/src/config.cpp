#include "semag/config.hpp"

#include "semag/errors.hpp"

#include <fstream>
#include <set>

namespace semag {

namespace {

using nlohmann::json;

const json& section(const json& doc, const char* name, const std::set<std::string>& allowed) {
    static const json empty = json::object();
    auto it = doc.find(name);
    if (it == doc.end()) return empty;
    if (!it->is_object()) throw ValidationError(std::string("config section '") + name + "' must be an object");
    for (const auto& [key, _] : it->items()) {
        if (!allowed.count(key)) throw ValidationError(std::string("unknown config key '") + name + "." + key + "'");
    }
    return *it;
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(std::string("config key '") + key + "': " + e.what());
        }
    }
}

} // namespace

EngineConfig EngineConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("config must be an object");
    static const std::set<std::string> top{"controller", "backend", "selection", "limits", "executor", "gateway"};
    for (const auto& [key, _] : doc.items()) {
        if (!top.count(key)) throw ValidationError("unknown config section '" + key + "'");
    }
    EngineConfig cfg;

    const auto& c = section(doc, "controller",
                            {"m_plan", "m_try", "m_debug", "n_debater", "tau_w", "performance_beta", "k_pass", "delta0",
                             "lambda", "t_max"});
    read(c, "m_plan", cfg.controller.m_plan);
    read(c, "m_try", cfg.controller.m_try);
    read(c, "m_debug", cfg.controller.m_debug);
    read(c, "n_debater", cfg.controller.n_debater);
    read(c, "tau_w", cfg.controller.tau_w);
    read(c, "performance_beta", cfg.controller.performance_beta);
    read(c, "k_pass", cfg.controller.k_pass);
    read(c, "delta0", cfg.controller.transition.delta0);
    read(c, "lambda", cfg.controller.transition.lambda);
    cfg.controller.transition.t_max = cfg.controller.m_debug;
    read(c, "t_max", cfg.controller.transition.t_max);

    const auto& b = section(doc, "backend", {"temperature", "max_output_tokens"});
    read(b, "temperature", cfg.temperature);
    read(b, "max_output_tokens", cfg.max_output_tokens);

    const auto& s = section(doc, "selection", {"n_selectors", "n_links", "theta_r", "recency_days", "sample_size"});
    read(s, "n_selectors", cfg.selection.n_selectors);
    read(s, "n_links", cfg.selection.n_links);
    read(s, "theta_r", cfg.selection.theta_r);
    read(s, "recency_days", cfg.selection.recency_days);
    read(s, "sample_size", cfg.selection.sample_size);

    const auto& l = section(doc, "limits", {"wall_time_ms", "max_output_bytes", "max_processes"});
    read(l, "wall_time_ms", cfg.limits.wall_time_ms);
    read(l, "max_output_bytes", cfg.limits.max_output_bytes);
    read(l, "max_processes", cfg.limits.max_processes);

    const auto& e = section(doc, "executor", {"max_parallel_executions"});
    read(e, "max_parallel_executions", cfg.max_parallel_executions);

    const auto& g = section(doc, "gateway", {"max_retries", "initial_backoff_ms", "multiplier"});
    read(g, "max_retries", cfg.retry.max_retries);
    std::int64_t backoff = cfg.retry.initial_backoff.count();
    read(g, "initial_backoff_ms", backoff);
    cfg.retry.initial_backoff = std::chrono::milliseconds(backoff);
    read(g, "multiplier", cfg.retry.multiplier);

    cfg.validate();
    return cfg;
}

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return from_json(doc);
}

json EngineConfig::to_json() const {
    const auto& c = controller;
    return {{"controller",
             {{"m_plan", c.m_plan},
              {"m_try", c.m_try},
              {"m_debug", c.m_debug},
              {"n_debater", c.n_debater},
              {"tau_w", c.tau_w},
              {"performance_beta", c.performance_beta},
              {"k_pass", c.k_pass},
              {"delta0", c.transition.delta0},
              {"lambda", c.transition.lambda},
              {"t_max", c.transition.t_max}}},
            {"backend", {{"temperature", temperature}, {"max_output_tokens", max_output_tokens}}},
            {"selection",
             {{"n_selectors", selection.n_selectors},
              {"n_links", selection.n_links},
              {"theta_r", selection.theta_r},
              {"recency_days", selection.recency_days},
              {"sample_size", selection.sample_size}}},
            {"limits",
             {{"wall_time_ms", limits.wall_time_ms},
              {"max_output_bytes", limits.max_output_bytes},
              {"max_processes", limits.max_processes}}},
            {"executor", {{"max_parallel_executions", max_parallel_executions}}},
            {"gateway",
             {{"max_retries", retry.max_retries},
              {"initial_backoff_ms", retry.initial_backoff.count()},
              {"multiplier", retry.multiplier}}}};
}

BackendDescriptor EngineConfig::backend(const std::string& model_id, const std::string& endpoint,
                                        const std::string& auth_env_var) const {
    BackendDescriptor d;
    d.model_id = model_id;
    d.endpoint = endpoint;
    d.auth_env_var = auth_env_var;
    d.temperature = temperature;
    d.max_output_tokens = max_output_tokens;
    return d;
}

void EngineConfig::validate() const {
    try {
        controller.validate();
        selection.validate();
        limits.validate();
    } catch (const PreconditionError& e) {
        throw ValidationError(e.what());
    }
    if (temperature < 0.0 || temperature > 2.0) throw ValidationError("temperature must lie in [0,2]");
    if (max_output_tokens < 1) throw ValidationError("max_output_tokens must be positive");
    if (max_parallel_executions < 1) throw ValidationError("max_parallel_executions must be positive");
    if (retry.max_retries < 0 || retry.initial_backoff.count() < 0 || retry.multiplier < 1.0) {
        throw ValidationError("invalid retry policy");
    }
}

} // namespace semag
