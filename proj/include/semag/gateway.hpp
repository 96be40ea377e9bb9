#pragma once

// Chat-completion gateway shared by every agent role. Backends are looked up
// by model id; HTTP endpoints are created on demand, mocks are registered.

#include "semag/errors.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace semag {

enum class AgentRole {
    planner,
    plan_verifier,
    coder,
    embed_trace,
    explainer,
    suggestor,
    debugger,
    debater,
    decider,
    keyword_gen,
    link_selector,
    summarizer,
    llm_selector,
    llm_decider,
    model_matcher,
};

inline constexpr std::array kAllRoles = {
    AgentRole::planner,     AgentRole::plan_verifier, AgentRole::coder,        AgentRole::embed_trace,
    AgentRole::explainer,   AgentRole::suggestor,     AgentRole::debugger,     AgentRole::debater,
    AgentRole::decider,     AgentRole::keyword_gen,   AgentRole::link_selector, AgentRole::summarizer,
    AgentRole::llm_selector, AgentRole::llm_decider,  AgentRole::model_matcher,
};

std::string_view to_string(AgentRole role);
AgentRole parse_role(std::string_view name); ///< TemplateError for unknown names

struct BackendDescriptor {
    std::string model_id;
    std::string endpoint;
    double temperature = 0.1;
    int max_output_tokens = 2048;
    std::string auth_env_var;

    void validate() const;
};

enum class Speaker { system, user, assistant };
std::string_view to_string(Speaker s);

struct Message {
    Speaker speaker = Speaker::user;
    std::string text;

    bool operator==(const Message&) const = default;
};

using Context = std::map<std::string, std::string>;

struct TokenUsage {
    std::int64_t prompt = 0;
    std::int64_t completion = 0;
    std::int64_t total = 0;

    static TokenUsage of(std::int64_t prompt, std::int64_t completion) {
        return {prompt, completion, prompt + completion};
    }
    TokenUsage& operator+=(const TokenUsage& o) {
        prompt += o.prompt;
        completion += o.completion;
        total += o.total;
        return *this;
    }
    bool operator==(const TokenUsage&) const = default;
};

// ceil(characters / 4).
std::int64_t estimate_tokens(std::string_view text);
std::int64_t estimate_tokens(const std::vector<Message>& messages);

struct ChatExchange {
    AgentRole role = AgentRole::coder;
    std::string model_id;
    std::vector<Message> messages;
    std::string response;
    TokenUsage usage;
    int retries = 0;
    bool truncated = false;
};

struct ChatRequest {
    const BackendDescriptor& backend;
    AgentRole role;
    const Context& context;
    const std::vector<Message>& messages;
};

struct ChatReply {
    std::string text;
    std::optional<TokenUsage> usage; ///< estimated by the gateway when absent
    bool truncated = false;
};

// Raised by backends. Retryable failures (timeouts, 429, 5xx) are retried by the gateway.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int status, bool retryable)
        : Error(what), status_(status), retryable_(retryable) {}
    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return retryable_; }

private:
    int status_;
    bool retryable_;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatReply send(const ChatRequest& request) = 0;
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
};

class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit Gateway(RetryPolicy policy = {});

    void register_backend(const std::string& model_id, std::shared_ptr<ChatBackend> backend);
    void set_sleeper(Sleeper sleeper);

    ChatExchange complete(const BackendDescriptor& backend, AgentRole role, const Context& context);

    const RetryPolicy& retry_policy() const noexcept { return policy_; }

private:
    std::shared_ptr<ChatBackend> resolve(const BackendDescriptor& backend);

    RetryPolicy policy_;
    Sleeper sleeper_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<ChatBackend>> backends_;
};

// Binds a gateway to one backend for one task and meters every exchange.
// Not thread-safe; owned by a single worker.
class AgentSession {
public:
    AgentSession(Gateway& gateway, BackendDescriptor backend, std::string task_id);

    // Injects "task_id" into the context before rendering.
    const ChatExchange& call(AgentRole role, Context context);

    const std::vector<ChatExchange>& exchanges() const noexcept { return exchanges_; }
    const TokenUsage& ledger() const noexcept { return ledger_; }
    const BackendDescriptor& backend() const noexcept { return backend_; }
    std::size_t count(AgentRole role) const;

private:
    Gateway* gateway_;
    BackendDescriptor backend_;
    std::string task_id_;
    std::vector<ChatExchange> exchanges_;
    TokenUsage ledger_;
};

// One transcript line: role, backend, message digest, response, usage.
nlohmann::json transcript_record(const ChatExchange& exchange, std::string_view task_id = {});

} // namespace semag
