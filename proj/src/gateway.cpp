#include "semag/gateway.hpp"

#include "semag/http_backend.hpp"
#include "semag/prompts.hpp"
#include "semag/text.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <thread>

namespace semag {

namespace {

constexpr std::array<std::pair<AgentRole, std::string_view>, kAllRoles.size()> kRoleNames = {{
    {AgentRole::planner, "planner"},
    {AgentRole::plan_verifier, "plan-verifier"},
    {AgentRole::coder, "coder"},
    {AgentRole::embed_trace, "embed-trace"},
    {AgentRole::explainer, "explainer"},
    {AgentRole::suggestor, "suggestor"},
    {AgentRole::debugger, "debugger"},
    {AgentRole::debater, "debater"},
    {AgentRole::decider, "decider"},
    {AgentRole::keyword_gen, "keyword-gen"},
    {AgentRole::link_selector, "link-selector"},
    {AgentRole::summarizer, "summarizer"},
    {AgentRole::llm_selector, "llm-selector"},
    {AgentRole::llm_decider, "llm-decider"},
    {AgentRole::model_matcher, "model-matcher"},
}};

} // namespace

std::string_view to_string(AgentRole role) {
    for (const auto& [r, name] : kRoleNames) {
        if (r == role) return name;
    }
    return "unknown";
}

AgentRole parse_role(std::string_view name) {
    for (const auto& [r, n] : kRoleNames) {
        if (n == name) return r;
    }
    throw TemplateError("unknown agent role '" + std::string(name) + "'");
}

std::string_view to_string(Speaker s) {
    switch (s) {
    case Speaker::system: return "system";
    case Speaker::user: return "user";
    case Speaker::assistant: return "assistant";
    }
    return "user";
}

void BackendDescriptor::validate() const {
    if (model_id.empty()) throw PreconditionError("backend model_id is empty");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw PreconditionError("temperature must lie in [0,2]");
    if (max_output_tokens <= 0) throw PreconditionError("max_output_tokens must be positive");
}

std::int64_t estimate_tokens(std::string_view text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::int64_t estimate_tokens(const std::vector<Message>& messages) {
    std::size_t chars = 0;
    for (const auto& m : messages) chars += m.text.size();
    return static_cast<std::int64_t>((chars + 3) / 4);
}

Gateway::Gateway(RetryPolicy policy)
    : policy_(policy), sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

void Gateway::register_backend(const std::string& model_id, std::shared_ptr<ChatBackend> backend) {
    std::lock_guard lock(mu_);
    backends_[model_id] = std::move(backend);
}

void Gateway::set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

std::shared_ptr<ChatBackend> Gateway::resolve(const BackendDescriptor& backend) {
    std::lock_guard lock(mu_);
    if (auto it = backends_.find(backend.model_id); it != backends_.end()) return it->second;
    if (backend.endpoint.starts_with("http://") || backend.endpoint.starts_with("https://")) {
        auto http = std::make_shared<HttpChatBackend>();
        backends_[backend.model_id] = http;
        return http;
    }
    throw BackendError("no backend registered for model '" + backend.model_id + "' (endpoint '" +
                       backend.endpoint + "')");
}

ChatExchange Gateway::complete(const BackendDescriptor& backend, AgentRole role, const Context& context) {
    backend.validate();
    ChatExchange ex;
    ex.role = role;
    ex.model_id = backend.model_id;
    ex.messages = render_prompt(role, context);
    auto impl = resolve(backend);

    const ChatRequest request{backend, role, context, ex.messages};
    auto delay = policy_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            ChatReply reply = impl->send(request);
            ex.response = std::move(reply.text);
            ex.truncated = reply.truncated;
            ex.usage = reply.usage ? TokenUsage::of(reply.usage->prompt, reply.usage->completion)
                                   : TokenUsage::of(estimate_tokens(ex.messages), estimate_tokens(ex.response));
            ex.retries = attempt;
            break;
        } catch (const TransportError& e) {
            if (!e.retryable() || attempt >= policy_.max_retries) {
                throw BackendError(std::string("backend '") + backend.model_id + "' failed after " +
                                   std::to_string(attempt + 1) + " attempt(s): " + e.what());
            }
            spdlog::warn("{} call to {} failed ({}), retrying in {} ms", to_string(role), backend.model_id,
                         e.what(), delay.count());
            sleeper_(delay);
            delay = std::chrono::milliseconds(
                static_cast<std::int64_t>(std::llround(static_cast<double>(delay.count()) * policy_.multiplier)));
        }
    }
    if (ex.response.empty()) {
        throw BackendError("backend '" + backend.model_id + "' returned an empty response");
    }
    if (ex.truncated) spdlog::warn("{} response from {} hit max_output_tokens", to_string(role), backend.model_id);
    return ex;
}

AgentSession::AgentSession(Gateway& gateway, BackendDescriptor backend, std::string task_id)
    : gateway_(&gateway), backend_(std::move(backend)), task_id_(std::move(task_id)) {}

const ChatExchange& AgentSession::call(AgentRole role, Context context) {
    context["task_id"] = task_id_;
    exchanges_.push_back(gateway_->complete(backend_, role, context));
    ledger_ += exchanges_.back().usage;
    return exchanges_.back();
}

std::size_t AgentSession::count(AgentRole role) const {
    std::size_t n = 0;
    for (const auto& e : exchanges_) n += e.role == role ? 1 : 0;
    return n;
}

nlohmann::json transcript_record(const ChatExchange& exchange, std::string_view task_id) {
    std::string joined;
    for (const auto& m : exchange.messages) {
        joined += to_string(m.speaker);
        joined += '\n';
        joined += m.text;
        joined += '\n';
    }
    nlohmann::json j;
    if (!task_id.empty()) j["task_id"] = task_id;
    j["role"] = to_string(exchange.role);
    j["backend"] = exchange.model_id;
    j["message_digest"] = text::sha256_hex(joined);
    j["response"] = exchange.response;
    j["usage"] = {{"prompt", exchange.usage.prompt},
                  {"completion", exchange.usage.completion},
                  {"total", exchange.usage.total}};
    j["retries"] = exchange.retries;
    j["truncated"] = exchange.truncated;
    return j;
}

} // namespace semag
