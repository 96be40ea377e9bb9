#include <httplib.h>

#include "semag/http_backend.hpp"

#include <cstdlib>

namespace semag {

namespace {

struct Endpoint {
    std::string base; ///< scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw BackendError("malformed endpoint '" + url + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

HttpChatBackend::HttpChatBackend(std::chrono::seconds timeout) : timeout_(timeout) {}

nlohmann::json HttpChatBackend::build_payload(const BackendDescriptor& backend, const std::vector<Message>& messages) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) msgs.push_back({{"role", to_string(m.speaker)}, {"content", m.text}});
    return {{"model", backend.model_id},
            {"messages", std::move(msgs)},
            {"temperature", backend.temperature},
            {"max_tokens", backend.max_output_tokens}};
}

ChatReply HttpChatBackend::parse_response(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("unparseable response body: ") + e.what(), 200, false);
    }
    ChatReply reply;
    try {
        const auto& choice = j.at("choices").at(0);
        reply.text = choice.at("message").at("content").get<std::string>();
        if (auto fr = choice.find("finish_reason"); fr != choice.end() && fr->is_string()) {
            reply.truncated = fr->get<std::string>() == "length";
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("response lacks choices[0].message.content: ") + e.what(), 200, false);
    }
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
        reply.usage = TokenUsage::of(u->value("prompt_tokens", std::int64_t{0}),
                                     u->value("completion_tokens", std::int64_t{0}));
    }
    return reply;
}

ChatReply HttpChatBackend::send(const ChatRequest& request) {
    const auto ep = split_endpoint(request.backend.endpoint);
    httplib::Client client(ep.base);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers headers;
    if (!request.backend.auth_env_var.empty()) {
        if (const char* key = std::getenv(request.backend.auth_env_var.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const auto payload = build_payload(request.backend, request.messages).dump();
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
        throw TransportError("transport error: " + httplib::to_string(res.error()), 0, true);
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransportError("HTTP " + std::to_string(res->status), res->status, true);
    }
    if (res->status != 200) {
        throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200), res->status,
                             false);
    }
    return parse_response(res->body);
}

} // namespace semag
