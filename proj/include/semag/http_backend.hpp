#pragma once

#include "semag/gateway.hpp"

#include <chrono>
#include <string>

namespace semag {

// OpenAI-style chat-completion endpoint:
//   POST {model, messages[{role, content}], temperature, max_tokens}
//   -> {choices[0].message.content, usage{prompt_tokens, completion_tokens}}
// The bearer token is read from the descriptor's auth_env_var at send time.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(std::chrono::seconds timeout = std::chrono::seconds(120));

    ChatReply send(const ChatRequest& request) override;

    static nlohmann::json build_payload(const BackendDescriptor& backend, const std::vector<Message>& messages);
    static ChatReply parse_response(const std::string& body);

private:
    std::chrono::seconds timeout_;
};

} // namespace semag
