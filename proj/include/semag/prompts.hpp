#pragma once

// Role prompt templates. Each template declares the context slots it needs and
// asks for fenced, machine-readable output (see extract.hpp).

#include "semag/gateway.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semag {

std::vector<Message> render_prompt(AgentRole role, const Context& context);
std::vector<Message> render_prompt(std::string_view role_name, const Context& context);

std::vector<std::string> required_slots(AgentRole role);

// Throws TemplateError naming any role without a usable template.
void check_templates();

} // namespace semag
