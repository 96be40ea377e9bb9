#include "semag/errors.hpp"
#include "semag/extract.hpp"
#include "semag/gateway.hpp"
#include "semag/prompts.hpp"

#include <doctest.h>

using namespace semag;

TEST_CASE("extract_code takes the first closed program fence") {
    CHECK(extract_code("intro\n```python\nprint(1)\n```\n```python\nprint(2)\n```") == "print(1)");
    CHECK(extract_code("```plan\n1. x\n```\n```\nrun()\n```") == "run()");
    CHECK_THROWS_AS(extract_code("```python\nprint(1)\n"), ExtractionError);
    try {
        extract_code("nothing");
    } catch (const ExtractionError& e) {
        CHECK(e.raw() == "nothing");
    }
}

TEST_CASE("verdict and plan blocks") {
    CHECK(extract_verdict("VERDICT: accept\n") == PlanVerdict::accept);
    CHECK(extract_verdict("verdict: Revise") == PlanVerdict::revise);
    CHECK_THROWS_AS(extract_verdict("looks fine"), ExtractionError);
    CHECK(parse_steps("1. Read\n2) Compute\n- Print") == std::vector<std::string>{"Read", "Compute", "Print"});
    CHECK(extract_text_block("Plan:\n1. a\n2. b\n", BlockKind::plan).find("1. a") != std::string::npos);
}

TEST_CASE("score lists") {
    const auto s = extract_scores("```scores\nalpha: 0.5\nbeta: 1\n```");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == std::pair<std::string, double>{"alpha", 0.5});
}

TEST_CASE("fields") {
    CHECK(find_field("MODEL: gamma\nRATIONALE: best", "MODEL") == std::optional<std::string>("gamma"));
    CHECK_FALSE(find_field("nothing", "MODEL").has_value());
}

TEST_CASE("every role renders with its required slots") {
    CHECK_NOTHROW(check_templates());
    for (auto role : kAllRoles) {
        Context ctx;
        for (const auto& slot : required_slots(role)) ctx[slot] = "value-" + slot;
        const auto msgs = render_prompt(role, ctx);
        REQUIRE(msgs.size() == 2);
        for (const auto& slot : required_slots(role)) {
            CHECK((msgs[0].text + msgs[1].text).find("value-" + slot) != std::string::npos);
        }
    }
}

TEST_CASE("missing slot and unknown role") {
    CHECK_THROWS_AS(render_prompt(AgentRole::coder, Context{{"statement", "s"}}), TemplateError);
    CHECK_THROWS_AS(render_prompt("poet", Context{}), TemplateError);
}

TEST_CASE("slot values are not re-expanded") {
    Context ctx{{"statement", "{{examples}}"}, {"examples", "E"}, {"language", "python"}};
    const auto msgs = render_prompt(AgentRole::coder, ctx);
    CHECK(msgs[1].text.find("{{examples}}") != std::string::npos);
}
