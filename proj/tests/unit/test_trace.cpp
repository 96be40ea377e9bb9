#include "oracles.hpp"

#include "semag/errors.hpp"
#include "semag/mock_backend.hpp"
#include "semag/trace.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace semag;
using semag::testing::oracle_edit_distance;
using semag::testing::random_trace;

namespace {

Trace trace_of(std::vector<TraceEvent> ev) { return Trace{std::move(ev), 0}; }

TraceEvent ev(int line, std::string name, std::string value) { return TraceEvent{line, std::move(name), std::move(value)}; }

} // namespace

TEST_CASE("trace line grammar round-trips escaped values") {
    const TraceEvent e{12, "acc", "a|b\nc\\d"};
    const auto line = format_trace_line(e);
    CHECK(line == "SEMAG_TRACE|line=12|acc=a\\pb\\nc\\\\d");
    const auto back = parse_trace_line(line);
    REQUIRE(back.has_value());
    CHECK(*back == e);
}

TEST_CASE("malformed trace lines are skipped and counted") {
    const auto parsed = parse_trace_text("SEMAG_TRACE|line=1|x=1\n"
                                         "SEMAG_TRACE|line=x|x=1\n"
                                         "SEMAG_TRACE|line=2|9bad=1\n"
                                         "unrelated stderr\n"
                                         "SEMAG_TRACE|line=3|y=\n",
                                         4);
    CHECK(parsed.trace.size() == 2);
    CHECK(parsed.skipped == 2);
    CHECK(parsed.trace.source_revision == 4);
    CHECK(parsed.trace.events[1] == ev(3, "y", ""));
}

TEST_CASE("similarity conventions") {
    CHECK(similarity(trace_of({}), trace_of({})) == 1.0);
    CHECK(similarity(trace_of({ev(1, "x", "1")}), trace_of({})) == 0.0);
    const auto a = trace_of({ev(1, "x", "1"), ev(2, "y", "2"), ev(3, "z", "3")});
    auto b = a;
    b.events[1].value_repr = "9";
    CHECK(edit_distance(a.events, b.events) == 1);
    CHECK(similarity(a, b) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("edit distance agrees with the recursive oracle") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_trace(rng, 10);
        const auto b = random_trace(rng, 10);
        CHECK(edit_distance(a, b) == oracle_edit_distance(a, b));
    }
}

TEST_CASE("threshold") {
    TransitionParams p;
    CHECK(threshold(4, p, 1.0) == doctest::Approx(0.85 * std::exp(-0.5)).epsilon(1e-12));
    CHECK(threshold(1, p, 0.0) == 0.85);
    CHECK(threshold(2, p, 0.5) < threshold(1, p, 0.5));
    CHECK_THROWS_AS(threshold(0, p, 0.5), PreconditionError);
    CHECK_THROWS_AS(threshold(5, p, 0.5), PreconditionError);
    CHECK_THROWS_AS(threshold(1, p, 1.5), PreconditionError);
}

TEST_CASE("should_transition uses a strict comparison") {
    TransitionParams p;
    const auto a = trace_of({ev(1, "x", "1")});
    CHECK_FALSE(should_transition(a, nullptr, 1, p, 0.5));
    CHECK(should_transition(a, &a, 2, p, 0.5));
    TransitionParams one{1.0, 0.5, 4};
    // rho = 1 equals delta = 1 at complexity 0, so no transition.
    CHECK_FALSE(should_transition(a, &a, 2, one, 0.0));
}

TEST_CASE("instrument validates the rewritten program against the original output") {
    Gateway gw;
    const std::string good = "```sh\nread a\nprintf 'SEMAG_TRACE|line=1|a=%s\\n' \"$a\" >&2\necho $a\n```";
    const std::string changes_output = "```sh\nread a\necho changed\n```";
    gw.register_backend("m", std::make_shared<ScriptedBackend>(
                                  std::vector<std::string>{good, changes_output, "no code here"}));
    BackendDescriptor bd;
    bd.model_id = "m";
    AgentSession agents(gw, bd, "t");
    Executor exec;
    const auto prog = Program::initial("read a\necho $a\n", "sh", ProducedBy::level1);
    std::vector<IOExample> examples{{"7", "7"}, {"8", "8"}};

    const auto ok = instrument(prog, agents, exec, examples, ResourceLimits{});
    CHECK_FALSE(ok.fell_back);
    CHECK(ok.trace.events == std::vector<TraceEvent>{ev(1, "a", "7"), ev(1, "a", "8")});

    const auto bad = instrument(prog, agents, exec, examples, ResourceLimits{});
    CHECK(bad.fell_back);
    CHECK(bad.trace.empty());
    CHECK(bad.program.source == prog.source);

    const auto none = instrument(prog, agents, exec, examples, ResourceLimits{});
    CHECK(none.fell_back);
}

TEST_CASE("auto_instrument keeps python output unchanged and emits assignments") {
    Executor exec;
    const std::string src = "n = int(input())\nr = 1\nfor i in range(2, n + 1):\n    r *= i\nprint(r)\n";
    const auto plain = exec.run(Program::initial(src, "python", ProducedBy::level1), "4\n", ResourceLimits{});
    const auto traced =
        exec.run(Program::initial(auto_instrument(src, "python"), "python", ProducedBy::debug), "4\n", ResourceLimits{});
    CHECK(plain.stdout_text == "24\n");
    CHECK(traced.stdout_text == plain.stdout_text);
    const auto parsed = parse_trace(traced, 1);
    CHECK(parsed.skipped == 0);
    CHECK(parsed.trace.size() >= 5);
    CHECK(parsed.trace.events.back() == ev(4, "r", "24"));
}
