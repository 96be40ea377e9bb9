#include "semag/errors.hpp"
#include "semag/executor.hpp"

#include <doctest.h>

#include <unistd.h>

using namespace semag;

namespace {

Program sh(std::string src) { return Program::initial(std::move(src), "sh", ProducedBy::level1); }
Program py(std::string src) { return Program::initial(std::move(src), "python", ProducedBy::level1); }

} // namespace

TEST_CASE("stdin is piped and stdout captured") {
    Executor exec;
    const auto r = exec.run(sh("read a\necho got $a\necho err >&2\n"), "42\n", ResourceLimits{});
    CHECK(r.status == ExecStatus::ok);
    CHECK(r.stdout_text == "got 42\n");
    CHECK(r.stderr_text == "err\n");
}

TEST_CASE("nonzero exit maps to runtime error") {
    Executor exec;
    const auto r = exec.run(sh("exit 3\n"), "", ResourceLimits{});
    CHECK(r.status == ExecStatus::nonzero_exit);
    CHECK(r.exit_code == 3);
    CHECK(verdict_for(IOExample{"", ""}, r) == Verdict::runtime_error);
}

TEST_CASE("wall-clock timeout kills the process group") {
    Executor exec;
    ResourceLimits lim;
    lim.wall_time_ms = 200;
    const auto r = exec.run(sh("sleep 5\n"), "", lim);
    CHECK(r.status == ExecStatus::timeout);
    CHECK(r.wall_time_ms < lim.wall_time_ms + kSchedulingSlackMs + 200);
    CHECK(verdict_for(IOExample{"", ""}, r) == Verdict::timeout);
}

TEST_CASE("output limit truncates and terminates") {
    Executor exec;
    ResourceLimits lim;
    lim.max_output_bytes = 1000;
    const auto r = exec.run(sh("while true; do echo xxxxxxxxxxxxxxxxxxxxxxxx; done\n"), "", lim);
    CHECK(r.status == ExecStatus::output_limit);
    CHECK(r.output_truncated);
    CHECK(r.stdout_text.size() <= 1000);
}

TEST_CASE("process limit blocks forking") {
    if (::geteuid() == 0) {
        MESSAGE("RLIMIT_NPROC is not enforced for root; skipping");
        return;
    }
    Executor exec;
    ResourceLimits lim;
    lim.max_processes = 1;
    const auto r = exec.run(sh("/bin/echo child\necho parent\n"), "", lim);
    CHECK(r.stdout_text.find("child") == std::string::npos);
}

TEST_CASE("trace lines are separated from stderr noise") {
    Executor exec;
    const auto r = exec.run(sh("echo 'SEMAG_TRACE|line=1|x=5' >&2\necho noise >&2\necho out\n"), "", ResourceLimits{});
    REQUIRE(r.trace_lines.size() == 1);
    CHECK(r.trace_lines[0] == "SEMAG_TRACE|line=1|x=5");
}

TEST_CASE("python entry point harness") {
    Executor exec;
    const auto r = exec.run(py("def add(a, b):\n    return a + b\n"), "(2, 3)", ResourceLimits{}, std::string("add"));
    CHECK(r.status == ExecStatus::ok);
    CHECK(r.stdout_text == "5\n");
}

TEST_CASE("unknown language is an infrastructure error") {
    Executor exec;
    CHECK_THROWS_AS(exec.run(Program::initial("x", "cobol", ProducedBy::level1), "", ResourceLimits{}),
                    InfrastructureError);
}

TEST_CASE("missing interpreter is an infrastructure error") {
    auto cfg = ExecutorConfig::defaults();
    cfg.interpreters["sh"].command = "/nonexistent/interpreter {file}";
    Executor exec(cfg);
    CHECK_THROWS_AS(exec.run(sh("echo hi\n"), "", ResourceLimits{}), InfrastructureError);
}

TEST_CASE("run_examples needs at least one example") {
    Executor exec;
    CHECK_THROWS_AS(exec.run_examples(sh("true\n"), {}, ResourceLimits{}), PreconditionError);
}

TEST_CASE("resource limits validate") {
    ResourceLimits lim;
    lim.wall_time_ms = 0;
    CHECK_THROWS_AS(lim.validate(), PreconditionError);
}
