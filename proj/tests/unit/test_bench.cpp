#include "fixtures.hpp"

#include "semag/bench.hpp"
#include "semag/errors.hpp"
#include "semag/mock_backend.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace semag;
using semag::testing::LevelMix;
using semag::testing::make_replay;

namespace {

BenchmarkResult run(const semag::testing::ReplayFixture& f, const std::string& model, BenchmarkOptions opts = {}) {
    Gateway gw;
    register_mock_backends(gw, f.book, opts.seed);
    Executor exec;
    const EngineConfig cfg;
    return run_benchmark(f.tasks, DatasetInfo{f.dataset.string(), "generic", ""}, cfg, gw, cfg.backend(model), exec,
                         opts);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TaskRow row(std::string id, bool passed, int level) {
    TaskRow r;
    r.task_id = std::move(id);
    r.passed = passed;
    r.final_level = level;
    r.tokens = 10;
    return r;
}

} // namespace

TEST_CASE("oracle backend solves everything at level 1") {
    const auto f = make_replay("toy", LevelMix{2, 1, 1, 1, 0});
    const auto r = run(f, kMockOracle);
    CHECK(r.metrics.pass_at_1 == 1.0);
    CHECK(r.metrics.per_level_counts == std::map<int, int>{{1, 5}});
}

TEST_CASE("broken backend exhausts every task") {
    const auto f = make_replay("toy", LevelMix{5, 0, 0, 0, 0});
    const auto r = run(f, kMockBroken);
    CHECK(r.metrics.pass_at_1 == 0.0);
    CHECK(r.metrics.per_level_counts == std::map<int, int>{{4, 5}});
    for (const auto& row : r.metrics.rows) CHECK_FALSE(row.visible_passed);
}

TEST_CASE("scripted mix, ledger additivity and parallel determinism") {
    const auto f = make_replay("mix", LevelMix{3, 2, 2, 3, 1});
    const auto serial = run(f, kMockScenario);
    CHECK(serial.metrics.per_level_counts == std::map<int, int>{{1, 3}, {2, 2}, {3, 2}, {4, 3}});
    CHECK(serial.metrics.pass_at_1 == doctest::Approx(0.9));
    std::int64_t from_events = 0;
    std::map<std::string, std::int64_t> last;
    for (const auto& e : serial.events) last[e.task_id] = e.tokens;
    for (const auto& [_, t] : last) from_events += t;
    CHECK(from_events == serial.metrics.tokens_total);
    std::int64_t from_transcript = 0;
    for (const auto& t : serial.transcript) from_transcript += t["usage"]["total"].get<std::int64_t>();
    CHECK(from_transcript == serial.metrics.tokens_total);

    BenchmarkOptions par;
    par.parallelism = 3;
    const auto a = run(f, kMockScenario, par);
    const auto b = run(f, kMockScenario, par);
    CHECK(a.metrics.to_json().dump() == b.metrics.to_json().dump());
    CHECK(a.manifest.run_id == b.manifest.run_id);
    CHECK(a.metrics.per_level_counts == serial.metrics.per_level_counts);
}

TEST_CASE("visible success alone is not a pass") {
    auto rec = semag::testing::sh_task_record("t", 3, 1);
    rec["reference_solution"] = "read a b\nif [ \"$a\" = 1 ]; then echo $((a * 3 + b)); else echo 0; fi\n";
    const auto f = semag::testing::make_dataset({rec});
    const auto r = run(f, kMockScenario);
    REQUIRE(r.metrics.rows.size() == 1);
    CHECK(r.metrics.rows[0].visible_passed);
    CHECK_FALSE(r.metrics.rows[0].passed);
    CHECK(r.metrics.pass_at_1 == 0.0);
}

TEST_CASE("infrastructure failures are quarantined") {
    auto rec = semag::testing::sh_task_record("t", 3, 1);
    rec["language"] = "cobol";
    auto ok = semag::testing::sh_task_record("u", 3, 1);
    const auto f = semag::testing::make_dataset({rec, ok});
    const auto lenient = run(f, kMockScenario);
    CHECK(lenient.metrics.errored == 1);
    CHECK(lenient.metrics.per_level_counts == std::map<int, int>{{0, 1}, {1, 1}});
    CHECK(lenient.metrics.pass_at_1 == 0.5);
    BenchmarkOptions strict;
    strict.strict_infra = true;
    CHECK(run(f, kMockScenario, strict).metrics.pass_at_1 == 1.0);
}

TEST_CASE("run directory round-trip") {
    const auto f = make_replay("rt", LevelMix{2, 1, 0, 0, 0});
    const auto r = run(f, kMockScenario);
    semag::testing::TempDir out;
    write_run(out.path(), r);
    for (const char* name : {"manifest.json", "metrics.json", "timing.json", "events.jsonl", "transcript.jsonl"}) {
        CHECK(std::filesystem::exists(out.path() / name));
    }
    const auto loaded = load_run_metrics(out.path());
    CHECK(loaded.to_json() == r.metrics.to_json());
    CHECK(loaded.latency_per_task_avg == doctest::Approx(r.metrics.latency_per_task_avg));
    const auto man = RunManifest::from_json(nlohmann::json::parse(slurp(out.path() / "manifest.json")));
    CHECK(man.run_id == r.manifest.run_id);
    CHECK(man.config == EngineConfig{}.to_json());
}

TEST_CASE("aggregate runs") {
    auto m1 = compute_metrics({row("a", true, 1), row("b", true, 1), row("c", false, 4), row("d", true, 2),
                               row("e", true, 1), row("f", true, 1), row("g", true, 1), row("h", true, 1),
                               row("i", true, 1), row("j", false, 4)},
                              false);
    auto rows2 = m1.rows;
    rows2[2].passed = true;
    auto m2 = compute_metrics(rows2, false);
    CHECK(m1.pass_at_1 == doctest::Approx(0.8));
    CHECK(m2.pass_at_1 == doctest::Approx(0.9));
    const auto s = aggregate_runs({m1, m2});
    CHECK(s.at("pass_at_1").mean == doctest::Approx(0.85));
    CHECK(s.at("pass_at_1").stddev == doctest::Approx(0.05));
    const auto same = aggregate_runs({m1, m1, m1});
    for (const auto& [_, v] : same) CHECK(v.stddev == doctest::Approx(0.0));
    CHECK_THROWS_AS(aggregate_runs({m1}), PreconditionError);
    auto other = compute_metrics({row("zz", true, 1)}, false);
    CHECK_THROWS_AS(aggregate_runs({m1, other}), ValidationError);
}

TEST_CASE("report formats") {
    const auto m = compute_metrics({row("a", true, 1), row("b", false, 4), row("c", true, 2)}, false);
    const auto csv = report(m, ReportFormat::csv);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.rfind("task_id,passed,final_level,tokens,wall_ms\n", 0) == 0);
    const auto table = report(m, ReportFormat::table);
    CHECK(table.find("Level 1") != std::string::npos);
    CHECK(table.find("Level 4") != std::string::npos);
    const auto js = nlohmann::json::parse(report(m, ReportFormat::json));
    CHECK(js["schema_version"] == kMetricsSchemaVersion);
    CHECK(Metrics::from_json(js).to_json() == js);
    CHECK(report(m, ReportFormat::json) == report(m, ReportFormat::json));
    CHECK_THROWS_AS(parse_report_format("xml"), ValidationError);
}

TEST_CASE("benchmark preconditions") {
    Gateway gw;
    Executor exec;
    const EngineConfig cfg;
    CHECK_THROWS_AS(run_benchmark({}, {}, cfg, gw, cfg.backend("m"), exec), PreconditionError);
    const auto f = make_replay("p", LevelMix{1, 0, 0, 0, 0});
    BenchmarkOptions bad;
    bad.parallelism = 0;
    CHECK_THROWS_AS(run_benchmark(f.tasks, {}, cfg, gw, cfg.backend("m"), exec, bad), PreconditionError);
}

TEST_CASE("humaneval records are solvable by the mock from their canonical solution") {
    testing::TempDir dir;
    const auto path = dir.path() / "he.jsonl";
    testing::write_jsonl(path, {nlohmann::json{{"task_id", "HumanEval/x"},
                                               {"entry_point", "inc"},
                                               {"prompt", "def inc(x):\n    \"\"\"Add one.\"\"\"\n"},
                                               {"canonical_solution", "    return x + 1\n"},
                                               {"tests", {{{"input", "(1,)"}, {"output", "2"}},
                                                          {{"input", "(-3,)"}, {"output", "-2"}}}}}});
    const auto book = load_scenario_book(path);
    REQUIRE(book.tasks.count("HumanEval/x") == 1);
    CHECK(book.tasks.at("HumanEval/x").reference_solution.find("def inc(x):") == 0);

    const auto tasks = load_dataset(path, DatasetSchema::humaneval);
    Gateway gw;
    register_mock_backends(gw, book);
    Executor exec;
    const EngineConfig cfg;
    const auto r = run_benchmark(tasks, DatasetInfo{path.string(), "humaneval", ""}, cfg, gw,
                                 cfg.backend(kMockScenario), exec);
    CHECK(r.metrics.pass_at_1 == 1.0);
}
