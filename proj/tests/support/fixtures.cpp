#include "fixtures.hpp"

#include "semag/errors.hpp"

#include <atomic>
#include <fstream>
#include <unistd.h>

namespace semag::testing {

std::filesystem::path source_dir() { return SEMAG_SOURCE_DIR; }

std::filesystem::path data_path(std::string_view relative) { return source_dir() / "data" / relative; }

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("semag-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::TempDir(TempDir&& other) noexcept : path_(std::move(other.path_)) { other.path_.clear(); }

TempDir::~TempDir() {
    if (path_.empty()) return;
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records) {
    std::ofstream out(path, std::ios::trunc);
    for (const auto& r : records) out << r.dump() << "\n";
}

nlohmann::json sh_task_record(const std::string& id, int k, int solve_level) {
    auto line = [k](int a, int b) { return nlohmann::json{{"input", std::to_string(a) + " " + std::to_string(b)},
                                                          {"output", std::to_string(a * k + b)}}; };
    return {{"id", id},
            {"statement", "Read two integers a and b and print a * " + std::to_string(k) + " + b."},
            {"language", "sh"},
            {"visible", nlohmann::json::array({line(1, 2)})},
            {"hidden", nlohmann::json::array({line(3, 4), line(-2, 7)})},
            {"reference_solution", "read a b\necho $((a * " + std::to_string(k) + " + b))\n"},
            {"mock_solve_level", solve_level},
            {"mock_debug_fix_at", 2},
            {"mock_verify_accept_at", 1}};
}

std::vector<nlohmann::json> replay_records(const std::string& prefix, const LevelMix& mix) {
    std::vector<nlohmann::json> out;
    int n = 0;
    auto add = [&](int level, int count, auto&& tweak) {
        for (int i = 0; i < count; ++i, ++n) {
            auto rec = sh_task_record(prefix + "/" + std::to_string(n), 2 + n % 9, level);
            tweak(rec, i);
            out.push_back(std::move(rec));
        }
    };
    add(1, mix.l1, [](nlohmann::json&, int) {});
    add(2, mix.l2, [](nlohmann::json& r, int i) { r["mock_verify_accept_at"] = i % 4; });
    // Fixes landing at cumulative debug iteration 3 come after one stagnation and a failed debate.
    add(3, mix.l3, [](nlohmann::json& r, int i) { r["mock_debug_fix_at"] = 1 + i % 3; });
    add(4, mix.l4 - mix.l4_exhausted, [](nlohmann::json&, int) {});
    add(0, mix.l4_exhausted, [](nlohmann::json&, int) {});
    return out;
}

ReplayFixture make_dataset(const std::vector<nlohmann::json>& records) {
    ReplayFixture f;
    f.dataset = f.dir.path() / "tasks.jsonl";
    write_jsonl(f.dataset, records);
    f.tasks = load_dataset(f.dataset, DatasetSchema::generic);
    f.book = load_scenario_book(f.dataset);
    return f;
}

ReplayFixture make_replay(const std::string& prefix, const LevelMix& mix) {
    return make_dataset(replay_records(prefix, mix));
}

} // namespace semag::testing
