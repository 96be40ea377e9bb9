#pragma once

// Shared test fixtures: temp directories, repository data paths and the
// scripted level-replay datasets.

#include "semag/config.hpp"
#include "semag/mock_backend.hpp"
#include "semag/task.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace semag::testing {

std::filesystem::path source_dir();
std::filesystem::path data_path(std::string_view relative);

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    TempDir(TempDir&&) noexcept;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

// Final-level mix of a replay dataset. `l4_exhausted` of the l4 tasks never get solved.
struct LevelMix {
    int l1 = 0;
    int l2 = 0;
    int l3 = 0;
    int l4 = 0;
    int l4_exhausted = 0;
};

// One sh task: read a b; print a*k+b. Scenario fields steer the mock.
nlohmann::json sh_task_record(const std::string& id, int k, int solve_level);

std::vector<nlohmann::json> replay_records(const std::string& prefix, const LevelMix& mix);

struct ReplayFixture {
    TempDir dir;
    std::filesystem::path dataset;
    std::vector<Task> tasks;
    ScenarioBook book;
};

ReplayFixture make_replay(const std::string& prefix, const LevelMix& mix);
ReplayFixture make_dataset(const std::vector<nlohmann::json>& records);

inline const LevelMix kHumanEvalMix{148, 8, 4, 4, 2};
inline const LevelMix kMbppMix{314, 18, 48, 120, 62};

} // namespace semag::testing
