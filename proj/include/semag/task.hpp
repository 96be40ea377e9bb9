#pragma once

// Tasks, visible/hidden examples, candidate programs and test verdicts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace semag {

enum class CompareMode { exact, whitespace_normalized, numeric_tolerance };

struct IOExample {
    std::string input;
    std::string expected_output;
    CompareMode mode = CompareMode::whitespace_normalized;
    double epsilon = 0.0; ///< only meaningful for numeric_tolerance, must be > 0 there

    bool operator==(const IOExample&) const = default;
};

// Judges `actual` against the example's expected output under its comparison mode.
bool outputs_match(const IOExample& example, std::string_view actual);

// Strips trailing whitespace on every line and trailing blank lines.
std::string normalize_whitespace(std::string_view s);

struct Task {
    std::string id;
    std::string statement;
    std::vector<IOExample> visible_examples;
    std::vector<IOExample> hidden_tests;
    std::optional<std::string> entry_point;
    std::vector<std::string> tags;
    double complexity = 0.0;
    std::string language = "python";
};

enum class ProducedBy { level1, level2, debug, debate_refine };

std::string_view to_string(ProducedBy p);

struct Program {
    std::string source;
    std::string language_tag;
    int revision = 0;
    ProducedBy produced_by = ProducedBy::level1;
    std::optional<int> parent_revision;

    static Program initial(std::string source, std::string language, ProducedBy by);

    // Next revision in the lineage, parented on this one.
    Program revise(std::string new_source, ProducedBy by) const;
};

enum class Verdict { pass, wrong_output, runtime_error, timeout };

std::string_view to_string(Verdict v);

struct ExampleVerdict {
    std::size_t index = 0;
    Verdict verdict = Verdict::pass;
    std::string actual_output;
    std::string stderr_text;
};

struct TestReport {
    std::vector<ExampleVerdict> per_example;
    bool all_passed = false;
    std::int64_t wall_time_ms = 0;

    std::size_t passed_count() const;
};

// --- ingestion ---------------------------------------------------------

enum class DatasetSchema { humaneval, generic };

DatasetSchema parse_schema_name(std::string_view name);
std::string_view to_string(DatasetSchema s);

struct ComplexityModel {
    double length_scale = 2000.0;
    double example_scale = 5.0;
    double length_weight = 0.5;
    double example_weight = 0.3;
    double tag_weight = 0.2;
    std::set<std::string> hard_tags{"competition", "interview", "hard"};
};

// Deterministic score in [0,1], monotone in statement length and example count.
double estimate_complexity(const Task& task, const ComplexityModel& model = {});

struct IngestOptions {
    // Records without visible examples get one hidden test promoted to visible.
    bool promote_visible = true;
    std::uint64_t seed = 0;
    ComplexityModel complexity;
};

Task parse_task(const nlohmann::json& record, DatasetSchema schema, const IngestOptions& options = {});

// Reads newline-delimited records; parse errors are prefixed with the line number.
std::vector<Task> load_dataset(const std::filesystem::path& path, DatasetSchema schema,
                               const IngestOptions& options = {});

// Index of the hidden test promoted to visible for a record lacking examples.
std::size_t promoted_index(std::string_view task_id, std::size_t hidden_count, std::uint64_t seed);

class Executor;
struct ResourceLimits;

// The Test(Y, S) predicate: one verdict per example, in order.
TestReport run_tests(const Program& program, std::span<const IOExample> examples,
                     const Executor& executor, const ResourceLimits& limits,
                     const std::optional<std::string>& entry_point = std::nullopt);

} // namespace semag
