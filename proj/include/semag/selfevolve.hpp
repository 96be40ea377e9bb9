#pragma once

// Backbone selection: keywords -> search -> relevance filter -> summaries ->
// proposals scored by sampled performance -> weighted vote.

#include "semag/executor.hpp"
#include "semag/gateway.hpp"
#include "semag/task.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace semag {

struct LinkRecord {
    std::string url;
    std::string title;
    std::string snippet;
    std::string content; ///< page text when the client supplies it
    int published_age_days = 0;
    double relevance = 0.0;
};

struct EvidenceSummary {
    int selector_index = 1;
    std::string digest;
    std::vector<std::string> cited_urls;
    std::size_t skipped = 0;
};

struct ModelProposal {
    std::string model_id;
    std::string rationale;
    double confidence = 0.0;
};

struct SelectionConfig {
    int n_selectors = 3;
    int n_links = 20;
    double theta_r = 0.5;
    int recency_days = 30;
    int sample_size = 5;

    void validate() const;
};

struct RegistryEntry {
    std::string model_id;
    std::string endpoint;
    std::string auth_env_var;
    std::vector<std::string> aliases;
    double temperature = 0.1;

    BackendDescriptor descriptor() const;
};

class ModelRegistry {
public:
    ModelRegistry() = default;
    explicit ModelRegistry(std::vector<RegistryEntry> entries, std::string default_id = {});

    static ModelRegistry from_json(const nlohmann::json& doc);
    static ModelRegistry load(const std::filesystem::path& path);

    // Exact id or alias match, case-insensitive.
    const RegistryEntry* find(std::string_view name) const;
    const RegistryEntry& default_entry() const;
    bool empty() const noexcept { return entries_.empty(); }
    const std::vector<RegistryEntry>& entries() const noexcept { return entries_; }

    // "- id (aliases: a, b)" per line, as shown to the selector and matcher agents.
    std::string render() const;

private:
    std::vector<RegistryEntry> entries_;
    std::string default_id_;
};

struct SearchHit {
    std::string url;
    std::string title;
    std::string snippet;
    std::string content;
    std::optional<int> age_days; ///< unknown publication dates stay empty
};

// Must be safe for concurrent queries.
class SearchClient {
public:
    virtual ~SearchClient() = default;
    virtual std::vector<SearchHit> query(const std::string& query) const = 0;
};

// Frozen corpus: every query returns the stored documents in stored order.
// Ages are computed against the corpus reference date.
class FixtureSearchClient : public SearchClient {
public:
    explicit FixtureSearchClient(std::vector<SearchHit> hits);
    static FixtureSearchClient load(const std::filesystem::path& path);

    std::vector<SearchHit> query(const std::string& query) const override;
    std::size_t size() const noexcept { return hits_.size(); }

private:
    std::vector<SearchHit> hits_;
};

// JSON search API: GET <endpoint with {query} substituted>, expecting
// {"results": [{url, title, snippet|content, published_date|publishedDate}]}.
class HttpSearchClient : public SearchClient {
public:
    HttpSearchClient(std::string endpoint_template, std::string auth_env_var = {}, RetryPolicy retry = {});

    std::vector<SearchHit> query(const std::string& query) const override;

private:
    std::string endpoint_;
    std::string auth_env_var_;
    RetryPolicy retry_;
};

// Days between an ISO date (YYYY-MM-DD prefix) and the reference date; nullopt when unparsable.
std::optional<int> age_in_days(std::string_view published, std::string_view reference);

std::vector<std::string> fallback_keywords();

std::vector<std::string> gen_keywords(const std::string& task_profile, const std::string& context,
                                      AgentSession& agents);

std::vector<LinkRecord> search(const std::vector<std::string>& keywords, int n_links, const SearchClient& client,
                               int recency_days = 30);

// Token-set Jaccard of (title + snippet) against profile tokens plus keywords.
double relevance(const LinkRecord& link, const std::string& task_profile,
                 const std::vector<std::string>& keywords = {});

std::vector<LinkRecord> filter_links(std::vector<LinkRecord> links, const std::string& task_profile, double theta_r,
                                     const std::vector<std::string>& keywords = {});

EvidenceSummary summarize(const std::vector<LinkRecord>& links, AgentSession& agents, int selector_index = 1);

struct SampleResult {
    double performance = 0.0;
    std::int64_t tokens = 0;
    std::size_t backend_failures = 0;
};

SampleResult sample_performance(const BackendDescriptor& model, std::span<const Task> tasks, Gateway& gateway,
                                const Executor& executor, const ResourceLimits& limits = {});

using PerformanceTable = std::map<std::string, double>;

// Confidence is the measured performance of the proposed model (0 when unmeasured).
// nullopt when the proposed model cannot be mapped onto the registry.
std::optional<ModelProposal> propose(const EvidenceSummary& evidence, const PerformanceTable& perf_by_model,
                                     const ModelRegistry& registry, AgentSession& agents);

struct VoteTally {
    std::vector<std::pair<std::string, double>> ranked; ///< descending score, ties by model id
    std::string winner;
};

VoteTally tally(std::span<const ModelProposal> proposals);
std::string vote(std::span<const ModelProposal> proposals);

struct SelectorReport {
    int selector_index = 1;
    std::vector<std::string> keywords;
    std::size_t links_found = 0;
    std::size_t links_kept = 0;
    EvidenceSummary evidence;
    std::optional<ModelProposal> proposal;
    TokenUsage tokens;
    std::int64_t latency_ms = 0;
    std::vector<ChatExchange> exchanges;
};

struct SelectionReport {
    std::vector<SelectorReport> selectors;
    std::map<std::string, SampleResult> sampled;
    VoteTally tally;
    std::string model_id;
    bool fell_back = false;
    std::int64_t tokens_total = 0; ///< selector pipelines plus performance sampling
    std::int64_t latency_ms = 0;

    nlohmann::json to_json(bool include_timing = true) const;
};

struct SelectionInputs {
    SelectionConfig config;
    std::string task_profile;
    const ModelRegistry* registry = nullptr;
    BackendDescriptor selector_backend; ///< serves keyword, summary, selector and matcher calls
    std::span<const Task> sample_tasks;
    const SearchClient* search_client = nullptr;
    bool concurrent = true;
};

SelectionReport select_backbone(const SelectionInputs& inputs, Gateway& gateway, const Executor& executor,
                                const ResourceLimits& limits = {});

} // namespace semag
