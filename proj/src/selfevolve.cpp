#include <httplib.h>

#include "semag/selfevolve.hpp"

#include "semag/errors.hpp"
#include "semag/extract.hpp"
#include "semag/text.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <thread>

namespace semag {

void SelectionConfig::validate() const {
    if (n_selectors < 1 || n_links < 1 || recency_days < 1 || sample_size < 1) {
        throw PreconditionError("selection counts must all be positive");
    }
    if (!(theta_r > 0.0 && theta_r < 1.0)) throw PreconditionError("theta_r must lie in (0,1)");
}

BackendDescriptor RegistryEntry::descriptor() const {
    BackendDescriptor d;
    d.model_id = model_id;
    d.endpoint = endpoint;
    d.auth_env_var = auth_env_var;
    d.temperature = temperature;
    return d;
}

ModelRegistry::ModelRegistry(std::vector<RegistryEntry> entries, std::string default_id)
    : entries_(std::move(entries)), default_id_(std::move(default_id)) {}

ModelRegistry ModelRegistry::from_json(const nlohmann::json& doc) {
    const nlohmann::json* list = &doc;
    std::string default_id;
    if (doc.is_object()) {
        list = &doc.at("models");
        default_id = doc.value("default", std::string{});
    }
    if (!list->is_array()) throw ParseError("registry must be a list of models");
    std::vector<RegistryEntry> entries;
    for (const auto& m : *list) {
        RegistryEntry e;
        e.model_id = m.at("model_id").get<std::string>();
        e.endpoint = m.value("endpoint", std::string{});
        e.auth_env_var = m.value("auth_env_var", std::string{});
        e.temperature = m.value("temperature", 0.1);
        if (auto a = m.find("aliases"); a != m.end()) e.aliases = a->get<std::vector<std::string>>();
        if (e.model_id.empty()) throw ParseError("registry entry with empty model_id");
        entries.push_back(std::move(e));
    }
    ModelRegistry reg(std::move(entries), std::move(default_id));
    if (!reg.default_id_.empty() && !reg.find(reg.default_id_)) {
        throw ParseError("registry default '" + reg.default_id_ + "' is not a listed model");
    }
    return reg;
}

ModelRegistry ModelRegistry::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open registry " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

const RegistryEntry* ModelRegistry::find(std::string_view name) const {
    const auto key = text::to_lower(text::trim(name));
    for (const auto& e : entries_) {
        if (text::to_lower(e.model_id) == key) return &e;
    }
    for (const auto& e : entries_) {
        for (const auto& a : e.aliases) {
            if (text::to_lower(a) == key) return &e;
        }
    }
    return nullptr;
}

const RegistryEntry& ModelRegistry::default_entry() const {
    if (entries_.empty()) throw PreconditionError("model registry is empty");
    if (!default_id_.empty()) return *find(default_id_);
    return entries_.front();
}

std::string ModelRegistry::render() const {
    std::string out;
    for (const auto& e : entries_) {
        out += "- " + e.model_id;
        if (!e.aliases.empty()) out += " (aliases: " + text::join(e.aliases, ", ") + ")";
        out += "\n";
    }
    return out;
}

std::optional<int> age_in_days(std::string_view published, std::string_view reference) {
    auto to_days = [](std::string_view s) -> std::optional<std::chrono::sys_days> {
        int y = 0;
        unsigned m = 0;
        unsigned d = 0;
        const std::string buf(s.substr(0, 10));
        if (std::sscanf(buf.c_str(), "%d-%u-%u", &y, &m, &d) != 3) return std::nullopt;
        const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
        if (!ymd.ok()) return std::nullopt;
        return std::chrono::sys_days{ymd};
    };
    auto p = to_days(published);
    auto r = to_days(reference);
    if (!p || !r) return std::nullopt;
    return static_cast<int>((*r - *p).count());
}

FixtureSearchClient::FixtureSearchClient(std::vector<SearchHit> hits) : hits_(std::move(hits)) {}

FixtureSearchClient FixtureSearchClient::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open search fixture " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    const auto reference = doc.at("reference_date").get<std::string>();
    std::vector<SearchHit> hits;
    for (const auto& d : doc.at("documents")) {
        SearchHit h;
        h.url = d.at("url").get<std::string>();
        h.title = d.value("title", std::string{});
        h.snippet = d.value("snippet", std::string{});
        h.content = d.value("content", std::string{});
        h.age_days = age_in_days(d.value("published_date", std::string{}), reference);
        hits.push_back(std::move(h));
    }
    return FixtureSearchClient(std::move(hits));
}

std::vector<SearchHit> FixtureSearchClient::query(const std::string&) const { return hits_; }

HttpSearchClient::HttpSearchClient(std::string endpoint_template, std::string auth_env_var, RetryPolicy retry)
    : endpoint_(std::move(endpoint_template)), auth_env_var_(std::move(auth_env_var)), retry_(retry) {}

std::vector<SearchHit> HttpSearchClient::query(const std::string& query) const {
    const std::string url = text::replace_all(endpoint_, "{query}", httplib::detail::encode_query_param(query));
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw BackendError("malformed search endpoint '" + url + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Headers headers;
    if (!auth_env_var_.empty()) {
        if (const char* key = std::getenv(auth_env_var_.c_str())) headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto backoff = retry_.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(static_cast<std::int64_t>(backoff.count() * retry_.multiplier));
        }
        httplib::Client client(base);
        client.set_read_timeout(30, 0);
        auto res = client.Get(path, headers);
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw BackendError("search endpoint returned HTTP " + std::to_string(res->status));
        std::vector<SearchHit> hits;
        try {
            const auto doc = nlohmann::json::parse(res->body);
            const auto today = std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now());
            const std::chrono::year_month_day ymd{today};
            char ref[16];
            std::snprintf(ref, sizeof ref, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
            for (const auto& r : doc.at("results")) {
                SearchHit h;
                h.url = r.value("url", std::string{});
                h.title = r.value("title", std::string{});
                h.snippet = r.contains("snippet") ? r.value("snippet", std::string{}) : r.value("content", std::string{});
                std::string date = r.value("published_date", std::string{});
                if (date.empty() && r.contains("publishedDate") && r["publishedDate"].is_string()) {
                    date = r["publishedDate"].get<std::string>();
                }
                h.age_days = age_in_days(date, ref);
                hits.push_back(std::move(h));
            }
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("malformed search response: ") + e.what());
        }
        return hits;
    }
    throw BackendError("search failed after retries: " + last_error);
}

std::vector<std::string> fallback_keywords() {
    return {"code generation", "large language model", "programming benchmark", "pass@1"};
}

std::vector<std::string> gen_keywords(const std::string& task_profile, const std::string& context,
                                      AgentSession& agents) {
    Context ctx{{"profile", task_profile}};
    if (!context.empty()) ctx["context"] = context;
    const auto& ex = agents.call(AgentRole::keyword_gen, std::move(ctx));
    std::string body;
    try {
        body = extract_text_block(ex.response, BlockKind::keywords);
    } catch (const ExtractionError&) {
        body = ex.response;
    }
    std::vector<std::string> out;
    for (auto line : text::split_lines(body)) {
        for (auto& piece : text::split_lines(text::replace_all(line, ",", "\n"))) {
            auto kw = text::to_lower(text::trim(piece));
            while (!kw.empty() && (kw.front() == '-' || kw.front() == '*')) kw = text::trim(kw.substr(1));
            if (kw.empty() || std::find(out.begin(), out.end(), kw) != out.end()) continue;
            out.push_back(std::move(kw));
        }
    }
    if (out.size() > 8) out.resize(8);
    for (const auto& kw : fallback_keywords()) {
        if (out.size() >= 3) break;
        if (std::find(out.begin(), out.end(), kw) == out.end()) out.push_back(kw);
    }
    return out;
}

std::vector<LinkRecord> search(const std::vector<std::string>& keywords, int n_links, const SearchClient& client,
                               int recency_days) {
    if (n_links < 1) throw PreconditionError("n_links must be positive");
    std::vector<LinkRecord> out;
    for (auto& hit : client.query(text::join(keywords, " "))) {
        if (hit.age_days && *hit.age_days > recency_days) continue;
        LinkRecord rec;
        rec.url = std::move(hit.url);
        rec.title = std::move(hit.title);
        rec.snippet = std::move(hit.snippet);
        rec.content = std::move(hit.content);
        rec.published_age_days = hit.age_days.value_or(0);
        out.push_back(std::move(rec));
        if (out.size() == static_cast<std::size_t>(n_links)) break;
    }
    return out;
}

double relevance(const LinkRecord& link, const std::string& task_profile, const std::vector<std::string>& keywords) {
    auto target = text::token_set(task_profile);
    for (const auto& kw : keywords) {
        for (auto& t : text::tokenize(kw)) target.insert(std::move(t));
    }
    return text::jaccard(text::token_set(link.title + " " + link.snippet), target);
}

std::vector<LinkRecord> filter_links(std::vector<LinkRecord> links, const std::string& task_profile, double theta_r,
                                     const std::vector<std::string>& keywords) {
    if (!(theta_r > 0.0 && theta_r < 1.0)) throw PreconditionError("theta_r must lie in (0,1)");
    std::vector<LinkRecord> kept;
    for (auto& link : links) {
        link.relevance = relevance(link, task_profile, keywords);
        if (link.relevance > theta_r) kept.push_back(std::move(link));
    }
    return kept;
}

EvidenceSummary summarize(const std::vector<LinkRecord>& links, AgentSession& agents, int selector_index) {
    if (links.empty()) throw PreconditionError("nothing to summarize");
    EvidenceSummary out;
    out.selector_index = selector_index;
    out.digest = "Evidence gathered by selector " + std::to_string(selector_index) + "\n\n";
    for (const auto& link : links) {
        try {
            const auto& ex = agents.call(AgentRole::summarizer,
                                         Context{{"url", link.url},
                                                 {"title", link.title},
                                                 {"content", link.content.empty() ? link.snippet : link.content}});
            std::string summary;
            try {
                summary = extract_text_block(ex.response, BlockKind::summary);
            } catch (const ExtractionError&) {
                summary = text::trim(ex.response);
            }
            out.digest += "## " + link.title + " (" + link.url + ")\n" + summary + "\n\n";
            out.cited_urls.push_back(link.url);
        } catch (const Error& e) {
            spdlog::warn("summary of {} skipped: {}", link.url, e.what());
            ++out.skipped;
        }
    }
    return out;
}

SampleResult sample_performance(const BackendDescriptor& model, std::span<const Task> tasks, Gateway& gateway,
                                const Executor& executor, const ResourceLimits& limits) {
    if (tasks.empty()) throw PreconditionError("performance sampling needs at least one task");
    SampleResult out;
    std::size_t passed = 0;
    for (const auto& task : tasks) {
        AgentSession agents(gateway, model, task.id);
        Context ctx{{"statement", task.statement}, {"language", task.language}};
        std::string examples;
        for (const auto& ex : task.visible_examples) {
            examples += "Input:\n" + ex.input + "\nExpected output:\n" + ex.expected_output + "\n";
        }
        ctx["examples"] = examples;
        if (task.entry_point) ctx["entry_point"] = *task.entry_point;
        try {
            const auto& ex = agents.call(AgentRole::coder, std::move(ctx));
            const auto program = Program::initial(extract_code(ex.response), task.language, ProducedBy::level1);
            const auto report = run_tests(program, task.hidden_tests, executor, limits, task.entry_point);
            if (report.all_passed) ++passed;
        } catch (const BackendError& e) {
            spdlog::warn("sampling {} on {}: {}", model.model_id, task.id, e.what());
            ++out.backend_failures;
        } catch (const ExtractionError&) {
        }
        out.tokens += agents.ledger().total;
    }
    out.performance = static_cast<double>(passed) / static_cast<double>(tasks.size());
    return out;
}

std::optional<ModelProposal> propose(const EvidenceSummary& evidence, const PerformanceTable& perf_by_model,
                                     const ModelRegistry& registry, AgentSession& agents) {
    if (evidence.digest.empty()) throw PreconditionError("proposal needs evidence");
    std::string perf_table;
    for (const auto& [id, perf] : perf_by_model) perf_table += fmt::format("{}: {:.2f}\n", id, perf);
    const auto& ex = agents.call(AgentRole::llm_selector, Context{{"evidence", evidence.digest},
                                                                  {"performance", perf_table},
                                                                  {"registry", registry.render()}});
    const auto name = find_field(ex.response, "MODEL");
    if (!name || text::trim(*name).empty()) {
        spdlog::warn("selector {} named no model", evidence.selector_index);
        return std::nullopt;
    }
    const RegistryEntry* entry = registry.find(*name);
    if (!entry) {
        const auto& m = agents.call(AgentRole::model_matcher,
                                    Context{{"name", text::trim(*name)}, {"registry", registry.render()}});
        if (auto mapped = find_field(m.response, "MODEL")) entry = registry.find(*mapped);
    }
    if (!entry) {
        spdlog::warn("selector {} proposed '{}', which matches no registry entry", evidence.selector_index,
                     text::trim(*name));
        return std::nullopt;
    }
    ModelProposal p;
    p.model_id = entry->model_id;
    p.rationale = text::trim(find_field(ex.response, "RATIONALE").value_or(""));
    const auto it = perf_by_model.find(entry->model_id);
    p.confidence = it == perf_by_model.end() ? 0.0 : std::clamp(it->second, 0.0, 1.0);
    return p;
}

VoteTally tally(std::span<const ModelProposal> proposals) {
    if (proposals.empty()) throw PreconditionError("vote over no proposals");
    std::map<std::string, double> score;
    for (const auto& p : proposals) score[p.model_id] += p.confidence;
    VoteTally out;
    out.ranked.assign(score.begin(), score.end());
    std::stable_sort(out.ranked.begin(), out.ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    out.winner = out.ranked.front().first;
    return out;
}

std::string vote(std::span<const ModelProposal> proposals) { return tally(proposals).winner; }

nlohmann::json SelectionReport::to_json(bool include_timing) const {
    nlohmann::json sel = nlohmann::json::array();
    for (const auto& s : selectors) {
        nlohmann::json j{{"selector_index", s.selector_index},
                         {"keywords", s.keywords},
                         {"links_found", s.links_found},
                         {"links_kept", s.links_kept},
                         {"cited_urls", s.evidence.cited_urls},
                         {"summaries_skipped", s.evidence.skipped},
                         {"evidence", s.evidence.digest},
                         {"tokens", s.tokens.total}};
        if (s.proposal) {
            j["proposal"] = {{"model_id", s.proposal->model_id},
                             {"rationale", s.proposal->rationale},
                             {"confidence", s.proposal->confidence}};
        } else {
            j["proposal"] = nullptr;
        }
        if (include_timing) j["latency_ms"] = s.latency_ms;
        sel.push_back(std::move(j));
    }
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& [id, score] : tally.ranked) ranked.push_back({{"model_id", id}, {"score", score}});
    nlohmann::json sampled_j = nlohmann::json::object();
    for (const auto& [id, r] : sampled) {
        sampled_j[id] = {{"performance", r.performance}, {"tokens", r.tokens}, {"backend_failures", r.backend_failures}};
    }
    nlohmann::json out{{"schema_version", 1},
                       {"model_id", model_id},
                       {"fell_back", fell_back},
                       {"ranked", std::move(ranked)},
                       {"sampled", std::move(sampled_j)},
                       {"selectors", std::move(sel)},
                       {"tokens_total", tokens_total}};
    if (include_timing) out["latency_ms"] = latency_ms;
    return out;
}

SelectionReport select_backbone(const SelectionInputs& in, Gateway& gateway, const Executor& executor,
                                const ResourceLimits& limits) {
    in.config.validate();
    if (!in.registry || in.registry->empty()) throw PreconditionError("model registry is empty");
    if (!in.search_client) throw PreconditionError("no search client configured");
    const auto& registry = *in.registry;
    const auto started = std::chrono::steady_clock::now();

    const auto n_sample = std::min<std::size_t>(in.sample_tasks.size(), static_cast<std::size_t>(in.config.sample_size));
    const auto sample = in.sample_tasks.subspan(0, n_sample);

    SelectionReport report;
    PerformanceTable perf_by_model;
    for (const auto& e : registry.entries()) {
        SampleResult r;
        if (sample.empty()) {
            r.performance = 1.0; // nothing to measure: every proposal votes with full weight
        } else {
            r = sample_performance(e.descriptor(), sample, gateway, executor, limits);
        }
        perf_by_model[e.model_id] = r.performance;
        report.sampled[e.model_id] = r;
    }

    auto pipeline = [&](int index) {
        const auto t0 = std::chrono::steady_clock::now();
        SelectorReport s;
        s.selector_index = index;
        AgentSession agents(gateway, in.selector_backend, "selector-" + std::to_string(index));
        s.keywords = gen_keywords(in.task_profile, "", agents);
        auto links = search(s.keywords, in.config.n_links, *in.search_client, in.config.recency_days);
        s.links_found = links.size();
        auto kept = filter_links(std::move(links), in.task_profile, in.config.theta_r, s.keywords);
        s.links_kept = kept.size();
        s.evidence.selector_index = index;
        if (!kept.empty()) {
            s.evidence = summarize(kept, agents, index);
            if (!s.evidence.cited_urls.empty()) s.proposal = propose(s.evidence, perf_by_model, registry, agents);
        }
        s.tokens = agents.ledger();
        s.exchanges = agents.exchanges();
        s.latency_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        return s;
    };

    if (in.concurrent && in.config.n_selectors > 1) {
        std::vector<std::future<SelectorReport>> futures;
        for (int i = 1; i <= in.config.n_selectors; ++i) futures.push_back(std::async(std::launch::async, pipeline, i));
        for (auto& f : futures) report.selectors.push_back(f.get());
    } else {
        for (int i = 1; i <= in.config.n_selectors; ++i) report.selectors.push_back(pipeline(i));
    }

    std::vector<ModelProposal> proposals;
    for (const auto& s : report.selectors) {
        if (s.proposal) proposals.push_back(*s.proposal);
        report.tokens_total += s.tokens.total;
    }
    for (const auto& [id, r] : report.sampled) report.tokens_total += r.tokens;
    if (proposals.empty()) {
        report.model_id = registry.default_entry().model_id;
        report.fell_back = true;
        spdlog::warn("no usable proposals; falling back to registry default {}", report.model_id);
    } else {
        report.tally = tally(proposals);
        report.model_id = report.tally.winner;
    }
    report.latency_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    return report;
}

} // namespace semag
