// Python bindings. Structured results cross the boundary as JSON text and are
// decoded by the semag package.

#include "semag/bench.hpp"
#include "semag/consensus.hpp"
#include "semag/errors.hpp"
#include "semag/runner.hpp"
#include "semag/trace.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>

namespace py = pybind11;

namespace {

using EventTuple = std::tuple<int, std::string, std::string>;

semag::Trace to_trace(const std::vector<EventTuple>& events) {
    semag::Trace t;
    for (const auto& [line, var, value] : events) t.events.push_back({line, var, value});
    return t;
}

nlohmann::json task_json(const semag::Task& t) {
    auto examples = [](const std::vector<semag::IOExample>& xs) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& x : xs) out.push_back({{"input", x.input}, {"output", x.expected_output}});
        return out;
    };
    return {{"id", t.id},
            {"statement", t.statement},
            {"visible_examples", examples(t.visible_examples)},
            {"hidden_tests", examples(t.hidden_tests)},
            {"entry_point", t.entry_point ? nlohmann::json(*t.entry_point) : nlohmann::json()},
            {"tags", t.tags},
            {"complexity", t.complexity},
            {"language", t.language}};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "semag core engine";

    auto base = py::register_exception<semag::Error>(m, "SemagError");
    py::register_exception<semag::ParseError>(m, "ParseError", base.ptr());
    py::register_exception<semag::ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<semag::PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<semag::InfrastructureError>(m, "InfrastructureError", base.ptr());
    py::register_exception<semag::BackendError>(m, "BackendError", base.ptr());

    m.def("similarity", [](const std::vector<EventTuple>& a, const std::vector<EventTuple>& b) {
        return semag::similarity(to_trace(a), to_trace(b));
    }, py::arg("a"), py::arg("b"));

    m.def("edit_distance", [](const std::vector<EventTuple>& a, const std::vector<EventTuple>& b) {
        const auto ta = to_trace(a);
        const auto tb = to_trace(b);
        return semag::edit_distance(ta.events, tb.events);
    }, py::arg("a"), py::arg("b"));

    m.def("threshold", [](int t, double complexity, double delta0, double lambda, int t_max) {
        const semag::TransitionParams p{delta0, lambda, t_max};
        p.validate();
        return semag::threshold(t, p, complexity);
    }, py::arg("t"), py::arg("complexity"), py::arg("delta0") = 0.85, py::arg("lambda_") = 0.5,
       py::arg("t_max") = 4);

    m.def("softmax_weights", [](const std::vector<double>& eta, double tau_w) {
        return semag::softmax_weights(eta, tau_w);
    }, py::arg("performances"), py::arg("tau_w") = 1.0);

    m.def("vote", [](const std::vector<std::pair<std::string, double>>& votes) {
        std::vector<semag::ModelProposal> ps;
        for (const auto& [id, conf] : votes) ps.push_back({id, "", conf});
        return semag::vote(ps);
    }, py::arg("votes"));

    m.def("load_dataset_json", [](const std::string& path, const std::string& schema, std::uint64_t seed) {
        semag::IngestOptions opts;
        opts.seed = seed;
        nlohmann::json out = nlohmann::json::array();
        for (const auto& t : semag::load_dataset(path, semag::parse_schema_name(schema), opts)) {
            out.push_back(task_json(t));
        }
        return out.dump();
    }, py::arg("path"), py::arg("schema") = "generic", py::arg("seed") = 0);

    m.def("load_config_json", [](const std::string& path) {
        return semag::load_config_or_default(path).to_json().dump();
    }, py::arg("path") = "");

    m.def("solve_json", [](const std::string& dataset, const std::string& schema, const std::string& backend,
                           const std::string& config, const std::string& endpoint, const std::string& auth_env,
                           int parallel, std::uint64_t seed, bool strict_infra, const std::string& out_dir) {
        semag::SolveRequest req;
        req.dataset = dataset;
        req.schema = schema;
        req.backend = backend;
        req.config = config;
        req.endpoint = endpoint;
        req.auth_env = auth_env;
        req.parallel = parallel;
        req.seed = seed;
        req.strict_infra = strict_infra;
        semag::BenchmarkResult result;
        {
            py::gil_scoped_release release;
            result = semag::solve_dataset(req);
        }
        if (!out_dir.empty()) semag::write_run(out_dir, result);
        nlohmann::json doc = {{"manifest", result.manifest.to_json()},
                              {"metrics", result.metrics.to_json()},
                              {"timing", result.metrics.timing_json()}};
        return doc.dump();
    }, py::arg("dataset"), py::arg("schema") = "generic", py::arg("backend") = "mock-scenario",
       py::arg("config") = "", py::arg("endpoint") = "", py::arg("auth_env") = "", py::arg("parallel") = 1,
       py::arg("seed") = 0, py::arg("strict_infra") = false, py::arg("out_dir") = "");

    m.def("select_backbone_json", [](const std::string& profile, const std::string& registry,
                                     const std::string& fixture, const std::string& sample, int n_links,
                                     std::uint64_t seed, const std::string& config) {
        semag::SelectRequest req;
        req.profile_path = profile;
        req.registry = registry;
        req.fixture = fixture;
        req.sample = sample;
        req.n_links = n_links;
        req.seed = seed;
        req.config = config;
        semag::SelectionReport rep;
        {
            py::gil_scoped_release release;
            rep = semag::select_from_files(req);
        }
        return rep.to_json().dump();
    }, py::arg("profile"), py::arg("registry"), py::arg("fixture"), py::arg("sample") = "", py::arg("n_links") = 0,
       py::arg("seed") = 0, py::arg("config") = "");

    m.def("report", [](const std::string& run_dir, const std::string& format) {
        return semag::report(semag::load_run_metrics(run_dir), semag::parse_report_format(format));
    }, py::arg("run_dir"), py::arg("format") = "table");
}
