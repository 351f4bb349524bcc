#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "semcost/distance_field.hpp"
#include "semcost/serialize.hpp"
#include "semcost/session.hpp"

namespace py = pybind11;
using namespace semcost;

namespace {

struct BackendSpec {
    std::string kind = "mock";
    std::string fixtures;
    std::string noise;
    std::uint64_t seed = 1;
};

std::unique_ptr<SensorBackend> make_backend(const BackendSpec& spec) {
    switch (backend_kind_from_string(spec.kind)) {
        case BackendKind::Mock: {
            auto mock = std::make_unique<MockBackend>(MockBackend::construction_rules());
            if (!spec.noise.empty()) mock->set_noise(MockBackend::parse_noise_spec(spec.noise), spec.seed);
            return mock;
        }
        case BackendKind::Fixture:
            if (spec.fixtures.empty()) throw PreconditionError("the fixture backend needs a fixtures path");
            return std::make_unique<FixtureBackend>(FixtureBackend::from_file(spec.fixtures));
        case BackendKind::Http:
            return std::make_unique<HttpBackend>(HttpBackendConfig{});
    }
    throw PreconditionError("unknown backend");
}

py::array_t<double> to_array(const ScalarField& field) {
    py::array_t<double> out({field.height, field.width});
    std::copy(field.values.begin(), field.values.end(), out.mutable_data());
    return out;
}

/// Mutable Python-side handle over the immutable session value.
class PySession {
public:
    explicit PySession(SessionState state) : state_(std::move(state)) {}

    static PySession from_file(const std::string& path) {
        return PySession(SessionState::create(load_scenario_file(path)));
    }
    static PySession from_text(const std::string& text) { return PySession(SessionState::create(load_scenario(text))); }
    static PySession load(const std::string& path) { return PySession(load_state(path)); }

    std::string prompt(const std::string& text, const BackendSpec& backend, std::optional<double> trust_n) {
        auto b = make_backend(backend);
        PromptOptions options;
        options.trust_n = trust_n;
        state_ = semcost::apply_prompt(state_, text, *b, options);
        return snapshot();
    }

    std::string plan(std::optional<double> gamma, std::optional<double> w1, std::optional<double> w2) {
        PlannerParams p = state_.scenario().planner_params;
        if (gamma) p.gamma = *gamma;
        if (w1) p.w1 = *w1;
        if (w2) p.w2 = *w2;
        state_ = semcost::replan(state_, p);
        return to_json(*state_.last_plan()).dump();
    }

    std::string undo() {
        state_ = semcost::undo(state_);
        return snapshot();
    }

    std::string snapshot() const { return snapshot_json(state_).dump(); }
    void save(const std::string& path) const { save_state(state_, path); }
    py::array_t<double> potential() const { return to_array(state_.total_field()); }
    py::array_t<double> edf() const { return to_array(state_.global_edf()); }
    std::vector<double> gains() const { return state_.gains(); }

private:
    SessionState state_;
};

std::string compare(const std::string& scenario_path, const std::vector<std::pair<std::string, std::string>>& prompts,
                    const BackendSpec& backend) {
    std::vector<PromptVariant> variants;
    for (const auto& [label, text] : prompts) variants.push_back({label, text});
    auto b = make_backend(backend);
    return to_json(compare_runs(load_scenario_file(scenario_path), variants, *b)).dump();
}

py::array_t<double> edt(py::array_t<bool, py::array::c_style | py::array::forcecast> mask) {
    if (mask.ndim() != 2) throw PreconditionError("mask must be two-dimensional");
    const int h = static_cast<int>(mask.shape(0)), w = static_cast<int>(mask.shape(1));
    std::vector<unsigned char> cells(mask.data(), mask.data() + mask.size());
    return to_array(euclidean_distance_transform(cells, w, h));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Danger-aware grid planning core";

    // Translators run newest first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<SensorError>(m, "SensorError", PyExc_RuntimeError);
    py::register_exception<NoPathError>(m, "NoPathError", PyExc_RuntimeError);
    py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);

    m.def(
        "update",
        [](double alpha, double beta, double score, double trust_n) {
            const BetaState s = semcost::update(BetaState{alpha, beta}, score, trust_n);
            return std::make_pair(s.alpha, s.beta);
        },
        py::arg("alpha"), py::arg("beta"), py::arg("score"), py::arg("trust_n"));
    m.def(
        "posterior_mean", [](double alpha, double beta) { return semcost::posterior_mean(BetaState{alpha, beta}); },
        py::arg("alpha"), py::arg("beta"));
    m.def("distance_transform", &edt, py::arg("mask"), "Exact Euclidean distance to the nearest true cell, in cells.");

    py::class_<BackendSpec>(m, "Backend")
        .def(py::init([](std::string kind, std::string fixtures, std::string noise, std::uint64_t seed) {
                 return BackendSpec{std::move(kind), std::move(fixtures), std::move(noise), seed};
             }),
             py::arg("kind") = "mock", py::arg("fixtures") = "", py::arg("noise") = "", py::arg("seed") = 1)
        .def_readonly("kind", &BackendSpec::kind)
        .def_readonly("fixtures", &BackendSpec::fixtures);

    py::class_<PySession>(m, "Session")
        .def_static("from_file", &PySession::from_file, py::arg("path"))
        .def_static("from_text", &PySession::from_text, py::arg("text"))
        .def_static("load", &PySession::load, py::arg("path"))
        .def("prompt", &PySession::prompt, py::arg("text"), py::arg("backend") = BackendSpec{},
             py::arg("trust_n") = std::nullopt)
        .def("plan", &PySession::plan, py::arg("gamma") = std::nullopt, py::arg("w1") = std::nullopt,
             py::arg("w2") = std::nullopt)
        .def("undo", &PySession::undo)
        .def("snapshot", &PySession::snapshot)
        .def("save", &PySession::save, py::arg("path"))
        .def("potential", &PySession::potential)
        .def("edf", &PySession::edf)
        .def("gains", &PySession::gains);

    m.def("compare", &compare, py::arg("scenario_path"), py::arg("prompts"), py::arg("backend") = BackendSpec{});
}
