#include "stokolmo/boundary.hpp"
#include "stokolmo/classifier.hpp"
#include "stokolmo/engine.hpp"
#include "stokolmo/food_chain.hpp"
#include "stokolmo/lp.hpp"
#include "stokolmo/report.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace stokolmo;

namespace {

KolmogorovModel model_from(const std::string& text) { return parse_model(std::string_view(text)); }

std::string classify_json(const std::string& model, std::uint64_t seed) {
    AnalysisConfig cfg;
    cfg.mc.seed = seed;
    return canonical_json(classify(model_from(model), cfg).to_json());
}

std::string check_json(const std::string& model) { return canonical_json(check_assumptions(model_from(model)).to_json()); }

py::dict simulate(const std::string& model, std::vector<double> x0, double t, double dt, std::uint64_t seed, int every) {
    SimConfig cfg;
    cfg.t_max = t;
    cfg.dt = dt;
    cfg.burn_in = 0.0;
    cfg.seed = seed;
    Trajectory tr;
    {
        py::gil_scoped_release release;
        tr = simulate_path(model_from(model), x0, cfg, 0, every);
    }
    py::dict d;
    d["t"] = tr.times;
    d["log_x"] = tr.log_states;
    d["blowup"] = tr.events.blowup;
    return d;
}

py::tuple maximin(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("empty table");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) throw std::invalid_argument("ragged table");
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    }
    const MaximinResult res = maximin_weights(m);
    return py::make_tuple(res.p, res.t_star);
}

std::string food_chain_json(const std::string& params) {
    return canonical_json(classify_food_chain(parse_food_chain(nlohmann::json::parse(params))).to_json());
}

double logistic_mean(double a, double b, double sigma) {
    const double s = sigma;
    return stationary_density_1d([a, b](double u) { return a - b * u; }, [](double) { return 1.0; }, s).mean();
}

}  // namespace

PYBIND11_MODULE(_stokolmo, m) {
    m.doc() = "Persistence and extinction analysis of stochastic Kolmogorov systems";
    m.attr("__version__") = STOKOLMO_VERSION;
    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    m.def("classify_json", &classify_json, py::arg("model"), py::arg("seed") = 1);
    m.def("check_json", &check_json, py::arg("model"));
    m.def("simulate", &simulate, py::arg("model"), py::arg("x0"), py::arg("t"), py::arg("dt") = 1e-3,
          py::arg("seed") = 1, py::arg("every") = 1);
    m.def("maximin_weights", &maximin, py::arg("table"));
    m.def("food_chain_json", &food_chain_json, py::arg("params"));
    m.def("logistic_mean", &logistic_mean, py::arg("a"), py::arg("b"), py::arg("sigma"));
}
