#include "stokolmo/boundary.hpp"
#include "stokolmo/density1d.hpp"
#include "stokolmo/engine.hpp"

#include <doctest.h>

#include <cmath>

using namespace stokolmo;

namespace {

StationaryDensity1D logistic(double a, double b, double sigma) {
    return StationaryDensity1D::compute([a, b](double u) { return a - b * u; }, [](double) { return 1.0; }, sigma);
}

// Gamma(shape 2a/sigma - 1, rate 2b/sigma) density, written out independently
double gamma_density(double a, double b, double sigma, double u) {
    const double k = 2 * a / sigma - 1, r = 2 * b / sigma;
    return std::exp(k * std::log(r) + (k - 1) * std::log(u) - r * u - std::lgamma(k));
}

}  // namespace

TEST_CASE("logistic edge: mean, mass and closed-form density") {
    const StationaryDensity1D d = logistic(2, 1, 1);
    CHECK(std::abs(d.mean() - 1.5) < 1.5e-6);
    CHECK(std::abs(d.total_mass() - 1) < 1e-8);
    for (double u : {0.01, 0.3, 1.0, 1.5, 4.0, 9.0})
        CHECK(d.density_at(u) == doctest::Approx(gamma_density(2, 1, 1, u)).epsilon(1e-7));
    for (double p : d.density()) CHECK(p >= 0);
    CHECK(d.upper_tail_mass() < 1e-6);
}

TEST_CASE("closed-form logistic mean over a parameter sweep") {
    for (double a : {0.8, 2.0, 5.0})
        for (double b : {0.5, 1.0, 3.0})
            for (double s : {0.5, 1.0, 1.5}) {
                if (a <= s / 2 + 0.05) continue;
                const StationaryDensity1D d = logistic(a, b, s);
                const double exact = (2 * a - s) / (2 * b);
                CHECK(std::abs(d.mean() - exact) < 1e-6 * exact);
            }
}

TEST_CASE("no density when the origin is not repelling") {
    CHECK_THROWS_AS(logistic(0.5, 1, 1), NoInvariantMeasure);
    CHECK_THROWS_AS(logistic(0.2, 1, 1), NoInvariantMeasure);
}

TEST_CASE("no density when the upper tail does not decay") {
    CHECK_THROWS_AS(StationaryDensity1D::compute([](double) { return 1.0; }, [](double) { return 1.0; }, 1.0),
                    NoInvariantMeasure);
}

TEST_CASE("zero-flux Fokker-Planck residual for state-dependent noise") {
    auto f = [](double u) { return 3 - u; };
    auto g = [](double u) { return 1 + 0.5 * u / (1 + u); };
    const double sigma = 1.0;
    const StationaryDensity1D d = StationaryDensity1D::compute(f, g, sigma);
    CHECK(std::abs(d.total_mass() - 1) < 1e-8);
    // J(u) = u f(u) p(u) - sigma/2 d/du[u^2 g(u)^2 p(u)] vanishes identically
    auto w = [&](double u) { return u * u * g(u) * g(u) * d.density_at(u); };
    const double h = 1e-3;
    for (double u : {0.2, 0.7, 1.5, 2.5, 4.0, 6.0}) {
        const double dw = (-w(u + 2 * h) + 8 * w(u + h) - 8 * w(u - h) + w(u - 2 * h)) / (12 * h);
        const double flux = u * f(u) * d.density_at(u) - 0.5 * sigma * dw;
        CHECK(std::abs(flux) < 1e-6);
    }
}

TEST_CASE("quadrature and Monte Carlo agree on a non-LV edge") {
    const KolmogorovModel m = load_model(STOKOLMO_MODELS_DIR "/general_2d.json");
    const StationaryDensity1D d = stationary_density_1d(m, 0);
    const KolmogorovModel edge = restrict_to_face(m, Face::of({0}));
    SimConfig c;
    c.t_max = 200;
    c.burn_in = 20;
    c.n_paths = 128;
    const MeanSE mc = simulate_ensemble(edge, std::vector<double>{1}, c).occupation_mean(0);
    CHECK(std::abs(mc.mean - d.mean()) < 0.01 * d.mean());
}

TEST_CASE("CSV export") {
    const StationaryDensity1D d = logistic(2, 1, 1);
    const std::string csv = d.to_csv();
    CHECK(csv.rfind("u,p\n", 0) == 0);
    CHECK(d.grid().size() == 400);
}
