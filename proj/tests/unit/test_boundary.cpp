#include "stokolmo/boundary.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace stokolmo;

namespace {

KolmogorovModel bundled(const std::string& name) { return load_model(STOKOLMO_MODELS_DIR "/" + name + ".json"); }

std::vector<std::string> names(const BoundaryAnalysis& b) {
    std::vector<std::string> v;
    for (const auto& m : b.measures) v.push_back(m.name());
    return v;
}

}  // namespace

TEST_CASE("logistic face moment") {
    const KolmogorovModel m = bundled("logistic");
    const FaceEquilibrium eq = lv_face_equilibrium(m, Face::of({0}));
    REQUIRE(eq.status == FaceEquilibrium::Status::Ok);
    CHECK(eq.moments[0] == doctest::Approx((2 * 2.0 - 1.0) / (2 * 1.0)));
}

TEST_CASE("interior moments of the symmetric competitive instance") {
    const KolmogorovModel m = bundled("lv_coexist");
    const FaceEquilibrium eq = lv_face_equilibrium(m, Face::full(2));
    REQUIRE(eq.status == FaceEquilibrium::Status::Ok);
    // Cramer's rule on 2 m1 + m2 = 2.5, m1 + 2 m2 = 2.5
    const double det = 2 * 2 - 1 * 1;
    CHECK(eq.moments[0] == doctest::Approx((2.5 * 2 - 1 * 2.5) / det).epsilon(1e-14));
    CHECK(eq.moments[1] == doctest::Approx((2 * 2.5 - 2.5 * 1) / det).epsilon(1e-14));
    CHECK(eq.residual < 1e-10);
}

TEST_CASE("singular and nonpositive face systems") {
    const KolmogorovModel s = parse_model(std::string_view(
        R"({"n": 2, "lv": {"a": [2, 2], "B": [[-1, -1], [-1, -1]], "g": [1, 1]}, "sigma": [[1,0],[0,1]]})"));
    CHECK(lv_face_equilibrium(s, Face::full(2)).status == FaceEquilibrium::Status::Singular);
    const KolmogorovModel b = bundled("lv_extinction");
    CHECK(lv_face_equilibrium(b, Face::full(2)).status == FaceEquilibrium::Status::NonPositive);
}

TEST_CASE("coexistence instance has delta*, mu1, mu2") {
    const KolmogorovModel m = bundled("lv_coexist");
    const BoundaryAnalysis b = find_boundary_measures(m);
    CHECK(names(b) == std::vector<std::string>{"delta*", "mu{1}", "mu{2}"});
    for (int k = 1; k <= 2; ++k) {
        const auto& lm = std::get<LvMoments>(b.measures[k].representation);
        CHECK(lm.moments[0] == doctest::Approx(1.25));
    }
    CHECK(stationary_density_1d(m, 0).mean() == doctest::Approx(1.25).epsilon(1e-8));
    const InvasionRateTable& t = b.table;
    CHECK(t.lambda(0, 0) == doctest::Approx(2.5));
    CHECK(t.lambda(1, 1) == doctest::Approx(1.25));
    CHECK(t.lambda(2, 0) == doctest::Approx(1.25));
}

TEST_CASE("one species below the noise threshold has only delta*") {
    const KolmogorovModel m = parse_model(std::string_view(
        R"({"n": 1, "lv": {"a": [0.3], "B": [[-1]], "g": [1]}, "sigma": [[1]]})"));
    const BoundaryAnalysis b = find_boundary_measures(m);
    CHECK(names(b) == std::vector<std::string>{"delta*"});
    CHECK(b.faces.empty());
}

TEST_CASE("two predators and one prey") {
    const BoundaryAnalysis b = find_boundary_measures(bundled("two_predators_one_prey"));
    CHECK(names(b) == std::vector<std::string>{"delta*", "mu{1}", "mu{1,2}"});
    CHECK(b.complete());
    const InvasionRateTable& t = b.table;
    CHECK(t.lambda(0, 0) > 0);
    CHECK(t.lambda(1, 1) > 0);
    CHECK(t.lambda(1, 2) < 0);
    const auto& lm = std::get<LvMoments>(b.measures[2].representation);
    CHECK(lm.moments[0] == doctest::Approx(2));
    CHECK(lm.moments[1] == doctest::Approx(0.5));
}

TEST_CASE("invasion rates of the single-extinction instance") {
    const KolmogorovModel m = bundled("lv_extinction");
    const BoundaryAnalysis b = find_boundary_measures(m);
    const InvasionRateTable& t = b.table;
    const int d = t.index_of(Face{}), mu1 = t.index_of(Face::of({0}));
    REQUIRE(mu1 >= 0);
    CHECK(t.lambda(d, 0) == 4 - 0.5);
    CHECK(t.lambda(d, 1) == 1 - 0.5);
    // a_2 - sigma_22/2 - c_2 (2 a_1 - sigma_11) / (2 b_1)
    CHECK(t.lambda(mu1, 1) == doctest::Approx(1 - 0.5 - 2 * (2 * 4 - 1) / 2.0).epsilon(1e-14));
    CHECK(std::abs(t.lambda(mu1, 0)) < 1e-12);
    CHECK(t.ci(mu1, 1) == 0);
}

TEST_CASE("unresolved faces poison every superface") {
    const KolmogorovModel m = parse_model(std::string_view(R"({"n": 3,
        "lv": {"a": [0.5, 3, 3], "B": [[-2, -1, -1], [-1, -2, -1], [-1, -1, -2]], "g": [1, 1, 1]},
        "sigma": [[1,0,0],[0,1,0],[0,0,1]]})"));
    const BoundaryAnalysis b = find_boundary_measures(m);
    CHECK(!b.complete());
    std::vector<std::string> un;
    for (Face f : b.unresolved) un.push_back(f.label());
    CHECK(un == std::vector<std::string>{"{1}", "{1,2}", "{1,3}"});
    for (const auto& f : b.faces)
        for (Face u : b.unresolved)
            if (u.strictly_inside(f.face)) CHECK(f.status == FaceRecord::Status::Unresolved);
}

TEST_CASE("Monte Carlo representation agrees with the analytic one") {
    const KolmogorovModel m = bundled("lv_coexist");
    AnalysisConfig mc;
    mc.representation = AnalysisConfig::Representation::MonteCarlo;
    const BoundaryAnalysis a = find_boundary_measures(m);
    const BoundaryAnalysis e = find_boundary_measures(m, mc);
    REQUIRE(names(a) == names(e));
    CHECK(e.measures[1].provenance == Provenance::MonteCarlo);
    for (Eigen::Index r = 0; r < a.table.lambda.rows(); ++r)
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(std::abs(a.table.lambda(r, i) - e.table.lambda(r, i)) <= e.table.ci(r, i) + 1e-12);
        }
    CHECK(e.table.ci(1, 1) > 0);
}

TEST_CASE("general models use quadrature on edges and simulation on larger faces") {
    const BoundaryAnalysis b = find_boundary_measures(bundled("general_3d"));
    CHECK(names(b) == std::vector<std::string>{"delta*", "mu{1}", "mu{2}", "mu{1,2}"});
    CHECK(b.measures[1].provenance == Provenance::Quadrature);
    CHECK(b.measures[3].provenance == Provenance::MonteCarlo);
    const InvasionRateTable& t = b.table;
    for (int i = 0; i < 2; ++i) CHECK(std::abs(t.lambda(3, i)) <= std::max(1e-10, t.ci(3, i)));
    CHECK(t.lambda(3, 2) + t.ci(3, 2) < 0);
}

TEST_CASE("rates vanish on the support for every bundled model") {
    for (const auto& entry : std::filesystem::directory_iterator(STOKOLMO_MODELS_DIR)) {
        if (entry.path().filename().string().rfind("food_chain", 0) == 0) continue;
        const KolmogorovModel m = load_model(entry.path().string());
        const BoundaryAnalysis b = find_boundary_measures(m);
        for (Eigen::Index r = 0; r < b.table.lambda.rows(); ++r)
            for (int i : b.measures[r].support.species()) {
                INFO(entry.path().filename().string() << " " << b.measures[r].name() << " species " << i + 1);
                CHECK(std::abs(b.table.lambda(r, i)) <= std::max(1e-10, b.table.ci(r, i)));
            }
    }
}
