#include "stokolmo/assumptions.hpp"
#include "stokolmo/model.hpp"

#include <doctest.h>

#include <random>
#include <string>

using namespace stokolmo;

namespace {

std::string error_path(const std::string& text) {
    try {
        parse_model(std::string_view(text));
    } catch (const ModelError& e) {
        return e.path();
    }
    return "";
}

const char* kCompetition = R"({"n": 2, "lv": {"a": [3, 3], "B": [[-2, -1], [-1, -2]], "g": [1, 1]},
                              "sigma": [[1, 0], [0, 1]]})";

}  // namespace

TEST_CASE("Cholesky factor of a 2x2 covariance") {
    Eigen::MatrixXd s(2, 2);
    s << 4, 2, 2, 3;
    const Eigen::MatrixXd L = cholesky_factor(s);
    CHECK(L(0, 0) == doctest::Approx(2));
    CHECK(L(0, 1) == 0);
    CHECK(L(1, 0) == doctest::Approx(1));
    CHECK(L(1, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK((L * L.transpose() - s).norm() < 1e-14);
}

TEST_CASE("Cholesky multiply-back on random SPD matrices") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int n = 1; n <= 6; ++n) {
        Eigen::MatrixXd A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = z(rng);
        const Eigen::MatrixXd s = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd L = cholesky_factor(s);
        CHECK((L * L.transpose() - s).norm() < 1e-12 * s.norm());
        CHECK(L.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm() == 0);
    }
}

TEST_CASE("Cholesky names the failing minor") {
    Eigen::MatrixXd s(3, 3);
    s << 1, 0, 0, 0, 1, 1, 0, 1, 1;
    try {
        cholesky_factor(s);
        FAIL("expected FactorizationError");
    } catch (const FactorizationError& e) {
        CHECK(e.minor() == 3);
    }
}

TEST_CASE("model validation reports the offending location") {
    CHECK(error_path(R"({"n": 2, "lv": {"a": [1], "B": [[1,0],[0,1]], "g": [1,1]}, "sigma": [[1,0],[0,1]]})") == "$.lv.a");
    CHECK(error_path(R"({"n": 2, "lv": {"a": [1, 1], "B": [[1,0],[0]], "g": [1,1]}, "sigma": [[1,0],[0,1]]})") ==
          "$.lv.B[1]");
    CHECK(error_path(R"({"n": 1, "general": {"f": ["1 +"], "g": ["1"]}, "sigma": [[1]]})") == "$.general.f[0]");
    CHECK(error_path(R"({"n": 1, "general": {"f": ["x2"], "g": ["1"]}, "sigma": [[1]]})") == "$.general.f[0]");
    CHECK(error_path(R"({"n": 1, "lv": {"a": [1], "B": [[-1]], "g": [1]}, "sigma": [[1]], "colour": 1})") == "$.colour");
    CHECK(error_path(R"({"n": 0, "lv": {}, "sigma": []})") == "$.n");
    CHECK(error_path(R"({"n": 1, "sigma": [[1]]})") == "$");
}

TEST_CASE("sigma must be symmetric positive definite") {
    auto msg = [](const std::string& sigma) {
        try {
            parse_model(std::string_view(R"({"n": 2, "lv": {"a": [1, 1], "B": [[-1,0],[0,-1]], "g": [1,1]}, "sigma": )" +
                                         sigma + "}"));
        } catch (const std::exception& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(msg("[[1, 2], [2, 1]]").find("eigenvalue -1") != std::string::npos);
    CHECK(!msg("[[1, 1], [0, 1]]").empty());
    CHECK(!msg("[[1, 1], [1, 1]]").empty());
    CHECK(msg("[[4, 2], [2, 3]]").empty());
}

TEST_CASE("structured LV and its expression form agree") {
    const KolmogorovModel m = parse_model(std::string_view(kCompetition));
    const auto& f = m.drift_expressions();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 20);
    for (int k = 0; k < 1000; ++k) {
        const std::vector<double> x{u(rng), u(rng)};
        for (int i = 0; i < 2; ++i) CHECK(std::abs(m.drift(i, x) - f[i].evaluate(x)) <= 1e-12 * (1 + std::abs(m.drift(i, x))));
    }
}

TEST_CASE("face restriction") {
    const KolmogorovModel m = load_model(STOKOLMO_MODELS_DIR "/two_predators_one_prey.json");
    const Face f13 = Face::of({0, 2});
    const KolmogorovModel r = restrict_to_face(m, f13);
    CHECK(r.n() == 2);
    CHECK(r.species_map() == std::vector<int>{0, 2});
    CHECK(r.is_lv());
    const std::vector<double> xs{1.3, 0.7};
    const std::vector<double> full = embed(f13, 3, xs);
    CHECK(full == std::vector<double>{1.3, 0.0, 0.7});
    for (int i = 0; i < 2; ++i) CHECK(r.drift(i, xs) == doctest::Approx(m.drift(f13.species()[i], full)));
    // restricting to the whole face is the identity; restricting twice composes
    const KolmogorovModel again = restrict_to_face(r, Face::full(2));
    CHECK(again.to_json() == r.to_json());
    const KolmogorovModel one = restrict_to_face(r, Face::of({1}));
    CHECK(one.species_map() == std::vector<int>{2});
    CHECK(one.drift(0, std::vector<double>{0.5}) == doctest::Approx(m.drift(2, std::vector<double>{0, 0, 0.5})));
}

TEST_CASE("general model restriction pins variables to zero") {
    const KolmogorovModel m = load_model(STOKOLMO_MODELS_DIR "/general_3d.json");
    const KolmogorovModel r = restrict_to_face(m, Face::of({2}));
    CHECK(r.n() == 1);
    CHECK(r.drift(0, std::vector<double>{2}) == doctest::Approx(m.drift(2, std::vector<double>{0, 0, 2})));
    CHECK(r.noise(0, std::vector<double>{2}) == doctest::Approx(m.noise(2, std::vector<double>{0, 0, 2})));
}

TEST_CASE("model JSON round trip") {
    for (const char* name : {"lv_coexist", "general_2d", "correlated_competition"}) {
        const KolmogorovModel m = load_model(std::string(STOKOLMO_MODELS_DIR "/") + name + ".json");
        const KolmogorovModel back = parse_model(m.to_json());
        CHECK(back.to_json() == m.to_json());
    }
}

TEST_CASE("face labels") {
    CHECK(Face{}.label() == "{}");
    CHECK(Face::of({0, 2}).label() == "{1,3}");
    CHECK(Face::of({0}).strictly_inside(Face::of({0, 1})));
    CHECK(!Face::of({0, 1}).strictly_inside(Face::of({0, 1})));
}

TEST_CASE("assumption checks on the bundled regimes") {
    const auto coop = check_assumptions(load_model(STOKOLMO_MODELS_DIR "/coop_blowup.json"));
    CHECK(coop.tightness.status == CheckStatus::Fail);
    CHECK(coop.tightness.rationale.find("b_1b_2-c_1c_2<0") != std::string::npos);
    const auto comp = check_assumptions(load_model(STOKOLMO_MODELS_DIR "/lv_coexist.json"));
    CHECK(comp.tightness.status == CheckStatus::Pass);
    CHECK(comp.growth.status == CheckStatus::Pass);
    CHECK(is_pass(comp.nondegenerate.status));
    const auto pp = check_assumptions(load_model(STOKOLMO_MODELS_DIR "/predator_prey.json"));
    CHECK(pp.tightness.status == CheckStatus::Pass);
}

TEST_CASE("growth condition fails for noise growing with the state") {
    const KolmogorovModel m = parse_model(std::string_view(
        R"({"n": 2, "general": {"f": ["1 - x1", "1 - x2"], "g": ["1 + x1", "1 + x2"]}, "sigma": [[1,0],[0,1]]})"));
    CHECK(is_failure(check_growth_condition(m).status));
    const KolmogorovModel h = parse_model(std::string_view(
        R"j({"n": 1, "general": {"f": ["1 - x1^2"], "g": ["1 + 0.5*x1/(1+x1)"]}, "sigma": [[1]]})j"));
    CHECK(check_growth_condition(h).status == CheckStatus::HeuristicPass);
    // decays like r^-1/2 but is still above the 1e-3 cut at r = 1e4
    const KolmogorovModel slow = parse_model(std::string_view(
        R"j({"n": 1, "general": {"f": ["1 - x1"], "g": ["1 + 0.5*x1/(1+x1)"]}, "sigma": [[1]]})j"));
    const CheckResult r = check_growth_condition(slow);
    CHECK(r.status == CheckStatus::HeuristicFail);
    CHECK(r.rationale.find("decreasing") == std::string::npos);
    CHECK(r.witness_value == doctest::Approx(1.5 * 1.5 * 100 / (1 + 9999 + 2.25)).epsilon(1e-3));
}

TEST_CASE("zero noise is degenerate") {
    const KolmogorovModel m = parse_model(std::string_view(
        R"({"n": 1, "general": {"f": ["1 - x1"], "g": ["0"]}, "sigma": [[1]]})"));
    CHECK(is_failure(check_nondegeneracy(m).status));
}

TEST_CASE("tightness of predator-prey chains through cancelling weights") {
    const KolmogorovModel m = parse_model(std::string_view(R"({"n": 3,
        "lv": {"a": [3, -1, -1], "B": [[-1, -1, 0], [4, -1, -1], [0, 3, -1]], "g": [1, 1, 1]},
        "sigma": [[1,0,0],[0,1,0],[0,0,1]]})"));
    const CheckResult r = check_tightness(m);
    REQUIRE(r.status == CheckStatus::Pass);
    // c_1 B_12 + c_2 B_21 = 0 and c_2 B_23 + c_3 B_32 = 0
    CHECK(r.weights[0] * -1 + r.weights[1] * 4 == doctest::Approx(0).epsilon(1e-12));
    CHECK(r.weights[1] * -1 + r.weights[2] * 3 == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("growth condition for singular interaction matrices") {
    const KolmogorovModel ok = parse_model(std::string_view(
        R"({"n": 2, "lv": {"a": [1, 1], "B": [[-1, -1], [-1, -1]], "g": [1, 1]}, "sigma": [[1,0],[0,1]]})"));
    CHECK(check_growth_condition(ok).status == CheckStatus::Pass);
    // (1, 1) is a nonnegative null direction: f stays bounded along it
    const KolmogorovModel flat = parse_model(std::string_view(
        R"({"n": 2, "lv": {"a": [1, 1], "B": [[-1, 1], [1, -1]], "g": [1, 1]}, "sigma": [[1,0],[0,1]]})"));
    CHECK(check_growth_condition(flat).status != CheckStatus::Pass);
}
