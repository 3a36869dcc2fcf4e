#pragma once

#include "stokolmo/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace stokolmo {

enum class CheckStatus {
    Pass,           // established analytically
    SampledPass,    // holds at every sampled point; not a proof
    HeuristicPass,  // asymptotic condition satisfied and improving at the largest sampled radius
    Heuristic,      // sampling could not decide
    HeuristicFail,  // sampling shows the asymptotic condition failing
    Fail,           // established analytically, or a concrete counterexample
};

std::string to_string(CheckStatus s);
bool is_failure(CheckStatus s);
bool is_pass(CheckStatus s);

struct CheckResult {
    CheckStatus status = CheckStatus::Heuristic;
    std::string method;
    std::string rationale;
    std::vector<double> witness;       // point where the tested inequality fails
    double witness_value = 0.0;        // the offending quantity at the witness
    std::vector<double> weights;       // tightness: the vector c used

    nlohmann::json to_json() const;
};

struct AssumptionReport {
    CheckResult nondegenerate;
    CheckResult tightness;
    CheckResult growth;
    std::vector<std::string> notes;

    nlohmann::json to_json() const;
};

struct SampleSpec {
    double radius = 10.0;       // grid spans [0, radius]^n
    int min_points = 100;
    int random_points = 64;
    std::uint64_t seed = 12345;
};

/// Positive definiteness of (g_i(x) g_j(x) sigma_ij) on sampled points of [0, R]^n.
/// Throws DomainError (message extended with the point) if f/g cannot be evaluated.
CheckResult check_nondegeneracy(const KolmogorovModel& model, const SampleSpec& spec = {});

/// Tightness condition on the drift/noise balance at infinity.
CheckResult check_tightness(const KolmogorovModel& model);

/// Growth condition: ||x||^d1 sum g_i^2 / (1 + sum(|f_i| + g_i^2)) -> 0 with d1 = 0.5.
CheckResult check_growth_condition(const KolmogorovModel& model);

AssumptionReport check_assumptions(const KolmogorovModel& model, const SampleSpec& spec = {});

/// Rays used for asymptotic checks: 2n axis-like directions plus `random_rays`
/// random directions in the open orthant, each normalised to unit L1 norm.
std::vector<std::vector<double>> asymptotic_rays(int n, int random_rays = 50, std::uint64_t seed = 7);

/// The bracketed tightness quantity without the gamma_b term, divided by
/// 1 + sum(|f_i| + g_i^2).
double tightness_ratio(const KolmogorovModel& model, std::span<const double> c, std::span<const double> x);

}  // namespace stokolmo
