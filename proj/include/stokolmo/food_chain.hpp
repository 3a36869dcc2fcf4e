#pragma once

#include "stokolmo/classifier.hpp"
#include "stokolmo/model.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace stokolmo {

/// Simple food chain
///   dX_1 = X_1 (a_10 - a_11 X_1 - a_12 X_2) dt + X_1 dE_1
///   dX_j = X_j (-a_j0 + a_{j,j-1} X_{j-1} - a_jj X_j - a_{j,j+1} X_{j+1}) dt + X_j dE_j
/// with diagonal noise covariance. JSON keys: "a0" (a_10, a_20, ..., a_n0, death
/// rates positive), "self" (a_jj), "up" (a_{j,j-1}, j = 2..n), "down"
/// (a_{j-1,j}, j = 2..n), optional "sigma_diag" (default 1).
struct FoodChainParams {
    std::vector<double> a0;
    std::vector<double> self;
    std::vector<double> up;
    std::vector<double> down;
    std::vector<double> sigma;

    int n() const { return static_cast<int>(a0.size()); }
    void validate() const;  // throws ModelError
    nlohmann::json to_json() const;
};

FoodChainParams parse_food_chain(const nlohmann::json& doc);
FoodChainParams load_food_chain(const std::string& path);

/// The chain as a structured LV model.
KolmogorovModel food_chain_model(const FoodChainParams& params);

struct FoodChainVerdict {
    Verdict::Kind kind = Verdict::Kind::Inconclusive;
    int j_star = 0;
    std::vector<double> a_tilde;              // stochastic growth/death rates
    std::vector<double> invasion;             // I_1 .. I_{j*+1} (as far as computed)
    std::vector<std::vector<double>> x;       // x^(j) for j = 1 .. (as far as solved)
    std::vector<double> residuals;            // max-norm residual of each solve
    std::vector<PredictedRate> extinct_rates; // species j*+1 .. n
    std::vector<std::string> reasons;

    /// Zero-based indices of the persisting species.
    std::vector<int> survivors() const;
    nlohmann::json to_json() const;
};

/// Depth-by-depth invasion analysis of the chain.
FoodChainVerdict classify_food_chain(const FoodChainParams& params, double tol = 1e-9);

/// Solves the depth-j equilibrium system; returns the residual through `residual`.
std::vector<double> food_chain_equilibrium(const FoodChainParams& params, int depth, double* residual = nullptr);

}  // namespace stokolmo
