#pragma once

#include "stokolmo/classifier.hpp"
#include "stokolmo/engine.hpp"
#include "stokolmo/histogram.hpp"
#include "stokolmo/stats.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace stokolmo {

/// Half the L1 distance between the cell masses. Throws std::invalid_argument
/// when the grids differ.
double tv_distance(const OccupationHistogram& a, const OccupationHistogram& b);

struct VerifyConfig {
    SimConfig sim;
    std::vector<double> x0;        // default: all ones
    int windows = 10;              // TV curve resolution
    double tv_threshold = 0.05;
    double moment_rel_tol = 0.03;  // interior LV moments
    double band = 3.0;             // standard errors
    double max_unassigned = 0.1;

    nlohmann::json to_json() const;
};

struct CheckOutcome {
    std::string name;
    double value = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;

    nlohmann::json to_json() const;
};

struct BasinEstimate {
    std::vector<Face> faces;              // one per attracting measure
    std::vector<std::size_t> counts;
    std::vector<Proportion> probability;  // Wilson interval, z = 3
    std::size_t interior = 0;
    std::size_t blowup = 0;
    std::size_t unassigned = 0;
    std::size_t total = 0;
    bool low_confidence = false;          // more than max_unassigned of paths unassigned
    std::vector<int> assignment;          // per path: face index, or -1 interior, -2 blow-up, -3 unassigned

    nlohmann::json to_json() const;
};

/// Assigns each path by the set of species with ln X_i(T) >= extinct threshold.
BasinEstimate classify_paths(const EnsembleResult& ensemble, const std::vector<Face>& faces, double max_unassigned = 0.1);

BasinEstimate estimate_basin_probabilities(const KolmogorovModel& model, const std::vector<Face>& m1_faces,
                                           std::span<const double> x0, const SimConfig& cfg,
                                           double max_unassigned = 0.1);

struct BlowupSignature {
    std::vector<double> weights;  // S = w_1 ln X_1 + w_2 ln X_2
    MeanSE slope;
    Proportion blowup_fraction;
    std::size_t blowups = 0;
    std::size_t paths = 0;
    bool detected = false;  // slope - 3 SE > 0

    nlohmann::json to_json() const;
};

/// Time slope of b_2 ln X_1 + b_1 ln X_2 per path, with b the LV self-limitation
/// (weights 1 for general models). Two-species models only.
BlowupSignature detect_blowup_signature(const KolmogorovModel& model, std::span<const double> x0, const SimConfig& cfg);

struct EnsembleReport {
    std::string verdict_kind;
    std::vector<MeanSE> lyapunov;
    BasinEstimate paths;
    std::vector<double> tv_curve;
    std::vector<MeanSE> occupation_means;
    std::optional<BlowupSignature> blowup;
    std::vector<CheckOutcome> checks;
    bool passed = true;
    std::vector<std::string> failures;

    nlohmann::json to_json() const;
};

/// Simulates the model and compares the ensemble with the verdict. Never
/// modifies the classification.
EnsembleReport verify_verdict(const KolmogorovModel& model, const Classification& classification,
                              const VerifyConfig& cfg);

}  // namespace stokolmo
