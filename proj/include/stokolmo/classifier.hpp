#pragma once

#include "stokolmo/assumptions.hpp"
#include "stokolmo/boundary.hpp"
#include "stokolmo/lp.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace stokolmo {

/// Weights p (p_i >= 1e-6, sum 1) with min_mu sum_i p_i lambda_i(mu) = 2 rho_star > 0.
struct PersistenceCertificate {
    std::vector<double> p;
    double rho_star = 0.0;

    nlohmann::json to_json() const;
};

struct PersistenceCheck {
    Decision decision = Decision::Undetermined;
    std::optional<PersistenceCertificate> certificate;
    double t_star = 0.0;       // margin on the pessimistic table
    int argmin = -1;           // measure attaining the minimum
    std::string refusal;       // empty when certified
};

/// Maximin test over every measure and every species of the table.
PersistenceCheck check_persistence(const InvasionRateTable& table, double tol = 1e-9);

/// The extinction condition for measure `mu`: every off-support rate is
/// negative and, unless mu is the origin, the measures on the boundary of its
/// support are invadable by its own species (maximin over those rows and
/// columns > 0).
Decision check_extinction_measure(int mu, const InvasionRateTable& table, double tol = 1e-9);

struct MeasurePartition {
    std::vector<int> m1;        // attracting measures
    std::vector<int> m2;        // the rest
    std::string m2_status;      // "pass" | "fail" | "vacuous" | "undetermined"
    bool decidable = true;
    std::vector<std::string> reasons;

    nlohmann::json to_json(const InvasionRateTable& table) const;
};

/// Splits M into attracting measures and the rest, and tests whether every
/// convex combination of the rest has a positive invasion rate.
MeasurePartition partition_measures(const InvasionRateTable& table, double tol = 1e-9);

struct PredictedRate {
    int species = 0;  // zero-based
    double lambda = 0.0;
    double ci = 0.0;
};

struct ExtinctionPrediction {
    int measure = 0;
    std::vector<PredictedRate> rates;  // species outside the support
};

struct Verdict {
    enum class Kind { Persistent, Extinction, BlowUpRisk, Inconclusive };
    Kind kind = Kind::Inconclusive;
    std::optional<PersistenceCertificate> certificate;
    std::optional<MeasurePartition> partition;
    std::vector<ExtinctionPrediction> predictions;
    /// Extinction only: "attractor-decomposition" when growth and M2 conditions
    /// hold (almost-sure convergence to one of the M1 measures), otherwise
    /// "boundary-convergence" (the smallest species tends to 0 in mean).
    std::string conclusion;
    std::vector<std::string> reasons;

    nlohmann::json to_json(const InvasionRateTable* table = nullptr) const;
};

std::string to_string(Verdict::Kind k);

struct Classification {
    AssumptionReport assumptions;
    std::optional<BoundaryAnalysis> boundary;
    Verdict verdict;

    const InvasionRateTable* table() const { return boundary ? &boundary->table : nullptr; }
    nlohmann::json to_json() const;
};

/// Full pipeline; never throws for model-level failures (they become verdicts).
Classification classify(const KolmogorovModel& model, const AnalysisConfig& config = {});

/// Verdict from an already computed table plus assumption statuses.
Verdict verdict_from_table(const InvasionRateTable& table, const AssumptionReport& assumptions, double tol = 1e-9);

}  // namespace stokolmo
