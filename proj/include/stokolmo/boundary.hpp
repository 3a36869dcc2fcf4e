#pragma once

#include "stokolmo/assumptions.hpp"
#include "stokolmo/density1d.hpp"
#include "stokolmo/engine.hpp"
#include "stokolmo/model.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace stokolmo {

struct DiracOrigin {};

/// First moments of an LV face measure, one per species of the face in
/// increasing order.
struct LvMoments {
    std::vector<double> moments;
    double residual = 0.0;
};

struct Density1D {
    std::shared_ptr<const StationaryDensity1D> density;
};

/// Monte Carlo estimate of a face measure: invasion rates of every species of
/// the full model, estimated as time averages with batch-means CIs.
struct Empirical {
    std::vector<double> lambda;
    std::vector<double> ci;
    std::vector<double> mean_x;  // time-averaged state, face species only
    int paths = 0;
    double t_max = 0.0;
    double dt = 0.0;
};

enum class Provenance { Analytic, Quadrature, MonteCarlo };
std::string to_string(Provenance p);

struct ErgodicMeasure {
    Face support;
    std::variant<DiracOrigin, LvMoments, Density1D, Empirical> representation;
    Provenance provenance = Provenance::Analytic;

    /// "delta*" for the origin, otherwise "mu{1,2}".
    std::string name() const;
    nlohmann::json to_json() const;
};

struct InvasionRateTable {
    std::vector<ErgodicMeasure> measures;
    Eigen::MatrixXd lambda;  // measures x species
    Eigen::MatrixXd ci;      // half-widths, 0 for analytic entries
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> low_confidence;

    int species() const { return static_cast<int>(lambda.cols()); }
    int index_of(Face support) const;  // -1 if absent
    nlohmann::json to_json() const;
};

enum class Sign { Positive, Negative, Undetermined };
std::string to_string(Sign s);
/// Sign of lambda that survives its CI and the decision tolerance.
Sign sign_of(double lambda, double ci, double tol);

struct AnalysisConfig {
    enum class Representation { Auto, MonteCarlo };

    double decision_tol = 1e-9;
    DensityOptions density;
    SimConfig mc = default_mc();
    int batches = 20;
    double max_ci = 0.05;  // wider Monte Carlo CIs are flagged low-confidence
    Representation representation = Representation::Auto;
    SampleSpec sampling;

    static SimConfig default_mc();
    nlohmann::json to_json() const;
};

struct FaceEquilibrium {
    enum class Status { Ok, Singular, NonPositive };
    Status status = Status::Ok;
    std::vector<double> moments;
    double residual = 0.0;
};
std::string to_string(FaceEquilibrium::Status s);

/// Solves a_i - sigma_ii g_i^2 / 2 + sum_{j in I} B_ij m_j = 0 over the face I.
/// Requires an LV model.
FaceEquilibrium lv_face_equilibrium(const KolmogorovModel& model, Face face);

/// Density of the 1-D edge subsystem of `species`; the integration anchor is the
/// logistic mode when the model is LV and the mode is positive.
StationaryDensity1D stationary_density_1d(const KolmogorovModel& model, int species, const DensityOptions& options = {});

/// Plain-function form for arbitrary 1-D coefficients.
StationaryDensity1D stationary_density_1d(StationaryDensity1D::Fn f, StationaryDensity1D::Fn g, double sigma,
                                          const DensityOptions& options = {});

struct FaceRecord {
    enum class Status { Interior, NoInterior, Unresolved };
    Face face;
    Status status = Status::NoInterior;
    double t_star = 0.0;  // maximin margin of the restricted table (pessimistic)
    std::string reason;
};
std::string to_string(FaceRecord::Status s);

struct BoundaryAnalysis {
    std::vector<ErgodicMeasure> measures;
    InvasionRateTable table;
    std::vector<FaceRecord> faces;
    std::vector<Face> unresolved;

    bool complete() const { return unresolved.empty(); }
    nlohmann::json to_json() const;
};

/// Bottom-up walk over the proper faces. The origin is always included; a face
/// gets one interior measure iff its restricted table passes the persistence
/// test. Faces whose subfaces are unresolved are unresolved themselves.
BoundaryAnalysis find_boundary_measures(const KolmogorovModel& model, const AnalysisConfig& config = {});

InvasionRateTable invasion_rates(const KolmogorovModel& model, const std::vector<ErgodicMeasure>& measures,
                                 const AnalysisConfig& config = {});

/// Interior measure of the face subsystem estimated by simulation.
ErgodicMeasure monte_carlo_measure(const KolmogorovModel& model, Face face, const AnalysisConfig& config);

}  // namespace stokolmo
