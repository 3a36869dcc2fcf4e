#pragma once

#include "stokolmo/histogram.hpp"
#include "stokolmo/model.hpp"
#include "stokolmo/stats.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokolmo {

struct SimConfig {
    double dt = 1e-3;
    double t_max = 500.0;
    double burn_in = 50.0;
    std::uint64_t seed = 1;
    int n_paths = 200;
    double blowup_log_threshold = 30.0;
    double extinct_log_threshold = -20.0;
    int threads = 0;  // 0: STOKOLMO_THREADS or hardware concurrency

    /// Throws std::invalid_argument on dt <= 0, burn_in >= t_max, non-finite thresholds.
    void validate() const;
    std::size_t steps() const;
    std::size_t burn_in_steps() const;

    nlohmann::json to_json() const;
};

/// Integration failure (expression domain error) with its location.
class SimulationError : public std::runtime_error {
public:
    SimulationError(std::uint64_t path_id, double time, std::vector<double> state, const std::string& cause);
    std::uint64_t path_id() const noexcept { return path_id_; }
    double time() const noexcept { return time_; }
    const std::vector<double>& state() const noexcept { return state_; }

private:
    std::uint64_t path_id_;
    double time_;
    std::vector<double> state_;
};

struct PathEvents {
    bool blowup = false;
    double blowup_time = 0.0;
    /// First time each ln X_i dropped below the extinction threshold (NaN if never).
    std::vector<double> extinction_time;
};

/// Recorded path in log coordinates; X_i = exp(Y_i) > 0 by construction.
struct Trajectory {
    int n = 0;
    double dt = 0.0;
    double burn_in = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> log_states;
    PathEvents events;

    /// CSV with header "t,x1,...,xn,flags"; states in linear space.
    std::string to_csv() const;
};

/// Log-coordinate Euler-Maruyama for one path, recording every `record_every`-th
/// step (the final state is always recorded). Deterministic in (cfg.seed, path_id).
Trajectory simulate_path(const KolmogorovModel& model, std::span<const double> x0, const SimConfig& cfg,
                         std::uint64_t path_id, int record_every = 1);

struct LyapunovEstimate {
    double rate = 0.0;
    bool blowup = false;  // rate was measured on a path that exploded
};

/// (Y_i(t_end) - Y_i(burn_in)) / (t_end - burn_in); t_end is t_max, or the
/// blow-up time for exploded paths (flagged in the result).
LyapunovEstimate empirical_lyapunov(const Trajectory& traj, int species);

/// Time-weighted occupation histogram of a recorded trajectory.
OccupationHistogram occupation_histogram(const Trajectory& traj, const HistogramGrid& grid);

struct EnsembleOptions {
    bool histogram = false;               // pooled post-burn-in occupation histogram
    int windows = 0;                      // equal-length windows over [0, t_max] with their own histograms
    std::optional<HistogramGrid> grid;    // default HistogramGrid::for_dimension(n)
    /// Optional observable h(X) (dimension observable_dim) accumulated after
    /// burn-in into `batches` equal batch means per path.
    std::function<void(std::span<const double> x, std::span<double> out)> observable;
    int observable_dim = 0;
    int batches = 20;
};

struct PathSummary {
    std::vector<double> y_start;
    std::vector<double> y_burn;
    std::vector<double> y_end;
    std::vector<double> y_before_end;  // one step before t_end; finite side of a blow-up step
    double t_end = 0.0;
    PathEvents events;
    std::vector<double> mean_x;        // time average of X after burn-in
    std::vector<double> batch_means;   // batches x observable_dim, row-major
    std::vector<int> batch_counts;
};

struct EnsembleResult {
    int n = 0;
    SimConfig config;
    std::vector<PathSummary> paths;  // indexed by path_id
    std::optional<OccupationHistogram> occupation;
    std::vector<OccupationHistogram> windows;
    int batches = 0;
    int observable_dim = 0;

    std::size_t blowup_count() const;
    /// Empirical exponents of one species over non-exploded paths.
    std::vector<double> lyapunov_samples(int species) const;
    MeanSE lyapunov(int species) const;
    /// Mean over non-exploded paths of the post-burn-in time average of X_i.
    MeanSE occupation_mean(int species) const;
    /// Batch means pooled across paths: one value per batch for observable k.
    std::vector<double> pooled_batch_means(int k) const;
};

EnsembleResult simulate_ensemble(const KolmogorovModel& model, std::span<const double> x0, const SimConfig& cfg,
                                 const EnsembleOptions& options = {});

}  // namespace stokolmo
