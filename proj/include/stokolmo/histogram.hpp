#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace stokolmo {

/// Uniform bins in log space, identical on every axis. Each axis also gets an
/// underflow bin (index 0) and an overflow bin (index bins + 1).
struct HistogramGrid {
    double log_lo = -6.0;
    double log_hi = 4.0;
    int bins = 20;

    /// Default grid for an n-species system: bins per axis shrink with n so the
    /// total cell count stays near 4096.
    static HistogramGrid for_dimension(int n);
    bool operator==(const HistogramGrid&) const = default;
};

/// Time-weighted occupation histogram of a path (or pooled paths) in log
/// coordinates. Counts are integers (one per time step), so merging is exact
/// and independent of order.
class OccupationHistogram {
public:
    OccupationHistogram() = default;
    OccupationHistogram(int n, HistogramGrid grid, double dt);

    void add(std::span<const double> log_state);
    void merge(const OccupationHistogram& other);

    int dimension() const noexcept { return n_; }
    const HistogramGrid& grid() const noexcept { return grid_; }
    std::uint64_t total_count() const noexcept { return total_; }
    double total_time() const noexcept { return static_cast<double>(total_) * dt_; }
    /// Count of samples that fell in an underflow or overflow bin on any axis.
    std::uint64_t out_of_grid_count() const noexcept { return out_of_grid_; }
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

    /// Probability per cell (sums to 1 when nonempty).
    std::vector<double> masses() const;
    /// Bin edges (log space) of one axis, bins + 1 values.
    std::vector<double> edges() const;
    /// Marginal mass per axis bin including under/overflow (bins + 2 values).
    std::vector<double> marginal(int axis) const;
    /// Linear-space mean along an axis using geometric bin centres; mass
    /// outside the grid is excluded and the result renormalised.
    double mean(int axis) const;

    nlohmann::json to_json() const;

private:
    int n_ = 0;
    HistogramGrid grid_;
    double dt_ = 0.0;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
    std::uint64_t out_of_grid_ = 0;
};

}  // namespace stokolmo
