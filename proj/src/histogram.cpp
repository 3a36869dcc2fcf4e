#include "stokolmo/histogram.hpp"

#include "stokolmo/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace stokolmo {

HistogramGrid HistogramGrid::for_dimension(int n) {
    HistogramGrid g;
    if (n <= 1) g.bins = 40;
    else if (n == 2) g.bins = 20;
    else g.bins = std::max(4, static_cast<int>(std::pow(4096.0, 1.0 / n)));
    return g;
}

OccupationHistogram::OccupationHistogram(int n, HistogramGrid grid, double dt) : n_(n), grid_(grid), dt_(dt) {
    if (n < 1 || grid.bins < 1 || !(grid.log_hi > grid.log_lo)) throw std::invalid_argument("invalid histogram grid");
    std::size_t cells = 1;
    for (int i = 0; i < n; ++i) cells *= static_cast<std::size_t>(grid.bins + 2);
    counts_.assign(cells, 0);
}

void OccupationHistogram::add(std::span<const double> y) {
    const int side = grid_.bins + 2;
    const double scale = grid_.bins / (grid_.log_hi - grid_.log_lo);
    std::size_t index = 0;
    bool outside = false;
    for (int i = n_ - 1; i >= 0; --i) {
        int b;
        if (y[i] < grid_.log_lo) {
            b = 0;
            outside = true;
        } else if (y[i] >= grid_.log_hi) {
            b = side - 1;
            outside = true;
        } else {
            b = 1 + std::min(grid_.bins - 1, static_cast<int>((y[i] - grid_.log_lo) * scale));
        }
        index = index * side + static_cast<std::size_t>(b);
    }
    ++counts_[index];
    ++total_;
    if (outside) ++out_of_grid_;
}

void OccupationHistogram::merge(const OccupationHistogram& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    if (other.n_ != n_ || !(other.grid_ == grid_)) throw std::invalid_argument("histogram grids differ");
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
    total_ += other.total_;
    out_of_grid_ += other.out_of_grid_;
}

std::vector<double> OccupationHistogram::masses() const {
    std::vector<double> m(counts_.size(), 0.0);
    if (total_ == 0) return m;
    const double inv = 1.0 / static_cast<double>(total_);
    for (std::size_t k = 0; k < counts_.size(); ++k) m[k] = static_cast<double>(counts_[k]) * inv;
    return m;
}

std::vector<double> OccupationHistogram::edges() const {
    std::vector<double> e(grid_.bins + 1);
    for (int b = 0; b <= grid_.bins; ++b) e[b] = grid_.log_lo + (grid_.log_hi - grid_.log_lo) * b / grid_.bins;
    return e;
}

std::vector<double> OccupationHistogram::marginal(int axis) const {
    const int side = grid_.bins + 2;
    std::vector<std::uint64_t> c(side, 0);
    std::size_t stride = 1;
    for (int i = 0; i < axis; ++i) stride *= side;
    for (std::size_t k = 0; k < counts_.size(); ++k) c[(k / stride) % side] += counts_[k];
    std::vector<double> m(side, 0.0);
    if (total_ == 0) return m;
    for (int b = 0; b < side; ++b) m[b] = static_cast<double>(c[b]) / static_cast<double>(total_);
    return m;
}

double OccupationHistogram::mean(int axis) const {
    const auto m = marginal(axis);
    const double w = (grid_.log_hi - grid_.log_lo) / grid_.bins;
    std::vector<double> terms;
    double inside = 0.0;
    for (int b = 1; b <= grid_.bins; ++b) {
        const double lo = grid_.log_lo + (b - 1) * w;
        // average of e^y over a uniform bin in y
        terms.push_back(m[b] * (std::exp(lo + w) - std::exp(lo)) / w);
        inside += m[b];
    }
    return inside > 0.0 ? pairwise_sum(terms) / inside : 0.0;
}

nlohmann::json OccupationHistogram::to_json() const {
    return {{"dimension", n_},
            {"log_lo", grid_.log_lo},
            {"log_hi", grid_.log_hi},
            {"bins_per_axis", grid_.bins},
            {"total_time", total_time()},
            {"out_of_grid_fraction", total_ ? static_cast<double>(out_of_grid_) / static_cast<double>(total_) : 0.0}};
}

}  // namespace stokolmo
