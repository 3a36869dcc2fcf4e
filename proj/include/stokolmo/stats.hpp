#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace stokolmo {

/// Pairwise (cascade) summation in a fixed order: the result depends only on
/// the sequence, never on how it was produced.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    double sd = 0.0;
    std::size_t count = 0;
};

inline MeanSE mean_se(std::span<const double> v) {
    MeanSE r;
    r.count = v.size();
    if (v.empty()) return r;
    r.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() > 1) {
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - r.mean) * (v[i] - r.mean);
        r.sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
        r.se = r.sd / std::sqrt(static_cast<double>(v.size()));
    }
    return r;
}

/// Wilson score interval for a binomial proportion with z standard errors.
struct Proportion {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

inline Proportion wilson_interval(std::size_t successes, std::size_t trials, double z = 3.0) {
    Proportion p;
    if (trials == 0) return p;
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (phat + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    p.estimate = phat;
    p.lower = std::max(0.0, centre - half);
    p.upper = std::min(1.0, centre + half);
    return p;
}

}  // namespace stokolmo
