#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokolmo {

/// The 1-D diffusion dX = X f(X) dt + X g(X) dE, Var(dE) = sigma dt, has no
/// normalisable stationary density on (0, inf).
class NoInvariantMeasure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DensityOptions {
    double u_max = 16.0;       // initial upper cut-off, doubled until the tail is negligible
    int grid_size = 400;       // sampling points exported on (0, u_max]
    double rel_tol = 1e-9;     // adaptive Simpson tolerance
    double tail_tol = 1e-12;   // accepted relative mass beyond either cut-off
    double anchor = 1.0;       // u_0 for the scale-function integral
};

/// Stationary density of a 1-D Kolmogorov diffusion from the scale/speed
/// construction
///     p(u) ~ exp(int_{u0}^u 2 f(v) / (sigma v g(v)^2) dv) / (sigma u^2 g(u)^2).
/// Internally everything is done in s = ln u, where the density of s decays
/// exponentially at both ends whenever it is normalisable.
class StationaryDensity1D {
public:
    using Fn = std::function<double(double)>;

    static StationaryDensity1D compute(Fn drift, Fn noise, double sigma, const DensityOptions& options = {});

    /// Normalised expectation of h(u) with an error estimate.
    double expectation(const Fn& h, double* error = nullptr) const;
    double mean() const;

    /// Normalised density at u > 0.
    double density_at(double u) const;

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& density() const noexcept { return density_; }
    /// Unnormalised values on the grid, scaled by exp(-log_scale()).
    const std::vector<double>& unnormalized() const noexcept { return unnormalized_; }
    double normalization() const noexcept { return normalization_; }
    double log_scale() const noexcept { return shift_; }
    double u_max() const noexcept { return std::exp(s_hi_); }
    double u_min() const noexcept { return std::exp(s_lo_); }
    /// Estimated mass beyond u_max and below u_min (relative).
    double upper_tail_mass() const noexcept { return upper_tail_; }
    double lower_tail_mass() const noexcept { return lower_tail_; }
    /// Quadrature of the normalised density over the grid range (should be 1).
    double total_mass() const;

    std::string to_csv() const;
    nlohmann::json to_json() const;

private:
    double phi_prime(double s) const;
    double phi_at(double s) const;
    double log_q(double s, double phi) const;
    double integrate(const Fn& h, double* error) const;

    Fn drift_;
    Fn noise_;
    double sigma_ = 1.0;
    double rel_tol_ = 1e-9;
    double s_lo_ = 0.0, s_hi_ = 0.0;
    std::vector<double> nodes_;      // panel boundaries in s
    std::vector<double> phi_nodes_;  // scale integral at the nodes
    double shift_ = 0.0;             // max log q over nodes
    double normalization_ = 1.0;     // integral of exp(log q - shift) ds
    double upper_tail_ = 0.0, lower_tail_ = 0.0;
    std::vector<double> grid_, density_, unnormalized_;
};

}  // namespace stokolmo
