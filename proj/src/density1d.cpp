#include "stokolmo/density1d.hpp"

#include "stokolmo/quadrature.hpp"
#include "stokolmo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>

namespace stokolmo {

namespace {

constexpr double kPanel = 0.23104906018664842;  // ln(2) / 3: three panels per doubling of u
constexpr double kLowestS = -700.0;
constexpr double kHighestS = 27.7;  // u = 1e12

}  // namespace

double StationaryDensity1D::phi_prime(double s) const {
    const double u = std::exp(s);
    const double g = noise_(u);
    return 2.0 * drift_(u) / (sigma_ * g * g);
}

double StationaryDensity1D::log_q(double s, double phi) const {
    const double g = noise_(std::exp(s));
    return phi - s - std::log(sigma_ * g * g);
}

double StationaryDensity1D::phi_at(double s) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
    std::size_t k = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    k = std::min(k, nodes_.size() - 1);
    // integrate from the nearer end of the panel
    if (k + 1 < nodes_.size() && nodes_[k + 1] - s < s - nodes_[k]) ++k;
    auto fp = [this](double v) { return phi_prime(v); };
    return phi_nodes_[k] + adaptive_simpson(fp, nodes_[k], s, 1e-13, 1e-15).value;
}

StationaryDensity1D StationaryDensity1D::compute(Fn drift, Fn noise, double sigma, const DensityOptions& options) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    StationaryDensity1D d;
    d.drift_ = std::move(drift);
    d.noise_ = std::move(noise);
    d.sigma_ = sigma;
    d.rel_tol_ = options.rel_tol;

    const double g0 = d.noise_(0.0);
    if (!(g0 != 0.0)) throw NoInvariantMeasure("noise vanishes at the origin");
    // Near u = 0 the density of s = ln u behaves like exp(k0 s).
    const double k0 = 2.0 * d.drift_(0.0) / (sigma * g0 * g0) - 1.0;
    if (!(k0 > 1e-9))
        throw NoInvariantMeasure("growth rate at the origin f(0) - sigma g(0)^2/2 is not positive; density not integrable at 0");

    const double s0 = std::log(options.anchor);
    auto fp = [&d](double v) { return d.phi_prime(v); };

    // Grow the node set outwards from the anchor, tracking phi and log q.
    std::deque<double> nodes{s0}, phi{0.0}, lq{d.log_q(s0, 0.0)};
    auto extend_up = [&] {
        const double a = nodes.back(), b = a + kPanel;
        const double p = phi.back() + adaptive_simpson(fp, a, b, 1e-13, 1e-15).value;
        nodes.push_back(b);
        phi.push_back(p);
        lq.push_back(d.log_q(b, p));
    };
    auto extend_down = [&] {
        const double b = nodes.front(), a = b - kPanel;
        const double p = phi.front() - adaptive_simpson(fp, a, b, 1e-13, 1e-15).value;
        nodes.push_front(a);
        phi.push_front(p);
        lq.push_front(d.log_q(a, p));
    };
    auto log_mass = [&] {
        // log of the trapezoid mass over the current nodes
        const double top = *std::max_element(lq.begin(), lq.end());
        std::vector<double> terms;
        for (double v : lq) terms.push_back(std::exp(v - top));
        return top + std::log(pairwise_sum(terms) * kPanel);
    };

    const double s_init = std::log(options.u_max);
    while (nodes.back() < s_init) extend_up();
    for (int i = 0; i < 6; ++i) extend_down();

    // Upper tail: double u_max until the tail is negligible and decaying.
    for (;;) {
        const std::size_t m = lq.size();
        const double slope = (lq[m - 1] - lq[m - 2]) / kPanel;
        if (slope < 0.0) {
            const double log_tail = lq[m - 1] - std::log(-slope);
            if (log_tail - log_mass() < std::log(options.tail_tol)) {
                d.upper_tail_ = std::exp(log_tail - log_mass());
                break;
            }
        }
        if (nodes.back() >= kHighestS)
            throw NoInvariantMeasure("stationary density does not decay at large u; not integrable at infinity");
        for (int i = 0; i < 3; ++i) extend_up();
    }
    // Lower tail.
    for (;;) {
        const double slope = (lq[1] - lq[0]) / kPanel;
        if (slope > 0.0) {
            const double log_tail = lq[0] - std::log(slope);
            if (log_tail - log_mass() < std::log(options.tail_tol)) {
                d.lower_tail_ = std::exp(log_tail - log_mass());
                break;
            }
        }
        if (nodes.front() <= kLowestS)
            throw NoInvariantMeasure("stationary mass accumulates below u = exp(-700)");
        for (int i = 0; i < 3; ++i) extend_down();
    }

    d.nodes_.assign(nodes.begin(), nodes.end());
    d.phi_nodes_.assign(phi.begin(), phi.end());
    d.s_lo_ = d.nodes_.front();
    d.s_hi_ = d.nodes_.back();
    d.shift_ = *std::max_element(lq.begin(), lq.end());
    d.normalization_ = 1.0;
    d.normalization_ = d.integrate([](double) { return 1.0; }, nullptr);

    const int gs = std::max(2, options.grid_size);
    for (int k = 0; k < gs; ++k) {
        const double s = d.s_lo_ + (d.s_hi_ - d.s_lo_) * k / (gs - 1);
        const double u = std::exp(s);
        const double un = std::exp(d.log_q(s, d.phi_at(s)) - d.shift_) / u;
        d.grid_.push_back(u);
        d.unnormalized_.push_back(un);
        d.density_.push_back(un / d.normalization_);
    }
    return d;
}

double StationaryDensity1D::integrate(const Fn& h, double* error) const {
    auto fp = [this](double v) { return phi_prime(v); };
    // rough scale from node values for the absolute tolerance
    std::vector<double> scale_terms;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const double s = nodes_[k];
        scale_terms.push_back(std::abs(h(std::exp(s))) * std::exp(log_q(s, phi_nodes_[k]) - shift_) * kPanel);
    }
    const double scale = pairwise_sum(scale_terms);
    const double panels = static_cast<double>(nodes_.size() - 1);
    const double abs_tol = std::max(rel_tol_ * scale / panels, 1e-300);
    std::vector<double> parts;
    double err = 0.0;
    for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
        const double a = nodes_[k];
        const double phi_a = phi_nodes_[k];
        auto integrand = [&](double s) {
            const double phi = s == a ? phi_a : phi_a + adaptive_simpson(fp, a, s, 1e-13, 1e-15).value;
            return h(std::exp(s)) * std::exp(log_q(s, phi) - shift_);
        };
        const auto r = adaptive_simpson(integrand, a, nodes_[k + 1], rel_tol_, abs_tol);
        parts.push_back(r.value);
        err += r.error;
    }
    if (error) *error = err / normalization_;
    return pairwise_sum(parts) / normalization_;
}

double StationaryDensity1D::expectation(const Fn& h, double* error) const { return integrate(h, error); }

double StationaryDensity1D::mean() const {
    return integrate([](double u) { return u; }, nullptr);
}

double StationaryDensity1D::total_mass() const {
    return integrate([](double) { return 1.0; }, nullptr);
}

double StationaryDensity1D::density_at(double u) const {
    if (!(u > 0.0)) return 0.0;
    const double s = std::log(u);
    return std::exp(log_q(s, phi_at(s)) - shift_) / (u * normalization_);
}

std::string StationaryDensity1D::to_csv() const {
    std::string out = "u,p\n";
    char buf[64];
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", grid_[k], density_[k]);
        out += buf;
    }
    return out;
}

nlohmann::json StationaryDensity1D::to_json() const {
    return {{"u_min", u_min()},
            {"u_max", u_max()},
            {"grid_size", grid_.size()},
            {"mean", mean()},
            {"upper_tail_mass", upper_tail_},
            {"lower_tail_mass", lower_tail_}};
}

}  // namespace stokolmo
