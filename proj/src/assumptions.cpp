#include "stokolmo/assumptions.hpp"

#include "stokolmo/lp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

namespace stokolmo {

std::string to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::SampledPass: return "sampled-pass";
    case CheckStatus::HeuristicPass: return "heuristic-pass";
    case CheckStatus::Heuristic: return "heuristic";
    case CheckStatus::HeuristicFail: return "heuristic-fail";
    case CheckStatus::Fail: return "fail";
    }
    return "heuristic";
}

bool is_failure(CheckStatus s) { return s == CheckStatus::Fail || s == CheckStatus::HeuristicFail; }

bool is_pass(CheckStatus s) {
    return s == CheckStatus::Pass || s == CheckStatus::SampledPass || s == CheckStatus::HeuristicPass;
}

nlohmann::json CheckResult::to_json() const {
    nlohmann::json j;
    j["status"] = to_string(status);
    j["method"] = method;
    j["rationale"] = rationale;
    if (!witness.empty()) {
        j["witness"] = witness;
        j["witness_value"] = witness_value;
    }
    if (!weights.empty()) j["c"] = weights;
    return j;
}

nlohmann::json AssumptionReport::to_json() const {
    return {{"nondegenerate", nondegenerate.to_json()},
            {"tightness", tightness.to_json()},
            {"growth", growth.to_json()},
            {"notes", notes}};
}

namespace {

constexpr double kRadii[] = {1e1, 1e2, 1e3, 1e4};

std::string point_text(std::span<const double> x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

std::vector<std::vector<double>> sample_points(int n, const SampleSpec& spec) {
    std::vector<std::vector<double>> pts;
    int per_axis = 2;
    while (std::pow(per_axis, n) < spec.min_points && per_axis < 64) ++per_axis;
    if (std::pow(per_axis, n) <= 1e5) {
        std::vector<int> idx(n, 0);
        for (;;) {
            std::vector<double> x(n);
            for (int i = 0; i < n; ++i) x[i] = spec.radius * idx[i] / (per_axis - 1);
            pts.push_back(std::move(x));
            int k = 0;
            while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
            if (k == n) break;
        }
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, spec.radius);
    const int extra = std::max(spec.random_points, spec.min_points - static_cast<int>(pts.size()));
    for (int r = 0; r < extra; ++r) {
        std::vector<double> x(n);
        for (auto& v : x) v = unif(rng);
        pts.push_back(std::move(x));
    }
    return pts;
}

}  // namespace

std::vector<std::vector<double>> asymptotic_rays(int n, int random_rays, std::uint64_t seed) {
    std::vector<std::vector<double>> rays;
    for (int i = 0; i < n; ++i) {
        std::vector<double> u(n, 0.0);
        u[i] = 1.0;
        rays.push_back(u);
    }
    for (int i = 0; i < n; ++i) {
        std::vector<double> u(n, 1.0 / (n + 1));
        u[i] = 2.0 / (n + 1);
        rays.push_back(u);
    }
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    for (int r = 0; r < random_rays; ++r) {
        std::vector<double> u(n);
        double s = 0.0;
        for (auto& v : u) s += (v = expo(rng));
        for (auto& v : u) v /= s;
        rays.push_back(std::move(u));
    }
    return rays;
}

CheckResult check_nondegeneracy(const KolmogorovModel& model, const SampleSpec& spec) {
    const int n = model.n();
    CheckResult out;
    out.method = "sampled";
    std::vector<double> f(n), g(n);
    const auto points = sample_points(n, spec);
    Eigen::MatrixXd M(n, n);
    for (const auto& x : points) {
        try {
            model.evaluate(x, f, g);
        } catch (const DomainError& e) {
            throw DomainError(e.subexpression(), std::string(e.what()) + " at x = " + point_text(x));
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) = g[i] * g[j] * model.sigma()(i, j);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = std::max(1.0, eig.eigenvalues().maxCoeff());
        if (!(lo > 1e-12 * hi)) {
            out.status = CheckStatus::Fail;
            out.witness = x;
            out.witness_value = lo;
            std::ostringstream os;
            os << "diffusion matrix has eigenvalue " << lo << " at x = " << point_text(x);
            out.rationale = os.str();
            return out;
        }
    }
    out.status = CheckStatus::SampledPass;
    out.rationale = "positive definite at " + std::to_string(points.size()) + " sampled points of [0," +
                    std::to_string(static_cast<int>(spec.radius)) + "]^" + std::to_string(n);
    return out;
}

double tightness_ratio(const KolmogorovModel& model, std::span<const double> c, std::span<const double> x) {
    const int n = model.n();
    std::vector<double> f(n), g(n);
    model.evaluate(x, f, g);
    double cx = 1.0, drift = 0.0, denom = 1.0, quad = 0.0;
    for (int i = 0; i < n; ++i) {
        cx += c[i] * x[i];
        drift += c[i] * x[i] * f[i];
        denom += std::abs(f[i]) + g[i] * g[i];
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) quad += model.sigma()(i, j) * c[i] * c[j] * x[i] * x[j] * g[i] * g[j];
    const double q = drift / cx - 0.5 * quad / (cx * cx);
    return q / denom;
}

namespace {

// Sampled version of the tightness test for a fixed weight vector c.
CheckResult sampled_tightness(const KolmogorovModel& model, const std::vector<double>& c) {
    const int n = model.n();
    CheckResult out;
    out.method = "sampled";
    out.weights = c;
    const auto rays = asymptotic_rays(n);
    std::vector<double> worst(std::size(kRadii), -INFINITY);
    std::vector<double> x(n);
    int skipped = 0;
    for (const auto& u : rays) {
        double values[std::size(kRadii)];
        bool ok = true;
        for (std::size_t k = 0; k < std::size(kRadii); ++k) {
            for (int i = 0; i < n; ++i) x[i] = kRadii[k] * u[i];
            try {
                values[k] = tightness_ratio(model, c, x);
            } catch (const DomainError&) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            ++skipped;
            continue;
        }
        for (std::size_t k = 0; k < std::size(kRadii); ++k) worst[k] = std::max(worst[k], values[k]);
        const double last = values[std::size(kRadii) - 1], prev = values[std::size(kRadii) - 2];
        if (last > 0.0 && prev > 0.0 && last >= prev - 1e-9 * std::abs(prev)) {
            out.status = CheckStatus::HeuristicFail;
            for (int i = 0; i < n; ++i) x[i] = kRadii[std::size(kRadii) - 1] * u[i];
            out.witness = x;
            out.witness_value = last;
            out.rationale = "drift/noise balance stays positive and non-decreasing along a ray out to radius 1e4";
            return out;
        }
    }
    if (skipped == static_cast<int>(rays.size())) {
        out.status = CheckStatus::Heuristic;
        out.rationale = "model could not be evaluated at large radii";
        return out;
    }
    bool improving = true;
    for (std::size_t k = 1; k < worst.size(); ++k)
        if (worst[k] > worst[k - 1] + 1e-12 * std::abs(worst[k - 1])) improving = false;
    if (worst.back() < 0.0 && improving) {
        out.status = CheckStatus::HeuristicPass;
        std::ostringstream os;
        os << "negative and improving at radii 1e1..1e4 on " << rays.size() - skipped
           << " rays (largest value " << worst.back() << ")";
        out.rationale = os.str();
    } else {
        out.status = CheckStatus::Heuristic;
        std::ostringstream os;
        os << "inconclusive on sampled rays (largest value at radius 1e4: " << worst.back() << ")";
        out.rationale = os.str();
    }
    return out;
}

// Largest eigenvalue of the symmetric part of diag(c) B.
double quadratic_bound(const Eigen::MatrixXd& B, const std::vector<double>& c) {
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    const Eigen::MatrixXd cb = w.asDiagonal() * B;
    const Eigen::MatrixXd sym = 0.5 * (cb + cb.transpose());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

// Weights that cancel every predator-prey pair exactly (c_i B_ij + c_j B_ji = 0),
// when the interaction graph is a forest of opposite-sign pairs.
std::optional<std::vector<double>> cancelling_weights(const Eigen::MatrixXd& B) {
    const int n = static_cast<int>(B.rows());
    std::vector<double> c(n, 0.0);
    for (int root = 0; root < n; ++root) {
        if (c[root] > 0.0) continue;
        c[root] = 1.0;
        std::vector<int> stack{root};
        std::vector<int> parent(n, -1);
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            for (int j = 0; j < n; ++j) {
                if (j == i || (B(i, j) == 0.0 && B(j, i) == 0.0) || j == parent[i]) continue;
                if (!(B(i, j) * B(j, i) < 0.0)) return std::nullopt;
                if (c[j] > 0.0) return std::nullopt;  // cycle
                c[j] = c[i] * std::abs(B(i, j)) / std::abs(B(j, i));
                parent[j] = i;
                stack.push_back(j);
            }
        }
    }
    return c;
}

}  // namespace

CheckResult check_tightness(const KolmogorovModel& model) {
    const int n = model.n();
    if (!model.lv()) return sampled_tightness(model, std::vector<double>(n, 1.0));
    const auto& lv = *model.lv();
    bool self_limited = true;
    for (int i = 0; i < n; ++i) self_limited = self_limited && lv.B(i, i) < 0.0;

    CheckResult out;
    out.method = "analytic";
    if (n == 2) {
        const double b1 = -lv.B(0, 0), b2 = -lv.B(1, 1);
        const double c1 = lv.B(0, 1), c2 = lv.B(1, 0);
        if (self_limited && c1 > 0.0 && c2 > 0.0) {
            const double det = b1 * b2 - c1 * c2;
            if (det < 0.0) {
                out.status = CheckStatus::Fail;
                out.rationale = "cooperative Lotka-Volterra with b_1b_2-c_1c_2<0";
                // Along (sqrt(b2), sqrt(b1)) the quadratic part of the drift is positive.
                std::vector<double> x{std::sqrt(b2), std::sqrt(b1)};
                const double s = 1e4 / (x[0] + x[1]);
                for (auto& v : x) v *= s;
                out.witness = x;
                out.weights = {1.0, 1.0};
                out.witness_value = tightness_ratio(model, out.weights, x);
                return out;
            }
            if (det > 0.0) {
                out.status = CheckStatus::Pass;
                out.weights = {c2, c1};
                out.rationale = "cooperative Lotka-Volterra with b_1b_2>c_1c_2; weights c=(c_2,c_1) make the quadratic drift negative definite";
                return out;
            }
        }
        if (self_limited && c1 * c2 < 0.0) {
            out.status = CheckStatus::Pass;
            out.weights = {std::abs(c2), std::abs(c1)};
            out.rationale = "predator-prey Lotka-Volterra; c=(c_2,c_1) cancels the interaction terms";
            return out;
        }
    }
    bool competitive = self_limited;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && lv.B(i, j) > 0.0) competitive = false;
    if (competitive) {
        out.status = CheckStatus::Pass;
        out.weights.assign(n, 1.0);
        out.rationale = "competitive Lotka-Volterra with constant noise; c=(1,...,1)";
        return out;
    }
    if (self_limited) {
        std::vector<std::vector<double>> candidates{std::vector<double>(n, 1.0)};
        if (auto c = cancelling_weights(lv.B)) candidates.push_back(*c);
        for (const auto& c : candidates) {
            const double top = quadratic_bound(lv.B, c);
            if (top < 0.0) {
                out.status = CheckStatus::Pass;
                out.weights = c;
                std::ostringstream os;
                os << "Lotka-Volterra with diag(c)B+B^Tdiag(c) negative definite (largest eigenvalue " << top
                   << "); the quadratic drift dominates";
                out.rationale = os.str();
                return out;
            }
        }
    }
    auto r = sampled_tightness(model, std::vector<double>(n, 1.0));
    r.rationale = "Lotka-Volterra without a standard sign pattern, c=(1,...,1): " + r.rationale;
    return r;
}

CheckResult check_growth_condition(const KolmogorovModel& model) {
    const int n = model.n();
    CheckResult out;
    if (model.lv()) {
        // min over the simplex of max_i |(B u)_i|, as a maximin over the rows of [-B; B]
        const Eigen::MatrixXd& B = model.lv()->B;
        Eigen::MatrixXd rows(2 * n, n);
        rows << -B, B;
        const double gap = -maximin_weights(rows, 0.0).t_star;
        if (gap > 1e-9 * std::max(1.0, B.cwiseAbs().maxCoeff())) {
            out.status = CheckStatus::Pass;
            out.method = "analytic";
            std::ostringstream os;
            os << "constant noise and |f| grows linearly along every ray of the orthant (min |Bu| = " << gap
               << "): ratio decays like ||x||^(d1-1), d1=0.5";
            out.rationale = os.str();
            return out;
        }
    }
    out.method = "sampled";
    constexpr double d1 = 0.5;
    const auto rays = asymptotic_rays(n);
    std::vector<double> worst(std::size(kRadii), 0.0);
    std::vector<double> x(n), f(n), g(n);
    std::vector<double> worst_point;
    for (const auto& u : rays) {
        for (std::size_t k = 0; k < std::size(kRadii); ++k) {
            for (int i = 0; i < n; ++i) x[i] = kRadii[k] * u[i];
            try {
                model.evaluate(x, f, g);
            } catch (const DomainError&) {
                continue;
            }
            double gs = 0.0, denom = 1.0;
            for (int i = 0; i < n; ++i) {
                gs += g[i] * g[i];
                denom += std::abs(f[i]) + g[i] * g[i];
            }
            const double ratio = std::pow(kRadii[k], d1) * gs / denom;
            if (ratio > worst[k]) {
                worst[k] = ratio;
                if (k + 1 == std::size(kRadii)) worst_point = x;
            }
        }
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < worst.size(); ++k)
        if (worst[k] > worst[k - 1]) decreasing = false;
    std::ostringstream os;
    os << "max ratio at radius 1e4 is " << worst.back();
    if (decreasing && worst.back() < 1e-3) {
        out.status = CheckStatus::HeuristicPass;
        out.rationale = os.str() + ", decreasing";
    } else {
        out.status = CheckStatus::HeuristicFail;
        out.rationale = os.str() + (decreasing ? ", above 1e-3" : ", not decreasing");
        out.witness = worst_point;
        out.witness_value = worst.back();
    }
    return out;
}

AssumptionReport check_assumptions(const KolmogorovModel& model, const SampleSpec& spec) {
    AssumptionReport r;
    r.nondegenerate = check_nondegeneracy(model, spec);
    r.tightness = check_tightness(model);
    r.growth = check_growth_condition(model);
    if (model.lv()) r.notes.push_back("structured Lotka-Volterra model");
    r.notes.push_back("noise covariance is constant; state-dependent covariance is not modelled");
    return r;
}

}  // namespace stokolmo
