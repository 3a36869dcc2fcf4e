#include "stokolmo/boundary.hpp"

#include "stokolmo/lp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace stokolmo {

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Analytic: return "analytic";
        case Provenance::Quadrature: return "quadrature";
        case Provenance::MonteCarlo: return "monte-carlo";
    }
    return "analytic";
}

std::string to_string(Sign s) {
    switch (s) {
        case Sign::Positive: return "positive";
        case Sign::Negative: return "negative";
        case Sign::Undetermined: return "undetermined";
    }
    return "undetermined";
}

Sign sign_of(double lambda, double ci, double tol) {
    if (lambda - ci > tol) return Sign::Positive;
    if (lambda + ci < -tol) return Sign::Negative;
    return Sign::Undetermined;
}

std::string to_string(FaceEquilibrium::Status s) {
    switch (s) {
        case FaceEquilibrium::Status::Ok: return "ok";
        case FaceEquilibrium::Status::Singular: return "singular";
        case FaceEquilibrium::Status::NonPositive: return "no interior equilibrium";
    }
    return "ok";
}

std::string to_string(FaceRecord::Status s) {
    switch (s) {
        case FaceRecord::Status::Interior: return "interior-measure";
        case FaceRecord::Status::NoInterior: return "no-interior-measure";
        case FaceRecord::Status::Unresolved: return "unresolved";
    }
    return "unresolved";
}

std::string ErgodicMeasure::name() const { return support.empty() ? "delta*" : "mu" + support.label(); }

nlohmann::json ErgodicMeasure::to_json() const {
    nlohmann::json j;
    j["name"] = name();
    std::vector<int> sp;
    for (int i : support.species()) sp.push_back(i + 1);
    j["support"] = sp;
    j["provenance"] = to_string(provenance);
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, DiracOrigin>) {
                j["representation"] = {{"kind", "DiracOrigin"}};
            } else if constexpr (std::is_same_v<T, LvMoments>) {
                j["representation"] = {{"kind", "LVMoments"}, {"moments", r.moments}, {"residual", r.residual}};
            } else if constexpr (std::is_same_v<T, Density1D>) {
                auto d = r.density->to_json();
                d["kind"] = "Density1D";
                j["representation"] = d;
            } else {
                j["representation"] = {{"kind", "Empirical"}, {"mean_x", r.mean_x}, {"paths", r.paths},
                                       {"t_max", r.t_max},     {"dt", r.dt}};
            }
        },
        representation);
    return j;
}

int InvasionRateTable::index_of(Face support) const {
    for (std::size_t k = 0; k < measures.size(); ++k)
        if (measures[k].support == support) return static_cast<int>(k);
    return -1;
}

nlohmann::json InvasionRateTable::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < lambda.rows(); ++r) {
        std::vector<double> l(lambda.cols()), c(lambda.cols());
        std::vector<bool> low(lambda.cols());
        for (Eigen::Index i = 0; i < lambda.cols(); ++i) {
            l[i] = lambda(r, i);
            c[i] = ci(r, i);
            low[i] = low_confidence(r, i);
        }
        rows.push_back({{"measure", measures[r].name()}, {"lambda", l}, {"ci", c}, {"low_confidence", low}});
    }
    return {{"species", lambda.cols()}, {"rows", rows}};
}

SimConfig AnalysisConfig::default_mc() {
    SimConfig c;
    c.dt = 1e-3;
    c.t_max = 200.0;
    c.burn_in = 20.0;
    c.n_paths = 32;
    return c;
}

nlohmann::json AnalysisConfig::to_json() const {
    return {{"decision_tol", decision_tol},
            {"monte_carlo", mc.to_json()},
            {"batches", batches},
            {"max_ci", max_ci},
            {"representation", representation == Representation::Auto ? "auto" : "monte-carlo"},
            {"density", {{"rel_tol", density.rel_tol}, {"tail_tol", density.tail_tol}, {"grid_size", density.grid_size}}}};
}

FaceEquilibrium lv_face_equilibrium(const KolmogorovModel& model, Face face) {
    if (!model.is_lv()) throw std::invalid_argument("lv_face_equilibrium requires a Lotka-Volterra model");
    const LotkaVolterra& lv = *model.lv();
    const std::vector<int> idx = face.species();
    const int k = static_cast<int>(idx.size());
    FaceEquilibrium eq;
    if (k == 0) return eq;
    Eigen::MatrixXd A(k, k);
    Eigen::VectorXd rhs(k);
    for (int r = 0; r < k; ++r) {
        const int i = idx[r];
        rhs[r] = -(lv.a[i] - 0.5 * model.sigma()(i, i) * lv.g[i] * lv.g[i]);
        for (int c = 0; c < k; ++c) A(r, c) = lv.B(i, idx[c]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        eq.status = FaceEquilibrium::Status::Singular;
        return eq;
    }
    Eigen::VectorXd m = lu.solve(rhs);
    eq.residual = (A * m - rhs).lpNorm<Eigen::Infinity>();
    eq.moments.assign(m.data(), m.data() + k);
    if ((m.array() <= 0.0).any()) eq.status = FaceEquilibrium::Status::NonPositive;
    return eq;
}

StationaryDensity1D stationary_density_1d(StationaryDensity1D::Fn f, StationaryDensity1D::Fn g, double sigma,
                                          const DensityOptions& options) {
    return StationaryDensity1D::compute(std::move(f), std::move(g), sigma, options);
}

StationaryDensity1D stationary_density_1d(const KolmogorovModel& model, int species, const DensityOptions& options) {
    const int n = model.n();
    DensityOptions opt = options;
    if (model.is_lv()) {
        const auto& lv = *model.lv();
        const double b = -lv.B(species, species);
        const double s = model.sigma()(species, species) * lv.g[species] * lv.g[species];
        const double mode = (lv.a[species] - s) / b;
        if (b > 0 && mode > 0) opt.anchor = mode;
    }
    auto at = [n, species](double u) {
        std::vector<double> x(n, 0.0);
        x[species] = u;
        return x;
    };
    const KolmogorovModel* m = &model;
    return StationaryDensity1D::compute([m, at, species](double u) { return m->drift(species, at(u)); },
                                        [m, at, species](double u) { return m->noise(species, at(u)); },
                                        model.sigma()(species, species), opt);
}

namespace {

std::vector<double> analytic_rates(const KolmogorovModel& model, const ErgodicMeasure& mu) {
    const int n = model.n();
    std::vector<double> out(n);
    if (std::holds_alternative<DiracOrigin>(mu.representation)) {
        const std::vector<double> zero(n, 0.0);
        for (int i = 0; i < n; ++i) out[i] = model.log_growth(i, zero);
        return out;
    }
    const auto& lm = std::get<LvMoments>(mu.representation);
    const auto& lv = *model.lv();
    const std::vector<int> idx = mu.support.species();
    for (int i = 0; i < n; ++i) {
        double v = lv.a[i] - 0.5 * model.sigma()(i, i) * lv.g[i] * lv.g[i];
        for (std::size_t c = 0; c < idx.size(); ++c) v += lv.B(i, idx[c]) * lm.moments[c];
        out[i] = v;
    }
    return out;
}

void fill_row(const KolmogorovModel& model, const ErgodicMeasure& mu, const AnalysisConfig& config,
              std::vector<double>& lambda, std::vector<double>& ci) {
    const int n = model.n();
    lambda.assign(n, 0.0);
    ci.assign(n, 0.0);
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, DiracOrigin> || std::is_same_v<T, LvMoments>) {
                lambda = analytic_rates(model, mu);
            } else if constexpr (std::is_same_v<T, Density1D>) {
                const int s = mu.support.species().front();
                for (int i = 0; i < n; ++i) {
                    double err = 0.0;
                    lambda[i] = r.density->expectation(
                        [&](double u) {
                            std::vector<double> x(n, 0.0);
                            x[s] = u;
                            return model.log_growth(i, x);
                        },
                        &err);
                    ci[i] = err + config.density.rel_tol * (1.0 + std::abs(lambda[i]));
                }
            } else {
                lambda = r.lambda;
                ci = r.ci;
            }
        },
        mu.representation);
}

}  // namespace

ErgodicMeasure monte_carlo_measure(const KolmogorovModel& model, Face face, const AnalysisConfig& config) {
    const int n = model.n();
    const KolmogorovModel sub = restrict_to_face(model, face);
    const std::vector<int> idx = face.species();
    const std::vector<double> x0(idx.size(), 1.0);
    SimConfig cfg = config.mc;
    // distinct, reproducible stream per face
    cfg.seed = config.mc.seed * 0x9E3779B97F4A7C15ull + face.mask();
    EnsembleOptions opt;
    opt.observable_dim = n;
    opt.batches = config.batches;
    opt.observable = [&](std::span<const double> x, std::span<double> out) {
        const std::vector<double> full = embed(face, n, x);
        for (int i = 0; i < n; ++i) out[i] = model.log_growth(i, full);
    };
    const EnsembleResult ens = simulate_ensemble(sub, x0, cfg, opt);
    if (ens.blowup_count() > 0) {
        std::ostringstream os;
        os << ens.blowup_count() << " of " << cfg.n_paths << " face paths blew up on " << face.label();
        throw std::runtime_error(os.str());
    }
    Empirical e;
    e.paths = cfg.n_paths;
    e.t_max = cfg.t_max;
    e.dt = cfg.dt;
    for (int i = 0; i < n; ++i) {
        const std::vector<double> b = ens.pooled_batch_means(i);
        const MeanSE m = mean_se(b);
        e.lambda.push_back(m.mean);
        e.ci.push_back(3.0 * m.se);
    }
    for (std::size_t k = 0; k < idx.size(); ++k) e.mean_x.push_back(ens.occupation_mean(static_cast<int>(k)).mean);
    return ErgodicMeasure{face, std::move(e), Provenance::MonteCarlo};
}


namespace {

InvasionRateTable invasion_rates_from(const std::vector<ErgodicMeasure>& measures,
                                      const std::vector<std::vector<double>>& lam,
                                      const std::vector<std::vector<double>>& cis, const AnalysisConfig& config) {
    const int m = static_cast<int>(measures.size());
    const int n = m ? static_cast<int>(lam.front().size()) : 0;
    InvasionRateTable t;
    t.measures = measures;
    t.lambda.resize(m, n);
    t.ci.resize(m, n);
    t.low_confidence.resize(m, n);
    for (int r = 0; r < m; ++r)
        for (int i = 0; i < n; ++i) {
            t.lambda(r, i) = lam[r][i];
            t.ci(r, i) = cis[r][i];
            t.low_confidence(r, i) = cis[r][i] > config.max_ci;
        }
    return t;
}

ErgodicMeasure interior_measure(const KolmogorovModel& model, Face face, const AnalysisConfig& config) {
    if (config.representation == AnalysisConfig::Representation::MonteCarlo) return monte_carlo_measure(model, face, config);
    if (model.is_lv()) {
        FaceEquilibrium eq = lv_face_equilibrium(model, face);
        if (eq.status != FaceEquilibrium::Status::Ok)
            throw std::runtime_error("face " + face.label() + " passes the invasion test but its LV system is " +
                                     to_string(eq.status));
        return ErgodicMeasure{face, LvMoments{std::move(eq.moments), eq.residual}, Provenance::Analytic};
    }
    if (face.size() == 1) {
        const int s = face.species().front();
        auto d = std::make_shared<const StationaryDensity1D>(stationary_density_1d(model, s, config.density));
        return ErgodicMeasure{face, Density1D{std::move(d)}, Provenance::Quadrature};
    }
    return monte_carlo_measure(model, face, config);
}

}  // namespace

BoundaryAnalysis find_boundary_measures(const KolmogorovModel& model, const AnalysisConfig& config) {
    const int n = model.n();
    BoundaryAnalysis out;
    out.measures.push_back(ErgodicMeasure{Face{}, DiracOrigin{}, Provenance::Analytic});
    std::vector<std::vector<double>> lam, cis;
    {
        std::vector<double> l, c;
        fill_row(model, out.measures.back(), config, l, c);
        lam.push_back(l);
        cis.push_back(c);
    }

    std::vector<std::uint32_t> masks;
    const std::uint32_t full = Face::full(n).mask();
    for (std::uint32_t m = 1; m < full; ++m) masks.push_back(m);
    std::stable_sort(masks.begin(), masks.end(),
                     [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) < std::popcount(b); });

    for (std::uint32_t mask : masks) {
        const Face face(mask);
        FaceRecord rec;
        rec.face = face;
        for (Face u : out.unresolved)
            if (u.strictly_inside(face)) {
                rec.status = FaceRecord::Status::Unresolved;
                rec.reason = "subface " + u.label() + " is unresolved";
                break;
            }
        if (rec.status != FaceRecord::Status::Unresolved) {
            const std::vector<int> cols = face.species();
            std::vector<int> rows;
            for (std::size_t k = 0; k < out.measures.size(); ++k)
                if (out.measures[k].support.strictly_inside(face)) rows.push_back(static_cast<int>(k));
            Eigen::MatrixXd L(rows.size(), cols.size()), C(rows.size(), cols.size());
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < cols.size(); ++c) {
                    // rates on a measure's own support vanish exactly; estimates there are noise
                    const bool own = out.measures[rows[r]].support.contains(cols[c]);
                    L(r, c) = own ? 0.0 : lam[rows[r]][cols[c]];
                    C(r, c) = own ? 0.0 : cis[rows[r]][cols[c]];
                }
            const PersistenceTest test = persistence_test(L, C, config.decision_tol);
            rec.t_star = test.pessimistic.t_star;
            if (test.decision == Decision::No) {
                rec.status = FaceRecord::Status::NoInterior;
                rec.reason = "boundary measure " + out.measures[rows[test.optimistic.argmin]].name() +
                             " is not invadable by the face species";
            } else if (test.decision == Decision::Undetermined) {
                rec.status = FaceRecord::Status::Unresolved;
                rec.reason = "restricted invasion test undetermined (margin " + std::to_string(test.pessimistic.t_star) +
                             "); zero or statistically unresolved invasion rates";
            } else {
                try {
                    ErgodicMeasure mu = interior_measure(model, face, config);
                    std::vector<double> l, c;
                    fill_row(model, mu, config, l, c);
                    out.measures.push_back(std::move(mu));
                    lam.push_back(std::move(l));
                    cis.push_back(std::move(c));
                    rec.status = FaceRecord::Status::Interior;
                    rec.reason = "restricted subsystem is persistent";
                } catch (const std::exception& e) {
                    rec.status = FaceRecord::Status::Unresolved;
                    rec.reason = e.what();
                }
            }
        }
        if (rec.status == FaceRecord::Status::Unresolved) out.unresolved.push_back(face);
        out.faces.push_back(std::move(rec));
    }
    out.table = invasion_rates_from(out.measures, lam, cis, config);
    return out;
}

InvasionRateTable invasion_rates(const KolmogorovModel& model, const std::vector<ErgodicMeasure>& measures,
                                 const AnalysisConfig& config) {
    std::vector<std::vector<double>> lam(measures.size()), cis(measures.size());
    for (std::size_t r = 0; r < measures.size(); ++r) fill_row(model, measures[r], config, lam[r], cis[r]);
    if (measures.empty()) {
        InvasionRateTable t;
        t.lambda.resize(0, model.n());
        t.ci.resize(0, model.n());
        t.low_confidence.resize(0, model.n());
        return t;
    }
    return invasion_rates_from(measures, lam, cis, config);
}

nlohmann::json BoundaryAnalysis::to_json() const {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : measures) ms.push_back(m.to_json());
    nlohmann::json fs = nlohmann::json::array();
    for (const auto& f : faces) {
        nlohmann::json j = {{"face", f.face.label()}, {"status", to_string(f.status)}, {"reason", f.reason}};
        if (std::isfinite(f.t_star)) j["t_star"] = f.t_star;
        fs.push_back(j);
    }
    std::vector<std::string> un;
    for (Face f : unresolved) un.push_back(f.label());
    return {{"measures", ms}, {"faces", fs}, {"unresolved", un}, {"invasion_rates", table.to_json()}};
}

}  // namespace stokolmo
