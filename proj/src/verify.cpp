#include "stokolmo/verify.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stokolmo {

namespace {

nlohmann::json mean_se_json(const MeanSE& m) { return {{"mean", m.mean}, {"se", m.se}, {"count", m.count}}; }

nlohmann::json proportion_json(const Proportion& p) {
    return {{"estimate", p.estimate}, {"lower", p.lower}, {"upper", p.upper}};
}

CheckOutcome outcome(std::string name, double value, double expected, double tol, bool passed, std::string detail = {}) {
    return CheckOutcome{std::move(name), value, expected, tol, passed, std::move(detail)};
}

}  // namespace

double tv_distance(const OccupationHistogram& a, const OccupationHistogram& b) {
    if (a.dimension() != b.dimension() || !(a.grid() == b.grid()))
        throw std::invalid_argument("tv_distance: histograms have different grids");
    const std::vector<double> pa = a.masses(), pb = b.masses();
    std::vector<double> d(pa.size());
    for (std::size_t k = 0; k < pa.size(); ++k) d[k] = std::abs(pa[k] - pb[k]);
    return 0.5 * pairwise_sum(d);
}

nlohmann::json VerifyConfig::to_json() const {
    return {{"simulation", sim.to_json()},
            {"x0", x0},
            {"windows", windows},
            {"tv_threshold", tv_threshold},
            {"moment_rel_tol", moment_rel_tol},
            {"band", band},
            {"max_unassigned", max_unassigned}};
}

nlohmann::json CheckOutcome::to_json() const {
    nlohmann::json j = {{"name", name}, {"value", value}, {"expected", expected}, {"tolerance", tolerance}, {"passed", passed}};
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

nlohmann::json BasinEstimate::to_json() const {
    nlohmann::json basins = nlohmann::json::array();
    const std::size_t assigned = total - unassigned - interior - blowup;
    for (std::size_t k = 0; k < faces.size(); ++k) {
        nlohmann::json b = {{"face", faces[k].label()}, {"count", counts[k]}, {"probability", proportion_json(probability[k])}};
        b["conditional"] = assigned ? static_cast<double>(counts[k]) / static_cast<double>(assigned) : 0.0;
        basins.push_back(b);
    }
    return {{"basins", basins},       {"interior", interior}, {"blowup", blowup},
            {"unassigned", unassigned}, {"total", total},     {"low_confidence", low_confidence}};
}

BasinEstimate classify_paths(const EnsembleResult& ens, const std::vector<Face>& faces, double max_unassigned) {
    BasinEstimate b;
    b.faces = faces;
    b.counts.assign(faces.size(), 0);
    b.total = ens.paths.size();
    const double threshold = ens.config.extinct_log_threshold;
    const Face full = Face::full(ens.n);
    for (const auto& p : ens.paths) {
        int a = -3;
        if (p.events.blowup) {
            a = -2;
        } else {
            std::uint32_t mask = 0;
            for (int i = 0; i < ens.n; ++i)
                if (p.y_end[i] >= threshold) mask |= 1u << i;
            if (Face(mask) == full) {
                a = -1;
            } else {
                for (std::size_t k = 0; k < faces.size(); ++k)
                    if (faces[k] == Face(mask)) a = static_cast<int>(k);
            }
        }
        b.assignment.push_back(a);
        if (a >= 0)
            ++b.counts[a];
        else if (a == -1)
            ++b.interior;
        else if (a == -2)
            ++b.blowup;
        else
            ++b.unassigned;
    }
    for (std::size_t c : b.counts) b.probability.push_back(wilson_interval(c, b.total));
    b.low_confidence = b.total > 0 && static_cast<double>(b.unassigned) > max_unassigned * static_cast<double>(b.total);
    return b;
}

BasinEstimate estimate_basin_probabilities(const KolmogorovModel& model, const std::vector<Face>& m1_faces,
                                           std::span<const double> x0, const SimConfig& cfg, double max_unassigned) {
    for (std::size_t a = 0; a < m1_faces.size(); ++a)
        for (std::size_t b = a + 1; b < m1_faces.size(); ++b)
            if (m1_faces[a] == m1_faces[b]) throw std::invalid_argument("estimate_basin_probabilities: duplicate faces");
    return classify_paths(simulate_ensemble(model, x0, cfg), m1_faces, max_unassigned);
}

nlohmann::json BlowupSignature::to_json() const {
    return {{"weights", weights},   {"slope", mean_se_json(slope)}, {"blowup_fraction", proportion_json(blowup_fraction)},
            {"blowups", blowups}, {"paths", paths},                {"detected", detected}};
}

BlowupSignature detect_blowup_signature(const KolmogorovModel& model, std::span<const double> x0, const SimConfig& cfg) {
    if (model.n() != 2) throw std::invalid_argument("detect_blowup_signature needs a two-species model");
    BlowupSignature sig;
    double b1 = 1.0, b2 = 1.0;
    if (model.is_lv()) {
        b1 = -model.lv()->B(0, 0);
        b2 = -model.lv()->B(1, 1);
        if (!(b1 > 0) || !(b2 > 0)) b1 = b2 = 1.0;
    }
    sig.weights = {b2, b1};
    const EnsembleResult ens = simulate_ensemble(model, x0, cfg);
    std::vector<double> slopes;
    for (const auto& p : ens.paths) {
        if (p.events.blowup) ++sig.blowups;
        // the exploding step overshoots by orders of magnitude, so stop one step short
        const auto& y = p.events.blowup ? p.y_before_end : p.y_end;
        const double t = p.events.blowup ? p.t_end - cfg.dt : p.t_end;
        if (!(t > 0)) continue;
        const double s0 = b2 * p.y_start[0] + b1 * p.y_start[1];
        const double s1 = b2 * y[0] + b1 * y[1];
        slopes.push_back((s1 - s0) / t);
    }
    sig.paths = ens.paths.size();
    sig.slope = mean_se(slopes);
    sig.blowup_fraction = wilson_interval(sig.blowups, sig.paths);
    sig.detected = sig.slope.count > 1 && sig.slope.mean - 3.0 * sig.slope.se > 0;
    return sig;
}

nlohmann::json EnsembleReport::to_json() const {
    nlohmann::json j;
    j["verdict_kind"] = verdict_kind;
    nlohmann::json ly = nlohmann::json::array();
    for (const auto& m : lyapunov) ly.push_back(mean_se_json(m));
    j["lyapunov"] = ly;
    j["paths"] = paths.to_json();
    j["tv_curve"] = tv_curve;
    nlohmann::json oc = nlohmann::json::array();
    for (const auto& m : occupation_means) oc.push_back(mean_se_json(m));
    j["occupation_means"] = oc;
    if (blowup) j["blowup"] = blowup->to_json();
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks) cs.push_back(c.to_json());
    j["checks"] = cs;
    j["status"] = passed ? "PASSED" : "FAILED";
    j["failures"] = failures;
    return j;
}

EnsembleReport verify_verdict(const KolmogorovModel& model, const Classification& classification,
                              const VerifyConfig& cfg) {
    const int n = model.n();
    const Verdict& verdict = classification.verdict;
    EnsembleReport rep;
    rep.verdict_kind = to_string(verdict.kind);
    if (verdict.kind == Verdict::Kind::Inconclusive) {
        rep.passed = false;
        rep.failures.push_back("verdict is Inconclusive; nothing to verify");
        return rep;
    }
    std::vector<double> x0 = cfg.x0.empty() ? std::vector<double>(n, 1.0) : cfg.x0;
    if (static_cast<int>(x0.size()) != n) throw std::invalid_argument("x0 has the wrong dimension");

    if (verdict.kind == Verdict::Kind::BlowUpRisk) {
        if (n == 2) {
            rep.blowup = detect_blowup_signature(model, x0, cfg.sim);
            rep.checks.push_back(outcome("blowup_slope", rep.blowup->slope.mean, 0.0, cfg.band * rep.blowup->slope.se,
                                         rep.blowup->detected, "weighted log-abundance slope must be positive"));
        } else {
            const EnsembleResult ens = simulate_ensemble(model, x0, cfg.sim);
            rep.paths = classify_paths(ens, {}, cfg.max_unassigned);
            rep.checks.push_back(outcome("blowup_fraction",
                                         static_cast<double>(rep.paths.blowup) / static_cast<double>(rep.paths.total), 0.0,
                                         0.0, true, "reported only"));
        }
    } else {
        EnsembleOptions opt;
        if (verdict.kind == Verdict::Kind::Persistent) opt.windows = cfg.windows;
        const EnsembleResult ens = simulate_ensemble(model, x0, cfg.sim, opt);
        for (int i = 0; i < n; ++i) {
            rep.lyapunov.push_back(ens.lyapunov(i));
            rep.occupation_means.push_back(ens.occupation_mean(i));
        }
        const InvasionRateTable* table = classification.table();
        std::vector<Face> faces;
        if (verdict.kind == Verdict::Kind::Extinction && table)
            for (const auto& p : verdict.predictions) faces.push_back(table->measures[p.measure].support);
        rep.paths = classify_paths(ens, faces, cfg.max_unassigned);

        if (verdict.kind == Verdict::Kind::Persistent) {
            for (int i = 0; i < n; ++i) {
                const MeanSE& m = rep.lyapunov[i];
                rep.checks.push_back(outcome("exponent_x" + std::to_string(i + 1), m.mean, 0.0, cfg.band * m.se,
                                             m.mean + cfg.band * m.se >= 0.0, "must not be significantly negative"));
            }
            for (std::size_t k = 0; k + 1 < ens.windows.size(); ++k)
                rep.tv_curve.push_back(tv_distance(ens.windows[k], ens.windows[k + 1]));
            if (!rep.tv_curve.empty())
                rep.checks.push_back(outcome("tv_final", rep.tv_curve.back(), 0.0, cfg.tv_threshold,
                                             rep.tv_curve.back() < cfg.tv_threshold,
                                             "TV distance between the last two occupation windows"));
            rep.checks.push_back(outcome("blowups", static_cast<double>(ens.blowup_count()), 0.0, 0.0,
                                         ens.blowup_count() == 0));
            if (model.is_lv()) {
                const FaceEquilibrium eq = lv_face_equilibrium(model, Face::full(n));
                if (eq.status == FaceEquilibrium::Status::Ok)
                    for (int i = 0; i < n; ++i) {
                        const double tol = cfg.moment_rel_tol * eq.moments[i];
                        const double v = rep.occupation_means[i].mean;
                        rep.checks.push_back(outcome("moment_x" + std::to_string(i + 1), v, eq.moments[i], tol,
                                                     std::abs(v - eq.moments[i]) <= tol));
                    }
            }
        } else {
            const std::size_t off = rep.paths.unassigned + rep.paths.interior + rep.paths.blowup;
            const double frac = rep.paths.total ? static_cast<double>(off) / static_cast<double>(rep.paths.total) : 0.0;
            rep.checks.push_back(outcome("paths_off_attractors", frac, 0.0, cfg.max_unassigned, frac <= cfg.max_unassigned,
                                         "fraction of paths not on an attracting face at the horizon"));
            const double burn = static_cast<double>(cfg.sim.burn_in_steps()) * cfg.sim.dt;
            for (std::size_t k = 0; k < verdict.predictions.size(); ++k) {
                const auto& pred = verdict.predictions[k];
                for (const auto& r : pred.rates) {
                    std::vector<double> v;
                    for (std::size_t id = 0; id < ens.paths.size(); ++id) {
                        if (rep.paths.assignment[id] != static_cast<int>(k)) continue;
                        const auto& p = ens.paths[id];
                        if (p.t_end > burn) v.push_back((p.y_end[r.species] - p.y_burn[r.species]) / (p.t_end - burn));
                    }
                    if (v.size() < 2) continue;
                    const MeanSE m = mean_se(v);
                    const double tol = cfg.band * m.se + r.ci + 1e-9;
                    std::ostringstream name;
                    name << "exponent_x" << r.species + 1 << "_on_" << table->measures[pred.measure].name();
                    rep.checks.push_back(outcome(name.str(), m.mean, r.lambda, tol, std::abs(m.mean - r.lambda) <= tol));
                }
            }
        }
    }
    for (const auto& c : rep.checks)
        if (!c.passed) {
            rep.passed = false;
            std::ostringstream os;
            os.precision(6);
            os << c.name << " = " << c.value << " (expected " << c.expected << " +- " << c.tolerance << ")";
            rep.failures.push_back(os.str());
        }
    return rep;
}

}  // namespace stokolmo
